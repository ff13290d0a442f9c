#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "ebfdr/linalg.hpp"
#include "ebfdr/rng.hpp"

namespace ebfdr {

/// Autocovariance sequence gamma(0), ..., gamma(L) of the stationary noise,
/// normalized so gamma(0) = 1. Lags past L are zero.
class AutocovSeq {
public:
    /// White noise.
    AutocovSeq() : values_{1.0} {}

    /// Validates gamma(0) == 1 and |gamma(j)| <= 1. When `check_m` is
    /// nonzero, also checks that the check_m x check_m Toeplitz matrix
    /// factors (throws NumericalError otherwise).
    explicit AutocovSeq(std::vector<double> values, std::size_t check_m = 0);

    [[nodiscard]] double operator()(std::size_t lag) const noexcept {
        return lag < values_.size() ? values_[lag] : 0.0;
    }
    [[nodiscard]] std::size_t max_lag() const noexcept { return values_.size() - 1; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Keeps lags 0..k.
    [[nodiscard]] AutocovSeq truncated(std::size_t k) const;

    friend bool operator==(const AutocovSeq&, const AutocovSeq&) = default;

private:
    std::vector<double> values_;
};

/// Nuisance vector driving posteriors and the parametric bootstrap.
struct ModelParams {
    double eta = 0.0;
    double tau2 = 0.0;
    double w0 = 0.5;
    AutocovSeq gamma;

    /// Throws std::invalid_argument unless 0 < w0 < 1, tau2 >= 0 and all
    /// entries finite.
    void validate() const;
};

/// theta[i] = 1 means hypothesis i is false; mu[i] is its signal mean.
struct GroundTruth {
    std::vector<std::uint8_t> theta;
    std::vector<double> mu;

    [[nodiscard]] std::size_t size() const noexcept { return theta.size(); }
    [[nodiscard]] std::size_t signal_count() const noexcept;
    void validate() const;
};

struct MixtureSignal {
    double w0 = 0.9;
    double eta = 2.0;
    double tau2 = 0.0;
};

struct FixedSignal {
    std::size_t count = 100;
    double value = 2.0;
    /// 0-based. Empty means a fresh uniformly random subset per draw.
    std::vector<std::size_t> indices;
};

using SignalMode = std::variant<MixtureSignal, FixedSignal>;

struct SimDesign {
    std::size_t m = 1000;
    SignalMode signal = FixedSignal{};
    AutocovSeq gamma;
    double alpha = 0.1;
    std::uint64_t seed = 20070101;

    void validate() const;

    /// m = 1000, 100 signals of height 2, gamma = (1, .6, .4, .2, .1),
    /// alpha = 0.1.
    [[nodiscard]] static SimDesign reference();

    /// Parameters of the nominal mixture model matching the generating law.
    /// For a fixed-count design w0 = 1 - count / m and tau2 = 0.
    [[nodiscard]] ModelParams true_params() const;
};

/// Draws stationary Gaussian noise with a fixed covariance. The factor is
/// computed once and the object is safe to share read-only across threads.
class StationaryNoise {
public:
    StationaryNoise(const AutocovSeq& gamma, std::size_t m);

    [[nodiscard]] std::size_t size() const noexcept { return factor_.size(); }
    [[nodiscard]] const BandCholesky& factor() const noexcept { return factor_; }

    /// epsilon = L z for a caller-supplied standard normal vector z.
    [[nodiscard]] std::vector<double> apply(std::span<const double> z) const;
    [[nodiscard]] std::vector<double> draw(RngStream& rng) const;
    void draw_into(RngStream& rng, std::span<double> z_scratch, std::span<double> out) const;

private:
    BandCholesky factor_;
};

[[nodiscard]] std::vector<double> simulate_noise(const AutocovSeq& gamma, std::size_t m,
                                                 RngStream& rng);

[[nodiscard]] GroundTruth draw_mixture_truth(double w0, double eta, double tau2, std::size_t m,
                                             RngStream& rng);

/// Exactly `count` signals of height `value`. With `indices` set, those
/// (0-based) positions are used; otherwise a uniformly random subset.
[[nodiscard]] GroundTruth fixed_truth(std::size_t m, std::size_t count, double value,
                                      RngStream& rng,
                                      std::optional<std::span<const std::size_t>> indices = {});

/// Draws the truth for `design` (mixture or fixed).
[[nodiscard]] GroundTruth draw_truth(const SimDesign& design, RngStream& rng);

/// x = mu + noise. Truth is drawn first, then the noise, from the same stream.
[[nodiscard]] std::pair<std::vector<double>, GroundTruth> simulate_series(const SimDesign& design,
                                                                          RngStream& rng);

/// Same as above with a prebuilt noise generator for design.gamma at size m.
[[nodiscard]] std::pair<std::vector<double>, GroundTruth> simulate_series(
    const SimDesign& design, const StationaryNoise& noise, RngStream& rng);

}  // namespace ebfdr
