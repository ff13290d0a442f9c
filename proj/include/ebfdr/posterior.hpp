#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ebfdr/linalg.hpp"
#include "ebfdr/model.hpp"

namespace ebfdr {

/// Positions j with |j - center| <= k, clipped to [0, m). 0-based.
struct Window {
    std::size_t first = 0;
    std::size_t last = 0;  ///< inclusive
    std::size_t center = 0;

    [[nodiscard]] std::size_t dim() const noexcept { return last - first + 1; }
    [[nodiscard]] std::size_t offset() const noexcept { return center - first; }
};

[[nodiscard]] Window window_of(std::size_t i, std::size_t m, std::size_t k);

/// Per-configuration quantities for windows of dimension d under `params`.
///
/// Configuration t in {0,1}^d is encoded as a bitmask, bit j set meaning the
/// j-th window position carries a signal. Its covariance is
/// Gamma_d + tau2 diag(t) and its mean eta t.
class ConfigTable {
public:
    static constexpr std::size_t max_dim = 20;

    ConfigTable(const ModelParams& params, std::size_t d);

    [[nodiscard]] std::size_t dim() const noexcept { return d_; }
    [[nodiscard]] std::size_t size() const noexcept { return std::size_t{1} << d_; }

    [[nodiscard]] const DenseMatrix& factor(std::size_t t) const { return factors_[t]; }
    [[nodiscard]] std::span<const double> mean(std::size_t t) const {
        return {means_.data() + t * d_, d_};
    }
    [[nodiscard]] double log_det(std::size_t t) const { return log_dets_[t]; }
    /// (d - s) log w0 + s log(1 - w0), s = popcount(t).
    [[nodiscard]] double log_weight(std::size_t t) const { return log_weights_[t]; }
    /// log_weight - log_det / 2 - d log(2 pi) / 2: everything in the log
    /// density plus prior except the quadratic form.
    [[nodiscard]] double log_constant(std::size_t t) const { return log_constants_[t]; }

private:
    std::size_t d_;
    std::vector<DenseMatrix> factors_;
    std::vector<double> means_;
    std::vector<double> log_dets_;
    std::vector<double> log_weights_;
    std::vector<double> log_constants_;
};

/// Log density of N(mean, L L^T) at v, via a triangular solve.
[[nodiscard]] double log_mvn(std::span<const double> v, std::span<const double> mean,
                             const DenseMatrix& lower);

/// Log of the prior-weighted likelihood mass of the window's configurations
/// with the center null (log_null) and with the center non-null (log_alt).
struct WindowMasses {
    double log_null = 0.0;
    double log_alt = 0.0;

    [[nodiscard]] double null_probability() const noexcept;
    [[nodiscard]] double alt_probability() const noexcept;
};

[[nodiscard]] WindowMasses window_masses(std::span<const double> x, const Window& w,
                                         const ConfigTable& table);

/// P(theta_i = 0 | x_j, |j - i| <= k; params).
[[nodiscard]] double posterior_one(std::span<const double> x, std::size_t i,
                                   const ModelParams& params, std::size_t k);

struct PosteriorScores {
    std::vector<double> pi;
    /// Indices sorted by ascending pi, ties by ascending index.
    std::vector<std::size_t> order;
};

/// Orders arbitrary scores (ascending, ties by index).
[[nodiscard]] std::vector<std::size_t> ascending_order(std::span<const double> scores);

[[nodiscard]] PosteriorScores posterior_scores(std::span<const double> x,
                                               const ModelParams& params, std::size_t k);

/// Exact P(theta_i = 0 | x) by enumerating all 2^m configurations with the
/// full m x m covariance. Test oracle; refuses m > 15.
[[nodiscard]] std::vector<double> exact_posterior(std::span<const double> x,
                                                  const ModelParams& params);

}  // namespace ebfdr
