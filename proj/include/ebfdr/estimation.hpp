#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebfdr/model.hpp"
#include "ebfdr/rng.hpp"

namespace ebfdr {

/// How the distant-pair sum is normalized. `literal` divides by
/// (1 - rho)^2 m^2 / 2; `exact_count` divides by the number of pairs summed.
enum class PairNormalization { literal, exact_count };

struct EstimationOptions {
    double rho = 0.1;
    double kappa = 0.5;
    std::size_t bootstrap_B = 100;
    std::size_t k = 2;
    double w_lo = 0.01;
    double w_hi = 0.99;
    std::size_t quadrature_nodes = 64;
    PairNormalization pair_normalization = PairNormalization::literal;

    void validate() const;
};

enum class W0Method { true_value, fourier, bootstrap };

[[nodiscard]] std::string_view w0_method_name(W0Method method) noexcept;

struct W0Estimate {
    double value = 0.0;  ///< raw clipped to [w_lo, w_hi]
    double raw = 0.0;
    W0Method method = W0Method::fourier;
};

/// Where the fit takes w0 from.
struct W0Source {
    W0Method method = W0Method::fourier;
    double value = 0.0;  ///< only for true_value

    static W0Source true_value(double w0) { return {W0Method::true_value, w0}; }
    static W0Source fourier() { return {W0Method::fourier, 0.0}; }
    static W0Source bootstrap() { return {W0Method::bootstrap, 0.0}; }
};

// -- moment estimators -------------------------------------------------------

/// Sum of x_i x_j over pairs i < j with j - i > rho m, normalized per
/// `norm`. Estimates (E X_1)^2. Throws if no pair qualifies.
[[nodiscard]] double distant_pair_mean(std::span<const double> x, double rho,
                                       PairNormalization norm = PairNormalization::literal);

/// mean(x) / (1 - w0).
[[nodiscard]] double estimate_eta(std::span<const double> x, double w0);

struct Tau2Estimate {
    double value = 0.0;  ///< max(raw, 0)
    double raw = 0.0;
};

[[nodiscard]] Tau2Estimate estimate_tau2(std::span<const double> x, double w0, double rho,
                                         PairNormalization norm = PairNormalization::literal);

/// Lag-j autocovariance corrected for the squared signal mean. Requires
/// 1 <= j < m (1 - rho).
[[nodiscard]] double estimate_acov(std::span<const double> x, std::size_t j, double rho,
                                   PairNormalization norm = PairNormalization::literal);

// -- Fourier estimator of w0 -------------------------------------------------

/// Bandwidth (kappa log m)^{-1/2}.
[[nodiscard]] double fourier_bandwidth(std::size_t m, double kappa);

/// psi(z; h) = int_0^1 exp(s^2 / (2 h^2)) cos(z s / h) ds, the kernel
/// obtained from a uniform psi0 on [-1, 1]. Evaluated by Gauss-Legendre
/// quadrature; the rule is built once per (h, nodes).
class PsiKernel {
public:
    PsiKernel(double h, std::size_t nodes);

    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] double operator()(double z) const;
    /// psi at every x[i].
    void evaluate(std::span<const double> x, std::span<double> out) const;
    /// mean of psi(x[i]).
    [[nodiscard]] double mean(std::span<const double> x) const;

private:
    double h_;
    std::vector<double> freq_;
    std::vector<double> coef_;
};

[[nodiscard]] double psi(double z, double h, std::size_t nodes = 64);

[[nodiscard]] W0Estimate estimate_w0_fourier(std::span<const double> x,
                                             const EstimationOptions& opts);

/// Fills `out` (length m) with bootstrap replicate b.
using ReplicateSource = std::function<void(std::size_t b, std::span<double> out)>;

/// 2 * raw_F(x) - mean_b raw_F(replicate b), clamped. Replicates come from
/// the mixture model at `xi_hat` with noise truncated at xi_hat.gamma's last
/// lag. Replicate b uses rng.split(b).
[[nodiscard]] W0Estimate estimate_w0_bootstrap(std::span<const double> x,
                                               const ModelParams& xi_hat,
                                               const EstimationOptions& opts,
                                               const RngStream& rng);

/// Same with caller-supplied replicates.
[[nodiscard]] W0Estimate estimate_w0_bootstrap(std::span<const double> x,
                                               const EstimationOptions& opts,
                                               const ReplicateSource& replicates);

// -- positive-definiteness repair ---------------------------------------------

struct RepairedAutocov {
    AutocovSeq gamma;
    double factor = 1.0;  ///< 1 when no repair was needed
};

/// Scales gamma(1..) by the largest of 1, 0.95, ..., 0.05, 0 for which the
/// n x n banded Toeplitz matrix factors.
[[nodiscard]] RepairedAutocov repair_autocov(std::span<const double> values, std::size_t n);

// -- full pipeline -------------------------------------------------------------

struct FitDiagnostics {
    W0Estimate w0;
    std::optional<W0Estimate> w0_fourier;  ///< set on the bootstrap path
    double tau2_raw = 0.0;
    double gamma_repair_factor = 1.0;
    std::vector<double> gamma_raw;  ///< gamma-hat before repair, lag 0 first
    std::vector<std::string> notes;
};

struct FitResult {
    ModelParams params;
    FitDiagnostics diagnostics;
};

/// Estimates xi from x. On the bootstrap path: Fourier w0, moments, bootstrap
/// w0 from those moments, then moments again at the bootstrap w0.
[[nodiscard]] FitResult fit(std::span<const double> x, W0Source source,
                            const EstimationOptions& opts, const RngStream& rng);

}  // namespace ebfdr
