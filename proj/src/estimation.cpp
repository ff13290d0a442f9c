#include "ebfdr/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ebfdr/errors.hpp"
#include "ebfdr/kernels.hpp"
#include "ebfdr/quadrature.hpp"

namespace ebfdr {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_w0(double w0) { require(w0 > 0.0 && w0 < 1.0, "w0 must lie in (0, 1)"); }

void check_series(std::span<const double> x) {
    require(!x.empty(), "series is empty");
    for (double v : x) require(std::isfinite(v), "series has a non-finite entry");
}

// Smallest gap g with g > rho * m. rho * m is snapped to an integer when it
// is within rounding of one, so 0.1 * 1000 means 100 and not 100.00000000001.
std::size_t min_gap(double rho, std::size_t m) {
    double t = rho * static_cast<double>(m);
    const double nearest = std::nearbyint(t);
    if (std::abs(t - nearest) <= 1e-9 * std::max(1.0, t)) t = nearest;
    return static_cast<std::size_t>(std::floor(t)) + 1;
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void EstimationOptions::validate() const {
    require(rho > 0.0 && rho < 1.0, "estimation: rho must lie in (0, 1)");
    require(kappa > 0.0 && kappa <= 1.0, "estimation: kappa must lie in (0, 1]");
    require(bootstrap_B >= 1, "estimation: bootstrap_B must be >= 1");
    require(w_lo > 0.0 && w_hi < 1.0 && w_lo < w_hi,
            "estimation: w0 clamp must satisfy 0 < w_lo < w_hi < 1");
    require(quadrature_nodes >= 1, "estimation: quadrature_nodes must be >= 1");
}

std::string_view w0_method_name(W0Method method) noexcept {
    switch (method) {
        case W0Method::true_value: return "true-value";
        case W0Method::fourier: return "fourier";
        case W0Method::bootstrap: return "bootstrap";
    }
    return "unknown";
}

double distant_pair_mean(std::span<const double> x, double rho, PairNormalization norm) {
    require(rho > 0.0 && rho < 1.0, "distant_pair_mean: rho must lie in (0, 1)");
    const std::size_t m = x.size();
    const std::size_t gap = min_gap(rho, m);
    if (m < 2 || gap > m - 1) {
        throw std::invalid_argument("distant_pair_mean: no pair (i, j) with j - i > rho m");
    }
    // sum_i x_i * (x_{i+gap} + ... + x_{m-1}), suffix sums built right to left.
    double suffix = 0.0;
    double total = 0.0;
    for (std::size_t j = m; j-- > gap;) {
        suffix += x[j];
        total += x[j - gap] * suffix;
    }
    const auto md = static_cast<double>(m);
    if (norm == PairNormalization::exact_count) {
        const auto span = static_cast<double>(m - gap);
        return total / (span * (span + 1.0) / 2.0);
    }
    return total / ((1.0 - rho) * (1.0 - rho) * md * md / 2.0);
}

double estimate_eta(std::span<const double> x, double w0) {
    check_w0(w0);
    require(!x.empty(), "estimate_eta: empty series");
    return kernels::sum(x) / static_cast<double>(x.size()) / (1.0 - w0);
}

Tau2Estimate estimate_tau2(std::span<const double> x, double w0, double rho,
                           PairNormalization norm) {
    check_w0(w0);
    require(!x.empty(), "estimate_tau2: empty series");
    const auto md = static_cast<double>(x.size());
    const double second = (kernels::dot(x, x) - md) / md / (1.0 - w0);
    const double pair = distant_pair_mean(x, rho, norm) / ((1.0 - w0) * (1.0 - w0));
    Tau2Estimate t;
    t.raw = second - pair;
    t.value = std::max(t.raw, 0.0);
    return t;
}

double estimate_acov(std::span<const double> x, std::size_t j, double rho,
                     PairNormalization norm) {
    const std::size_t m = x.size();
    require(j >= 1 && static_cast<double>(j) < static_cast<double>(m) * (1.0 - rho),
            "estimate_acov: lag must satisfy 1 <= j < m (1 - rho)");
    const double lagged = kernels::dot(x.first(m - j), x.subspan(j)) / static_cast<double>(m - j);
    return lagged - distant_pair_mean(x, rho, norm);
}

double fourier_bandwidth(std::size_t m, double kappa) {
    require(m >= 2, "fourier bandwidth: m must be >= 2");
    return 1.0 / std::sqrt(kappa * std::log(static_cast<double>(m)));
}

PsiKernel::PsiKernel(double h, std::size_t nodes) : h_(h) {
    require(h > 0.0 && std::isfinite(h), "psi: bandwidth must be positive");
    const QuadratureRule rule = gauss_legendre(nodes, 0.0, 1.0);
    freq_.resize(nodes);
    coef_.resize(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        const double s = rule.nodes[n];
        freq_[n] = s / h;
        coef_[n] = rule.weights[n] * std::exp(s * s / (2.0 * h * h));
    }
}

double PsiKernel::operator()(double z) const {
    double out = 0.0;
    kernels::cosine_series(std::span<const double>(&z, 1), freq_, coef_, std::span<double>(&out, 1));
    return out;
}

void PsiKernel::evaluate(std::span<const double> x, std::span<double> out) const {
    kernels::cosine_series(x, freq_, coef_, out);
}

double PsiKernel::mean(std::span<const double> x) const {
    std::vector<double> values(x.size());
    evaluate(x, values);
    return kernels::sum(values) / static_cast<double>(x.size());
}

double psi(double z, double h, std::size_t nodes) { return PsiKernel(h, nodes)(z); }

W0Estimate estimate_w0_fourier(std::span<const double> x, const EstimationOptions& opts) {
    opts.validate();
    require(x.size() >= 2, "fourier w0: need m >= 2");
    const PsiKernel kernel(fourier_bandwidth(x.size(), opts.kappa), opts.quadrature_nodes);
    W0Estimate e;
    e.method = W0Method::fourier;
    e.raw = kernel.mean(x);
    e.value = std::clamp(e.raw, opts.w_lo, opts.w_hi);
    return e;
}

W0Estimate estimate_w0_bootstrap(std::span<const double> x, const EstimationOptions& opts,
                                 const ReplicateSource& replicates) {
    opts.validate();
    require(x.size() >= 2, "bootstrap w0: need m >= 2");
    const PsiKernel kernel(fourier_bandwidth(x.size(), opts.kappa), opts.quadrature_nodes);
    const double observed = kernel.mean(x);
    std::vector<double> replicate(x.size());
    double acc = 0.0;
    for (std::size_t b = 0; b < opts.bootstrap_B; ++b) {
        replicates(b, replicate);
        acc += kernel.mean(replicate);
    }
    W0Estimate e;
    e.method = W0Method::bootstrap;
    e.raw = 2.0 * observed - acc / static_cast<double>(opts.bootstrap_B);
    e.value = std::clamp(e.raw, opts.w_lo, opts.w_hi);
    return e;
}

W0Estimate estimate_w0_bootstrap(std::span<const double> x, const ModelParams& xi_hat,
                                 const EstimationOptions& opts, const RngStream& rng) {
    xi_hat.validate();
    const std::size_t m = x.size();
    const StationaryNoise noise(xi_hat.gamma, m);
    std::vector<double> z(m);
    const double tau = std::sqrt(xi_hat.tau2);
    auto draw = [&](std::size_t b, std::span<double> out) {
        RngStream stream = rng.split(b);
        noise.draw_into(stream, z, out);
        for (std::size_t i = 0; i < m; ++i) {
            if (stream.bernoulli(1.0 - xi_hat.w0)) out[i] += xi_hat.eta + tau * stream.normal();
        }
    };
    return estimate_w0_bootstrap(x, opts, draw);
}

RepairedAutocov repair_autocov(std::span<const double> values, std::size_t n) {
    require(!values.empty() && values[0] == 1.0, "repair: gamma(0) must equal 1");
    for (int step = 20; step >= 0; --step) {
        const double c = step / 20.0;
        std::vector<double> scaled(values.begin(), values.end());
        for (std::size_t j = 1; j < scaled.size(); ++j) scaled[j] *= c;
        bool bounded = true;
        for (double v : scaled) bounded = bounded && std::isfinite(v) && std::abs(v) <= 1.0;
        if (!bounded) continue;
        AutocovSeq candidate(std::move(scaled));
        if (toeplitz_is_positive_definite(candidate, n)) return {std::move(candidate), c};
    }
    throw NumericalError("repair: white noise failed to factor");  // unreachable
}

FitResult fit(std::span<const double> x, W0Source source, const EstimationOptions& opts,
              const RngStream& rng) {
    check_series(x);
    opts.validate();
    const std::size_t m = x.size();
    require(m >= 2, "fit: need m >= 2");
    require(static_cast<double>(opts.k) < static_cast<double>(m) * (1.0 - opts.rho),
            "fit: window lag k must satisfy k < m (1 - rho)");

    FitResult result;
    FitDiagnostics& diag = result.diagnostics;
    const std::size_t pd_size = std::max(m, 2 * opts.k + 1);

    auto moments = [&](double w0) {
        ModelParams p;
        p.w0 = w0;
        p.eta = estimate_eta(x, w0);
        const Tau2Estimate t = estimate_tau2(x, w0, opts.rho, opts.pair_normalization);
        p.tau2 = t.value;
        diag.tau2_raw = t.raw;
        diag.gamma_raw.assign(1, 1.0);
        for (std::size_t j = 1; j <= opts.k; ++j) {
            diag.gamma_raw.push_back(estimate_acov(x, j, opts.rho, opts.pair_normalization));
        }
        RepairedAutocov repaired = repair_autocov(diag.gamma_raw, pd_size);
        diag.gamma_repair_factor = repaired.factor;
        p.gamma = std::move(repaired.gamma);
        return p;
    };

    switch (source.method) {
        case W0Method::true_value:
            check_w0(source.value);
            diag.w0 = {source.value, source.value, W0Method::true_value};
            break;
        case W0Method::fourier:
            diag.w0 = estimate_w0_fourier(x, opts);
            break;
        case W0Method::bootstrap: {
            const W0Estimate f = estimate_w0_fourier(x, opts);
            diag.w0_fourier = f;
            const ModelParams pilot = moments(f.value);
            if (diag.gamma_repair_factor != 1.0) {
                diag.notes.push_back("pilot gamma scaled by " + format_number(diag.gamma_repair_factor));
            }
            diag.w0 = estimate_w0_bootstrap(x, pilot, opts, rng);
            break;
        }
    }

    result.params = moments(diag.w0.value);
    if (diag.w0.value != diag.w0.raw) {
        diag.notes.push_back("w0 clamped from " + format_number(diag.w0.raw));
    }
    if (diag.tau2_raw < 0.0) {
        diag.notes.push_back("tau2 clamped at 0 from " + format_number(diag.tau2_raw));
    }
    if (diag.gamma_repair_factor != 1.0) {
        diag.notes.push_back("gamma scaled by " + format_number(diag.gamma_repair_factor) +
                             " for positive definiteness");
    }
    return result;
}

}  // namespace ebfdr
