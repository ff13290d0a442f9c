#include "ebfdr/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ebfdr/errors.hpp"
#include "ebfdr/kernels.hpp"

namespace ebfdr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log sum exp over terms[idx] for idx in a subset selected by `take`.
template <class Take>
double log_sum_exp(std::span<const double> terms, Take take) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < terms.size(); ++t) {
        if (take(t)) hi = std::max(hi, terms[t]);
    }
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        if (take(t)) s += std::exp(terms[t] - hi);
    }
    return hi + std::log(s);
}

WindowMasses masses_from_terms(std::span<const double> terms, std::size_t center_bit) {
    const std::size_t mask = std::size_t{1} << center_bit;
    return {log_sum_exp(terms, [mask](std::size_t t) { return (t & mask) == 0; }),
            log_sum_exp(terms, [mask](std::size_t t) { return (t & mask) != 0; })};
}

}  // namespace

Window window_of(std::size_t i, std::size_t m, std::size_t k) {
    if (i >= m) throw std::invalid_argument("window_of: index out of range");
    Window w;
    w.center = i;
    w.first = i > k ? i - k : 0;
    w.last = std::min(m - 1, i + k);
    return w;
}

ConfigTable::ConfigTable(const ModelParams& params, std::size_t d) : d_(d) {
    params.validate();
    if (d == 0 || d > max_dim) {
        throw std::invalid_argument("config table: dimension must lie in [1, " +
                                    std::to_string(max_dim) + "]");
    }
    const std::size_t n = size();
    const DenseMatrix base = build_toeplitz(params.gamma, d);
    factors_.reserve(n);
    means_.assign(n * d, 0.0);
    log_dets_.resize(n);
    log_weights_.resize(n);
    log_constants_.resize(n);

    const double log_w0 = std::log(params.w0);
    const double log_w1 = std::log1p(-params.w0);
    DenseMatrix shared;
    if (params.tau2 == 0.0) shared = cholesky(base);

    for (std::size_t t = 0; t < n; ++t) {
        std::size_t s = 0;
        for (std::size_t j = 0; j < d; ++j) {
            if (t >> j & 1U) {
                ++s;
                means_[t * d + j] = params.eta;
            }
        }
        if (params.tau2 == 0.0) {
            factors_.push_back(shared);
        } else {
            DenseMatrix cov = base;
            for (std::size_t j = 0; j < d; ++j) {
                if (t >> j & 1U) cov(j, j) += params.tau2;
            }
            try {
                factors_.push_back(cholesky(cov));
            } catch (const NumericalError& e) {
                throw NumericalError("config table: configuration " + std::to_string(t) +
                                     " of dimension " + std::to_string(d) + ": " + e.what());
            }
        }
        log_dets_[t] = cholesky_log_det(factors_.back());
        const auto sd = static_cast<double>(s);
        log_weights_[t] = (static_cast<double>(d) - sd) * log_w0 + sd * log_w1;
        log_constants_[t] = log_weights_[t] - 0.5 * log_dets_[t] - 0.5 * static_cast<double>(d) * kLog2Pi;
    }
}

double log_mvn(std::span<const double> v, std::span<const double> mean, const DenseMatrix& lower) {
    if (v.size() != mean.size() || v.size() != lower.n) {
        throw std::invalid_argument("log_mvn: dimension mismatch");
    }
    double q = 0.0;
    kernels::window_quad_forms({lower.data, mean, lower.n, v, 0, 1}, std::span<double>(&q, 1));
    return -0.5 * q - 0.5 * cholesky_log_det(lower) - 0.5 * static_cast<double>(v.size()) * kLog2Pi;
}

double WindowMasses::null_probability() const noexcept {
    if (log_null == -std::numeric_limits<double>::infinity()) return 0.0;
    return 1.0 / (1.0 + std::exp(log_alt - log_null));
}

double WindowMasses::alt_probability() const noexcept {
    if (log_alt == -std::numeric_limits<double>::infinity()) return 0.0;
    return 1.0 / (1.0 + std::exp(log_null - log_alt));
}

WindowMasses window_masses(std::span<const double> x, const Window& w, const ConfigTable& table) {
    if (w.dim() != table.dim() || w.last >= x.size()) {
        throw std::invalid_argument("window_masses: window and table disagree");
    }
    std::vector<double> terms(table.size());
    for (std::size_t t = 0; t < table.size(); ++t) {
        double q = 0.0;
        kernels::window_quad_forms({table.factor(t).data, table.mean(t), table.dim(), x, w.first, 1},
                                   std::span<double>(&q, 1));
        terms[t] = table.log_constant(t) - 0.5 * q;
    }
    return masses_from_terms(terms, w.offset());
}

double posterior_one(std::span<const double> x, std::size_t i, const ModelParams& params,
                     std::size_t k) {
    const Window w = window_of(i, x.size(), k);
    const ConfigTable table(params, w.dim());
    return window_masses(x, w, table).null_probability();
}

std::vector<std::size_t> ascending_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    return order;
}

PosteriorScores posterior_scores(std::span<const double> x, const ModelParams& params,
                                 std::size_t k) {
    const std::size_t m = x.size();
    if (m == 0) throw std::invalid_argument("posterior_scores: empty series");
    PosteriorScores out;
    out.pi.resize(m);

    std::map<std::size_t, ConfigTable> tables;
    auto table_for = [&](std::size_t d) -> const ConfigTable& {
        auto it = tables.find(d);
        if (it == tables.end()) it = tables.emplace(d, ConfigTable(params, d)).first;
        return it->second;
    };

    // Interior windows share one table; their quadratic forms are batched
    // per configuration over all interior positions.
    const std::size_t full = 2 * k + 1;
    std::size_t interior_begin = m;
    std::size_t interior_end = m;
    if (m >= full) {
        interior_begin = k;
        interior_end = m - k;
        const ConfigTable& table = table_for(full);
        const std::size_t count = interior_end - interior_begin;
        const std::size_t n_cfg = table.size();
        std::vector<double> quad(n_cfg * count);
        for (std::size_t t = 0; t < n_cfg; ++t) {
            kernels::window_quad_forms({table.factor(t).data, table.mean(t), full, x, 0, count},
                                       std::span<double>(quad.data() + t * count, count));
        }
        std::vector<double> terms(n_cfg);
        for (std::size_t w = 0; w < count; ++w) {
            for (std::size_t t = 0; t < n_cfg; ++t) {
                terms[t] = table.log_constant(t) - 0.5 * quad[t * count + w];
            }
            out.pi[interior_begin + w] = masses_from_terms(terms, k).null_probability();
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (i >= interior_begin && i < interior_end) continue;
        const Window w = window_of(i, m, k);
        out.pi[i] = window_masses(x, w, table_for(w.dim())).null_probability();
    }
    out.order = ascending_order(out.pi);
    return out;
}

std::vector<double> exact_posterior(std::span<const double> x, const ModelParams& params) {
    const std::size_t m = x.size();
    if (m == 0 || m > 15) {
        throw std::invalid_argument("exact_posterior: refuses m outside [1, 15] (2^m enumeration)");
    }
    params.validate();
    const std::size_t n = std::size_t{1} << m;
    const DenseMatrix base = build_toeplitz(params.gamma, m);
    const DenseMatrix shared = cholesky(base);
    const double log_w0 = std::log(params.w0);
    const double log_w1 = std::log1p(-params.w0);

    std::vector<double> lp(n);
    std::vector<double> mean(m);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t s = 0;
        DenseMatrix cov = base;
        for (std::size_t j = 0; j < m; ++j) {
            const bool on = (t >> j & 1U) != 0;
            mean[j] = on ? params.eta : 0.0;
            if (on) {
                ++s;
                cov(j, j) += params.tau2;
            }
        }
        const DenseMatrix lower = params.tau2 == 0.0 ? shared : cholesky(cov);
        const auto sd = static_cast<double>(s);
        lp[t] = log_mvn(x, mean, lower) + (static_cast<double>(m) - sd) * log_w0 + sd * log_w1;
    }
    std::vector<double> pi(m);
    for (std::size_t i = 0; i < m; ++i) pi[i] = masses_from_terms(lp, i).null_probability();
    return pi;
}

}  // namespace ebfdr
