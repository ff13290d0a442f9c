#include "ebfdr/procedures.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ebfdr {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

}  // namespace

Decision cutoff_running_mean(const PosteriorScores& scores, double alpha) {
    check_alpha(alpha);
    // Prefix means of an ascending sequence are nondecreasing, so the last
    // prefix meeting the bound is the maximum.
    double running = 0.0;
    std::size_t k_hat = 0;
    for (std::size_t k = 1; k <= scores.order.size(); ++k) {
        running += scores.pi[scores.order[k - 1]];
        if (running <= alpha * static_cast<double>(k)) k_hat = k;
    }
    Decision d;
    d.alpha = alpha;
    d.k_hat = k_hat;
    d.rejected.assign(scores.order.begin(), scores.order.begin() + static_cast<std::ptrdiff_t>(k_hat));
    d.scores_used = "posterior null probabilities, ascending";
    return d;
}

Decision approximate_bayes(std::span<const double> x, const ModelParams& true_params,
                           std::size_t k, double alpha) {
    Decision d = cutoff_running_mean(posterior_scores(x, true_params, k), alpha);
    d.scores_used = "windowed posteriors at true parameters, k=" + std::to_string(k);
    return d;
}

EmpiricalBayesResult empirical_bayes(std::span<const double> x, double alpha, std::size_t k,
                                     W0Source source, EstimationOptions opts,
                                     const RngStream& rng) {
    check_alpha(alpha);
    opts.k = k;
    EmpiricalBayesResult r;
    r.fit = fit(x, source, opts, rng);
    r.scores = posterior_scores(x, r.fit.params, k);
    r.decision = cutoff_running_mean(r.scores, alpha);
    r.decision.scores_used = "windowed posteriors at fitted parameters (w0 " +
                             std::string(w0_method_name(source.method)) +
                             "), k=" + std::to_string(k);
    return r;
}

std::vector<double> normal_p_values(std::span<const double> x) {
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = std::erfc(std::abs(x[i]) / std::numbers::sqrt2);
    }
    return p;
}

Decision bh_adaptive(std::span<const double> p, double alpha, double w0) {
    check_alpha(alpha);
    if (!(w0 > 0.0 && w0 <= 1.0)) throw std::invalid_argument("bh: w0 must lie in (0, 1]");
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("bh: p-values must lie in [0, 1]");
    }
    const std::vector<std::size_t> order = ascending_order(p);
    const double denom = static_cast<double>(p.size()) * w0;
    std::size_t i_star = 0;
    for (std::size_t i = 1; i <= order.size(); ++i) {
        if (p[order[i - 1]] <= static_cast<double>(i) * alpha / denom) i_star = i;
    }
    Decision d;
    d.alpha = alpha;
    d.k_hat = i_star;
    d.rejected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i_star));
    d.scores_used = "two-sided normal p-values, step-up slope alpha/(m w0)";
    return d;
}

std::size_t oracle_best_subset(std::span<const double> scores, double alpha) {
    const std::size_t m = scores.size();
    if (m > 20) throw std::invalid_argument("oracle_best_subset: refuses m > 20");
    std::size_t best = 0;
    for (std::size_t s = 1; s < (std::size_t{1} << m); ++s) {
        double total = 0.0;
        std::size_t size = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (s >> i & 1U) {
                total += scores[i];
                ++size;
            }
        }
        if (size > best && total <= alpha * static_cast<double>(size)) best = size;
    }
    return best;
}

}  // namespace ebfdr
