#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ebfdr/estimation.hpp"
#include "ebfdr/model.hpp"
#include "ebfdr/posterior.hpp"
#include "ebfdr/rng.hpp"

namespace ebfdr {

struct Decision {
    std::vector<std::size_t> rejected;  ///< 0-based, in rejection order
    std::size_t k_hat = 0;
    std::string scores_used;
    double alpha = 0.0;
};

/// Largest k whose k smallest scores average at most alpha (0 if none);
/// rejects those k.
[[nodiscard]] Decision cutoff_running_mean(const PosteriorScores& scores, double alpha);

/// Windowed posteriors at the true parameters, then the running-mean cutoff.
[[nodiscard]] Decision approximate_bayes(std::span<const double> x,
                                         const ModelParams& true_params, std::size_t k,
                                         double alpha);

struct EmpiricalBayesResult {
    Decision decision;
    FitResult fit;
    PosteriorScores scores;
};

/// Fit, score with window lag k, cut off. `opts.k` is overridden by k.
[[nodiscard]] EmpiricalBayesResult empirical_bayes(std::span<const double> x, double alpha,
                                                   std::size_t k, W0Source source,
                                                   EstimationOptions opts,
                                                   const RngStream& rng);

/// Two-sided p-values 2 (1 - Phi(|x|)).
[[nodiscard]] std::vector<double> normal_p_values(std::span<const double> x);

/// Step-up at slope alpha / (m w0); w0 = 1 is plain Benjamini-Hochberg.
[[nodiscard]] Decision bh_adaptive(std::span<const double> p, double alpha, double w0);

/// Largest |S| with mean of scores over S <= alpha, by exhaustive search.
/// Refuses m > 20.
[[nodiscard]] std::size_t oracle_best_subset(std::span<const double> scores, double alpha);

}  // namespace ebfdr
