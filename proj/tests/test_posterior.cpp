#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ebfdr/posterior.hpp"

using namespace ebfdr;

namespace {

double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2 * std::numbers::pi * var);
}

double two_component(double x, const ModelParams& p) {
    const double null = p.w0 * normal_pdf(x, 0.0, 1.0);
    return null / (null + (1 - p.w0) * normal_pdf(x, p.eta, 1.0 + p.tau2));
}

// Gauss-Jordan inverse and determinant with partial pivoting.
double dense_log_density(const std::vector<double>& v, const std::vector<double>& mean,
                         std::vector<double> a) {
    const std::size_t n = v.size();
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
        }
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a[c * n + j], a[piv * n + j]);
                std::swap(inv[c * n + j], inv[piv * n + j]);
            }
            det = -det;
        }
        const double d = a[c * n + c];
        det *= d;
        for (std::size_t j = 0; j < n; ++j) {
            a[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r * n + c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r * n + j] -= f * a[c * n + j];
                inv[r * n + j] -= f * inv[c * n + j];
            }
        }
    }
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) q += (v[i] - mean[i]) * inv[i * n + j] * (v[j] - mean[j]);
    }
    return -0.5 * q - 0.5 * std::log(det) - 0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi);
}

// Full 2^m enumeration through the dense density; independent of the Cholesky path.
std::vector<double> brute_posterior(const std::vector<double>& x, const ModelParams& p) {
    const std::size_t m = x.size();
    std::vector<double> joint(std::size_t{1} << m);
    for (std::size_t t = 0; t < joint.size(); ++t) {
        std::vector<double> cov(m * m);
        std::vector<double> mean(m, 0.0);
        std::size_t s = 0;
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c) cov[r * m + c] = p.gamma(r > c ? r - c : c - r);
            if (t >> r & 1U) {
                cov[r * m + r] += p.tau2;
                mean[r] = p.eta;
                ++s;
            }
        }
        joint[t] = std::exp(dense_log_density(x, mean, cov)) * std::pow(p.w0, double(m - s)) *
                   std::pow(1 - p.w0, double(s));
    }
    std::vector<double> pi(m);
    for (std::size_t i = 0; i < m; ++i) {
        double null = 0.0;
        double total = 0.0;
        for (std::size_t t = 0; t < joint.size(); ++t) {
            total += joint[t];
            if (!(t >> i & 1U)) null += joint[t];
        }
        pi[i] = null / total;
    }
    return pi;
}

ModelParams reference_params() {
    ModelParams p;
    p.eta = 2.0;
    p.tau2 = 0.0;
    p.w0 = 0.9;
    p.gamma = AutocovSeq({1.0, 0.6, 0.4, 0.2, 0.1});
    return p;
}

std::vector<double> draw(std::size_t m, std::uint64_t seed, double scale = 1.5) {
    RngStream rng(seed);
    std::vector<double> x(m);
    for (double& v : x) v = scale * rng.normal() + 0.5;
    return x;
}

}  // namespace

TEST(WindowOf, Examples) {
    Window w = window_of(0, 1000, 2);  // position 1 in 1-based terms
    EXPECT_EQ(w.first, 0u);
    EXPECT_EQ(w.last, 2u);
    EXPECT_EQ(w.dim(), 3u);
    EXPECT_EQ(w.offset(), 0u);
    w = window_of(499, 1000, 2);
    EXPECT_EQ(w.first, 497u);
    EXPECT_EQ(w.last, 501u);
    EXPECT_EQ(w.offset(), 2u);
    w = window_of(999, 1000, 2);
    EXPECT_EQ(w.first, 997u);
    EXPECT_EQ(w.dim(), 3u);
    EXPECT_EQ(w.offset(), 2u);
    w = window_of(7, 10, 0);
    EXPECT_EQ(w.dim(), 1u);
    EXPECT_EQ(window_of(0, 1, 5).dim(), 1u);
    EXPECT_THROW((void)window_of(10, 10, 2), std::invalid_argument);
}

TEST(ConfigTable, OneDimensionalHalfWeights) {
    ModelParams p;
    p.w0 = 0.5;
    const ConfigTable t(p, 1);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.factor(0)(0, 0), 1.0);
    EXPECT_EQ(t.factor(1)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(std::exp(t.log_weight(0)), 0.5);
    EXPECT_DOUBLE_EQ(std::exp(t.log_weight(1)), 0.5);
}

TEST(ConfigTable, FullWindowLayout) {
    ModelParams p = reference_params();
    p.tau2 = 0.7;
    const ConfigTable t(p, 5);
    ASSERT_EQ(t.size(), 32u);
    double total = 0.0;
    for (std::size_t c = 0; c < t.size(); ++c) {
        total += std::exp(t.log_weight(c));
        for (std::size_t j = 0; j < 5; ++j) {
            const bool on = (c >> j & 1U) != 0;
            EXPECT_EQ(t.mean(c)[j], on ? 2.0 : 0.0);
            // Reassemble the diagonal from the factor: sum_k L(j,k)^2 = 1 + tau2 theta_j.
            double diag = 0.0;
            for (std::size_t k = 0; k <= j; ++k) diag += t.factor(c)(j, k) * t.factor(c)(j, k);
            EXPECT_NEAR(diag, on ? 1.7 : 1.0, 1e-14);
        }
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
    EXPECT_THROW(ConfigTable(p, 0), std::invalid_argument);
    EXPECT_THROW(ConfigTable(p, 21), std::invalid_argument);
}

TEST(LogMvn, StandardNormalAtZero) {
    DenseMatrix l(1);
    l(0, 0) = 1.0;
    EXPECT_NEAR(log_mvn(std::vector<double>{0.0}, std::vector<double>{0.0}, l), -0.9189385332046727, 1e-15);
}

TEST(LogMvn, IdentityAtMean) {
    DenseMatrix l(2);
    l(0, 0) = 1.0;
    l(1, 1) = 1.0;
    const std::vector<double> v = {0.3, -2.0};
    EXPECT_NEAR(log_mvn(v, v, l), -std::log(2 * std::numbers::pi), 1e-15);
}

TEST(LogMvn, MatchesDenseInverse) {
    RngStream rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        // A = B B^T + 0.5 I is positive definite.
        std::vector<double> b(9);
        for (double& v : b) v = rng.normal();
        DenseMatrix a(3);
        std::vector<double> flat(9);
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                double s = r == c ? 0.5 : 0.0;
                for (std::size_t k = 0; k < 3; ++k) s += b[r * 3 + k] * b[c * 3 + k];
                a(r, c) = s;
                flat[r * 3 + c] = s;
            }
        }
        const std::vector<double> v = {rng.normal(), rng.normal(), rng.normal()};
        const std::vector<double> mean = {rng.normal(), 0.0, 2.0};
        EXPECT_NEAR(log_mvn(v, mean, cholesky(a)), dense_log_density(v, mean, flat), 1e-10);
    }
}

TEST(PosteriorOne, KZeroCoincidingComponents) {
    ModelParams p;
    p.w0 = 0.5;
    p.eta = 0.0;
    for (double x : {-3.0, 0.0, 1.0, 8.0}) {
        EXPECT_NEAR(posterior_one(std::vector<double>{x}, 0, p, 0), 0.5, 1e-15);
    }
}

TEST(PosteriorOne, KZeroHandValue) {
    ModelParams p = reference_params();
    const double phi0 = 1.0 / std::sqrt(2 * std::numbers::pi);
    const double phi2 = phi0 * std::exp(-2.0);
    const double expected = 0.9 * phi0 / (0.9 * phi0 + 0.1 * phi2);
    EXPECT_NEAR(posterior_one(std::vector<double>{0.0, 5.0, -1.0}, 0, p, 0), expected, 1e-14);
}

TEST(PosteriorOne, SaturatedWindowMatchesExact) {
    for (int rep = 0; rep < 10; ++rep) {
        ModelParams p = reference_params();
        p.gamma = p.gamma.truncated(3);
        p.tau2 = rep % 2 ? 0.8 : 0.0;
        p.w0 = 0.3 + 0.06 * rep;
        const auto x = draw(8, 100 + rep);
        const auto exact = exact_posterior(x, p);
        for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(posterior_one(x, i, p, 7), exact[i], 1e-8);
    }
}

TEST(ExactPosterior, MatchesDenseBruteForce) {
    for (int rep = 0; rep < 6; ++rep) {
        ModelParams p = reference_params();
        p.tau2 = 0.5 * rep;
        p.w0 = 0.2 + 0.1 * rep;
        p.eta = rep % 2 ? -1.0 : 2.0;
        const auto x = draw(5, 300 + rep);
        const auto exact = exact_posterior(x, p);
        const auto brute = brute_posterior(x, p);
        for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(exact[i], brute[i], 1e-10);
    }
}

TEST(ExactPosterior, SingleObservationIsTwoComponent) {
    ModelParams p = reference_params();
    p.tau2 = 1.3;
    for (double x : {-1.0, 0.0, 2.2}) {
        EXPECT_NEAR(exact_posterior(std::vector<double>{x}, p)[0], two_component(x, p), 1e-14);
    }
}

TEST(ExactPosterior, WhiteNoiseFactorises) {
    ModelParams p = reference_params();
    p.gamma = AutocovSeq();
    p.tau2 = 0.4;
    const auto x = draw(6, 404);
    const auto exact = exact_posterior(x, p);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(exact[i], two_component(x[i], p), 1e-10);
}

TEST(ExactPosterior, GuardRefusesLargeM) {
    EXPECT_THROW((void)exact_posterior(std::vector<double>(16, 0.0), reference_params()),
                 std::invalid_argument);
    EXPECT_THROW((void)exact_posterior(std::vector<double>{}, reference_params()), std::invalid_argument);
}

TEST(PosteriorScores, BatchedEqualsPerPosition) {
    ModelParams p = reference_params();
    p.tau2 = 0.3;
    p.gamma = p.gamma.truncated(2);
    const auto x = draw(57, 9);
    const PosteriorScores s = posterior_scores(x, p, 2);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(s.pi[i], posterior_one(x, i, p, 2), 1e-15);
    for (std::size_t r = 1; r < s.order.size(); ++r) EXPECT_LE(s.pi[s.order[r - 1]], s.pi[s.order[r]]);
}

TEST(PosteriorScores, ShortSeriesWithoutInteriorWindows) {
    ModelParams p = reference_params();
    const auto x = draw(3, 10);
    const PosteriorScores s = posterior_scores(x, p, 2);
    const auto exact = exact_posterior(x, p);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s.pi[i], exact[i], 1e-8);
    const PosteriorScores one = posterior_scores(std::vector<double>{0.7}, p, 0);
    EXPECT_NEAR(one.pi[0], two_component(0.7, p), 1e-14);
}

TEST(PosteriorScores, ComplementsSumToOne) {
    ModelParams p = reference_params();
    const auto x = draw(30, 11);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Window w = window_of(i, x.size(), 2);
        const WindowMasses wm = window_masses(x, w, ConfigTable(p, w.dim()));
        EXPECT_NEAR(wm.null_probability() + wm.alt_probability(), 1.0, 1e-12);
    }
}

TEST(PosteriorScores, TimeReversalSymmetry) {
    ModelParams p = reference_params();
    p.tau2 = 0.2;
    const auto x = draw(40, 12);
    std::vector<double> rev(x.rbegin(), x.rend());
    const auto a = posterior_scores(x, p, 2).pi;
    const auto b = posterior_scores(rev, p, 2).pi;
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a[i], b[x.size() - 1 - i], 1e-12);
}

TEST(PosteriorScores, MonotoneInW0) {
    ModelParams lo = reference_params();
    ModelParams hi = lo;
    lo.w0 = 0.8;
    hi.w0 = 0.95;
    const auto x = draw(50, 13);
    const auto a = posterior_scores(x, lo, 2).pi;
    const auto b = posterior_scores(x, hi, 2).pi;
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_GT(b[i], a[i]) << i;
}

TEST(PosteriorScores, ExtremeObservationsStayFinite) {
    ModelParams p = reference_params();
    std::vector<double> x(20, 0.0);
    x[5] = 150.0;   // log density near -1e4
    x[12] = -150.0;
    const auto pi = posterior_scores(x, p, 2).pi;
    for (double v : pi) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_LT(pi[5], 1e-10);  // far in the alternative's direction
}

TEST(PosteriorScores, SignalsRankBelowNulls) {
    const SimDesign d = SimDesign::reference();
    const ModelParams p = d.true_params();
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(s);
        const auto [x, truth] = simulate_series(d, rng);
        const auto pi = posterior_scores(x, p, 2).pi;
        double on = 0.0;
        double off = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) (truth.theta[i] ? on : off) += pi[i];
        EXPECT_LT(on / 100, off / 900);
    }
}
