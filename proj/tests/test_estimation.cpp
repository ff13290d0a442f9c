#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ebfdr/errors.hpp"
#include "ebfdr/estimation.hpp"
#include "ebfdr/model.hpp"

using namespace ebfdr;

namespace {

// Brute-force pair enumeration, independent of the suffix-sum implementation.
double pair_mean_oracle(const std::vector<double>& x, double rho, bool exact) {
    const double m = static_cast<double>(x.size());
    double total = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            if (static_cast<double>(j - i) > rho * m + 1e-9) {
                total += x[i] * x[j];
                count += 1.0;
            }
        }
    }
    return exact ? total / count : total / ((1 - rho) * (1 - rho) * m * m / 2);
}

// Composite Simpson on [0, 1] with many panels; independent of the Gauss rule.
double psi_oracle(double z, double h) {
    const int n = 20000;
    auto f = [&](double s) { return std::exp(s * s / (2 * h * h)) * std::cos(z * s / h); };
    double acc = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) acc += f(static_cast<double>(i) / n) * (i % 2 ? 4.0 : 2.0);
    return acc / (3.0 * n);
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1) / n)};
}

std::vector<double> reference_series(std::uint64_t seed) {
    RngStream rng(seed);
    return simulate_series(SimDesign::reference(), rng).first;
}

}  // namespace

TEST(DistantPairMean, AllOnesHandCount) {
    const std::vector<double> ones(10, 1.0);
    EXPECT_DOUBLE_EQ(distant_pair_mean(ones, 0.1), 36.0 / 40.5);
    EXPECT_DOUBLE_EQ(distant_pair_mean(ones, 0.1, PairNormalization::exact_count), 1.0);
}

TEST(DistantPairMean, ZerosAndErrors) {
    EXPECT_EQ(distant_pair_mean(std::vector<double>(50, 0.0), 0.1), 0.0);
    EXPECT_THROW((void)distant_pair_mean(std::vector<double>{1.0}, 0.1), std::invalid_argument);
    EXPECT_THROW((void)distant_pair_mean(std::vector<double>(4, 1.0), 0.8), std::invalid_argument);
    EXPECT_THROW((void)distant_pair_mean(std::vector<double>(4, 1.0), 0.0), std::invalid_argument);
}

TEST(DistantPairMean, MatchesBruteForce) {
    RngStream rng(13);
    for (std::size_t m : {5u, 10u, 37u, 200u}) {
        for (double rho : {0.1, 0.25, 0.5}) {
            std::vector<double> x(m);
            for (double& v : x) v = rng.normal() + 0.3;
            EXPECT_NEAR(distant_pair_mean(x, rho), pair_mean_oracle(x, rho, false), 1e-12)
                << m << " " << rho;
            EXPECT_NEAR(distant_pair_mean(x, rho, PairNormalization::exact_count),
                        pair_mean_oracle(x, rho, true), 1e-12);
        }
    }
}

TEST(DistantPairMean, ReferenceDesignNearSquaredSignalMean) {
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 100; ++s) v.push_back(distant_pair_mean(reference_series(s), 0.1));
    const MeanSe r = mean_se(v);
    // E mu_i mu_j for 100 placed signals, scaled by actual / literal pair count.
    const double product = 4.0 * 100.0 * 99.0 / (1000.0 * 999.0);
    const double ratio = (899.0 * 900.0 / 2.0) / (0.81 * 1e6 / 2.0);
    EXPECT_NEAR(r.mean, product * ratio, 3 * r.se);
}

TEST(Eta, DirectFormula) {
    std::vector<double> x = {0.1, 0.3, 0.2, 0.2};
    EXPECT_NEAR(estimate_eta(x, 0.9), 2.0, 1e-12);
    EXPECT_EQ(estimate_eta(std::vector<double>(7, 0.0), 0.3), 0.0);
    EXPECT_THROW((void)estimate_eta(x, 1.0), std::invalid_argument);
}

TEST(Eta, ReferenceDesignUnbiased) {
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 100; ++s) v.push_back(estimate_eta(reference_series(1000 + s), 0.9));
    const MeanSe r = mean_se(v);
    EXPECT_NEAR(r.mean, 2.0, 3 * r.se);
}

TEST(Tau2, ZeroPairMeanExample) {
    // Mean square 1 and every distant product zero.
    std::vector<double> x(10, 0.0);
    x[0] = std::sqrt(5.0);
    x[1] = std::sqrt(5.0);  // adjacent, so excluded from distant pairs
    ASSERT_EQ(distant_pair_mean(x, 0.1), 0.0);
    const Tau2Estimate t = estimate_tau2(x, 0.9, 0.1);
    EXPECT_NEAR(t.raw, 0.0, 1e-14);
    EXPECT_NEAR(t.value, 0.0, 1e-14);
}

TEST(Tau2, ClampedAtZero) {
    const std::vector<double> x(20, 0.0);
    const Tau2Estimate t = estimate_tau2(x, 0.5, 0.1);
    EXPECT_DOUBLE_EQ(t.raw, -2.0);  // (0 - 1) / 0.5
    EXPECT_EQ(t.value, 0.0);
}

TEST(Tau2, ReferenceDesignRawUnbiased) {
    // E x^2 - 1 = 0.4 and E mu_i mu_j = 4 (100 * 99) / (1000 * 999), scaled by the
    // literal pair normaliser; the clamped mean is not small at m = 1000 because
    // the raw estimate has a standard deviation near 2.5.
    const double product = 4.0 * 100.0 * 99.0 / (1000.0 * 999.0);
    const double ratio = (899.0 * 900.0 / 2.0) / (0.81 * 1e6 / 2.0);
    const double expected = 0.4 / 0.1 - product * ratio / 0.01;
    std::vector<double> raw;
    for (std::uint64_t s = 0; s < 100; ++s) raw.push_back(estimate_tau2(reference_series(2000 + s), 0.9, 0.1).raw);
    const MeanSe r = mean_se(raw);
    EXPECT_NEAR(r.mean, expected, 3 * r.se);
}

TEST(Tau2, ReferenceLawClampedMeanSmallAtLargeM) {
    SimDesign d = SimDesign::reference();
    d.m = 100000;
    std::get<FixedSignal>(d.signal).count = 10000;
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(2500 + s);
        acc += estimate_tau2(simulate_series(d, rng).first, 0.9, 0.1).value;
    }
    EXPECT_GE(acc / 20, 0.0);
    EXPECT_LE(acc / 20, 0.3);
}

TEST(Tau2, ConsistentOnWideMixture) {
    SimDesign d;
    d.m = 100000;
    d.signal = MixtureSignal{0.5, 0.0, 4.0};
    d.gamma = AutocovSeq();
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(3000 + s);
        v.push_back(estimate_tau2(simulate_series(d, rng).first, 0.5, 0.1).raw);
    }
    const MeanSe r = mean_se(v);
    EXPECT_NEAR(r.mean, 4.0, 3 * r.se);
}

TEST(Acov, ZerosAndLagGuard) {
    EXPECT_EQ(estimate_acov(std::vector<double>(20, 0.0), 1, 0.1), 0.0);
    EXPECT_THROW((void)estimate_acov(std::vector<double>(10, 1.0), 0, 0.1), std::invalid_argument);
    EXPECT_THROW((void)estimate_acov(std::vector<double>(10, 1.0), 9, 0.1), std::invalid_argument);
}

TEST(Acov, WhiteNoiseLagOneNearZero) {
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(4000 + s);
        v.push_back(estimate_acov(simulate_noise(AutocovSeq(), 100000, rng), 1, 0.1));
    }
    const MeanSe r = mean_se(v);
    EXPECT_NEAR(r.mean, 0.0, 3 * r.se);
}

TEST(Acov, ReferenceDesignRecoversLags) {
    std::vector<double> g1;
    std::vector<double> g2;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto x = reference_series(5000 + s);
        g1.push_back(estimate_acov(x, 1, 0.1));
        g2.push_back(estimate_acov(x, 2, 0.1));
    }
    // Finite-m bias from the pair normaliser is O(0.04 * 0.23); allow it on top of MC error.
    EXPECT_NEAR(mean_se(g1).mean, 0.6, 3 * mean_se(g1).se + 0.015);
    EXPECT_NEAR(mean_se(g2).mean, 0.4, 3 * mean_se(g2).se + 0.015);
}

TEST(Fit, HandComputedFiveObservations) {
    const std::vector<double> x = {0.5, -1.0, 2.0, 0.25, 1.5};
    const double w0 = 0.8;
    EstimationOptions o;
    o.k = 2;
    const FitResult f = fit(x, W0Source::true_value(w0), o, RngStream(1));

    // rho m = 0.5, so every pair with j > i qualifies; literal normaliser 0.81 * 25 / 2.
    double pairs = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) pairs += x[i] * x[j];
    }
    const double dpm = pairs / 10.125;
    const double mean = 3.25 / 5;
    const double sq = (0.25 + 1.0 + 4.0 + 0.0625 + 2.25) / 5;
    const double lag1 = (0.5 * -1.0 + -1.0 * 2.0 + 2.0 * 0.25 + 0.25 * 1.5) / 4;
    const double lag2 = (0.5 * 2.0 + -1.0 * 0.25 + 2.0 * 1.5) / 3;

    EXPECT_DOUBLE_EQ(f.params.w0, w0);
    EXPECT_NEAR(f.params.eta, mean / 0.2, 1e-14);
    EXPECT_NEAR(f.diagnostics.tau2_raw, (sq - 1) / 0.2 - dpm / 0.04, 1e-12);
    EXPECT_EQ(f.params.tau2, std::max(0.0, f.diagnostics.tau2_raw));
    ASSERT_EQ(f.diagnostics.gamma_raw.size(), 3u);
    EXPECT_NEAR(f.diagnostics.gamma_raw[1], lag1 - dpm, 1e-14);
    EXPECT_NEAR(f.diagnostics.gamma_raw[2], lag2 - dpm, 1e-14);
}

TEST(Fit, TrueW0PassesThroughUnclamped) {
    const auto x = reference_series(6);
    EstimationOptions o;
    const FitResult f = fit(x, W0Source::true_value(0.995), o, RngStream(1));
    EXPECT_EQ(f.params.w0, 0.995);
    EXPECT_EQ(f.diagnostics.w0.method, W0Method::true_value);
    EXPECT_EQ(f.params.gamma.max_lag(), 2u);
}

TEST(Fit, RepairsNonPositiveDefiniteGamma) {
    // Alternating large values give gamma-hat(1) near -1 and gamma-hat(2) near 1.
    std::vector<double> x(40);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 ? 3.0 : -3.0);
    EstimationOptions o;
    const FitResult f = fit(x, W0Source::true_value(0.5), o, RngStream(1));
    EXPECT_LT(f.diagnostics.gamma_repair_factor, 1.0);
    EXPECT_TRUE(toeplitz_is_positive_definite(f.params.gamma, 40));
    EXPECT_FALSE(f.diagnostics.notes.empty());
}

TEST(Fit, RejectsBadInput) {
    EstimationOptions o;
    EXPECT_THROW((void)fit(std::vector<double>{1.0, NAN, 2.0}, W0Source::fourier(), o, RngStream(1)),
                 std::invalid_argument);
    EXPECT_THROW((void)fit(std::vector<double>{1.0, 2.0}, W0Source::fourier(), o, RngStream(1)),
                 std::invalid_argument);  // k = 2 >= m (1 - rho)
    EXPECT_THROW((void)fit(std::vector<double>(10, 1.0), W0Source::true_value(1.0), o, RngStream(1)),
                 std::invalid_argument);
}

TEST(RepairAutocov, ScalesUntilPositiveDefinite) {
    const std::vector<double> bad = {1.0, 0.99};
    const RepairedAutocov r = repair_autocov(bad, 3);
    EXPECT_LT(r.factor, 1.0);
    // 1 - 2 c (0.99) cos(pi / 4) > 0 first holds at c = 0.70.
    EXPECT_NEAR(r.factor, 0.70, 1e-12);
    EXPECT_TRUE(toeplitz_is_positive_definite(r.gamma, 3));
    const RepairedAutocov ok = repair_autocov(std::vector<double>{1.0, 0.6, 0.4, 0.2, 0.1}, 100);
    EXPECT_EQ(ok.factor, 1.0);
}

TEST(Psi, SymmetricInZ) {
    const double h = fourier_bandwidth(1000, 0.5);
    for (double z : {0.1, 1.0, 2.5, 7.0}) EXPECT_EQ(psi(z, h), psi(-z, h));
}

TEST(Psi, QuadratureConvergedAtDefaultNodes) {
    const double h = fourier_bandwidth(1000, 0.5);
    for (double z = -10.0; z <= 10.0; z += 0.25) {
        EXPECT_LT(std::abs(psi(z, h, 64) - psi(z, h, 128)), 1e-9) << z;
        EXPECT_NEAR(psi(z, h, 64), psi_oracle(z, h), 1e-9 * (1.0 + std::abs(psi_oracle(z, h)))) << z;
    }
}

TEST(Psi, UnitMeanUnderStandardNormal) {
    const double h = fourier_bandwidth(1000, 0.5);
    const PsiKernel kernel(h, 64);
    RngStream rng(77);
    std::vector<double> z(200000);
    for (double& v : z) v = rng.normal();
    std::vector<double> vals(z.size());
    kernel.evaluate(z, vals);
    const MeanSe r = mean_se(vals);
    EXPECT_NEAR(r.mean, 1.0, 3 * r.se);
}

TEST(Psi, BandwidthFormula) {
    EXPECT_DOUBLE_EQ(fourier_bandwidth(1000, 0.5), 1.0 / std::sqrt(0.5 * std::log(1000.0)));
    EXPECT_THROW((void)fourier_bandwidth(1, 0.5), std::invalid_argument);
}

TEST(FourierW0, PureNullCentredAtOne) {
    EstimationOptions o;
    std::vector<double> raw;
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(7000 + s);
        const auto x = simulate_noise(AutocovSeq(), 100000, rng);
        const W0Estimate e = estimate_w0_fourier(x, o);
        raw.push_back(e.raw);
        EXPECT_EQ(e.value, std::clamp(e.raw, o.w_lo, o.w_hi));
    }
    const MeanSe r = mean_se(raw);
    EXPECT_NEAR(r.mean, 1.0, 3 * r.se);
}

TEST(BootstrapW0, SelfReplicateHookReproducesFourier) {
    const auto x = reference_series(9);
    EstimationOptions o;
    o.bootstrap_B = 1;
    const W0Estimate f = estimate_w0_fourier(x, o);
    const W0Estimate b = estimate_w0_bootstrap(x, o, [&](std::size_t, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    });
    EXPECT_NEAR(b.raw, f.raw, 1e-15);
    EXPECT_EQ(b.method, W0Method::bootstrap);
}

TEST(BootstrapW0, DeterministicForStream) {
    const auto x = reference_series(10);
    EstimationOptions o;
    o.bootstrap_B = 10;
    ModelParams p = SimDesign::reference().true_params();
    const W0Estimate a = estimate_w0_bootstrap(x, p, o, RngStream(5));
    const W0Estimate b = estimate_w0_bootstrap(x, p, o, RngStream(5));
    const W0Estimate c = estimate_w0_bootstrap(x, p, o, RngStream(6));
    EXPECT_EQ(a.raw, b.raw);
    EXPECT_NE(a.raw, c.raw);
}

TEST(BootstrapW0, ReducesBiasOnReferenceDesign) {
    // Pilot centred at the Fourier value with the true alternative (eta = 2,
    // tau2 = 0) and true gamma, so the replicates carry the Fourier bias.
    EstimationOptions o;
    const ModelParams truth = SimDesign::reference().true_params();
    double fourier = 0.0;
    double boot = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const auto x = reference_series(20000 + t);
        const W0Estimate f = estimate_w0_fourier(x, o);
        ModelParams pilot = truth;
        pilot.w0 = f.value;
        fourier += f.value;
        boot += estimate_w0_bootstrap(x, pilot, o, RngStream(t)).value;
    }
    fourier /= trials;
    boot /= trials;
    EXPECT_LT(std::abs(boot - 0.9), std::abs(fourier - 0.9)) << "fourier " << fourier << " bootstrap " << boot;
}

TEST(BootstrapW0, AgreesWithFourierWhenUnbiased) {
    SimDesign d;
    d.m = 1000;
    d.signal = MixtureSignal{0.5, 3.0, 0.0};
    d.gamma = AutocovSeq();
    EstimationOptions o;
    o.bootstrap_B = 50;
    std::vector<double> diff;
    double fourier = 0.0;
    for (int t = 0; t < 40; ++t) {
        RngStream rng(9000 + t);
        const auto x = simulate_series(d, rng).first;
        const FitResult f = fit(x, W0Source::bootstrap(), o, RngStream(t));
        fourier += f.diagnostics.w0_fourier->value;
        diff.push_back(f.diagnostics.w0.value - f.diagnostics.w0_fourier->value);
    }
    const MeanSe r = mean_se(diff);
    EXPECT_NEAR(fourier / 40, 0.5, 0.1);
    EXPECT_NEAR(r.mean, 0.0, std::max(3 * r.se, 0.05));
}
