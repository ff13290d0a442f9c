#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ebfdr/errors.hpp"
#include "ebfdr/linalg.hpp"
#include "ebfdr/model.hpp"
#include "ebfdr/quadrature.hpp"

using namespace ebfdr;

namespace {

// Leading principal minors by cofactor expansion; independent of Cholesky.
double det3(const DenseMatrix& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

}  // namespace

TEST(Toeplitz, WhiteNoiseIsIdentity) {
    const DenseMatrix a = build_toeplitz(AutocovSeq(), 3);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(a(r, c), r == c ? 1.0 : 0.0);
    }
}

TEST(Toeplitz, ReferenceSequenceIsBanded) {
    const DenseMatrix a = build_toeplitz(AutocovSeq({1.0, 0.6, 0.4, 0.2, 0.1}), 6);
    const double first_row[6] = {1.0, 0.6, 0.4, 0.2, 0.1, 0.0};
    for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t c = 0; c < 6; ++c) {
            EXPECT_EQ(a(r, c), first_row[r > c ? r - c : c - r]);
            EXPECT_EQ(a(r, c), a(c, r));
        }
    }
}

TEST(Toeplitz, NearUnitLagOneFailsAtThirdMinor) {
    const AutocovSeq g({1.0, 0.99});
    const DenseMatrix a = build_toeplitz(g, 3);
    const double m1 = a(0, 0);
    const double m2 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double m3 = det3(a);
    EXPECT_GT(m1, 0.0);
    EXPECT_GT(m2, 0.0);
    EXPECT_LT(m3, 0.0);  // so not positive definite at n = 3

    EXPECT_NO_THROW((void)cholesky(build_toeplitz(g, 2)));
    try {
        (void)cholesky(a);
        FAIL() << "expected a factorization failure";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("order 3"), std::string::npos) << e.what();
    }
    EXPECT_TRUE(toeplitz_is_positive_definite(g, 2));
    EXPECT_FALSE(toeplitz_is_positive_definite(g, 3));
}

TEST(Cholesky, HandFactorTwoByTwo) {
    const DenseMatrix l = cholesky(build_toeplitz(AutocovSeq({1.0, 0.5}), 2));
    EXPECT_DOUBLE_EQ(l(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(l(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(l(1, 1), std::sqrt(0.75));
    EXPECT_EQ(l(0, 1), 0.0);
}

TEST(BandCholesky, MatchesDenseFactor) {
    for (const auto& values : {std::vector<double>{1.0, 0.6, 0.4, 0.2, 0.1},
                               std::vector<double>{1.0, -0.45, 0.1}, std::vector<double>{1.0}}) {
        const AutocovSeq g(values);
        const std::size_t n = 40;
        const DenseMatrix dense = cholesky(build_toeplitz(g, n));
        const BandCholesky band(g, n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) EXPECT_NEAR(band.at(r, c), dense(r, c), 1e-14);
        }
    }
}

TEST(BandCholesky, ReportsFailingMinor) {
    try {
        BandCholesky f(AutocovSeq({1.0, 0.99}), 10);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("order 3"), std::string::npos) << e.what();
    }
}

TEST(BandCholesky, MultiplyMatchesDenseProduct) {
    const AutocovSeq g({1.0, 0.6, 0.4, 0.2, 0.1});
    const std::size_t n = 23;
    const BandCholesky band(g, n);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    std::vector<double> z(n);
    for (double& v : z) v = nd(gen);
    std::vector<double> out(n);
    band.multiply(z, out);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c <= r; ++c) s += band.at(r, c) * z[c];
        EXPECT_NEAR(out[r], s, 1e-13);
    }
}

TEST(ForwardSubstitute, SolvesLowerSystem) {
    const DenseMatrix l = cholesky(build_toeplitz(AutocovSeq({1.0, 0.3, -0.2}), 4));
    std::vector<double> y = {0.5, -1.0, 2.0, 0.25};
    std::vector<double> b(4, 0.0);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c <= r; ++c) b[r] += l(r, c) * y[c];
    }
    forward_substitute(l, b);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(b[i], y[i], 1e-14);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    const QuadratureRule rule = gauss_legendre(8, 0.0, 1.0);
    // Exact for degree <= 15: int_0^1 s^j ds = 1 / (j + 1).
    for (int j = 0; j <= 15; ++j) {
        double s = 0.0;
        for (std::size_t n = 0; n < 8; ++n) s += rule.weights[n] * std::pow(rule.nodes[n], j);
        EXPECT_NEAR(s, 1.0 / (j + 1), 1e-14) << "degree " << j;
    }
}

TEST(GaussLegendre, SymmetricNodesAndUnitMass) {
    for (std::size_t n : {1u, 2u, 5u, 64u, 128u}) {
        const QuadratureRule rule = gauss_legendre(n);
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mass += rule.weights[i];
            EXPECT_NEAR(rule.nodes[i], -rule.nodes[n - 1 - i], 1e-15);
            EXPECT_GT(rule.weights[i], 0.0);
        }
        EXPECT_NEAR(mass, 2.0, 1e-13);
    }
    EXPECT_THROW((void)gauss_legendre(0), std::invalid_argument);
}
