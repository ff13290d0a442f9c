#include "ebfdr/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ebfdr {

// Newton iteration on P_n from the Chebyshev-like initial guess, using the
// three-term recurrence for P_n and its derivative.
QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: need at least one node");
    QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
    const double mid = 0.5 * (b + a);
    const double half = 0.5 * (b - a);
    const std::size_t pairs = (n + 1) / 2;
    for (std::size_t i = 0; i < pairs; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const auto jd = static_cast<double>(j);
                p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
            }
            dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double z_prev = z;
            z = z_prev - p1 / dp;
            if (std::abs(z - z_prev) <= 1e-15) break;
        }
        // Recompute the derivative at the converged root.
        {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const auto jd = static_cast<double>(j);
                p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
            }
            dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
        }
        const double w = 2.0 * half / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace ebfdr
