#include "ebfdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ebfdr/errors.hpp"
#include "ebfdr/kernels.hpp"
#include "ebfdr/model.hpp"

namespace ebfdr {

DenseMatrix build_toeplitz(const AutocovSeq& gamma, std::size_t n) {
    DenseMatrix a(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            a(r, c) = gamma(r > c ? r - c : c - r);
        }
    }
    return a;
}

DenseMatrix cholesky(const DenseMatrix& a) {
    const std::size_t n = a.n;
    DenseMatrix l(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c <= r; ++c) {
            double s = a(r, c);
            for (std::size_t j = 0; j < c; ++j) s -= l(r, j) * l(c, j);
            if (r == c) {
                if (!(s > 0.0)) {
                    throw NumericalError("cholesky: leading minor of order " +
                                         std::to_string(r + 1) + " is not positive");
                }
                l(r, r) = std::sqrt(s);
            } else {
                l(r, c) = s / l(c, c);
            }
        }
    }
    return l;
}

void forward_substitute(const DenseMatrix& lower, std::span<double> b) {
    for (std::size_t r = 0; r < lower.n; ++r) {
        double s = b[r];
        for (std::size_t c = 0; c < r; ++c) s -= lower(r, c) * b[c];
        b[r] = s / lower(r, r);
    }
}

double cholesky_log_det(const DenseMatrix& lower) {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.n; ++i) s += std::log(lower(i, i));
    return 2.0 * s;
}

BandCholesky::BandCholesky(const AutocovSeq& gamma, std::size_t n)
    : n_(n), bw_(std::min(gamma.max_lag(), n == 0 ? 0 : n - 1)), diags_((bw_ + 1) * n, 0.0) {
    auto l = [this](std::size_t r, std::size_t c) -> double& { return diags_[(r - c) * n_ + r]; };
    for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t c0 = r > bw_ ? r - bw_ : 0;
        for (std::size_t c = c0; c <= r; ++c) {
            double s = gamma(r - c);
            // L(r, j) and L(c, j) are both inside the band only for j >= c0.
            for (std::size_t j = c0; j < c; ++j) s -= l(r, j) * l(c, j);
            if (r == c) {
                if (!(s > 0.0)) {
                    throw NumericalError("toeplitz covariance is not positive definite: leading minor of order " +
                                         std::to_string(r + 1) + " fails");
                }
                l(r, r) = std::sqrt(s);
            } else {
                l(r, c) = s / l(c, c);
            }
        }
    }
}

double BandCholesky::at(std::size_t r, std::size_t c) const {
    if (c > r || r - c > bw_) return 0.0;
    return diags_[(r - c) * n_ + r];
}

void BandCholesky::multiply(std::span<const double> z, std::span<double> out) const {
    kernels::banded_lower_matvec(diags_, n_, bw_, z, out);
}

bool toeplitz_is_positive_definite(const AutocovSeq& gamma, std::size_t n) {
    try {
        BandCholesky f(gamma, n);
        return true;
    } catch (const NumericalError&) {
        return false;
    }
}

}  // namespace ebfdr
