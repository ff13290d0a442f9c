#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ebfdr {

class AutocovSeq;

/// Row-major square matrix. Only what the covariance code needs.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t size) : n(size), data(size * size, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
};

/// n x n Toeplitz matrix with entry (a, b) = gamma(|a - b|), zero past the
/// stored lags.
[[nodiscard]] DenseMatrix build_toeplitz(const AutocovSeq& gamma, std::size_t n);

/// Lower Cholesky factor L with A = L L^T. Throws NumericalError naming the
/// first leading minor that is not positive.
[[nodiscard]] DenseMatrix cholesky(const DenseMatrix& a);

/// Solves L y = b in place for lower-triangular L.
void forward_substitute(const DenseMatrix& lower, std::span<double> b);

/// sum of log L(i,i) times two.
[[nodiscard]] double cholesky_log_det(const DenseMatrix& lower);

/// Cholesky factor of a banded symmetric Toeplitz matrix, stored by diagonal:
/// diagonal(j)[r] = L(r, r - j) for j = 0..bandwidth (entries with r < j
/// are unused and zero).
class BandCholesky {
public:
    /// Factors the n x n Toeplitz matrix of `gamma`. The bandwidth is the
    /// last stored lag. Throws NumericalError on a non-positive leading minor.
    BandCholesky(const AutocovSeq& gamma, std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t bandwidth() const noexcept { return bw_; }
    [[nodiscard]] std::span<const double> diagonal(std::size_t j) const {
        return {diags_.data() + j * n_, n_};
    }
    [[nodiscard]] std::span<const double> storage() const noexcept { return diags_; }

    [[nodiscard]] double at(std::size_t r, std::size_t c) const;

    /// out = L z.
    void multiply(std::span<const double> z, std::span<double> out) const;

private:
    std::size_t n_;
    std::size_t bw_;
    std::vector<double> diags_;
};

/// True when the n x n Toeplitz matrix of `gamma` factors successfully.
[[nodiscard]] bool toeplitz_is_positive_definite(const AutocovSeq& gamma, std::size_t n);

}  // namespace ebfdr
