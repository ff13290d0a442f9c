#pragma once

// Data-parallel inner loops.
//
// Each kernel has a scalar reference in `kernels::scalar` and, on x86-64, an
// AVX2 variant in `kernels::avx2`. The free functions in `kernels` dispatch to
// the active instruction set, picked once at startup from CPUID and
// overridable with set_isa() or the EBFDR_ISA environment variable
// ("scalar" or "avx2").
//
// banded_lower_matvec and window_quad_forms evaluate the same operations in
// the same order in both variants and agree bit-for-bit. dot, sum and
// cosine_series use different association orders (and a polynomial cosine
// in AVX2) and agree to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace ebfdr::kernels {

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view isa_name(Isa isa) noexcept;
[[nodiscard]] bool isa_supported(Isa isa) noexcept;
/// Best instruction set supported by this CPU and build.
[[nodiscard]] Isa detected_isa() noexcept;
[[nodiscard]] Isa active_isa() noexcept;
/// Throws std::invalid_argument when `isa` is not supported here.
void set_isa(Isa isa);

/// Parameters of a batch of windowed quadratic forms. For window w in
/// [0, count) the residual is r_j = x[first + w + j] - mean[j], j < dim, and
/// the result is |L^{-1} r|^2 with L the dim x dim row-major lower factor.
struct WindowBatch {
    std::span<const double> lower;  // dim * dim
    std::span<const double> mean;   // dim
    std::size_t dim = 0;
    std::span<const double> x;
    std::size_t first = 0;
    std::size_t count = 0;
};

#define EBFDR_KERNEL_DECLS                                                                   \
    double dot(std::span<const double> a, std::span<const double> b);                        \
    double sum(std::span<const double> a);                                                   \
    void cosine_series(std::span<const double> x, std::span<const double> freq,              \
                       std::span<const double> coef, std::span<double> out);                 \
    void banded_lower_matvec(std::span<const double> diagonals, std::size_t n,               \
                             std::size_t bandwidth, std::span<const double> z,               \
                             std::span<double> out);                                         \
    void window_quad_forms(const WindowBatch& batch, std::span<double> out);

/// dot(a, b) = sum a[i] b[i] over the common length (a and b must match).
/// sum(a) = plain sum.
/// cosine_series: out[i] = sum_n coef[n] * cos(x[i] * freq[n]).
/// banded_lower_matvec: out[r] = sum_{j <= min(r, bandwidth)} D_j[r] * z[r - j]
///   where D_j = diagonals[j * n .. (j + 1) * n).
/// window_quad_forms: see WindowBatch; out has `count` entries.
EBFDR_KERNEL_DECLS

namespace scalar {
EBFDR_KERNEL_DECLS
}

namespace avx2 {
EBFDR_KERNEL_DECLS
}

#undef EBFDR_KERNEL_DECLS

}  // namespace ebfdr::kernels
