#include "ebfdr/kernels.hpp"

#if defined(EBFDR_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>

namespace ebfdr::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// cos on four lanes. Reduction x = k pi/2 + r with a two-term pi/2 split
// (first term has 33 significant bits, so k * hi is exact for |k| < 2^20),
// then the minimax sin/cos kernels on [-pi/4, pi/4].
inline __m256d cos4(__m256d x) {
    const __m256d two_over_pi = _mm256_set1_pd(6.36619772367581382433e-01);
    const __m256d pio2_hi = _mm256_set1_pd(1.57079632673412561417e+00);
    const __m256d pio2_lo = _mm256_set1_pd(6.07710050650619224932e-11);

    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, two_over_pi),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d r = _mm256_sub_pd(_mm256_sub_pd(x, _mm256_mul_pd(k, pio2_hi)),
                                    _mm256_mul_pd(k, pio2_lo));
    const __m256d z = _mm256_mul_pd(r, r);

    __m256d pc = _mm256_set1_pd(-1.13596475577881948265e-11);
    pc = _mm256_add_pd(_mm256_mul_pd(pc, z), _mm256_set1_pd(2.08757232129817482790e-09));
    pc = _mm256_add_pd(_mm256_mul_pd(pc, z), _mm256_set1_pd(-2.75573143513906633035e-07));
    pc = _mm256_add_pd(_mm256_mul_pd(pc, z), _mm256_set1_pd(2.48015872894767294178e-05));
    pc = _mm256_add_pd(_mm256_mul_pd(pc, z), _mm256_set1_pd(-1.38888888888741095749e-03));
    pc = _mm256_add_pd(_mm256_mul_pd(pc, z), _mm256_set1_pd(4.16666666666666019037e-02));
    const __m256d cos_r = _mm256_add_pd(
        _mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(_mm256_set1_pd(0.5), z)),
        _mm256_mul_pd(_mm256_mul_pd(z, z), pc));

    __m256d ps = _mm256_set1_pd(1.58969099521155010221e-10);
    ps = _mm256_add_pd(_mm256_mul_pd(ps, z), _mm256_set1_pd(-2.50507602534068634195e-08));
    ps = _mm256_add_pd(_mm256_mul_pd(ps, z), _mm256_set1_pd(2.75573137070700676789e-06));
    ps = _mm256_add_pd(_mm256_mul_pd(ps, z), _mm256_set1_pd(-1.98412698298579493134e-04));
    ps = _mm256_add_pd(_mm256_mul_pd(ps, z), _mm256_set1_pd(8.33333333332248946124e-03));
    ps = _mm256_add_pd(_mm256_mul_pd(ps, z), _mm256_set1_pd(-1.66666666666666324348e-01));
    const __m256d sin_r = _mm256_add_pd(r, _mm256_mul_pd(_mm256_mul_pd(r, z), ps));

    // Quadrant q = k mod 4: cos r, -sin r, -cos r, sin r.
    const __m128i q = _mm256_cvtpd_epi32(k);
    const __m256i odd = _mm256_cvtepi32_epi64(_mm_and_si128(q, _mm_set1_epi32(1)));
    const __m256i neg = _mm256_cvtepi32_epi64(
        _mm_and_si128(_mm_add_epi32(q, _mm_set1_epi32(1)), _mm_set1_epi32(2)));
    const __m256d use_sin = _mm256_castsi256_pd(_mm256_cmpeq_epi64(odd, _mm256_set1_epi64x(1)));
    const __m256d flip = _mm256_castsi256_pd(_mm256_cmpeq_epi64(neg, _mm256_set1_epi64x(2)));
    const __m256d v = _mm256_blendv_pd(cos_r, sin_r, use_sin);
    return _mm256_xor_pd(v, _mm256_and_pd(flip, _mm256_set1_pd(-0.0)));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                                 _mm256_loadu_pd(b.data() + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i + 4),
                                                 _mm256_loadu_pd(b.data() + i + 4)));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(std::span<const double> a) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a.data() + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a.data() + i + 4));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i];
    return s;
}

void cosine_series(std::span<const double> x, std::span<const double> freq,
                   std::span<const double> coef, std::span<double> out) {
    const std::size_t n = x.size();
    auto block = [&](__m256d xv) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < freq.size(); ++j) {
            const __m256d c = cos4(_mm256_mul_pd(xv, _mm256_set1_pd(freq[j])));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(coef[j]), c));
        }
        return acc;
    };
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out.data() + i, block(_mm256_loadu_pd(x.data() + i)));
    if (i < n) {
        alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(i), x.end(), buf);
        _mm256_store_pd(buf, block(_mm256_load_pd(buf)));
        std::copy(buf, buf + (n - i), out.begin() + static_cast<std::ptrdiff_t>(i));
    }
}

void banded_lower_matvec(std::span<const double> diagonals, std::size_t n, std::size_t bandwidth,
                         std::span<const double> z, std::span<double> out) {
    const double* d = diagonals.data();
    std::size_t r = 0;
    // Rows near the top have fewer than bandwidth sub-diagonal terms.
    for (; r < std::min(bandwidth, n); ++r) {
        double s = d[r] * z[r];
        for (std::size_t j = 1; j <= r; ++j) s += d[j * n + r] * z[r - j];
        out[r] = s;
    }
    for (; r + 4 <= n; r += 4) {
        __m256d s = _mm256_mul_pd(_mm256_loadu_pd(d + r), _mm256_loadu_pd(z.data() + r));
        for (std::size_t j = 1; j <= bandwidth; ++j) {
            s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_loadu_pd(d + j * n + r),
                                               _mm256_loadu_pd(z.data() + r - j)));
        }
        _mm256_storeu_pd(out.data() + r, s);
    }
    for (; r < n; ++r) {
        double s = d[r] * z[r];
        for (std::size_t j = 1; j <= bandwidth; ++j) s += d[j * n + r] * z[r - j];
        out[r] = s;
    }
}

void window_quad_forms(const WindowBatch& batch, std::span<double> out) {
    const std::size_t d = batch.dim;
    const double* lower = batch.lower.data();
    __m256d y[64];
    std::size_t w = 0;
    for (; w + 4 <= batch.count; w += 4) {
        const double* v = batch.x.data() + batch.first + w;
        __m256d q = _mm256_setzero_pd();
        for (std::size_t r = 0; r < d; ++r) {
            __m256d s = _mm256_sub_pd(_mm256_loadu_pd(v + r), _mm256_set1_pd(batch.mean[r]));
            const double* row = lower + r * d;
            for (std::size_t c = 0; c < r; ++c) {
                s = _mm256_sub_pd(s, _mm256_mul_pd(_mm256_set1_pd(row[c]), y[c]));
            }
            y[r] = _mm256_div_pd(s, _mm256_set1_pd(row[r]));
            q = _mm256_add_pd(q, _mm256_mul_pd(y[r], y[r]));
        }
        _mm256_storeu_pd(out.data() + w, q);
    }
    if (w < batch.count) {
        WindowBatch tail = batch;
        tail.first = batch.first + w;
        tail.count = batch.count - w;
        scalar::window_quad_forms(tail, out.subspan(w));
    }
}

}  // namespace ebfdr::kernels::avx2

#else

// Non-x86 builds: the AVX2 entry points forward to the scalar reference so
// the dispatch table and equivalence tests link everywhere.
namespace ebfdr::kernels::avx2 {

double dot(std::span<const double> a, std::span<const double> b) { return scalar::dot(a, b); }
double sum(std::span<const double> a) { return scalar::sum(a); }
void cosine_series(std::span<const double> x, std::span<const double> freq,
                   std::span<const double> coef, std::span<double> out) {
    scalar::cosine_series(x, freq, coef, out);
}
void banded_lower_matvec(std::span<const double> diagonals, std::size_t n, std::size_t bandwidth,
                         std::span<const double> z, std::span<double> out) {
    scalar::banded_lower_matvec(diagonals, n, bandwidth, z, out);
}
void window_quad_forms(const WindowBatch& batch, std::span<double> out) {
    scalar::window_quad_forms(batch, out);
}

}  // namespace ebfdr::kernels::avx2

#endif
