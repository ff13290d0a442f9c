#include <cmath>

#include "ebfdr/kernels.hpp"

namespace ebfdr::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sum(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
}

void cosine_series(std::span<const double> x, std::span<const double> freq,
                   std::span<const double> coef, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = 0.0;
        for (std::size_t n = 0; n < freq.size(); ++n) s += coef[n] * std::cos(x[i] * freq[n]);
        out[i] = s;
    }
}

void banded_lower_matvec(std::span<const double> diagonals, std::size_t n, std::size_t bandwidth,
                         std::span<const double> z, std::span<double> out) {
    for (std::size_t r = 0; r < n; ++r) {
        double s = diagonals[r] * z[r];
        const std::size_t top = r < bandwidth ? r : bandwidth;
        for (std::size_t j = 1; j <= top; ++j) s += diagonals[j * n + r] * z[r - j];
        out[r] = s;
    }
}

void window_quad_forms(const WindowBatch& batch, std::span<double> out) {
    const std::size_t d = batch.dim;
    double y[64];
    for (std::size_t w = 0; w < batch.count; ++w) {
        const double* v = batch.x.data() + batch.first + w;
        double q = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            double s = v[r] - batch.mean[r];
            const double* row = batch.lower.data() + r * d;
            for (std::size_t c = 0; c < r; ++c) s -= row[c] * y[c];
            y[r] = s / row[r];
            q += y[r] * y[r];
        }
        out[w] = q;
    }
}

}  // namespace ebfdr::kernels::scalar
