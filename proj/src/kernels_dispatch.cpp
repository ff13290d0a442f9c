#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ebfdr/kernels.hpp"

namespace ebfdr::kernels {

namespace {

Isa initial_isa() noexcept {
    if (const char* env = std::getenv("EBFDR_ISA")) {
        const std::string_view v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
    }
    return detected_isa();
}

std::atomic<Isa>& current() noexcept {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(EBFDR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa detected_isa() noexcept { return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument("instruction set not supported: " + std::string(isa_name(isa)));
    }
    current().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return active_isa() == Isa::avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

double sum(std::span<const double> a) {
    return active_isa() == Isa::avx2 ? avx2::sum(a) : scalar::sum(a);
}

void cosine_series(std::span<const double> x, std::span<const double> freq,
                   std::span<const double> coef, std::span<double> out) {
    if (active_isa() == Isa::avx2) {
        avx2::cosine_series(x, freq, coef, out);
    } else {
        scalar::cosine_series(x, freq, coef, out);
    }
}

void banded_lower_matvec(std::span<const double> diagonals, std::size_t n, std::size_t bandwidth,
                         std::span<const double> z, std::span<double> out) {
    if (active_isa() == Isa::avx2) {
        avx2::banded_lower_matvec(diagonals, n, bandwidth, z, out);
    } else {
        scalar::banded_lower_matvec(diagonals, n, bandwidth, z, out);
    }
}

void window_quad_forms(const WindowBatch& batch, std::span<double> out) {
    if (active_isa() == Isa::avx2) {
        avx2::window_quad_forms(batch, out);
    } else {
        scalar::window_quad_forms(batch, out);
    }
}

}  // namespace ebfdr::kernels
