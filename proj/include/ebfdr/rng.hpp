#pragma once

#include <cstdint>
#include <random>

namespace ebfdr {

/// SplitMix64 finalizer. Used for every seed derivation in the library, so
/// its output is part of the reproducibility contract.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seedable, splittable random stream.
///
/// Every stochastic routine takes one of these explicitly. `split(id)` yields
/// a child stream whose seed depends only on (this seed, id), never on how
/// many draws the parent has made, so independent work units can be handed
/// disjoint children up front.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] RngStream split(std::uint64_t id) const {
        return RngStream(mix64(seed_ ^ mix64(id + 0x632BE59BD9B4E019ULL)));
    }

    double normal() { return normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

    /// Uniform integer in [lo, hi].
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ebfdr
