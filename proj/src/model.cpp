#include "ebfdr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ebfdr/errors.hpp"

namespace ebfdr {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

AutocovSeq::AutocovSeq(std::vector<double> values, std::size_t check_m)
    : values_(std::move(values)) {
    require(!values_.empty(), "autocovariance: empty sequence");
    require(values_[0] == 1.0, "autocovariance: gamma(0) must equal 1");
    for (std::size_t j = 0; j < values_.size(); ++j) {
        require(std::isfinite(values_[j]) && std::abs(values_[j]) <= 1.0,
                "autocovariance: |gamma(" + std::to_string(j) + ")| must be finite and <= 1");
    }
    if (check_m > 0) {
        BandCholesky probe(*this, check_m);
        (void)probe;
    }
}

AutocovSeq AutocovSeq::truncated(std::size_t k) const {
    AutocovSeq out;
    out.values_.assign(values_.begin(),
                       values_.begin() + static_cast<std::ptrdiff_t>(std::min(k + 1, values_.size())));
    return out;
}

void ModelParams::validate() const {
    require(std::isfinite(eta), "model params: eta must be finite");
    require(std::isfinite(tau2) && tau2 >= 0.0, "model params: tau2 must be finite and >= 0");
    require(w0 > 0.0 && w0 < 1.0, "model params: w0 must lie in (0, 1)");
}

std::size_t GroundTruth::signal_count() const noexcept {
    return static_cast<std::size_t>(std::count(theta.begin(), theta.end(), std::uint8_t{1}));
}

void GroundTruth::validate() const {
    require(theta.size() == mu.size(), "ground truth: theta and mu lengths differ");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        require(theta[i] <= 1, "ground truth: theta must be binary");
        require(theta[i] == 1 || mu[i] == 0.0, "ground truth: null position with nonzero mean");
    }
}

void SimDesign::validate() const {
    require(m >= 1, "design: m must be >= 1");
    require(alpha > 0.0 && alpha < 1.0, "design: alpha must lie in (0, 1)");
    if (const auto* mix = std::get_if<MixtureSignal>(&signal)) {
        require(mix->w0 > 0.0 && mix->w0 < 1.0, "design: mixture w0 must lie in (0, 1)");
        require(mix->tau2 >= 0.0 && std::isfinite(mix->tau2), "design: mixture tau2 must be >= 0");
        require(std::isfinite(mix->eta), "design: mixture eta must be finite");
    } else {
        const auto& fixed = std::get<FixedSignal>(signal);
        require(fixed.count <= m, "design: signal count exceeds m");
        require(std::isfinite(fixed.value), "design: signal value must be finite");
        if (!fixed.indices.empty()) {
            require(fixed.indices.size() == fixed.count,
                    "design: signal_indices length must equal count");
            std::vector<std::size_t> sorted = fixed.indices;
            std::sort(sorted.begin(), sorted.end());
            require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                    "design: duplicate signal index");
            require(sorted.back() < m, "design: signal index out of range");
        }
    }
}

SimDesign SimDesign::reference() {
    SimDesign d;
    d.m = 1000;
    d.signal = FixedSignal{100, 2.0, {}};
    d.gamma = AutocovSeq({1.0, 0.6, 0.4, 0.2, 0.1});
    d.alpha = 0.1;
    return d;
}

ModelParams SimDesign::true_params() const {
    ModelParams p;
    p.gamma = gamma;
    if (const auto* mix = std::get_if<MixtureSignal>(&signal)) {
        p.w0 = mix->w0;
        p.eta = mix->eta;
        p.tau2 = mix->tau2;
    } else {
        const auto& fixed = std::get<FixedSignal>(signal);
        p.w0 = 1.0 - static_cast<double>(fixed.count) / static_cast<double>(m);
        p.eta = fixed.value;
        p.tau2 = 0.0;
    }
    return p;
}

StationaryNoise::StationaryNoise(const AutocovSeq& gamma, std::size_t m) : factor_(gamma, m) {}

std::vector<double> StationaryNoise::apply(std::span<const double> z) const {
    if (z.size() != size()) throw std::invalid_argument("noise: z has the wrong length");
    std::vector<double> out(size());
    factor_.multiply(z, out);
    return out;
}

void StationaryNoise::draw_into(RngStream& rng, std::span<double> z_scratch,
                                std::span<double> out) const {
    for (double& v : z_scratch) v = rng.normal();
    factor_.multiply(z_scratch, out);
}

std::vector<double> StationaryNoise::draw(RngStream& rng) const {
    std::vector<double> z(size());
    std::vector<double> out(size());
    draw_into(rng, z, out);
    return out;
}

std::vector<double> simulate_noise(const AutocovSeq& gamma, std::size_t m, RngStream& rng) {
    return StationaryNoise(gamma, m).draw(rng);
}

GroundTruth draw_mixture_truth(double w0, double eta, double tau2, std::size_t m, RngStream& rng) {
    require(w0 > 0.0 && w0 < 1.0, "mixture truth: w0 must lie in (0, 1)");
    require(tau2 >= 0.0, "mixture truth: tau2 must be >= 0");
    GroundTruth t{std::vector<std::uint8_t>(m, 0), std::vector<double>(m, 0.0)};
    const double tau = std::sqrt(tau2);
    for (std::size_t i = 0; i < m; ++i) {
        if (rng.bernoulli(1.0 - w0)) {
            t.theta[i] = 1;
            t.mu[i] = eta + tau * rng.normal();
        }
    }
    return t;
}

GroundTruth fixed_truth(std::size_t m, std::size_t count, double value, RngStream& rng,
                        std::optional<std::span<const std::size_t>> indices) {
    require(count <= m, "fixed truth: count exceeds m");
    GroundTruth t{std::vector<std::uint8_t>(m, 0), std::vector<double>(m, 0.0)};
    auto mark = [&](std::size_t i) {
        require(i < m, "fixed truth: index out of range");
        require(t.theta[i] == 0, "fixed truth: duplicate index");
        t.theta[i] = 1;
        t.mu[i] = value;
    };
    if (indices) {
        require(indices->size() == count, "fixed truth: index list length must equal count");
        for (std::size_t i : *indices) mark(i);
        return t;
    }
    // Partial Fisher-Yates: the first `count` slots are a uniform subset.
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, m - 1));
        std::swap(perm[i], perm[j]);
        mark(perm[i]);
    }
    return t;
}

GroundTruth draw_truth(const SimDesign& design, RngStream& rng) {
    if (const auto* mix = std::get_if<MixtureSignal>(&design.signal)) {
        return draw_mixture_truth(mix->w0, mix->eta, mix->tau2, design.m, rng);
    }
    const auto& fixed = std::get<FixedSignal>(design.signal);
    if (fixed.indices.empty()) return fixed_truth(design.m, fixed.count, fixed.value, rng);
    return fixed_truth(design.m, fixed.count, fixed.value, rng,
                       std::span<const std::size_t>(fixed.indices));
}

std::pair<std::vector<double>, GroundTruth> simulate_series(const SimDesign& design,
                                                            const StationaryNoise& noise,
                                                            RngStream& rng) {
    design.validate();
    if (noise.size() != design.m) throw std::invalid_argument("simulate: noise size differs from m");
    GroundTruth truth = draw_truth(design, rng);
    std::vector<double> x = noise.draw(rng);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += truth.mu[i];
    return {std::move(x), std::move(truth)};
}

std::pair<std::vector<double>, GroundTruth> simulate_series(const SimDesign& design,
                                                            RngStream& rng) {
    design.validate();
    return simulate_series(design, StationaryNoise(design.gamma, design.m), rng);
}

}  // namespace ebfdr
