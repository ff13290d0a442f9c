#include "ebfdr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "ebfdr/io.hpp"

namespace ebfdr {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSeriesStream = 0;
constexpr std::uint64_t kPlacementStream = 0xF1C5ED;

// Each procedure draws from its own child stream, keyed by the procedure
// rather than its position in the request, so subsets reproduce the full run.
std::uint64_t procedure_stream(Procedure p) { return 1 + static_cast<std::uint64_t>(p); }

Decision run_procedure(Procedure p, std::span<const double> x, const SimDesign& design,
                       const ModelParams& truth_params, const BenchOptions& opts,
                       const RngStream& rng) {
    switch (p) {
        case Procedure::bh_w0:
            return bh_adaptive(normal_p_values(x), design.alpha,
                               std::min(1.0, std::max(truth_params.w0, 0.0)));
        case Procedure::approx_bayes:
            return approximate_bayes(x, truth_params, opts.k, design.alpha);
        case Procedure::eb_w0:
            return empirical_bayes(x, design.alpha, opts.k, W0Source::true_value(truth_params.w0),
                                   opts.estimation, rng)
                .decision;
        case Procedure::eb_fourier:
            return empirical_bayes(x, design.alpha, opts.k, W0Source::fourier(), opts.estimation, rng)
                .decision;
        case Procedure::eb_bootstrap:
            return empirical_bayes(x, design.alpha, opts.k, W0Source::bootstrap(), opts.estimation,
                                   rng)
                .decision;
    }
    throw std::logic_error("unknown procedure");
}

std::vector<ProcedureOutcome> run_trial_with(const SimDesign& design,
                                             std::span<const Procedure> procedures,
                                             const BenchOptions& opts, std::uint64_t trial_seed,
                                             const StationaryNoise& noise) {
    const RngStream root(trial_seed);
    RngStream series_rng = root.split(kSeriesStream);
    auto [x, truth] = simulate_series(design, noise, series_rng);
    const ModelParams truth_params = design.true_params();

    std::vector<ProcedureOutcome> out;
    out.reserve(procedures.size());
    for (Procedure p : procedures) {
        ProcedureOutcome o;
        o.procedure = p;
        try {
            const Decision d = run_procedure(p, x, design, truth_params, opts,
                                             root.split(procedure_stream(p)));
            o.metrics = score_decisions(d, truth);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        out.push_back(std::move(o));
    }
    return out;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fixed1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

std::string_view procedure_id(Procedure p) noexcept {
    switch (p) {
        case Procedure::bh_w0: return "bh";
        case Procedure::approx_bayes: return "approx-bayes";
        case Procedure::eb_w0: return "eb-true";
        case Procedure::eb_fourier: return "eb-fourier";
        case Procedure::eb_bootstrap: return "eb-bootstrap";
    }
    return "unknown";
}

std::string_view procedure_label(Procedure p) noexcept {
    switch (p) {
        case Procedure::bh_w0: return "BH-w0";
        case Procedure::approx_bayes: return "Approximate Bayes";
        case Procedure::eb_w0: return "EB-w0";
        case Procedure::eb_fourier: return "EB-Fourier";
        case Procedure::eb_bootstrap: return "EB-bootstrap";
    }
    return "unknown";
}

std::vector<Procedure> all_procedures() {
    return {Procedure::bh_w0, Procedure::approx_bayes, Procedure::eb_w0, Procedure::eb_fourier,
            Procedure::eb_bootstrap};
}

Procedure parse_procedure(std::string_view text) {
    for (Procedure p : all_procedures()) {
        if (text == procedure_id(p) || text == procedure_label(p)) return p;
    }
    throw std::invalid_argument("unknown procedure '" + std::string(text) +
                                "' (expected bh, approx-bayes, eb-true, eb-fourier, eb-bootstrap)");
}

TrialMetrics score_decisions(const Decision& decision, const GroundTruth& truth) {
    TrialMetrics t;
    for (std::size_t i : decision.rejected) {
        if (i >= truth.size()) throw std::invalid_argument("score_decisions: index out of range");
        if (truth.theta[i] == 0) ++t.V;
    }
    t.R = decision.rejected.size();
    if (t.R > truth.size()) throw std::logic_error("score_decisions: more rejections than hypotheses");
    if (t.R > 0) {
        t.fdp = static_cast<double>(t.V) / static_cast<double>(t.R);
        t.ppv = 1.0 - t.fdp;
    }
    return t;
}

std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial) {
    return mix64(base_seed + kGolden * (trial + 1));
}

std::vector<ProcedureOutcome> run_trial(const SimDesign& design,
                                        std::span<const Procedure> procedures,
                                        const BenchOptions& opts, std::uint64_t trial_seed) {
    design.validate();
    return run_trial_with(design, procedures, opts, trial_seed,
                          StationaryNoise(design.gamma, design.m));
}

MetricSummary summarize_values(std::span<const double> values) {
    MetricSummary s;
    s.n = values.size();
    if (s.n == 0) return s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

std::vector<ProcedureSummary> summarize(std::span<const RawRow> raw,
                                        std::span<const Procedure> procedures) {
    std::vector<ProcedureSummary> out;
    for (Procedure p : procedures) {
        std::vector<double> fdp;
        std::vector<double> r;
        std::vector<double> v;
        std::vector<double> ppv;
        for (const RawRow& row : raw) {
            if (row.procedure != p) continue;
            fdp.push_back(row.fdp);
            r.push_back(static_cast<double>(row.R));
            v.push_back(static_cast<double>(row.V));
            if (row.R > 0) ppv.push_back(1.0 - row.fdp);
        }
        ProcedureSummary s;
        s.procedure = p;
        s.fdp = summarize_values(fdp);
        s.R = summarize_values(r);
        s.V = summarize_values(v);
        s.ppv = summarize_values(ppv);
        s.trials = fdp.size();
        out.push_back(s);
    }
    return out;
}

BenchResult run_benchmark(const SimDesign& design_in, std::span<const Procedure> procedures,
                          std::size_t n_trials, std::uint64_t base_seed, const BenchOptions& opts) {
    if (n_trials < 2) throw std::invalid_argument("bench: n_trials must be >= 2");
    if (procedures.empty()) throw std::invalid_argument("bench: no procedures requested");
    design_in.validate();
    opts.estimation.validate();

    SimDesign design = design_in;
    if (auto* fixed = std::get_if<FixedSignal>(&design.signal);
        fixed != nullptr && opts.fix_placement && fixed->indices.empty()) {
        RngStream placement = RngStream(base_seed).split(kPlacementStream);
        const GroundTruth t = fixed_truth(design.m, fixed->count, fixed->value, placement);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t.theta[i] != 0) fixed->indices.push_back(i);
        }
    }

    const StationaryNoise noise(design.gamma, design.m);
    std::vector<std::vector<ProcedureOutcome>> outcomes(n_trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next.fetch_add(1); t < n_trials; t = next.fetch_add(1)) {
            outcomes[t] = run_trial_with(design, procedures, opts, derive_trial_seed(base_seed, t), noise);
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(opts.threads, n_trials));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }

    BenchResult result;
    std::vector<std::size_t> failures(procedures.size(), 0);
    for (std::size_t t = 0; t < n_trials; ++t) {
        for (std::size_t j = 0; j < outcomes[t].size(); ++j) {
            const ProcedureOutcome& o = outcomes[t][j];
            if (!o.metrics) {
                ++failures[j];
                result.failures.push_back("trial " + std::to_string(t + 1) + " " +
                                          std::string(procedure_id(o.procedure)) + ": " + o.error);
                continue;
            }
            if (o.metrics->V > o.metrics->R || o.metrics->R > design.m) {
                throw std::logic_error("bench: conservation violated (V <= R <= m)");
            }
            result.raw.push_back({t, o.procedure, o.metrics->R, o.metrics->V, o.metrics->fdp});
        }
    }
    result.summary = summarize(result.raw, procedures);
    for (std::size_t j = 0; j < procedures.size(); ++j) result.summary[j].failures = failures[j];
    return result;
}

std::string format_raw_csv(std::span<const RawRow> raw) {
    std::string out = "trial,procedure,R,V,FDP\n";
    for (const RawRow& row : raw) {
        out += std::to_string(row.trial + 1) + ',' + std::string(procedure_id(row.procedure)) + ',' +
               std::to_string(row.R) + ',' + std::to_string(row.V) + ',' + io::format_double(row.fdp) +
               '\n';
    }
    return out;
}

std::string format_summary_csv(std::span<const ProcedureSummary> summary) {
    std::string out = "procedure,metric,mean,sd,n\n";
    auto line = [&out](Procedure p, const char* metric, const MetricSummary& s) {
        out += std::string(procedure_id(p)) + ',' + metric + ',' + io::format_double(s.mean) + ',' +
               io::format_double(s.sd) + ',' + std::to_string(s.n) + '\n';
    };
    for (const ProcedureSummary& s : summary) {
        line(s.procedure, "FDP", s.fdp);
        line(s.procedure, "R", s.R);
        line(s.procedure, "V", s.V);
        line(s.procedure, "PPV", s.ppv);
    }
    return out;
}

std::string format_summary_table(std::span<const ProcedureSummary> summary) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-20s %8s %8s %8s %8s %8s %8s %7s\n", "Procedure", "V/R mean",
                  "V/R SD", "R mean", "R SD", "V mean", "V SD", "trials");
    out += buf;
    for (const ProcedureSummary& s : summary) {
        std::snprintf(buf, sizeof buf, "%-20s %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f %7zu\n",
                      std::string(procedure_label(s.procedure)).c_str(), s.fdp.mean, s.fdp.sd,
                      s.R.mean, s.R.sd, s.V.mean, s.V.sd, s.trials);
        out += buf;
        if (s.failures > 0) {
            std::snprintf(buf, sizeof buf, "%-20s (%zu failed trials excluded)\n", "", s.failures);
            out += buf;
        }
    }
    return out;
}

std::string format_scatter_svg(std::span<const RawRow> raw, double alpha,
                               std::span<const Procedure> procedures) {
    if (raw.empty()) throw std::invalid_argument("scatter: raw table is empty");
    std::vector<Procedure> panels(procedures.begin(), procedures.end());
    if (panels.empty()) {
        for (Procedure p : all_procedures()) {
            if (std::any_of(raw.begin(), raw.end(), [p](const RawRow& r) { return r.procedure == p; })) {
                panels.push_back(p);
            }
        }
    }

    // Shared axes across panels so they compare at a glance.
    double x_max = std::max(0.5, alpha * 1.5);
    double y_max = 10.0;
    for (const RawRow& r : raw) {
        x_max = std::max(x_max, r.fdp);
        y_max = std::max(y_max, static_cast<double>(r.R));
    }
    x_max = std::ceil(x_max * 10.0) / 10.0;
    y_max = std::ceil(y_max * 1.1 / 10.0) * 10.0;

    constexpr double pw = 340.0;
    constexpr double ph = 280.0;
    constexpr double ml = 48.0;
    constexpr double mr = 14.0;
    constexpr double mt = 28.0;
    constexpr double mb = 40.0;
    const std::size_t cols = panels.size() == 1 ? 1 : 2;
    const std::size_t rows = (panels.size() + cols - 1) / cols;

    auto cell = [&](std::size_t idx) -> std::pair<std::size_t, std::size_t> {
        if (panels.size() == 4) {
            // clockwise from top-left
            constexpr std::size_t r[4] = {0, 0, 1, 1};
            constexpr std::size_t c[4] = {0, 1, 1, 0};
            return {r[idx], c[idx]};
        }
        return {idx / cols, idx % cols};
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed1(pw * static_cast<double>(cols)) +
           "\" height=\"" + fixed1(ph * static_cast<double>(rows)) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t idx = 0; idx < panels.size(); ++idx) {
        const Procedure p = panels[idx];
        const auto [row, col] = cell(idx);
        const double ox = pw * static_cast<double>(col);
        const double oy = ph * static_cast<double>(row);
        const double x0 = ox + ml;
        const double x1 = ox + pw - mr;
        const double y0 = oy + ph - mb;
        const double y1 = oy + mt;
        auto sx = [&](double v) { return x0 + (x1 - x0) * v / x_max; };
        auto sy = [&](double v) { return y0 - (y0 - y1) * v / y_max; };

        std::vector<double> fdp;
        std::vector<double> rr;
        for (const RawRow& r : raw) {
            if (r.procedure == p) {
                fdp.push_back(r.fdp);
                rr.push_back(static_cast<double>(r.R));
            }
        }

        svg += "<g class=\"panel\" data-procedure=\"" + std::string(procedure_id(p)) + "\">\n";
        svg += "<text x=\"" + fixed1((x0 + x1) / 2) + "\" y=\"" + fixed1(oy + 18) +
               "\" text-anchor=\"middle\" font-size=\"13\">" + std::string(procedure_label(p)) + "</text>\n";
        svg += "<rect x=\"" + fixed1(x0) + "\" y=\"" + fixed1(y1) + "\" width=\"" + fixed1(x1 - x0) +
               "\" height=\"" + fixed1(y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 5; ++t) {
            const double xv = x_max * t / 5.0;
            const double yv = y_max * t / 5.0;
            svg += "<text x=\"" + fixed1(sx(xv)) + "\" y=\"" + fixed1(y0 + 14) +
                   "\" text-anchor=\"middle\">" + fixed2(xv) + "</text>\n";
            svg += "<text x=\"" + fixed1(x0 - 4) + "\" y=\"" + fixed1(sy(yv) + 4) +
                   "\" text-anchor=\"end\">" + fixed1(yv) + "</text>\n";
        }
        svg += "<text x=\"" + fixed1((x0 + x1) / 2) + "\" y=\"" + fixed1(y0 + 30) +
               "\" text-anchor=\"middle\">V/R</text>\n";
        svg += "<text x=\"" + fixed1(ox + 12) + "\" y=\"" + fixed1((y0 + y1) / 2) +
               "\" text-anchor=\"middle\" transform=\"rotate(-90 " + fixed1(ox + 12) + " " +
               fixed1((y0 + y1) / 2) + ")\">R</text>\n";

        for (std::size_t i = 0; i < fdp.size(); ++i) {
            svg += "<circle class=\"point\" cx=\"" + fixed1(sx(fdp[i])) + "\" cy=\"" + fixed1(sy(rr[i])) +
                   "\" r=\"2.2\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
        }
        svg += "<line class=\"alpha\" x1=\"" + fixed1(sx(alpha)) + "\" y1=\"" + fixed1(y0) + "\" x2=\"" +
               fixed1(sx(alpha)) + "\" y2=\"" + fixed1(y1) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        if (!fdp.empty()) {
            const double mf = summarize_values(fdp).mean;
            const double mrr = summarize_values(rr).mean;
            svg += "<line class=\"mean-fdp\" x1=\"" + fixed1(sx(mf)) + "\" y1=\"" + fixed1(y0) + "\" x2=\"" +
                   fixed1(sx(mf)) + "\" y2=\"" + fixed1(y1) +
                   "\" stroke=\"firebrick\" stroke-dasharray=\"5,4\"/>\n";
            svg += "<line class=\"mean-r\" x1=\"" + fixed1(x0) + "\" y1=\"" + fixed1(sy(mrr)) + "\" x2=\"" +
                   fixed1(x1) + "\" y2=\"" + fixed1(sy(mrr)) +
                   "\" stroke=\"firebrick\" stroke-dasharray=\"5,4\"/>\n";
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_raw_csv(std::span<const RawRow> raw, const std::filesystem::path& path) {
    io::atomic_write(path, format_raw_csv(raw));
}

void write_summary_csv(std::span<const ProcedureSummary> summary, const std::filesystem::path& path) {
    io::atomic_write(path, format_summary_csv(summary));
}

void write_scatter_svg(std::span<const RawRow> raw, double alpha, const std::filesystem::path& path,
                       std::span<const Procedure> procedures) {
    io::atomic_write(path, format_scatter_svg(raw, alpha, procedures));
}

}  // namespace ebfdr
