#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebfdr/estimation.hpp"
#include "ebfdr/model.hpp"
#include "ebfdr/procedures.hpp"

namespace ebfdr {

enum class Procedure { bh_w0, approx_bayes, eb_w0, eb_fourier, eb_bootstrap };

/// CLI identifier: bh, approx-bayes, eb-true, eb-fourier, eb-bootstrap.
[[nodiscard]] std::string_view procedure_id(Procedure p) noexcept;
/// Table label: BH-w0, Approximate Bayes, EB-w0, EB-Fourier, EB-bootstrap.
[[nodiscard]] std::string_view procedure_label(Procedure p) noexcept;
/// Accepts the CLI identifier or the table label. Throws std::invalid_argument.
[[nodiscard]] Procedure parse_procedure(std::string_view text);
/// All five, in table order.
[[nodiscard]] std::vector<Procedure> all_procedures();

struct TrialMetrics {
    std::size_t R = 0;
    std::size_t V = 0;
    double fdp = 0.0;            ///< V / R, 0 when R = 0
    std::optional<double> ppv;   ///< 1 - V / R, only when R > 0
};

[[nodiscard]] TrialMetrics score_decisions(const Decision& decision, const GroundTruth& truth);

struct BenchOptions {
    EstimationOptions estimation;
    std::size_t k = 2;
    std::size_t threads = 1;
    /// Draw one signal placement from the base seed and reuse it each trial.
    bool fix_placement = false;
};

struct ProcedureOutcome {
    Procedure procedure = Procedure::bh_w0;
    std::optional<TrialMetrics> metrics;
    std::string error;  ///< set when metrics is empty
};

/// Seed of trial t: mix64(base_seed + golden * (t + 1)).
[[nodiscard]] std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial);

/// One simulated series, every procedure applied to it. Procedure failures
/// are recorded, not thrown.
[[nodiscard]] std::vector<ProcedureOutcome> run_trial(const SimDesign& design,
                                                      std::span<const Procedure> procedures,
                                                      const BenchOptions& opts,
                                                      std::uint64_t trial_seed);

struct RawRow {
    std::size_t trial = 0;
    Procedure procedure = Procedure::bh_w0;
    std::size_t R = 0;
    std::size_t V = 0;
    double fdp = 0.0;
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  ///< divisor n - 1; 0 when n < 2
    std::size_t n = 0;
};

struct ProcedureSummary {
    Procedure procedure = Procedure::bh_w0;
    MetricSummary fdp;
    MetricSummary R;
    MetricSummary V;
    MetricSummary ppv;  ///< over trials with R > 0
    std::size_t trials = 0;
    std::size_t failures = 0;
};

struct BenchResult {
    std::vector<RawRow> raw;  ///< trial-major, procedures in request order
    std::vector<ProcedureSummary> summary;
    std::vector<std::string> failures;
};

/// Two-pass mean and sample standard deviation, summed in input order.
[[nodiscard]] MetricSummary summarize_values(std::span<const double> values);

/// Per-procedure summaries from raw rows, in the order of `procedures`.
[[nodiscard]] std::vector<ProcedureSummary> summarize(std::span<const RawRow> raw,
                                                      std::span<const Procedure> procedures);

[[nodiscard]] BenchResult run_benchmark(const SimDesign& design,
                                        std::span<const Procedure> procedures,
                                        std::size_t n_trials, std::uint64_t base_seed,
                                        const BenchOptions& opts);

// -- output ------------------------------------------------------------------

/// Header "trial,procedure,R,V,FDP"; trial is 1-based.
[[nodiscard]] std::string format_raw_csv(std::span<const RawRow> raw);
/// Header "procedure,metric,mean,sd,n"; metrics FDP, R, V, PPV.
[[nodiscard]] std::string format_summary_csv(std::span<const ProcedureSummary> summary);
/// Aligned text table in the layout of the published summary table.
[[nodiscard]] std::string format_summary_table(std::span<const ProcedureSummary> summary);
/// Scatter of (FDP, R) per procedure, one panel each.
[[nodiscard]] std::string format_scatter_svg(std::span<const RawRow> raw, double alpha,
                                             std::span<const Procedure> procedures);

void write_raw_csv(std::span<const RawRow> raw, const std::filesystem::path& path);
void write_summary_csv(std::span<const ProcedureSummary> summary,
                       const std::filesystem::path& path);
/// Panels for `procedures` (all procedures present in `raw` when empty).
void write_scatter_svg(std::span<const RawRow> raw, double alpha,
                       const std::filesystem::path& path,
                       std::span<const Procedure> procedures = {});

}  // namespace ebfdr
