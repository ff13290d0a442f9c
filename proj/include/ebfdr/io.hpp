#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ebfdr/estimation.hpp"
#include "ebfdr/model.hpp"

namespace ebfdr::io {

using nlohmann::json;

/// Shortest decimal that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

/// Writes `content` to a temporary sibling and renames it over `path`.
/// Throws IoError with the path on failure.
void atomic_write(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

// JSON mapping. Parsing throws std::invalid_argument on missing or malformed
// keys and validates the result.

[[nodiscard]] json to_json(const SimDesign& design);
[[nodiscard]] SimDesign sim_design_from_json(const json& j);

[[nodiscard]] json to_json(const EstimationOptions& opts);
/// Missing keys keep the values in `base`.
[[nodiscard]] EstimationOptions estimation_options_from_json(const json& j,
                                                             EstimationOptions base = {});

/// eta, tau2, w0 {value, raw, method}, gamma, plus diagnostics when given.
[[nodiscard]] json to_json(const ModelParams& params);
[[nodiscard]] json to_json(const FitResult& fit);
/// Accepts w0 as a number or as an object with "value".
[[nodiscard]] ModelParams model_params_from_json(const json& j);

/// Reads a series CSV ("index,x" header, or a single column of values).
[[nodiscard]] std::vector<double> parse_series_csv(std::string_view text);
[[nodiscard]] std::string format_series_csv(const std::vector<double>& x);
[[nodiscard]] std::string format_truth_csv(const GroundTruth& truth);

}  // namespace ebfdr::io
