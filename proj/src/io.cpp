#include "ebfdr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "ebfdr/errors.hpp"

namespace ebfdr::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("config: " + what); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad(std::string("key '") + key + "': " + e.what());
    }
}

template <class T>
T get_required(const json& j, const char* key) {
    if (!j.contains(key)) bad(std::string("missing key '") + key + "'");
    return get_or<T>(j, key, T{});
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void atomic_write(const fs::path& path, std::string_view content) {
    std::random_device rd;
    fs::path tmp = path;
    tmp += ".tmp-" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return os.str();
}

json to_json(const SimDesign& design) {
    json j;
    j["m"] = design.m;
    j["alpha"] = design.alpha;
    j["seed"] = design.seed;
    j["gamma"] = std::vector<double>(design.gamma.values().begin(), design.gamma.values().end());
    if (const auto* mix = std::get_if<MixtureSignal>(&design.signal)) {
        j["signal"] = {{"mode", "mixture"}, {"w0", mix->w0}, {"eta", mix->eta}, {"tau2", mix->tau2}};
    } else {
        const auto& fixed = std::get<FixedSignal>(design.signal);
        j["signal"] = {{"mode", "fixed"}, {"count", fixed.count}, {"value", fixed.value}};
        if (!fixed.indices.empty()) {
            std::vector<std::size_t> one_based;
            for (std::size_t i : fixed.indices) one_based.push_back(i + 1);
            j["signal_indices"] = one_based;
        }
    }
    return j;
}

SimDesign sim_design_from_json(const json& j) {
    if (!j.is_object()) bad("design must be a JSON object");
    SimDesign d = SimDesign::reference();
    d.m = get_or<std::size_t>(j, "m", d.m);
    d.alpha = get_or<double>(j, "alpha", d.alpha);
    d.seed = get_or<std::uint64_t>(j, "seed", d.seed);
    if (j.contains("gamma")) {
        d.gamma = AutocovSeq(get_or<std::vector<double>>(j, "gamma", {}));
    }
    if (j.contains("signal")) {
        const json& s = j.at("signal");
        if (!s.is_object()) bad("'signal' must be an object");
        const auto mode = get_required<std::string>(s, "mode");
        if (mode == "mixture") {
            MixtureSignal mix;
            mix.w0 = get_or<double>(s, "w0", mix.w0);
            mix.eta = get_or<double>(s, "eta", mix.eta);
            mix.tau2 = get_or<double>(s, "tau2", mix.tau2);
            d.signal = mix;
        } else if (mode == "fixed") {
            FixedSignal fixed;
            fixed.count = get_or<std::size_t>(s, "count", fixed.count);
            fixed.value = get_or<double>(s, "value", fixed.value);
            d.signal = fixed;
        } else {
            bad("signal mode must be 'fixed' or 'mixture', got '" + mode + "'");
        }
    }
    if (j.contains("signal_indices")) {
        auto* fixed = std::get_if<FixedSignal>(&d.signal);
        if (fixed == nullptr) bad("signal_indices requires signal mode 'fixed'");
        fixed->indices.clear();
        for (std::size_t i : get_or<std::vector<std::size_t>>(j, "signal_indices", {})) {
            if (i == 0) bad("signal_indices are 1-based");
            fixed->indices.push_back(i - 1);
        }
    }
    // Positive definiteness of the generating covariance at the design size.
    d.gamma = AutocovSeq(std::vector<double>(d.gamma.values().begin(), d.gamma.values().end()), d.m);
    d.validate();
    return d;
}

json to_json(const EstimationOptions& opts) {
    return {{"rho", opts.rho},
            {"kappa", opts.kappa},
            {"bootstrap_B", opts.bootstrap_B},
            {"k", opts.k},
            {"w0_clamp", {opts.w_lo, opts.w_hi}},
            {"quadrature_nodes", opts.quadrature_nodes},
            {"pair_normalization",
             opts.pair_normalization == PairNormalization::literal ? "literal" : "exact"}};
}

EstimationOptions estimation_options_from_json(const json& j, EstimationOptions base) {
    if (!j.is_object()) bad("'estimation' must be an object");
    EstimationOptions o = base;
    o.rho = get_or<double>(j, "rho", o.rho);
    o.kappa = get_or<double>(j, "kappa", o.kappa);
    o.bootstrap_B = get_or<std::size_t>(j, "bootstrap_B", o.bootstrap_B);
    o.k = get_or<std::size_t>(j, "k", o.k);
    o.quadrature_nodes = get_or<std::size_t>(j, "quadrature_nodes", o.quadrature_nodes);
    if (j.contains("w0_clamp")) {
        const auto clamp = get_or<std::vector<double>>(j, "w0_clamp", {});
        if (clamp.size() != 2) bad("'w0_clamp' must be [lo, hi]");
        o.w_lo = clamp[0];
        o.w_hi = clamp[1];
    }
    if (j.contains("pair_normalization")) {
        const auto mode = get_or<std::string>(j, "pair_normalization", "literal");
        if (mode == "literal") {
            o.pair_normalization = PairNormalization::literal;
        } else if (mode == "exact") {
            o.pair_normalization = PairNormalization::exact_count;
        } else {
            bad("pair_normalization must be 'literal' or 'exact'");
        }
    }
    o.validate();
    return o;
}

json to_json(const ModelParams& params) {
    return {{"eta", params.eta},
            {"tau2", params.tau2},
            {"w0", params.w0},
            {"gamma", std::vector<double>(params.gamma.values().begin(), params.gamma.values().end())}};
}

json to_json(const FitResult& fit) {
    const FitDiagnostics& d = fit.diagnostics;
    json j = to_json(fit.params);
    j["w0"] = {{"value", d.w0.value}, {"raw", d.w0.raw}, {"method", std::string(w0_method_name(d.w0.method))}};
    if (d.w0_fourier) {
        j["w0_fourier"] = {{"value", d.w0_fourier->value}, {"raw", d.w0_fourier->raw}};
    }
    j["tau2_raw"] = d.tau2_raw;
    j["gamma_raw"] = d.gamma_raw;
    json repairs = json::array();
    if (d.gamma_repair_factor != 1.0) {
        repairs.push_back({{"kind", "gamma_scale"}, {"factor", d.gamma_repair_factor}});
    }
    j["repairs"] = repairs;
    j["notes"] = d.notes;
    return j;
}

ModelParams model_params_from_json(const json& j) {
    if (!j.is_object()) bad("params must be a JSON object");
    ModelParams p;
    p.eta = get_required<double>(j, "eta");
    p.tau2 = get_required<double>(j, "tau2");
    if (!j.contains("w0")) bad("missing key 'w0'");
    const json& w = j.at("w0");
    if (w.is_number()) {
        p.w0 = w.get<double>();
    } else if (w.is_object()) {
        p.w0 = get_required<double>(w, "value");
    } else {
        bad("'w0' must be a number or an object with 'value'");
    }
    p.gamma = AutocovSeq(get_required<std::vector<double>>(j, "gamma"));
    p.validate();
    return p;
}

std::vector<double> parse_series_csv(std::string_view text) {
    std::vector<double> x;
    std::size_t line_no = 0;
    bool first = true;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        const std::size_t comma = line.rfind(',');
        const std::string_view field = comma == std::string_view::npos ? line : line.substr(comma + 1);
        double v = 0.0;
        if (!parse_double(field, v)) {
            if (first) {  // header
                first = false;
                continue;
            }
            throw std::invalid_argument("series csv: line " + std::to_string(line_no) +
                                        ": not a number");
        }
        first = false;
        if (!std::isfinite(v)) {
            throw std::invalid_argument("series csv: line " + std::to_string(line_no) + ": non-finite value");
        }
        x.push_back(v);
    }
    if (x.empty()) throw std::invalid_argument("series csv: no observations");
    return x;
}

std::string format_series_csv(const std::vector<double>& x) {
    std::string out = "index,x\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_double(x[i]);
        out += '\n';
    }
    return out;
}

std::string format_truth_csv(const GroundTruth& truth) {
    std::string out = "index,theta,mu\n";
    for (std::size_t i = 0; i < truth.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += std::to_string(static_cast<int>(truth.theta[i]));
        out += ',';
        out += format_double(truth.mu[i]);
        out += '\n';
    }
    return out;
}

}  // namespace ebfdr::io
