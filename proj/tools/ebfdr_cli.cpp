// ebfdr: simulate, estimate, score, test and benchmark empirical Bayes FDR
// procedures for Gaussian time series.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O.
// Failures print a single line on stderr:
//   error code=<n> kind=<config|numerical|io> message="..."

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ebfdr/bench.hpp"
#include "ebfdr/errors.hpp"
#include "ebfdr/estimation.hpp"
#include "ebfdr/io.hpp"
#include "ebfdr/kernels.hpp"
#include "ebfdr/model.hpp"
#include "ebfdr/posterior.hpp"
#include "ebfdr/procedures.hpp"

namespace fs = std::filesystem;
using ebfdr::io::json;

namespace {

struct SharedFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<double> alpha;
    std::optional<std::size_t> k;
    std::optional<std::size_t> threads;
    std::string isa;
    int verbosity = 0;
};

struct CliConfig {
    ebfdr::SimDesign design = ebfdr::SimDesign::reference();
    ebfdr::EstimationOptions estimation;
    std::vector<ebfdr::Procedure> procedures = ebfdr::all_procedures();
    std::size_t n_trials = 200;
    std::size_t threads = 1;
    bool fix_placement = false;
    fs::path out = ".";
    int verbosity = 0;
};

json load_config_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::string text;
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        text = os.str();
    } else {
        text = ebfdr::io::read_file(path);
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
}

CliConfig resolve_config(const SharedFlags& flags) {
    const json j = load_config_json(flags.config_path);
    CliConfig c;
    c.design = ebfdr::io::sim_design_from_json(j);
    if (j.contains("estimation")) {
        c.estimation = ebfdr::io::estimation_options_from_json(j.at("estimation"));
    }
    if (j.contains("procedures")) {
        c.procedures.clear();
        for (const auto& p : j.at("procedures")) c.procedures.push_back(ebfdr::parse_procedure(p.get<std::string>()));
    }
    if (j.contains("n_trials")) c.n_trials = j.at("n_trials").get<std::size_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
    if (j.contains("fix_placement")) c.fix_placement = j.at("fix_placement").get<bool>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("verbosity")) c.verbosity = j.at("verbosity").get<int>();

    if (flags.seed) c.design.seed = *flags.seed;
    if (flags.alpha) c.design.alpha = *flags.alpha;
    if (flags.k) c.estimation.k = *flags.k;
    if (flags.threads) c.threads = *flags.threads;
    if (!flags.out_dir.empty()) c.out = flags.out_dir;
    c.verbosity = std::max(c.verbosity, flags.verbosity);
    if (!flags.isa.empty()) {
        if (flags.isa == "scalar") {
            ebfdr::kernels::set_isa(ebfdr::kernels::Isa::scalar);
        } else if (flags.isa == "avx2") {
            ebfdr::kernels::set_isa(ebfdr::kernels::Isa::avx2);
        } else {
            throw std::invalid_argument("--isa must be scalar or avx2");
        }
    }
    c.design.validate();
    c.estimation.validate();
    if (c.threads == 0) throw std::invalid_argument("--threads must be >= 1");
    return c;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ebfdr::IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

ebfdr::W0Source parse_w0(const std::string& text) {
    if (text == "fourier") return ebfdr::W0Source::fourier();
    if (text == "bootstrap") return ebfdr::W0Source::bootstrap();
    if (text.rfind("true:", 0) == 0) {
        try {
            return ebfdr::W0Source::true_value(std::stod(text.substr(5)));
        } catch (const std::logic_error&) {
        }
    }
    throw std::invalid_argument("--w0 must be fourier, bootstrap or true:<value>, got '" + text + "'");
}

void add_shared(CLI::App* sub, SharedFlags& f) {
    sub->add_option("--config", f.config_path, "JSON configuration file ('-' reads stdin)");
    sub->add_option("--seed", f.seed, "random seed (overrides config)");
    sub->add_option("--out", f.out_dir, "output directory");
    sub->add_option("--alpha", f.alpha, "target FDR level");
    sub->add_option("--k", f.k, "window lag");
    sub->add_option("--threads", f.threads, "worker threads for bench");
    sub->add_option("--isa", f.isa, "force kernel instruction set (scalar, avx2)");
    sub->add_flag("-v,--verbose", f.verbosity, "more output");
}

int cmd_simulate(const CliConfig& c) {
    ebfdr::RngStream rng(c.design.seed);
    const auto [x, truth] = ebfdr::simulate_series(c.design, rng);
    const std::string series = ebfdr::io::format_series_csv(x);
    const std::string truth_csv = ebfdr::io::format_truth_csv(truth);
    ensure_dir(c.out);
    ebfdr::io::atomic_write(c.out / "series.csv", series);
    ebfdr::io::atomic_write(c.out / "truth.csv", truth_csv);
    if (c.verbosity > 0) {
        std::cerr << "wrote " << x.size() << " observations, " << truth.signal_count() << " signals\n";
    }
    return 0;
}

std::vector<double> load_series(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("--series is required");
    return ebfdr::io::parse_series_csv(ebfdr::io::read_file(path));
}

ebfdr::ModelParams load_params(const std::string& path) {
    const std::string text = ebfdr::io::read_file(path);
    try {
        return ebfdr::io::model_params_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("params: invalid JSON: " + std::string(e.what()));
    }
}

int cmd_estimate(const CliConfig& c, const std::string& series_path, const std::string& w0) {
    const std::vector<double> x = load_series(series_path);
    const ebfdr::FitResult fit = ebfdr::fit(x, parse_w0(w0), c.estimation, ebfdr::RngStream(c.design.seed));
    const std::string text = ebfdr::io::to_json(fit).dump(2) + "\n";
    ensure_dir(c.out);
    ebfdr::io::atomic_write(c.out / "params.json", text);
    std::cout << text;
    return 0;
}

ebfdr::ModelParams params_for_scoring(const CliConfig& c, const std::vector<double>& x,
                                      const std::string& params_path, const std::string& w0) {
    if (!params_path.empty()) return load_params(params_path);
    return ebfdr::fit(x, parse_w0(w0), c.estimation, ebfdr::RngStream(c.design.seed)).params;
}

int cmd_score(const CliConfig& c, const std::string& series_path, const std::string& params_path,
              const std::string& w0) {
    const std::vector<double> x = load_series(series_path);
    const ebfdr::ModelParams params = params_for_scoring(c, x, params_path, w0);
    const ebfdr::PosteriorScores s = ebfdr::posterior_scores(x, params, c.estimation.k);
    std::string out = "index,x,pi_hat\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += std::to_string(i + 1) + ',' + ebfdr::io::format_double(x[i]) + ',' +
               ebfdr::io::format_double(s.pi[i]) + '\n';
    }
    ensure_dir(c.out);
    ebfdr::io::atomic_write(c.out / "scores.csv", out);
    return 0;
}

int cmd_test(const CliConfig& c, const std::string& series_path, const std::string& procedure,
             const std::string& params_path, const std::string& w0_text) {
    const std::vector<double> x = load_series(series_path);
    const ebfdr::Procedure p = ebfdr::parse_procedure(procedure);
    std::optional<ebfdr::ModelParams> given;
    if (!params_path.empty()) given = load_params(params_path);
    std::optional<double> w0_true;
    if (!w0_text.empty()) {
        const ebfdr::W0Source src = parse_w0(w0_text);
        if (src.method == ebfdr::W0Method::true_value) w0_true = src.value;
    }
    if (!w0_true && given) w0_true = given->w0;

    const double alpha = c.design.alpha;
    const std::size_t k = c.estimation.k;
    ebfdr::Decision d;
    std::vector<double> score;
    std::string score_name = "pi_hat";
    switch (p) {
        case ebfdr::Procedure::bh_w0: {
            score = ebfdr::normal_p_values(x);
            score_name = "p";
            d = ebfdr::bh_adaptive(score, alpha, w0_true.value_or(1.0));
            break;
        }
        case ebfdr::Procedure::approx_bayes: {
            if (!given) throw std::invalid_argument("approx-bayes requires --params with the true parameters");
            const ebfdr::PosteriorScores s = ebfdr::posterior_scores(x, *given, k);
            score = s.pi;
            d = ebfdr::cutoff_running_mean(s, alpha);
            break;
        }
        case ebfdr::Procedure::eb_w0:
        case ebfdr::Procedure::eb_fourier:
        case ebfdr::Procedure::eb_bootstrap: {
            ebfdr::W0Source src = ebfdr::W0Source::fourier();
            if (p == ebfdr::Procedure::eb_bootstrap) src = ebfdr::W0Source::bootstrap();
            if (p == ebfdr::Procedure::eb_w0) {
                if (!w0_true) throw std::invalid_argument("eb-true requires --w0 true:<value> or --params");
                src = ebfdr::W0Source::true_value(*w0_true);
            }
            const auto r = ebfdr::empirical_bayes(x, alpha, k, src, c.estimation, ebfdr::RngStream(c.design.seed));
            score = r.scores.pi;
            d = r.decision;
            break;
        }
    }
    std::vector<char> rejected(x.size(), 0);
    for (std::size_t i : d.rejected) rejected[i] = 1;
    std::string out = "index,x," + score_name + ",rejected\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += std::to_string(i + 1) + ',' + ebfdr::io::format_double(x[i]) + ',' +
               ebfdr::io::format_double(score[i]) + ',' + (rejected[i] ? "1" : "0") + '\n';
    }
    ensure_dir(c.out);
    ebfdr::io::atomic_write(c.out / "decision.csv", out);
    std::cout << "k_hat," << d.k_hat << "\n";
    return 0;
}

int cmd_bench(const CliConfig& c) {
    ebfdr::BenchOptions opts;
    opts.estimation = c.estimation;
    opts.k = c.estimation.k;
    opts.threads = c.threads;
    opts.fix_placement = c.fix_placement;
    const ebfdr::BenchResult r =
        ebfdr::run_benchmark(c.design, c.procedures, c.n_trials, c.design.seed, opts);

    // The scatter figure leaves out the approximate Bayes arm unless it is
    // the only one requested.
    std::vector<ebfdr::Procedure> panels;
    for (ebfdr::Procedure p : c.procedures) {
        if (p != ebfdr::Procedure::approx_bayes) panels.push_back(p);
    }
    if (panels.empty()) panels = c.procedures;

    const std::string raw = ebfdr::format_raw_csv(r.raw);
    const std::string summary = ebfdr::format_summary_csv(r.summary);
    const std::string table = ebfdr::format_summary_table(r.summary);
    std::string svg;
    if (!r.raw.empty()) svg = ebfdr::format_scatter_svg(r.raw, c.design.alpha, panels);

    ensure_dir(c.out);
    ebfdr::io::atomic_write(c.out / "raw.csv", raw);
    ebfdr::io::atomic_write(c.out / "summary.csv", summary);
    ebfdr::io::atomic_write(c.out / "summary.txt", table);
    if (!svg.empty()) ebfdr::io::atomic_write(c.out / "scatter.svg", svg);
    std::cout << table;
    if (c.verbosity > 0) {
        for (const std::string& f : r.failures) std::cerr << "failed: " << f << "\n";
    }
    return 0;
}

int fail(int code, const char* kind, const std::string& message) {
    std::string flat = message;
    for (char& ch : flat) {
        if (ch == '\n' || ch == '\r') ch = ' ';
        if (ch == '"') ch = '\'';
    }
    std::cerr << "error code=" << code << " kind=" << kind << " message=\"" << flat << "\"\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical Bayes FDR control for dependent Gaussian time series"};
    app.require_subcommand(1);

    SharedFlags shared;
    std::string series_path;
    std::string params_path;
    std::string w0 = "fourier";
    std::string procedure = "eb-fourier";
    std::optional<std::size_t> n_trials;
    std::string procedures_csv;
    bool fix_placement = false;

    CLI::App* simulate = app.add_subcommand("simulate", "simulate a series; writes series.csv and truth.csv");
    CLI::App* estimate = app.add_subcommand("estimate", "fit model parameters; writes params.json");
    CLI::App* score = app.add_subcommand("score", "windowed posterior null probabilities; writes scores.csv");
    CLI::App* test = app.add_subcommand("test", "run one procedure; writes decision.csv");
    CLI::App* bench = app.add_subcommand("bench", "Monte Carlo comparison; writes raw.csv, summary.csv, summary.txt, scatter.svg");
    for (CLI::App* sub : {simulate, estimate, score, test, bench}) add_shared(sub, shared);
    for (CLI::App* sub : {estimate, score, test}) {
        sub->add_option("--series", series_path, "series CSV (index,x)")->required();
        sub->add_option("--w0", w0, "w0 source: fourier, bootstrap or true:<value>");
    }
    score->add_option("--params", params_path, "params JSON (skips fitting)");
    test->add_option("--params", params_path, "params JSON (true parameters for approx-bayes)");
    test->add_option("--procedure", procedure, "bh, approx-bayes, eb-true, eb-fourier, eb-bootstrap");
    bench->add_option("--trials", n_trials, "number of trials");
    bench->add_option("--procedures", procedures_csv, "comma-separated procedure list");
    bench->add_flag("--fix-placement", fix_placement, "reuse one signal placement across trials");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "config", e.what());
    }

    try {
        CliConfig c = resolve_config(shared);
        if (n_trials) c.n_trials = *n_trials;
        if (fix_placement) c.fix_placement = true;
        if (!procedures_csv.empty()) {
            c.procedures.clear();
            std::stringstream ss(procedures_csv);
            for (std::string item; std::getline(ss, item, ',');) {
                if (!item.empty()) c.procedures.push_back(ebfdr::parse_procedure(item));
            }
        }
        if (simulate->parsed()) return cmd_simulate(c);
        if (estimate->parsed()) return cmd_estimate(c, series_path, w0);
        if (score->parsed()) return cmd_score(c, series_path, params_path, w0);
        if (test->parsed()) {
            const bool w0_given = test->count("--w0") > 0;
            return cmd_test(c, series_path, procedure, params_path, w0_given ? w0 : std::string{});
        }
        if (bench->parsed()) return cmd_bench(c);
    } catch (const ebfdr::IoError& e) {
        return fail(4, "io", e.what());
    } catch (const ebfdr::NumericalError& e) {
        return fail(3, "numerical", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(2, "config", e.what());
    } catch (const json::exception& e) {
        return fail(2, "config", e.what());
    } catch (const std::exception& e) {
        return fail(3, "numerical", e.what());
    }
    return 0;
}
