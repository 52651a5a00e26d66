// openchain: run, compare, convergence-scan, fit, plateau.
//
// Exit status 0 on success. On failure a JSON object
//   {"error": <kind>, "message": <text>, "violations": [...]}
// goes to stderr and the exit status is 1 (2 for command-line usage errors).

#include "openchain/runner.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <sstream>

using namespace openchain;
using nlohmann::json;

namespace {

int fail(const std::string &kind, const std::string &message, const std::vector<std::string> &violations = {}, int code = 1) {
    json j{{"error", kind}, {"message", message}};
    if(!violations.empty()) j["violations"] = violations;
    std::cerr << j.dump() << std::endl;
    return code;
}

std::vector<double> parse_list(const std::string &s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while(std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double x         = 0.0;
        try {
            x = std::stod(item, &used);
        } catch(const std::exception &) { used = 0; }
        if(used == 0 || used != item.size()) throw Error(ErrorKind::invalid_argument, "bad list entry '" + item + "'");
        out.push_back(x);
    }
    return out;
}

} // namespace

int main(int argc, char **argv) {
    auto log = spdlog::stderr_color_mt("openchain");
    spdlog::set_default_logger(log);
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Open XXZ chain dynamics: MPDO, iTEBD, quantum trajectories and a dense reference"};
    app.require_subcommand(1);
    app.set_version_flag("--version", OPENCHAIN_VERSION);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only warnings and errors on stderr");

    unsigned threads = 1;

    auto *run_cmd = app.add_subcommand("run", "Run a config (or a manifest) and write its artifacts");
    std::string config_path;
    run_cmd->add_option("config", config_path, "JSON config or manifest.json")->required();
    run_cmd->add_option("--threads", threads, "Worker threads for QT ensembles (0 = all cores); results do not depend on it");

    auto *cmp_cmd = app.add_subcommand("compare", "Max-abs deviation between two trace CSVs");
    std::string trace_a, trace_b;
    cmp_cmd->add_option("a", trace_a, "First trace.csv")->required();
    cmp_cmd->add_option("b", trace_b, "Second trace.csv")->required();

    auto *scan_cmd = app.add_subcommand("convergence-scan", "Run a chi or dt ladder and compare successive rungs");
    std::string scan_config, axis_name, values_text;
    double threshold = 1e-3;
    scan_cmd->add_option("config", scan_config, "JSON config")->required();
    scan_cmd->add_option("--axis", axis_name, "chi or dt")->required();
    scan_cmd->add_option("--values", values_text, "Comma-separated ladder, e.g. 8,16,32")->required();
    scan_cmd->add_option("--threshold", threshold, "Entropy deviation counted as converged")->capture_default_str();
    scan_cmd->add_option("--threads", threads, "Worker threads for QT ensembles");

    auto *fit_cmd = app.add_subcommand("fit", "Power-law or logarithmic fit of a trace column");
    std::string fit_trace, fit_model_name = "power_law", fit_col = "S_bond_avg";
    double t_min = 1.1, t_max = 3.9;
    fit_cmd->add_option("trace", fit_trace, "trace.csv")->required();
    fit_cmd->add_option("--model", fit_model_name, "power_law or log_growth")->capture_default_str();
    fit_cmd->add_option("--column", fit_col, "Column to fit")->capture_default_str();
    fit_cmd->add_option("--t-min", t_min, "Window start")->capture_default_str();
    fit_cmd->add_option("--t-max", t_max, "Window end")->capture_default_str();

    auto *plateau_cmd = app.add_subcommand("plateau", "Large-rate estimate of the trajectory entanglement plateau");
    double gamma = 0.0, J = 1.0;
    plateau_cmd->add_option("--gamma", gamma, "gamma_plus = gamma_minus")->required();
    plateau_cmd->add_option("--J", J, "Exchange coupling")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch(const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch(const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch(const CLI::ParseError &e) { return fail("usage", e.what(), {}, 2); }

    if(quiet) spdlog::set_level(spdlog::level::warn);
    auto progress = [](const std::string &msg) { spdlog::info("{}", msg); };

    try {
        if(*run_cmd) {
            const auto cfg = load_run_config(config_path);
            spdlog::info("engine {} -> {}", to_string(cfg.engine), resolve_output_dir(cfg).string());
            const auto out = run(cfg, threads, progress);
            json summary{{"output_dir", out.directory.string()}, {"files", out.files}};
            if(out.fit) summary["fit"] = json::parse(to_json(*out.fit, cfg.engine == Engine::qt ? "S_bond_avg" : "S_center"));
            std::cout << summary.dump(2) << std::endl;
        } else if(*cmp_cmd) {
            std::cout << to_json(compare_traces(read_trace_csv(trace_a), read_trace_csv(trace_b))) << std::endl;
        } else if(*scan_cmd) {
            const auto cfg = load_run_config(scan_config);
            const auto rep = convergence_scan(cfg, scan_axis_from_string(axis_name), parse_list(values_text), threshold, threads, progress);
            std::cout << to_json(rep) << std::endl;
        } else if(*fit_cmd) {
            const auto table = read_trace_csv(fit_trace);
            const auto model = fit_model_from_string(fit_model_name);
            if(model == FitModel::none) throw Error(ErrorKind::invalid_argument, "fit model must be power_law or log_growth");
            const auto t = table.column("t"), s = table.column(fit_col);
            const FitWindow w{t_min, t_max};
            std::cout << to_json(model == FitModel::power_law ? fit_power_law(t, s, w) : fit_log_growth(t, s, w), fit_col) << std::endl;
        } else if(*plateau_cmd) {
            std::cout << to_json(plateau_terms(gamma, J), gamma, J) << std::endl;
        }
    } catch(const ConfigError &e) {
        return fail(to_string(e.kind()), "invalid configuration", e.violations());
    } catch(const Error &e) {
        return fail(to_string(e.kind()), e.what());
    } catch(const std::exception &e) { return fail("internal", e.what()); }
    return 0;
}
