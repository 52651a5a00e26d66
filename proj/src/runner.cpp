#include "openchain/runner.hpp"

#include "openchain/itebd.hpp"
#include "openchain/mpdo.hpp"
#include "openchain/oracle.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace openchain {

using nlohmann::json;
namespace fs = std::filesystem;

const char *to_string(Engine e) {
    switch(e) {
        case Engine::mpdo: return "mpdo";
        case Engine::itebd: return "itebd";
        case Engine::qt: return "qt";
        case Engine::oracle: return "oracle";
    }
    return "?";
}

Engine engine_from_string(const std::string &s) {
    for(auto e : {Engine::mpdo, Engine::itebd, Engine::qt, Engine::oracle})
        if(s == to_string(e)) return e;
    throw Error(ErrorKind::invalid_argument, "unknown engine '" + s + "' (expected mpdo, itebd, qt or oracle)");
}

const char *to_string(FitModel m) {
    switch(m) {
        case FitModel::none: return "none";
        case FitModel::power_law: return "power_law";
        case FitModel::log_growth: return "log_growth";
    }
    return "?";
}

FitModel fit_model_from_string(const std::string &s) {
    for(auto m : {FitModel::none, FitModel::power_law, FitModel::log_growth})
        if(s == to_string(m)) return m;
    throw Error(ErrorKind::invalid_argument, "unknown fit model '" + s + "' (expected none, power_law or log_growth)");
}

namespace {

bool is_multiple(double span, double step) {
    const double r = span / step;
    const double k = std::round(r);
    return k >= 1 && std::abs(r - k) <= 1e-9 * std::max(1.0, k);
}

Index ratio(double span, double step) { return static_cast<Index>(std::llround(span / step)); }

std::string number(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

} // namespace

std::vector<std::string> RunConfig::violations() const {
    std::vector<std::string> v;
    if(engine == Engine::qt) {
        v = trajectory_config().violations();
        if(n_traj < 1) v.emplace_back("n_traj must be >= 1");
    } else {
        v = model.violations();
        if(engine == Engine::itebd && !model.infinite) v.emplace_back("engine itebd requires n_sites = \"infinite\"");
        if(engine != Engine::itebd && model.infinite) v.emplace_back(std::string("engine ") + to_string(engine) + " requires a finite chain");
        if(engine == Engine::oracle && !model.infinite && model.n_sites > oracle::max_density_sites)
            v.emplace_back("engine oracle supports at most " + std::to_string(oracle::max_density_sites) + " sites");
        if(chi < 1) v.emplace_back("chi must be >= 1");
        if(!(cutoff >= 0)) v.emplace_back("cutoff must be non-negative");
        if(!(dt > 0)) v.emplace_back("dt must be positive");
        if(!(dt_obs > 0)) v.emplace_back("dt_obs must be positive");
        if(!(t_max > 0)) v.emplace_back("t_max must be positive");
        if(trotter_order != 2 && trotter_order != 4) v.emplace_back("trotter_order must be 2 or 4");
        if(dt_obs > 0 && t_max > 0 && !is_multiple(t_max, dt_obs)) v.emplace_back("t_max must be a multiple of dt_obs");
        if(engine != Engine::oracle && dt > 0 && dt_obs > 0 && !is_multiple(dt_obs, dt)) v.emplace_back("dt_obs must be a multiple of dt");
    }
    if(engine == Engine::itebd && reorth_interval < 1) v.emplace_back("reorth_interval must be >= 1");
    if(fit != FitModel::none) {
        if(!(fit_t_min > 0)) v.emplace_back("fit_t_min must be positive");
        if(!(fit_t_min < fit_t_max)) v.emplace_back("fit_t_min must be below fit_t_max");
        if(fit_t_max > t_max + 1e-9) v.emplace_back("fit_t_max must not exceed t_max");
    }
    if(output_dir.empty()) v.emplace_back("output_dir must not be empty");
    return v;
}

void RunConfig::validate() const {
    auto v = violations();
    if(!v.empty()) throw ConfigError(std::move(v));
}

TrajectoryConfig RunConfig::trajectory_config() const {
    TrajectoryConfig t;
    t.model         = model;
    t.chi           = chi;
    t.cutoff        = cutoff;
    t.dt            = dt;
    t.dt_obs        = dt_obs;
    t.t_max         = t_max;
    t.seed          = seed;
    t.scheme        = scheme;
    t.trotter_order = trotter_order;
    return t;
}

RunConfig parse_run_config(const std::string &json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch(const json::parse_error &e) { throw ConfigError({std::string("config is not valid JSON: ") + e.what()}); }
    if(doc.is_object() && doc.contains("config") && doc["config"].is_object()) doc = doc["config"];
    if(!doc.is_object()) throw ConfigError({"config must be a JSON object"});

    RunConfig c;
    std::vector<std::string> problems;
    std::set<std::string> seen;
    auto field = [&](const char *key, auto &&assign) {
        seen.insert(key);
        if(!doc.contains(key)) return;
        try {
            assign(doc.at(key));
        } catch(const std::exception &e) { problems.push_back(std::string(key) + ": " + e.what()); }
    };
    field("engine", [&](const json &j) { c.engine = engine_from_string(j.get<std::string>()); });
    field("J", [&](const json &j) { c.model.J = j.get<double>(); });
    field("delta", [&](const json &j) { c.model.delta = j.get<double>(); });
    field("gamma_plus", [&](const json &j) { c.model.gamma_plus = j.get<double>(); });
    field("gamma_minus", [&](const json &j) { c.model.gamma_minus = j.get<double>(); });
    field("gamma_z", [&](const json &j) { c.model.gamma_z = j.get<double>(); });
    field("n_sites", [&](const json &j) {
        if(j.is_string()) {
            if(j.get<std::string>() != "infinite") throw Error(ErrorKind::invalid_argument, "expected an integer or \"infinite\"");
            c.model.infinite = true;
        } else {
            if(!j.is_number_integer()) throw Error(ErrorKind::invalid_argument, "expected an integer or \"infinite\"");
            c.model.n_sites = j.get<Index>();
        }
    });
    field("chi", [&](const json &j) {
        if(!j.is_number_integer()) throw Error(ErrorKind::invalid_argument, "expected an integer");
        c.chi = j.get<Index>();
    });
    field("cutoff", [&](const json &j) { c.cutoff = j.get<double>(); });
    field("dt", [&](const json &j) { c.dt = j.get<double>(); });
    field("dt_obs", [&](const json &j) { c.dt_obs = j.get<double>(); });
    field("t_max", [&](const json &j) { c.t_max = j.get<double>(); });
    field("n_traj", [&](const json &j) {
        if(!j.is_number_unsigned()) throw Error(ErrorKind::invalid_argument, "expected a non-negative integer");
        c.n_traj = j.get<std::size_t>();
    });
    field("seed", [&](const json &j) {
        if(!j.is_number_unsigned()) throw Error(ErrorKind::invalid_argument, "expected a non-negative integer");
        c.seed = j.get<std::uint64_t>();
    });
    field("scheme", [&](const json &j) { c.scheme = jump_scheme_from_string(j.get<std::string>()); });
    field("trotter_order", [&](const json &j) { c.trotter_order = j.get<int>(); });
    field("basis", [&](const json &j) { c.basis = basis_flavor_from_string(j.get<std::string>()); });
    field("reorth_interval", [&](const json &j) { c.reorth_interval = j.get<int>(); });
    field("write_trajectories", [&](const json &j) { c.write_trajectories = j.get<bool>(); });
    field("fit", [&](const json &j) { c.fit = fit_model_from_string(j.get<std::string>()); });
    field("fit_t_min", [&](const json &j) { c.fit_t_min = j.get<double>(); });
    field("fit_t_max", [&](const json &j) { c.fit_t_max = j.get<double>(); });
    field("output_dir", [&](const json &j) { c.output_dir = j.get<std::string>(); });
    for(const auto &item : doc.items())
        if(!seen.contains(item.key())) problems.push_back("unknown key '" + item.key() + "'");
    for(auto &v : c.violations()) problems.push_back(std::move(v));
    if(!problems.empty()) throw ConfigError(std::move(problems));
    return c;
}

RunConfig load_run_config(const fs::path &file) {
    std::ifstream in(file);
    if(!in) throw Error(ErrorKind::io, "cannot read config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

namespace {

json config_json(const RunConfig &c) {
    json j;
    j["engine"]      = to_string(c.engine);
    j["J"]           = c.model.J;
    j["delta"]       = c.model.delta;
    j["gamma_plus"]  = c.model.gamma_plus;
    j["gamma_minus"] = c.model.gamma_minus;
    j["gamma_z"]     = c.model.gamma_z;
    if(c.model.infinite) j["n_sites"] = "infinite";
    else j["n_sites"] = c.model.n_sites;
    j["chi"]                = c.chi;
    j["cutoff"]             = c.cutoff;
    j["dt"]                 = c.dt;
    j["dt_obs"]             = c.dt_obs;
    j["t_max"]              = c.t_max;
    j["n_traj"]             = c.n_traj;
    j["seed"]               = c.seed;
    j["scheme"]             = to_string(c.scheme);
    j["trotter_order"]      = c.trotter_order;
    j["basis"]              = to_string(c.basis);
    j["reorth_interval"]    = c.reorth_interval;
    j["write_trajectories"] = c.write_trajectories;
    j["fit"]                = to_string(c.fit);
    j["fit_t_min"]          = c.fit_t_min;
    j["fit_t_max"]          = c.fit_t_max;
    j["output_dir"]         = c.output_dir;
    return j;
}

} // namespace

std::string to_json(const RunConfig &cfg) { return config_json(cfg).dump(2); }

fs::path resolve_output_dir(const RunConfig &cfg) {
    fs::path dir(cfg.output_dir);
    if(dir.is_absolute()) return dir;
    if(const char *root = std::getenv("OPENCHAIN_OUTPUT_ROOT"); root != nullptr && *root != '\0') return fs::path(root) / dir;
    return dir;
}

// ---------------------------------------------------------------- trace tables

std::vector<double> TraceTable::column(const std::string &name) const {
    for(std::size_t k = 0; k < columns.size(); ++k) {
        if(columns[k] != name) continue;
        std::vector<double> out;
        out.reserve(rows.size());
        for(const auto &r : rows) out.push_back(r[k]);
        return out;
    }
    throw Error(ErrorKind::invalid_argument, "trace has no column '" + name + "'");
}

bool TraceTable::has_column(const std::string &name) const { return std::find(columns.begin(), columns.end(), name) != columns.end(); }

void write_trace_csv(const TraceTable &table, const fs::path &file) {
    std::ofstream out(file, std::ios::binary);
    if(!out) throw Error(ErrorKind::io, "cannot write " + file.string());
    for(std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
    out << '\n';
    for(const auto &row : table.rows) {
        for(std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << number(row[k]);
        out << '\n';
    }
    if(!out) throw Error(ErrorKind::io, "error writing " + file.string());
}

TraceTable read_trace_csv(const fs::path &file) {
    std::ifstream in(file);
    if(!in) throw Error(ErrorKind::io, "cannot read " + file.string());
    TraceTable t;
    std::string line;
    if(!std::getline(in, line)) throw Error(ErrorKind::io, file.string() + ": empty file");
    {
        std::stringstream ss(line);
        std::string cell;
        while(std::getline(ss, cell, ',')) t.columns.push_back(cell);
    }
    if(t.columns.empty() || t.columns.front() != "t") throw Error(ErrorKind::io, file.string() + ": first column must be t");
    std::size_t lineno = 1;
    while(std::getline(in, line)) {
        ++lineno;
        if(line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while(std::getline(ss, cell, ',')) {
            double x   = 0.0;
            auto res   = std::from_chars(cell.data(), cell.data() + cell.size(), x);
            if(res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                throw Error(ErrorKind::io, file.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            row.push_back(x);
        }
        if(row.size() != t.columns.size())
            throw Error(ErrorKind::io, file.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) + " cells");
        t.rows.push_back(std::move(row));
    }
    return t;
}

// --------------------------------------------------------------------- engines

namespace {

using Progress = std::function<void(const std::string &)>;

struct EngineResult {
    TraceTable table;
    json diagnostics = json::object();
    json ensemble;                        ///< qt only
    std::vector<TraceTable> trajectories; ///< qt with write_trajectories
};

std::vector<std::string> base_columns(Index n_sz) {
    std::vector<std::string> c{"t", "S_center", "S_bond_avg"};
    for(Index i = 0; i < n_sz; ++i) c.push_back("sz_site_" + std::to_string(i));
    return c;
}

void say(const Progress &p, const std::string &msg) {
    if(p) p(msg);
}

double mean_over(const std::vector<Index> &bonds, const std::function<double(Index)> &f) {
    double s = 0.0;
    for(auto b : bonds) s += f(b);
    return s / static_cast<double>(bonds.size());
}

template<typename Scalar>
EngineResult run_mpdo(const RunConfig &cfg, const Progress &progress) {
    const Index n       = cfg.model.n_sites;
    const auto bonds    = averaging_bonds(n);
    const Index center  = n / 2 - 1;
    const Index per_obs = ratio(cfg.dt_obs, cfg.dt);
    const Index n_obs   = ratio(cfg.t_max, cfg.dt_obs);
    auto state          = neel_mpdo<Scalar>(n, cfg.basis);
    MpdoPropagator<Scalar> prop(cfg.model, cfg.basis, cfg.dt, cfg.trotter_order);

    EngineResult res;
    res.table.columns = base_columns(n);
    res.table.columns.emplace_back("trace");
    double max_tw = 0.0, max_trace_dev = 0.0;
    Index max_bond = 1;
    auto record = [&](double t, double trace) {
        std::vector<double> row{t, operator_entanglement(state, center),
                                mean_over(bonds, [&](Index b) { return operator_entanglement(state, b); })};
        for(double z : mpdo_local_expectations(state, spin::sigma_z())) row.push_back(z);
        row.push_back(trace);
        res.table.rows.push_back(std::move(row));
    };
    record(0.0, mpdo_trace(state));
    for(Index k = 1; k <= n_obs; ++k) {
        double trace = 1.0;
        for(Index s = 0; s < per_obs; ++s) {
            const auto st = prop.step(state, cfg.chi, cfg.cutoff);
            max_tw        = std::max(max_tw, st.max_truncation_weight);
            trace         = st.trace_before;
            max_trace_dev = std::max(max_trace_dev, std::abs(st.trace_before - 1.0));
        }
        max_bond = std::max(max_bond, state.max_bond_dim());
        record(static_cast<double>(k) * cfg.dt_obs, trace);
        say(progress, "t = " + number(static_cast<double>(k) * cfg.dt_obs) + ", S_center = " + number(res.table.rows.back()[1]) +
                          ", chi = " + std::to_string(state.max_bond_dim()));
    }
    res.diagnostics["max_truncation_weight"] = max_tw;
    res.diagnostics["max_bond_dim"]          = max_bond;
    res.diagnostics["max_trace_deviation"]   = max_trace_dev;
    return res;
}

template<typename Scalar>
EngineResult run_itebd(const RunConfig &cfg, const Progress &progress) {
    const Index per_obs = ratio(cfg.dt_obs, cfg.dt);
    const Index n_obs   = ratio(cfg.t_max, cfg.dt_obs);
    auto state          = neel_infinite_mpdo<Scalar>(cfg.basis);
    ItebdPropagator<Scalar> prop(cfg.model, cfg.basis, cfg.dt, cfg.trotter_order, cfg.reorth_interval);

    EngineResult res;
    res.table.columns = base_columns(2);
    double max_tw = 0.0, max_canon = 0.0;
    Index max_bond = 1;
    auto record = [&](double t) {
        auto probe = state;
        const auto rep = reorthogonalize(probe, cfg.chi, cfg.cutoff);
        max_canon      = std::max(max_canon, rep.canonical_error);
        const double s0 = infinite_operator_entanglement(probe, 0), s1 = infinite_operator_entanglement(probe, 1);
        const auto sz   = infinite_local_expectations(probe, spin::sigma_z());
        res.table.rows.push_back({t, s0, 0.5 * (s0 + s1), sz[0], sz[1]});
    };
    record(0.0);
    for(Index k = 1; k <= n_obs; ++k) {
        for(Index s = 0; s < per_obs; ++s) max_tw = std::max(max_tw, prop.step(state, cfg.chi, cfg.cutoff).max_truncation_weight);
        max_bond = std::max(max_bond, state.max_bond_dim());
        record(static_cast<double>(k) * cfg.dt_obs);
        say(progress, "t = " + number(static_cast<double>(k) * cfg.dt_obs) + ", S_center = " + number(res.table.rows.back()[1]) +
                          ", chi = " + std::to_string(state.max_bond_dim()));
    }
    res.diagnostics["max_truncation_weight"]  = max_tw;
    res.diagnostics["max_bond_dim"]           = max_bond;
    res.diagnostics["max_canonical_error"]    = max_canon;
    return res;
}

EngineResult run_oracle(const RunConfig &cfg, const Progress &progress) {
    const Index n      = cfg.model.n_sites;
    const auto bonds   = averaging_bonds(n);
    const Index center = n / 2 - 1;
    say(progress, "dense Lindblad integration, N = " + std::to_string(n));
    const auto series = oracle::lindblad_evolve(oracle::neel_density(n), cfg.model, cfg.dt_obs, cfg.t_max);
    EngineResult res;
    res.table.columns = base_columns(n);
    res.table.columns.emplace_back("trace");
    double max_trace_dev = 0.0;
    for(std::size_t k = 0; k < series.times.size(); ++k) {
        const auto &rho = series.states[k];
        std::vector<double> row{series.times[k], oracle::dense_oe(rho, center),
                                mean_over(bonds, [&](Index b) { return oracle::dense_oe(rho, b); })};
        for(double z : oracle::site_expectations(rho, spin::sigma_z())) row.push_back(z);
        const double tr = rho.trace().real();
        max_trace_dev   = std::max(max_trace_dev, std::abs(tr - 1.0));
        row.push_back(tr);
        res.table.rows.push_back(std::move(row));
    }
    res.diagnostics["max_trace_deviation"] = max_trace_dev;
    return res;
}

json stats_json(const EnsembleStats &s) {
    return json{{"mean", s.mean}, {"stddev", s.stddev}, {"standard_error", s.standard_error}};
}

TraceTable trajectory_table(const EntropyTrace &tr) {
    const auto n = static_cast<Index>(tr.sz.front().size());
    TraceTable t;
    t.columns = base_columns(n);
    t.columns.emplace_back("jumps_cum");
    const auto sc = center_entropy(tr);
    const auto sa = bond_averaged_entropy(tr);
    for(std::size_t k = 0; k < tr.times.size(); ++k) {
        std::vector<double> row{tr.times[k], sc[k], sa[k]};
        row.insert(row.end(), tr.sz[k].begin(), tr.sz[k].end());
        row.push_back(static_cast<double>(tr.jumps_cum[k]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

EngineResult run_qt(const RunConfig &cfg, unsigned threads, const Progress &progress) {
    const auto tcfg = cfg.trajectory_config();
    std::atomic<std::size_t> done{0};
    const std::size_t report_every = std::max<std::size_t>(1, cfg.n_traj / 20);
    auto traces = run_ensemble(tcfg, cfg.n_traj, threads, [&](std::size_t) {
        const auto d = ++done;
        if(d % report_every == 0 || d == cfg.n_traj) say(progress, std::to_string(d) + "/" + std::to_string(cfg.n_traj) + " trajectories");
    });

    EngineResult res;
    std::vector<TraceTable> tables;
    tables.reserve(traces.size());
    for(const auto &tr : traces) tables.push_back(trajectory_table(tr));
    // Ensemble mean of every column, accumulated in trajectory order.
    res.table.columns = tables.front().columns;
    res.table.rows.assign(tables.front().rows.size(), std::vector<double>(res.table.columns.size(), 0.0));
    for(const auto &t : tables)
        for(std::size_t r = 0; r < t.rows.size(); ++r)
            for(std::size_t c = 1; c < t.columns.size(); ++c) res.table.rows[r][c] += t.rows[r][c];
    for(std::size_t r = 0; r < res.table.rows.size(); ++r) {
        res.table.rows[r][0] = tables.front().rows[r][0];
        for(std::size_t c = 1; c < res.table.columns.size(); ++c) res.table.rows[r][c] /= static_cast<double>(tables.size());
    }

    std::vector<std::vector<double>> centers;
    double max_tw   = 0.0;
    Index max_bond  = 1;
    std::size_t jumps = 0;
    for(const auto &tr : traces) {
        centers.push_back(center_entropy(tr));
        max_tw   = std::max(max_tw, tr.max_truncation_weight);
        max_bond = std::max(max_bond, tr.max_bond_dim);
        jumps += tr.jumps.size();
    }
    const auto avg = ensemble_stats(traces);
    res.ensemble   = json{{"n_traj", cfg.n_traj},
                          {"times", avg.times},
                          {"S_bond_avg", stats_json(avg)},
                          {"S_center", stats_json(ensemble_stats(avg.times, centers))},
                          {"averaging_bonds", averaging_bonds(cfg.model.n_sites)},
                          {"total_jumps", jumps}};
    res.diagnostics["max_truncation_weight"] = max_tw;
    res.diagnostics["max_bond_dim"]          = max_bond;
    if(cfg.write_trajectories) res.trajectories = std::move(tables);
    return res;
}

EngineResult run_engine(const RunConfig &cfg, unsigned threads, const Progress &progress) {
    cfg.validate();
    switch(cfg.engine) {
        case Engine::mpdo:
            return cfg.basis == BasisFlavor::pauli ? run_mpdo<double>(cfg, progress) : run_mpdo<cplx>(cfg, progress);
        case Engine::itebd:
            return cfg.basis == BasisFlavor::pauli ? run_itebd<double>(cfg, progress) : run_itebd<cplx>(cfg, progress);
        case Engine::oracle: return run_oracle(cfg, progress);
        case Engine::qt: return run_qt(cfg, threads, progress);
    }
    throw Error(ErrorKind::invalid_argument, "unknown engine");
}

std::string fit_column(const RunConfig &cfg) { return cfg.engine == Engine::qt ? "S_bond_avg" : "S_center"; }

json fit_json(const FitResult &f, const std::string &column) {
    return json{{"model", f.model},
                {"column", column},
                {"exponent_or_slope", f.exponent_or_slope},
                {"prefactor_or_offset", f.prefactor_or_offset},
                {"window", {f.window.t_min, f.window.t_max}},
                {"residual", f.residual},
                {"n_points", f.n_points}};
}

void write_json(const json &j, const fs::path &file) {
    std::ofstream out(file, std::ios::binary);
    if(!out) throw Error(ErrorKind::io, "cannot write " + file.string());
    out << j.dump(2) << '\n';
    if(!out) throw Error(ErrorKind::io, "error writing " + file.string());
}

} // namespace

TraceTable simulate(const RunConfig &cfg, unsigned threads, const Progress &progress) { return run_engine(cfg, threads, progress).table; }

RunOutput run(const RunConfig &cfg, unsigned threads, const Progress &progress) {
    auto res = run_engine(cfg, threads, progress);
    RunOutput out;
    out.directory = resolve_output_dir(cfg);
    fs::create_directories(out.directory);

    write_trace_csv(res.table, out.directory / "trace.csv");
    out.files.emplace_back("trace.csv");
    if(cfg.engine == Engine::qt) {
        write_json(res.ensemble, out.directory / "ensemble.json");
        out.files.emplace_back("ensemble.json");
        if(!res.trajectories.empty()) {
            fs::create_directories(out.directory / "trajectories");
            for(std::size_t k = 0; k < res.trajectories.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "traj_%06zu.csv", k);
                write_trace_csv(res.trajectories[k], out.directory / "trajectories" / name);
                out.files.push_back(std::string("trajectories/") + name);
            }
        }
    }
    if(cfg.fit != FitModel::none) {
        const auto col = fit_column(cfg);
        const auto t   = res.table.column("t");
        const auto s   = res.table.column(col);
        const FitWindow w{cfg.fit_t_min, cfg.fit_t_max};
        out.fit = cfg.fit == FitModel::power_law ? fit_power_law(t, s, w) : fit_log_growth(t, s, w);
        write_json(fit_json(*out.fit, col), out.directory / "fit.json");
        out.files.emplace_back("fit.json");
    }
    json manifest{{"tool", "openchain"},
                  {"version", OPENCHAIN_VERSION},
                  {"config", config_json(cfg)},
                  {"outputs", out.files},
                  {"diagnostics", res.diagnostics}};
    if(cfg.engine == Engine::qt)
        manifest["seeds"] = json{{"seed", cfg.seed}, {"trajectory_streams", "seed xor trajectory index"}, {"n_traj", cfg.n_traj}};
    write_json(manifest, out.directory / "manifest.json");
    out.files.emplace_back("manifest.json");
    out.trace = std::move(res.table);
    return out;
}

// -------------------------------------------------------------------- compare

double CompareReport::max_abs() const {
    double m = 0.0;
    for(const auto &c : columns) m = std::max(m, c.max_abs);
    return m;
}

CompareReport compare_traces(const TraceTable &a, const TraceTable &b) {
    if(a.rows.size() != b.rows.size())
        throw Error(ErrorKind::dimension_mismatch,
                    "compare: traces have " + std::to_string(a.rows.size()) + " and " + std::to_string(b.rows.size()) + " rows");
    const auto ta = a.column("t"), tb = b.column("t");
    for(std::size_t k = 0; k < ta.size(); ++k)
        if(std::abs(ta[k] - tb[k]) > 1e-9 * std::max(1.0, std::abs(ta[k])))
            throw Error(ErrorKind::dimension_mismatch, "compare: time grids differ at row " + std::to_string(k));
    CompareReport r;
    r.n_times = ta.size();
    for(const auto &name : a.columns) {
        if(name == "t" || !b.has_column(name)) continue;
        const auto x = a.column(name), y = b.column(name);
        ColumnDeviation d{name, 0.0, ta.empty() ? 0.0 : ta.front()};
        for(std::size_t k = 0; k < x.size(); ++k) {
            const double dev = std::abs(x[k] - y[k]);
            if(dev > d.max_abs) {
                d.max_abs = dev;
                d.at_time = ta[k];
            }
        }
        r.columns.push_back(d);
    }
    if(r.columns.empty()) throw Error(ErrorKind::invalid_argument, "compare: no shared columns besides t");
    return r;
}

std::string to_json(const CompareReport &r) {
    json cols = json::object();
    for(const auto &c : r.columns) cols[c.column] = json{{"max_abs", c.max_abs}, {"at_time", c.at_time}};
    return json{{"n_times", r.n_times}, {"max_abs", r.max_abs()}, {"columns", cols}}.dump(2);
}

// ----------------------------------------------------------- convergence scan

ScanAxis scan_axis_from_string(const std::string &s) {
    if(s == "chi") return ScanAxis::chi;
    if(s == "dt") return ScanAxis::dt;
    throw Error(ErrorKind::invalid_argument, "unknown scan axis '" + s + "' (expected chi or dt)");
}

ScanReport convergence_scan(const RunConfig &cfg, ScanAxis axis, const std::vector<double> &values, double threshold, unsigned threads,
                            const Progress &progress) {
    std::vector<std::string> v;
    if(values.size() < 2) v.emplace_back("convergence scan needs at least 2 values, got " + std::to_string(values.size()));
    if(!(threshold > 0)) v.emplace_back("threshold must be positive");
    std::vector<RunConfig> rungs;
    for(std::size_t k = 0; k < values.size(); ++k) {
        RunConfig c = cfg;
        if(axis == ScanAxis::chi) {
            if(values[k] < 1 || values[k] != std::floor(values[k])) v.push_back("chi value " + number(values[k]) + " is not a positive integer");
            c.chi = static_cast<Index>(values[k]);
        } else {
            c.dt = values[k];
        }
        c.output_dir = (fs::path(cfg.output_dir) / ("scan_" + std::string(axis == ScanAxis::chi ? "chi" : "dt") + "_" + std::to_string(k))).string();
        for(const auto &p : c.violations()) v.push_back("rung " + std::to_string(k) + ": " + p);
        rungs.push_back(std::move(c));
    }
    if(!v.empty()) throw ConfigError(std::move(v));

    ScanReport rep;
    rep.axis      = axis;
    rep.values    = values;
    rep.threshold = threshold;
    std::optional<TraceTable> prev;
    for(std::size_t k = 0; k < rungs.size(); ++k) {
        say(progress, std::string("rung ") + std::to_string(k + 1) + "/" + std::to_string(rungs.size()) + ": " +
                          (axis == ScanAxis::chi ? "chi" : "dt") + " = " + number(values[k]));
        auto out = run(rungs[k], threads, progress);
        if(prev) {
            ScanRung r{values[k - 1], values[k], {}, 0.0};
            const auto a1 = prev->column("S_center"), b1 = out.trace.column("S_center");
            const auto a2 = prev->column("S_bond_avg"), b2 = out.trace.column("S_bond_avg");
            for(std::size_t t = 0; t < a1.size(); ++t) {
                const double d = std::max(std::abs(a1[t] - b1[t]), std::abs(a2[t] - b2[t]));
                r.per_time.push_back(d);
                r.max_abs = std::max(r.max_abs, d);
            }
            if(!rep.converged_at && r.max_abs < threshold) rep.converged_at = values[k];
            rep.rungs.push_back(std::move(r));
        }
        prev = std::move(out.trace);
    }
    rep.converged = rep.rungs.back().max_abs < threshold;
    const auto dir = resolve_output_dir(cfg);
    fs::create_directories(dir);
    write_json(json::parse(to_json(rep)), dir / "scan.json");
    return rep;
}

std::string to_json(const ScanReport &r) {
    json rungs = json::array();
    for(const auto &g : r.rungs) rungs.push_back(json{{"from", g.from}, {"to", g.to}, {"max_abs", g.max_abs}, {"per_time", g.per_time}});
    json j{{"axis", r.axis == ScanAxis::chi ? "chi" : "dt"},
           {"values", r.values},
           {"threshold", r.threshold},
           {"rungs", rungs},
           {"converged", r.converged}};
    j["converged_at"] = r.converged_at ? json(*r.converged_at) : json(nullptr);
    return j.dump(2);
}

std::string to_json(const FitResult &f, const std::string &column) { return fit_json(f, column).dump(2); }

std::string to_json(const PlateauTerms &p, double gamma, double J) {
    return json{{"gamma", gamma}, {"J", J}, {"two_site", p.two_site}, {"four_spin_correction", p.four_spin_correction}, {"total", p.total()}}
        .dump(2);
}

} // namespace openchain
