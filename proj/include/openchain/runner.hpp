#pragma once

// Config-driven runs: one JSON config in, a directory of CSV/JSON artifacts out.

#include "openchain/analytics.hpp"
#include "openchain/models.hpp"
#include "openchain/tensor.hpp"
#include "openchain/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace openchain {

enum class Engine { mpdo, itebd, qt, oracle };
const char *to_string(Engine e);
Engine engine_from_string(const std::string &s);

enum class FitModel { none, power_law, log_growth };
const char *to_string(FitModel m);
FitModel fit_model_from_string(const std::string &s);

struct RunConfig {
    Engine engine = Engine::mpdo;
    ModelParams model;
    Index chi          = 64;
    double cutoff      = default_svd_cutoff;
    double dt          = 0.05;
    double dt_obs      = 0.1;
    double t_max       = 1.0;
    std::size_t n_traj = 1;
    std::uint64_t seed = 0;
    JumpScheme scheme  = JumpScheme::exact_jump_times;
    int trotter_order  = 4;
    BasisFlavor basis  = BasisFlavor::pauli;
    int reorth_interval = 10; ///< itebd only
    bool write_trajectories = false; ///< qt only: one CSV per trajectory
    FitModel fit       = FitModel::none;
    double fit_t_min   = 1.1;
    double fit_t_max   = 3.9;
    std::string output_dir = "openchain_out";

    [[nodiscard]] std::vector<std::string> violations() const;
    void validate() const;
    [[nodiscard]] TrajectoryConfig trajectory_config() const;
    friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

/// Parses a flat JSON config. A manifest written by a run is accepted too (its
/// "config" object is used). Throws ConfigError listing every problem.
RunConfig parse_run_config(const std::string &json_text);
RunConfig load_run_config(const std::filesystem::path &file);
std::string to_json(const RunConfig &cfg);

/// Output directory after applying the OPENCHAIN_OUTPUT_ROOT override to a
/// relative output_dir.
std::filesystem::path resolve_output_dir(const RunConfig &cfg);

struct TraceTable {
    std::vector<std::string> columns;     ///< first column is "t"
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::vector<double> column(const std::string &name) const;
    [[nodiscard]] bool has_column(const std::string &name) const;
};

/// Trace CSV with full round-trip precision.
void write_trace_csv(const TraceTable &table, const std::filesystem::path &file);
TraceTable read_trace_csv(const std::filesystem::path &file);

struct RunOutput {
    std::filesystem::path directory;
    TraceTable trace;
    std::optional<FitResult> fit;
    std::vector<std::string> files; ///< relative to directory
};

/// Runs the configured engine and writes trace.csv, manifest.json and, as
/// applicable, ensemble.json, fit.json and trajectories/. `threads` only caps
/// the parallelism of QT ensembles.
RunOutput run(const RunConfig &cfg, unsigned threads = 1, const std::function<void(const std::string &)> &progress = {});

/// Engine run without touching the filesystem.
TraceTable simulate(const RunConfig &cfg, unsigned threads = 1, const std::function<void(const std::string &)> &progress = {});

struct ColumnDeviation {
    std::string column;
    double max_abs = 0.0;
    double at_time = 0.0;
};

struct CompareReport {
    std::size_t n_times = 0;
    std::vector<ColumnDeviation> columns; ///< shared columns except t
    [[nodiscard]] double max_abs() const;
};

/// Max-abs deviation per shared column; the time grids must agree.
CompareReport compare_traces(const TraceTable &a, const TraceTable &b);
std::string to_json(const CompareReport &r);

enum class ScanAxis { chi, dt };
ScanAxis scan_axis_from_string(const std::string &s);

struct ScanRung {
    double from = 0.0, to = 0.0;
    std::vector<double> per_time; ///< max over the entropy columns at each time
    double max_abs = 0.0;
};

struct ScanReport {
    ScanAxis axis = ScanAxis::chi;
    std::vector<double> values;
    double threshold = 1e-3;
    std::vector<ScanRung> rungs;
    bool converged = false;
    std::optional<double> converged_at; ///< first value whose deviation from its predecessor is below threshold
};

/// Runs the ladder into <output_dir>/scan_<axis>_<k> and compares successive
/// rungs on S_center and S_bond_avg.
ScanReport convergence_scan(const RunConfig &cfg, ScanAxis axis, const std::vector<double> &values, double threshold = 1e-3,
                            unsigned threads = 1, const std::function<void(const std::string &)> &progress = {});
std::string to_json(const ScanReport &r);

std::string to_json(const FitResult &f, const std::string &column);
std::string to_json(const PlateauTerms &p, double gamma, double J);

} // namespace openchain
