// Acceptance suite: one PASS/FAIL line per criterion, AC1 to AC12.
//
//   openchain_acceptance [AC1 AC4 ...]
//
// With no arguments every criterion runs. AC8 aggregates the invariants of
// every run performed by the other criteria in the same process, so it is
// evaluated last. Exit status is 0 only if every selected criterion passes.

#include "openchain/analytics.hpp"
#include "openchain/itebd.hpp"
#include "openchain/mpdo.hpp"
#include "openchain/mps.hpp"
#include "openchain/oracle.hpp"
#include "openchain/runner.hpp"
#include "openchain/trajectory.hpp"

#include <fmt/core.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace openchain;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ------------------------------------------------------

constexpr double ac1_sz_tol = 1e-6;
constexpr double ac1_oe_tol = 1e-5;
constexpr double ac2_n_se   = 3.0;
constexpr double ac3_slope_lo = 3.5, ac3_slope_hi = 4.5;
constexpr double ac4_rel_tol = 0.25;
constexpr double ac5_peak_min = 0.5, ac5_final_max = 0.05;
constexpr double ac6_slope = 0.25, ac6_slope_tol = 0.08;
constexpr double ac7_alpha_lo = 0.6, ac7_alpha_hi = 1.0;
constexpr double ac8_trace_tol = 1e-8;
constexpr double ac8_sz_tol    = 1e-6;
constexpr double ac8_n_se      = 3.0; ///< ensemble-mean magnetization of balanced-rate QT runs
constexpr double ac9_target = 1.0, ac9_tol = 1e-3;
constexpr double ac10_threshold = 0.05;
constexpr double ac12_n_sigma   = 3.0;
constexpr double entropy_slack  = 1e-12; ///< rounding allowance on S <= log2 chi
constexpr double time_slack     = 1e-9;

// ---- bookkeeping -------------------------------------------------------------

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// Invariant record shared by every run; reported as AC8.
struct Invariants {
    int runs = 0;
    double cap_excess = -std::numeric_limits<double>::infinity(); ///< max of S - log2 chi
    std::string cap_run;
    double trace_dev = 0.0; ///< represented state, checked after every step
    std::string trace_run;
    double drift_before = 0.0; ///< truncation loss absorbed by the per-step rescaling; reported only
    std::string drift_before_run;
    double sz_drift = 0.0; ///< deterministic engines and single dephasing trajectories
    std::string sz_run;
    double sz_sigma = 0.0; ///< |time-averaged mean drift| / SE for balanced-rate QT ensembles
    std::string sigma_run;
    bool sz_sigma_ok = true;
    double sz_sigma_pointwise = 0.0; ///< largest single-time |mean drift| / SE; reported only

    void cap(const std::string &run, double s, Index chi) {
        const double e = s - std::log2(static_cast<double>(chi));
        if(e > cap_excess) {
            cap_excess = e;
            cap_run    = run;
        }
    }
    void trace(const std::string &run, double tr) {
        if(std::abs(tr - 1.0) > trace_dev) {
            trace_dev = std::abs(tr - 1.0);
            trace_run = run;
        }
    }
    void trace_before(const std::string &run, double tr) {
        if(std::abs(tr - 1.0) > drift_before) {
            drift_before     = std::abs(tr - 1.0);
            drift_before_run = run;
        }
    }
    void drift(const std::string &run, double d) {
        if(std::abs(d) > sz_drift) {
            sz_drift = std::abs(d);
            sz_run   = run;
        }
    }
} inv;

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sum(const std::vector<double> &v) {
    double s = 0;
    for(double x : v) s += x;
    return s;
}

bool on_grid(double t, double step) { return std::abs(t / step - std::round(t / step)) < 1e-9; }

ModelParams chain(Index n, double gp, double gm, double gz, double delta = 1.0) {
    ModelParams p;
    p.n_sites     = n;
    p.gamma_plus  = gp;
    p.gamma_minus = gm;
    p.gamma_z     = gz;
    p.delta       = delta;
    return p;
}

bool conserves_magnetization(const ModelParams &p) { return p.gamma_plus == p.gamma_minus; }

// ---- MPDO runner with invariant tracking -------------------------------------

struct MpdoSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> sz;
    std::vector<std::vector<double>> oe; ///< all bonds
    double max_truncation_weight = 0.0;
};

MpdoSeries run_mpdo(const std::string &label, const ModelParams &p, Index chi, double dt, int order, double t_max, double dt_obs,
                    double cutoff = default_svd_cutoff) {
    auto state = neel_mpdo<double>(p.n_sites);
    MpdoPropagator<double> prop(p, BasisFlavor::pauli, dt, order);
    MpdoSeries out;
    const double sz0 = sum(mpdo_local_expectations(state, spin::sigma_z()));
    auto record      = [&](double t) {
        out.times.push_back(t);
        out.sz.push_back(mpdo_local_expectations(state, spin::sigma_z()));
        std::vector<double> oe;
        for(Index b = 0; b + 1 < p.n_sites; ++b) {
            oe.push_back(operator_entanglement(state, b));
            inv.cap(label, oe.back(), chi);
        }
        out.oe.push_back(std::move(oe));
        inv.trace(label, mpdo_trace(state));
        if(conserves_magnetization(p)) inv.drift(label, sum(out.sz.back()) - sz0);
    };
    record(0.0);
    const auto steps = static_cast<long>(std::lround(t_max / dt));
    for(long s = 1; s <= steps; ++s) {
        const auto st = prop.step(state, chi, cutoff);
        inv.trace_before(label, st.trace_before);
        inv.trace(label, mpdo_trace(state));
        out.max_truncation_weight = std::max(out.max_truncation_weight, st.max_truncation_weight);
        const double t = static_cast<double>(s) * dt;
        if(on_grid(t, dt_obs)) record(t);
    }
    ++inv.runs;
    return out;
}

// ---- QT ensembles with invariant tracking ------------------------------------

std::vector<EntropyTrace> run_qt(const std::string &label, const TrajectoryConfig &cfg, std::size_t n_traj) {
    auto traces = run_ensemble(cfg, n_traj, 1);
    const Index n = cfg.model.n_sites;
    std::vector<std::vector<double>> magnetization;
    for(const auto &tr : traces) {
        for(const auto &row : tr.bond_entropies)
            for(double s : row) inv.cap(label, s, cfg.chi);
        std::vector<double> m;
        for(const auto &z : tr.sz) m.push_back(sum(z));
        if(cfg.model.gamma_plus == 0 && cfg.model.gamma_minus == 0)
            for(double x : m) inv.drift(label, x - m.front());
        magnetization.push_back(std::move(m));
    }
    if(conserves_magnetization(cfg.model) && cfg.model.gamma_plus > 0 && traces.size() > 1) {
        // the initial Neel magnetization is zero for even N
        const double m0 = (n % 2 == 0) ? 0.0 : 1.0;
        // One test per run: each trajectory's magnetization averaged over the
        // recorded times t > 0, then the spread of those averages across
        // trajectories. Correlations in time are accounted for this way.
        std::vector<std::vector<double>> averaged;
        for(const auto &m : magnetization) averaged.push_back({(sum(m) - m.front()) / static_cast<double>(m.size() - 1)});
        const auto avg      = ensemble_stats({0.0}, averaged);
        const double dev    = std::abs(avg.mean[0] - m0);
        const double se     = avg.standard_error[0];
        if(dev > ac8_n_se * se + ac8_sz_tol) inv.sz_sigma_ok = false;
        const double ratio = se > 0 ? dev / se : (dev > ac8_sz_tol ? std::numeric_limits<double>::infinity() : 0.0);
        if(ratio > inv.sz_sigma) {
            inv.sz_sigma  = ratio;
            inv.sigma_run = label;
        }
        const auto st = ensemble_stats(traces.front().times, magnetization);
        for(std::size_t k = 1; k < st.times.size(); ++k)
            if(st.standard_error[k] > 0) inv.sz_sigma_pointwise = std::max(inv.sz_sigma_pointwise, std::abs(st.mean[k] - m0) / st.standard_error[k]);
    }
    ++inv.runs;
    return traces;
}

TrajectoryConfig qt_config(const ModelParams &p, Index chi, double cutoff, double dt, int order, double dt_obs, double t_max,
                           std::uint64_t seed, JumpScheme scheme = JumpScheme::exact_jump_times) {
    TrajectoryConfig c;
    c.model         = p;
    c.chi           = chi;
    c.cutoff        = cutoff;
    c.dt            = dt;
    c.trotter_order = order;
    c.dt_obs        = dt_obs;
    c.t_max         = t_max;
    c.seed          = seed;
    c.scheme        = scheme;
    return c;
}

double value_at(const std::vector<double> &times, const std::vector<double> &v, double t) {
    for(std::size_t k = 0; k < times.size(); ++k)
        if(std::abs(times[k] - t) < time_slack) return v[k];
    throw Error(ErrorKind::invalid_argument, fmt::format("no sample at t = {}", t));
}

// ---- criteria ----------------------------------------------------------------

Outcome ac1() {
    const ModelParams p = chain(4, 0.5, 0.5, 0.0);
    const double dt = 0.05, t_max = 5.0;
    const auto m   = run_mpdo("AC1 mpdo", p, 64, dt, 4, t_max, dt);
    const auto ref = oracle::lindblad_evolve(oracle::neel_density(4), p, dt, t_max, 1e-12);
    double dsz = 0, doe = 0;
    for(std::size_t k = 0; k < m.times.size(); ++k) {
        const auto z = oracle::site_expectations(ref.states[k], spin::sigma_z());
        for(std::size_t i = 0; i < 4; ++i) dsz = std::max(dsz, std::abs(m.sz[k][i] - z[i]));
        doe = std::max(doe, std::abs(m.oe[k][1] - oracle::dense_oe(ref.states[k], 1)));
    }
    return {dsz <= ac1_sz_tol && doe <= ac1_oe_tol,
            fmt::format("max|d sz| = {:.2e} (tol {:.0e}), max|d S_OP(center)| = {:.2e} (tol {:.0e}), {} times", dsz, ac1_sz_tol, doe,
                        ac1_oe_tol, m.times.size())};
}

Outcome ac2() {
    const ModelParams p = chain(4, 0.5, 0.5, 0.0);
    const std::size_t n_traj = 2000;
    const auto cfg    = qt_config(p, 16, default_svd_cutoff, 0.05, 4, 0.25, 5.0, 2024);
    const auto traces = run_qt("AC2 qt", cfg, n_traj);
    std::vector<std::vector<double>> samples;
    for(const auto &tr : traces) {
        std::vector<double> s;
        for(const auto &z : tr.sz) s.push_back(z[1]);
        samples.push_back(std::move(s));
    }
    const auto st  = ensemble_stats(traces.front().times, samples);
    const auto ref = oracle::lindblad_evolve(oracle::neel_density(4), p, cfg.dt_obs, cfg.t_max, 1e-12);
    if(ref.times.size() != st.times.size()) return {false, "time grids differ"};
    double worst = 0;
    bool ok      = true;
    for(std::size_t k = 0; k < st.times.size(); ++k) {
        const double exact = oracle::site_expectations(ref.states[k], spin::sigma_z())[1];
        const double dev   = std::abs(st.mean[k] - exact);
        // t = 0 has zero spread; allow rounding there
        if(dev > ac2_n_se * st.standard_error[k] + entropy_slack) ok = false;
        if(st.standard_error[k] > 0) worst = std::max(worst, dev / st.standard_error[k]);
    }
    return {ok, fmt::format("N_t = {}, worst |mean - exact| = {:.2f} SE over {} times (tol {:.0f} SE)", n_traj, worst, st.times.size(),
                            ac2_n_se)};
}

Outcome ac3() {
    const ModelParams p = chain(4, 0.5, 0.5, 0.0);
    const std::vector<double> dts{0.4, 0.2, 0.1, 0.05};
    const double t_max = 2.0, obs = 0.4;
    std::vector<double> errors;
    std::vector<oracle::DenseMatrix> exact;
    for(int k = 0; k <= static_cast<int>(std::lround(t_max / obs)); ++k) exact.push_back(oracle::lindblad_exact(oracle::neel_density(4), p, k * obs));
    for(double dt : dts) {
        const auto m = run_mpdo(fmt::format("AC3 mpdo dt={}", dt), p, 256, dt, 4, t_max, obs, 0.0);
        double err   = 0;
        for(std::size_t k = 0; k < m.times.size(); ++k) {
            const auto z = oracle::site_expectations(exact[k], spin::sigma_z());
            for(std::size_t i = 0; i < 4; ++i) err = std::max(err, std::abs(m.sz[k][i] - z[i]));
            err = std::max(err, std::abs(m.oe[k][1] - oracle::dense_oe(exact[k], 1)));
        }
        errors.push_back(err);
    }
    double mx = 0, my = 0;
    for(std::size_t k = 0; k < dts.size(); ++k) {
        mx += std::log(dts[k]);
        my += std::log(errors[k]);
    }
    mx /= dts.size();
    my /= dts.size();
    double sxy = 0, sxx = 0;
    for(std::size_t k = 0; k < dts.size(); ++k) {
        sxy += (std::log(dts[k]) - mx) * (std::log(errors[k]) - my);
        sxx += (std::log(dts[k]) - mx) * (std::log(dts[k]) - mx);
    }
    const double slope = sxy / sxx;
    return {slope >= ac3_slope_lo && slope <= ac3_slope_hi,
            fmt::format("errors {:.2e} {:.2e} {:.2e} {:.2e}, log-log slope {:.3f} (range [{}, {}])", errors[0], errors[1], errors[2], errors[3],
                        slope, ac3_slope_lo, ac3_slope_hi)};
}

Outcome ac4() {
    const std::size_t n_traj = 500;
    bool ok = true;
    std::string detail;
    for(double g : {3.5, 2.0}) {
        const auto cfg    = qt_config(chain(20, g, g, 0.0), 32, default_svd_cutoff, 0.05, 2, 0.1, 6.0, 35 + static_cast<std::uint64_t>(g * 10));
        const auto traces = run_qt(fmt::format("AC4 qt gamma={}", g), cfg, n_traj);
        const auto st     = ensemble_stats(traces);
        double avg = 0;
        int n      = 0;
        for(std::size_t k = 0; k < st.times.size(); ++k)
            if(st.times[k] >= 2.0 - time_slack && st.times[k] <= 6.0 + time_slack) {
                avg += st.mean[k];
                ++n;
            }
        avg /= n;
        const double est = plateau_estimate(g);
        const double rel = avg / est - 1.0;
        ok               = ok && std::abs(rel) <= ac4_rel_tol;
        detail += fmt::format("gamma={}: <TE>_[2,6] = {:.5f} vs {:.5f} ({:+.1f}%); ", g, avg, est, 100 * rel);
    }
    detail += fmt::format("N_t = {} each (tol {:.0f}%)", n_traj, 100 * ac4_rel_tol);
    return {ok, detail};
}

Outcome ac5() {
    const ModelParams p = chain(16, 2.0, 2.0, 0.0);
    const auto m        = run_mpdo("AC5 mpdo", p, 128, 0.05, 4, 6.0, 0.05);
    const std::size_t center = 7;
    double peak = 0, t_peak = 0;
    for(std::size_t k = 0; k < m.times.size(); ++k)
        if(m.times[k] < 1.0 - time_slack && m.oe[k][center] > peak) {
            peak   = m.oe[k][center];
            t_peak = m.times[k];
        }
    const double last = m.oe.back()[center];
    const bool ok     = peak >= ac5_peak_min && last < ac5_final_max;
    return {ok, fmt::format("max S_OP(center) before t=1 is {:.4f} at t={:.2f} (need >= {}), S_OP(t=6) = {:.2e} (need < {})", peak, t_peak,
                            ac5_peak_min, last, ac5_final_max)};
}

Outcome ac6() {
    ModelParams p;
    p.infinite = true;
    p.gamma_z  = 1.0;
    const Index chi = 256;
    const double dt = 1.0, t_max = 25.0;
    auto state = neel_infinite_mpdo<double>();
    ItebdPropagator<double> prop(p, BasisFlavor::pauli, dt, 4, 10);
    std::vector<double> times{0.0}, oe{0.0};
    const auto steps = static_cast<long>(std::lround(t_max / dt));
    for(long s = 1; s <= steps; ++s) {
        prop.step(state, chi);
        auto c = state;
        reorthogonalize(c, chi);
        const double s0 = infinite_operator_entanglement(c, 0), s1 = infinite_operator_entanglement(c, 1);
        inv.cap("AC6 itebd", std::max(s0, s1), chi);
        const auto z = infinite_local_expectations(c, spin::sigma_z());
        inv.drift("AC6 itebd", z[0] + z[1]);
        times.push_back(static_cast<double>(s) * dt);
        oe.push_back(s0);
    }
    ++inv.runs;
    const auto f = fit_log_growth(times, oe, {8.0, 25.0});
    return {std::abs(f.exponent_or_slope - ac6_slope) <= ac6_slope_tol,
            fmt::format("iTEBD chi={}, dt={}: slope {:.4f} over [8, 25] ({} points, rms {:.1e}), S_OP(25) = {:.4f} (target {} +- {})", chi, dt,
                        f.exponent_or_slope, f.n_points, f.residual, oe.back(), ac6_slope, ac6_slope_tol)};
}

Outcome ac7() {
    const auto cfg    = qt_config(chain(24, 0, 0, 1.0), 128, 1e-6, 0.05, 2, 0.1, 4.0, 7);
    const auto traces = run_qt("AC7 qt", cfg, 200);
    const auto st     = ensemble_stats(traces);
    const auto f      = fit_power_law(st.times, st.mean, {1.1, 3.9});
    return {f.exponent_or_slope >= ac7_alpha_lo && f.exponent_or_slope <= ac7_alpha_hi,
            fmt::format("alpha = {:.4f} over [1.1, 3.9] ({} points, rms {:.1e}), N_t = 200 (range [{}, {}])", f.exponent_or_slope, f.n_points,
                        f.residual, ac7_alpha_lo, ac7_alpha_hi)};
}

Outcome ac8() {
    const bool cap_ok   = inv.cap_excess <= entropy_slack;
    const bool trace_ok = inv.trace_dev < ac8_trace_tol;
    const bool sz_ok    = inv.sz_drift <= ac8_sz_tol;
    return {inv.runs > 0 && cap_ok && trace_ok && sz_ok && inv.sz_sigma_ok,
            fmt::format("{} runs: max(S - log2 chi) = {:.3g} [{}]; max|Tr-1| = {:.2e} [{}] (tol {:.0e}; truncation loss before the "
                        "per-step rescaling up to {:.2e} [{}]); max|d sum sz| = {:.2e} [{}] (tol {:.0e}); "
                        "balanced-rate QT time-averaged mean drift <= {:.2f} SE [{}] (tol {:.0f} SE; largest single-time deviation {:.2f} SE)",
                        inv.runs, inv.cap_excess, inv.cap_run, inv.trace_dev, inv.trace_run, ac8_trace_tol, inv.drift_before,
                        inv.drift_before_run, inv.sz_drift, inv.sz_run, ac8_sz_tol, inv.sz_sigma, inv.sigma_run, ac8_n_se, inv.sz_sigma_pointwise)};
}

Outcome ac9() {
    ModelParams p = chain(4, 0, 0, 0);
    oracle::DenseVector psi = oracle::DenseVector::Zero(16);
    // down up down up: site 0 is the most significant bit, 1 means down
    psi(0b1010) = 1.0;
    psi         = (cplx(0, -0.01) * oracle::chain_hamiltonian(p)).exp() * psi;
    auto mps    = mps_from_dense(psi, 4);
    oracle::apply_site(psi, spin::sigma_plus(), 1);
    const double dense = oracle::dense_pure_entropy(psi.normalized(), 1);
    apply_jump(mps, JumpOperator{1, JumpChannel::plus, 1.0, spin::sigma_plus()});
    const double s_mps = bond_entropy(mps, 1);
    const bool ok      = std::abs(dense - ac9_target) <= ac9_tol && std::abs(s_mps - ac9_target) <= ac9_tol;
    return {ok, fmt::format("dense S = {:.6f}, MPS S = {:.6f} (target {} +- {:.0e})", dense, s_mps, ac9_target, ac9_tol)};
}

Outcome ac10() {
    const std::size_t n_traj = 100;
    double te[2];
    double se[2];
    for(int k = 0; k < 2; ++k) {
        const double gp   = k == 0 ? 0.0 : 1.0;
        const auto cfg    = qt_config(chain(12, gp, 1.0, 0.0), 64, default_svd_cutoff, 0.02, 2, 0.5, 10.0, 1000 + k,
                                      JumpScheme::per_step_conditional);
        const auto traces = run_qt(fmt::format("AC10 qt gamma_plus={}", gp), cfg, n_traj);
        const auto st     = ensemble_stats(traces);
        te[k]             = value_at(st.times, st.mean, 10.0);
        se[k]             = value_at(st.times, st.standard_error, 10.0);
    }
    return {te[0] < ac10_threshold && te[1] > ac10_threshold,
            fmt::format("TE(10): gamma_plus=0 -> {:.4f} +- {:.4f}, gamma_plus=J -> {:.4f} +- {:.4f} (threshold {}), N_t = {} each", te[0], se[0],
                        te[1], se[1], ac10_threshold, n_traj)};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome ac11() {
    const fs::path root = fs::temp_directory_path() / "openchain_acceptance_ac11";
    fs::remove_all(root);
    std::vector<RunConfig> configs(2);
    configs[0].engine            = Engine::qt;
    configs[0].model             = chain(8, 0.5, 0.5, 0.0);
    configs[0].chi               = 32;
    configs[0].dt_obs            = 0.25;
    configs[0].t_max             = 3.0;
    configs[0].n_traj            = 24;
    configs[0].seed              = 99;
    configs[0].trotter_order     = 2;
    configs[0].write_trajectories = true;
    configs[1]                   = configs[0];
    configs[1].model             = chain(8, 0.2, 1.0, 0.3);
    configs[1].scheme            = JumpScheme::per_step_conditional;
    configs[1].seed              = 123456789;
    std::size_t compared = 0;
    bool same            = true;
    for(std::size_t c = 0; c < configs.size(); ++c) {
        std::vector<fs::path> dirs;
        for(unsigned threads : {1u, 4u}) {
            auto cfg       = configs[c];
            cfg.output_dir = (root / fmt::format("cfg{}_threads{}", c, threads)).string();
            const auto out = run(cfg, threads);
            for(double s : out.trace.column("S_center")) inv.cap("AC11 runner", s, cfg.chi);
            dirs.push_back(out.directory);
        }
        ++inv.runs;
        for(const auto &entry : fs::recursive_directory_iterator(dirs[0])) {
            if(!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
            const auto rel = fs::relative(entry.path(), dirs[0]);
            const auto a   = slurp(entry.path());
            if(a.empty() || a != slurp(dirs[1] / rel)) same = false;
            ++compared;
        }
    }
    fs::remove_all(root);
    return {same && compared > 0, fmt::format("{} files compared across threads 1 and 4 for 2 configs, {}", compared,
                                             same ? "all byte-identical" : "differences found")};
}

Outcome ac12() {
    double oe[2];
    double te[2], se[2];
    const double deltas[2] = {0.5, 1.5};
    for(int k = 0; k < 2; ++k) {
        const ModelParams p = chain(16, 0, 0, 0.5, deltas[k]);
        const auto m        = run_mpdo(fmt::format("AC12 mpdo delta={}", deltas[k]), p, 128, 0.25, 4, 5.0, 0.25);
        oe[k]               = m.oe.back()[7];
        const auto cfg      = qt_config(p, 128, 1e-6, 0.05, 2, 0.5, 5.0, 512 + k);
        const auto traces   = run_qt(fmt::format("AC12 qt delta={}", deltas[k]), cfg, 60);
        const auto st       = ensemble_stats(traces);
        te[k]               = st.mean.back();
        se[k]               = st.standard_error.back();
    }
    const double gap   = te[1] - te[0];
    const double sigma = std::sqrt(se[0] * se[0] + se[1] * se[1]);
    const bool ok      = oe[1] < oe[0] && gap > ac12_n_sigma * sigma;
    return {ok, fmt::format("S_OP(5): delta=0.5 -> {:.4f}, delta=1.5 -> {:.4f}; TE(5): delta=0.5 -> {:.4f}, delta=1.5 -> {:.4f}, gap {:.2f} sigma "
                            "(need > {:.0f})",
                            oe[0], oe[1], te[0], te[1], gap / sigma, ac12_n_sigma)};
}

} // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3},   {"AC4", ac4},   {"AC5", ac5},   {"AC6", ac6},
        {"AC7", ac7}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11}, {"AC12", ac12}, {"AC8", ac8}};
    std::set<std::string> selected(argv + 1, argv + argc);
    int failures = 0;
    for(const auto &[id, fn] : criteria) {
        if(!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch(const std::exception &e) { o = {false, std::string("error: ") + e.what()}; }
        if(!o.pass) ++failures;
        fmt::print("{} {} {} [{:.0f} s]\n", id, o.pass ? "PASS" : "FAIL", o.detail, elapsed(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
