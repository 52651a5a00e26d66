#pragma once

// Quantum-trajectory unraveling of the Lindblad dynamics over MPS.
//
// Two schemes:
//   exact_jump_times      jump times drawn from the exponential law of the
//                         identity-proportional non-Hermitian Hamiltonian
//                         (gamma_plus == gamma_minus, any gamma_z); unitary
//                         TEBD between jumps with substeps ending on them.
//   per_step_conditional  fixed steps: half unitary step, then for every site
//                         and channel a conditional jump / no-jump update with
//                         exp(-dt L^dag L / 2), then another half unitary step.

#include "openchain/mps.hpp"
#include "openchain/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace openchain {

enum class JumpScheme { exact_jump_times, per_step_conditional };
const char *to_string(JumpScheme s);
JumpScheme jump_scheme_from_string(const std::string &s);

struct TrajectoryConfig {
    ModelParams model;
    Index chi         = 64;
    double cutoff     = default_svd_cutoff;
    double dt         = 0.05; ///< largest substep (exact_jump_times) or fixed step
    double dt_obs     = 0.1;
    double t_max      = 1.0;
    std::uint64_t seed = 0;
    JumpScheme scheme = JumpScheme::exact_jump_times;
    int trotter_order = 2; ///< 2 or 4, for the unitary part

    [[nodiscard]] std::vector<std::string> violations() const;
    void validate() const;
    /// Per-site jump rate of the identity-proportional L^dag L sum.
    [[nodiscard]] double site_rate() const;
    /// Number of observation intervals; t_max must be a multiple of dt_obs.
    [[nodiscard]] Index n_obs() const;
};

struct JumpRecord {
    double time = 0.0;
    Index site  = 0;
    JumpChannel channel = JumpChannel::dephasing;
};

struct EntropyTrace {
    std::vector<double> times;
    std::vector<std::vector<double>> bond_entropies; ///< [time][bond], all N-1 bonds
    std::vector<std::vector<double>> sz;             ///< [time][site]
    std::vector<std::size_t> jumps_cum;              ///< jumps up to and including each time
    std::vector<JumpRecord> jumps;
    double max_truncation_weight = 0.0;
    Index max_bond_dim           = 1;
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> stddev;         ///< sample (n-1) standard deviation
    std::vector<double> standard_error; ///< stddev / sqrt(n)
    std::size_t n_traj = 0;
};

/// t_prev - ln(r) / (n gamma); r in (0, 1].
double sample_jump_time(double t_prev, double r, Index n_sites, double gamma);

/// Samples a channel with probability proportional to <L^dag L>.
std::size_t select_jump_channel(const MpsState &state, const std::vector<JumpOperator> &jumps, Rng &rng);

/// Applies the jump, renormalizes and restores the canonical form.
void apply_jump(MpsState &state, const JumpOperator &jump, Index chi = 1 << 20, double cutoff = default_svd_cutoff);

/// One trajectory from the Neel state; substream `index` of cfg.seed.
EntropyTrace run_trajectory(const TrajectoryConfig &cfg, std::uint64_t index = 0);

/// Runs trajectories 0..n_traj-1 on up to `threads` threads (0 = hardware).
/// The result is independent of the thread count.
std::vector<EntropyTrace> run_ensemble(const TrajectoryConfig &cfg, std::size_t n_traj, unsigned threads = 1,
                                       const std::function<void(std::size_t)> &on_done = {});

/// Central bonds averaged for trajectory entropies: 11 bonds centred on the
/// middle bond for N >= 12, otherwise just the middle bond.
std::vector<Index> averaging_bonds(Index n_sites);
/// Mean over averaging_bonds at every recorded time; warns once when the chain is short.
std::vector<double> bond_averaged_entropy(const EntropyTrace &trace);
/// Entropy on the middle bond, between sites N/2-1 and N/2.
std::vector<double> center_entropy(const EntropyTrace &trace);

/// Statistics of aligned samples, accumulated in index order.
EnsembleStats ensemble_stats(const std::vector<double> &times, const std::vector<std::vector<double>> &samples);
/// Statistics of the bond-averaged trajectory entropy.
EnsembleStats ensemble_stats(const std::vector<EntropyTrace> &traces);

} // namespace openchain
