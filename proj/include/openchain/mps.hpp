#pragma once

// Pure-state MPS in Vidal canonical form with TEBD gate application.

#include "openchain/models.hpp"
#include "openchain/vidal_chain.hpp"

namespace openchain {

using StateVector = Eigen::VectorXcd;

struct MpsState {
    VidalChain<cplx> chain;
    double log_norm = 0.0; ///< accumulated log of norms divided out

    [[nodiscard]] Index n_sites() const { return chain.n_sites(); }
    [[nodiscard]] Index max_bond_dim() const { return chain.max_bond_dim(); }
};

/// |up down up down ...>; n must be even.
MpsState neel_mps(Index n);

/// Product state from per-site spinors.
MpsState product_mps(const std::vector<Eigen::Vector2cd> &spinors);

/// Exact MPS of a dense amplitude vector (site 0 most significant), then
/// truncated to chi. Intended for small systems and tests.
MpsState mps_from_dense(const StateVector &psi, Index n_sites, Index chi = 1 << 20, double cutoff = default_svd_cutoff);

StateVector to_dense(const MpsState &state);

/// Two-site gate on (bond, bond+1); returns the discarded weight.
double apply_gate(MpsState &state, const Matrix4c &gate, Index bond, Index chi, double cutoff = default_svd_cutoff);
inline double apply_gate(MpsState &state, const UnitaryGate &gate, Index bond, Index chi, double cutoff = default_svd_cutoff) {
    return apply_gate(state, gate.matrix, bond, chi, cutoff);
}

/// Von Neumann entropy in bits across interior bond b (between sites b and b+1).
double bond_entropy(const MpsState &state, Index bond);
std::vector<double> bond_entropies(const MpsState &state);

/// <psi| op_site |psi> for a canonical state; the real part is returned.
double local_expectation(const MpsState &state, const Matrix2c &op, Index site);
cplx local_expectation_complex(const MpsState &state, const Matrix2c &op, Index site);
std::vector<double> local_expectations(const MpsState &state, const Matrix2c &op);

/// Reduced density matrix of one site, from the canonical center tensor.
Matrix2c site_density_matrix(const MpsState &state, Index site);

/// Largest deviation from identity of the left/right orthonormality
/// conditions sum_s (lambda Gamma)^dag (lambda Gamma) and sum_s (Gamma lambda)(Gamma lambda)^dag.
double canonical_form_error(const MpsState &state);

} // namespace openchain
