#pragma once

// Vectorized density operator as a matrix-product chain in an orthonormal
// single-site operator basis (physical dimension 4), evolved with two-site
// superoperator gates.
//
// The represented operator is rho = exp(log_scale) * sum c_{i1..iN} e_i1 x ... x e_iN
// where the coefficients are stored in Vidal form with normalized Schmidt
// values. log_scale is reset after every step so that Tr rho = 1.

#include "openchain/models.hpp"
#include "openchain/vidal_chain.hpp"

#include <map>
#include <string>

namespace openchain {

template<typename Scalar>
struct MpdoState {
    VidalChain<Scalar> chain;
    BasisFlavor flavor = BasisFlavor::pauli;
    double log_scale   = 0.0;

    [[nodiscard]] Index n_sites() const { return chain.n_sites(); }
    [[nodiscard]] Index max_bond_dim() const { return chain.max_bond_dim(); }
    [[nodiscard]] OperatorBasis basis() const { return OperatorBasis::of(flavor); }
};

using PauliMpdo      = MpdoState<double>;
using LinearizedMpdo = MpdoState<cplx>;

/// Neel product density operator. Scalar must be double for the pauli flavor
/// only if the coefficients are real, which they are for any diagonal state.
template<typename Scalar>
MpdoState<Scalar> neel_mpdo(Index n, BasisFlavor flavor = BasisFlavor::pauli);

/// Product density operator from per-site 2x2 operators (each normalized to unit trace).
template<typename Scalar>
MpdoState<Scalar> product_mpdo(const std::vector<Matrix2c> &site_rhos, BasisFlavor flavor);

/// Superoperator gate on sites (bond, bond+1); returns the relative discarded weight.
template<typename Scalar>
double apply_super_gate(MpdoState<Scalar> &state, const Matrix<Scalar> &gate, Index bond, Index chi, double cutoff = default_svd_cutoff);
template<typename Scalar>
double apply_super_gate(MpdoState<Scalar> &state, const SuperGate &gate, Index bond, Index chi, double cutoff = default_svd_cutoff);

/// Tr rho, including the tracked scale.
template<typename Scalar>
double mpdo_trace(const MpdoState<Scalar> &state);

/// Tr(op_site rho) / Tr rho for every site.
template<typename Scalar>
std::vector<double> mpdo_local_expectations(const MpdoState<Scalar> &state, const Matrix2c &op);
template<typename Scalar>
double mpdo_local_expectation(const MpdoState<Scalar> &state, const Matrix2c &op, Index site);

/// Reduced density matrix of sites (site, site+1), normalized to unit trace.
template<typename Scalar>
Matrix4c mpdo_two_site_rdm(const MpdoState<Scalar> &state, Index site);

/// Smallest eigenvalue over all nearest-neighbour two-site reduced density
/// matrices. Diagnostic only; positivity is not enforced.
template<typename Scalar>
double min_two_site_eigenvalue(const MpdoState<Scalar> &state);

/// Operator entanglement in bits on interior bond b; needs a canonical state.
template<typename Scalar>
double operator_entanglement(const MpdoState<Scalar> &state, Index bond);

/// Brings the chain to canonical form with exact Schmidt values and folds the
/// norm into log_scale.
template<typename Scalar>
double canonicalize(MpdoState<Scalar> &state, Index chi, double cutoff = default_svd_cutoff);

/// Rescales so that Tr rho = 1; returns the trace before rescaling.
template<typename Scalar>
double renormalize_trace(MpdoState<Scalar> &state);

/// Dense coefficient -> operator conversion for small chains (tests, oracle comparison).
template<typename Scalar>
Eigen::MatrixXcd mpdo_to_dense(const MpdoState<Scalar> &state);

/// One sweep entry of a Trotter sequence: gates exp(A * weight * dt) on every
/// bond, in normal or transposed order.
struct SweepStep {
    int weight_numerator = 1;
    bool transposed      = false;
};

/// The 18-sweep fourth-order sequence, first entry applied first, each
/// step carrying weight_numerator * dt / 12.
const std::vector<SweepStep> &fourth_order_sequence();

/// Second-order (Strang) sequence: half sweep, transposed half sweep.
const std::vector<SweepStep> &second_order_sequence();

/// One layer of commuting gates: all even (0-based) or all odd bonds, each
/// exp(A * numerator * dt / denominator).
struct TrotterLayer {
    bool odd      = false;
    int numerator = 1;
};

/// Layers of the order-2 or order-4 sequence with adjacent layers of equal
/// parity merged (gates on the same bond compose exactly).
std::vector<TrotterLayer> trotter_layers(int order);
inline int trotter_denominator(int order) { return order == 4 ? 12 : 2; }

struct TrotterStats {
    double max_truncation_weight = 0.0;
    double trace_before          = 1.0; ///< trace before the end-of-step renormalization
};

/// Caches superoperator gates per (weight, boundary weights) for a fixed
/// model, basis and dt, and applies complete Trotter steps.
template<typename Scalar>
class MpdoPropagator {
  public:
    MpdoPropagator(const ModelParams &p, BasisFlavor flavor, double dt, int order = 4);

    /// One full time step of length dt; the state is re-canonicalized and
    /// its trace renormalized afterwards.
    TrotterStats step(MpdoState<Scalar> &state, Index chi, double cutoff = default_svd_cutoff);

    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] const Matrix<Scalar> &gate(int numerator, Index bond, Index n_sites);

  private:
    ModelParams params_;
    OperatorBasis basis_;
    double dt_;
    int order_;
    int denominator_;
    std::map<std::tuple<int, double, double>, Matrix<Scalar>> cache_;
};

/// Checkpoint as a self-describing JSON document (see README for the schema).
template<typename Scalar>
std::string mpdo_checkpoint_json(const MpdoState<Scalar> &state, const ModelParams &p, double time);
template<typename Scalar>
MpdoState<Scalar> mpdo_from_checkpoint_json(const std::string &text, ModelParams *p = nullptr, double *time = nullptr);

} // namespace openchain
