#pragma once

// Translation-invariant MPDO on an infinite chain with a two-site unit cell,
//
//   ... lambda_b Gamma_a lambda_a Gamma_b lambda_b Gamma_a lambda_a ...
//
// evolved with iTEBD. Non-unitary gates spoil the canonical form, which is
// restored periodically with the Orus-Vidal reorthogonalization of the cell.

#include "openchain/mpdo.hpp"

#include <array>
#include <map>

namespace openchain {

template<typename Scalar>
struct InfiniteMpdo {
    DenseTensor<Scalar> gamma_a, gamma_b; ///< (chi, 4, chi)
    Eigen::VectorXd lambda_a;             ///< bond a|b
    Eigen::VectorXd lambda_b;             ///< bond b|a
    BasisFlavor flavor = BasisFlavor::pauli;

    [[nodiscard]] Index max_bond_dim() const { return std::max(lambda_a.size(), lambda_b.size()); }
};

/// Up on sublattice a, down on b.
template<typename Scalar>
InfiniteMpdo<Scalar> neel_infinite_mpdo(BasisFlavor flavor = BasisFlavor::pauli);

struct ReorthogonalizeReport {
    int iterations  = 0;    ///< power iterations used (left + right)
    double residual = 0.0;  ///< final relative change of the fixed points
    double canonical_error = 0.0; ///< max deviation from the canonical conditions afterwards
};

/// Restores the canonical form. Fixed points of the cell transfer maps are
/// found by power iteration to relative tolerance `tol`.
template<typename Scalar>
ReorthogonalizeReport reorthogonalize(InfiniteMpdo<Scalar> &state, Index chi, double cutoff = default_svd_cutoff, double tol = 1e-10,
                                      int max_iterations = 5000);

/// Largest deviation of sum_s (G_s lambda)(G_s lambda)^dag from the identity
/// (and its left counterpart) over both sites.
template<typename Scalar>
double canonical_error(const InfiniteMpdo<Scalar> &state);

/// Operator entanglement (bits) on bond a|b (bond 0) or b|a (bond 1).
/// Meaningful in canonical form only.
template<typename Scalar>
double infinite_operator_entanglement(const InfiniteMpdo<Scalar> &state, int bond);

/// Tr(O rho) on sites a and b, from the dominant eigenvectors of the trace
/// transfer matrix. Throws when the leading eigenvalue is not separated.
template<typename Scalar>
std::array<double, 2> infinite_local_expectations(const InfiniteMpdo<Scalar> &state, const Matrix2c &op);

struct ItebdStats {
    double max_truncation_weight = 0.0;
    bool reorthogonalized        = false;
};

template<typename Scalar>
class ItebdPropagator {
  public:
    /// Bulk dissipator weights (1/2, 1/2) on both bonds of the cell.
    ItebdPropagator(const ModelParams &p, BasisFlavor flavor, double dt, int order = 4, int reorth_interval = 10);

    /// One time step; reorthogonalizes every reorth_interval steps.
    ItebdStats step(InfiniteMpdo<Scalar> &state, Index chi, double cutoff = default_svd_cutoff);

    [[nodiscard]] double dt() const { return dt_; }

  private:
    const Matrix<Scalar> &gate(int numerator);

    ModelParams params_;
    OperatorBasis basis_;
    double dt_;
    int order_;
    int reorth_interval_;
    int steps_ = 0;
    std::map<int, Matrix<Scalar>> cache_;
};

} // namespace openchain
