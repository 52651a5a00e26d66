#pragma once

// XXZ chain with local emission, absorption and dephasing: Hamiltonian gates,
// jump operators, operator bases and two-site superoperator gates.
//
// Local basis index 0 = up, 1 = down, so sigma_z = diag(1, -1). Two-site
// operators act on the combined index s1 * d + s2 with the left site first.

#include "openchain/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace openchain {

using Matrix2c  = Eigen::Matrix2cd;
using Matrix4c  = Eigen::Matrix4cd;
using Matrix16c = Eigen::Matrix<cplx, 16, 16>;

namespace spin {
    Matrix2c identity();
    Matrix2c sigma_x();
    Matrix2c sigma_y();
    Matrix2c sigma_z();
    Matrix2c sigma_plus();  ///< |up><down|
    Matrix2c sigma_minus(); ///< |down><up|
} // namespace spin

struct ModelParams {
    double J           = 1.0;
    double delta       = 1.0; ///< ZZ anisotropy; delta == J is the isotropic point
    double gamma_plus  = 0.0;
    double gamma_minus = 0.0;
    double gamma_z     = 0.0;
    Index n_sites      = 2;
    bool infinite      = false; ///< two-site unit cell, n_sites ignored

    /// Every violated constraint, empty when valid.
    [[nodiscard]] std::vector<std::string> violations() const;
    void validate() const;
    [[nodiscard]] bool has_dissipation() const { return gamma_plus > 0 || gamma_minus > 0 || gamma_z > 0; }
    friend bool operator==(const ModelParams &, const ModelParams &) = default;
};

enum class JumpChannel { plus, minus, dephasing };
const char *to_string(JumpChannel c);

struct JumpOperator {
    Index site = 0;
    JumpChannel channel = JumpChannel::dephasing;
    double rate = 0.0;
    Matrix2c op; ///< includes sqrt(rate)
};

/// sqrt(g+) s+, sqrt(g-) s-, sqrt(gz) sz on every site, skipping zero rates.
/// Order: site-major, then plus, minus, dephasing.
std::vector<JumpOperator> build_jump_ops(const ModelParams &p);
/// Channels of a single site, same order as build_jump_ops.
std::vector<JumpOperator> site_jump_ops(const ModelParams &p, Index site);

/// Two-site XXZ term -J/4 (sx sx + sy sy) + delta/4 sz sz.
Matrix4c xxz_bond_hamiltonian(const ModelParams &p);

struct UnitaryGate {
    Matrix4c matrix;
    double dt = 0.0;
};

/// exp(-i h dt) for the bond Hamiltonian, via its eigendecomposition.
UnitaryGate build_xxz_gate(const ModelParams &p, double dt);

/// Caches the bond-Hamiltonian eigendecomposition so gates for arbitrary dt are cheap.
class XxzGateFactory {
  public:
    explicit XxzGateFactory(const ModelParams &p);
    [[nodiscard]] Matrix4c gate(double dt) const;

  private:
    Eigen::Vector4d energies_;
    Matrix4c vectors_;
};

enum class BasisFlavor { pauli, linearized };
const char *to_string(BasisFlavor f);
BasisFlavor basis_flavor_from_string(const std::string &s);

struct OperatorBasis {
    std::array<Matrix2c, 4> elements;
    BasisFlavor flavor = BasisFlavor::pauli;

    /// e1 = 1/sqrt2, e2 = sx/sqrt2, e3 = sy/sqrt2, e4 = sz/sqrt2.
    static OperatorBasis pauli();
    /// |0><0|, |0><1|, |1><0|, |1><1|.
    static OperatorBasis linearized();
    static OperatorBasis of(BasisFlavor f) { return f == BasisFlavor::pauli ? pauli() : linearized(); }

    /// Coefficients c_k = Tr(e_k^dag X) of a 2x2 operator.
    [[nodiscard]] Eigen::Vector4cd coefficients(const Matrix2c &x) const;
    /// Tr(O e_k): contracting a site's coefficients with this gives Tr(O rho_site).
    [[nodiscard]] Eigen::Vector4cd expectation_vector(const Matrix2c &o) const;
    [[nodiscard]] Eigen::Vector4cd trace_vector() const { return expectation_vector(spin::identity()); }
    [[nodiscard]] Matrix2c compose(const Eigen::Vector4cd &coeffs) const;
    /// max |Tr(e_i e_j^dag) - delta_ij|
    [[nodiscard]] double orthonormality_error() const;
};

/// Matrix of a superoperator acting on two sites, expressed in the product
/// operator basis: M_{(ij),(kl)} = Tr[(e_i e_j)^dag S(e_k e_l)].
template<typename SuperOp>
Matrix16c two_site_superoperator_matrix(const OperatorBasis &basis, SuperOp &&s);

/// Single-site dissipator generator in the basis, summed over the site's channels.
Matrix4c local_dissipator_generator(const ModelParams &p, const OperatorBasis &basis);

/// Two-site Lindblad generator with the single-site dissipators weighted by
/// left_weight / right_weight (1/2 in the bulk, 1 at open chain ends).
Matrix16c super_generator(const ModelParams &p, const OperatorBasis &basis, double left_weight = 0.5, double right_weight = 0.5);

struct SuperGate {
    Matrix16c generator;
    Matrix16c matrix; ///< exp(generator * dt)
    double dt = 0.0;
    BasisFlavor flavor = BasisFlavor::pauli;

    template<typename Scalar>
    [[nodiscard]] Matrix<Scalar> as() const { return cast_scalar<Scalar>(matrix); }
};

SuperGate build_super_gate(const ModelParams &p, const OperatorBasis &basis, double dt_fraction, double left_weight = 0.5,
                           double right_weight = 0.5);

/// Dissipator weights for bond b of an open chain with n sites.
std::pair<double, double> boundary_weights(Index bond, Index n_sites);

inline Matrix4c kron(const Matrix2c &a, const Matrix2c &b) {
    Matrix4c k;
    for(int i = 0; i < 2; ++i)
        for(int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

/// Neel configuration: up on even (0-based) sites, down on odd ones.
inline bool neel_is_up(Index site) { return site % 2 == 0; }

// ---------------------------------------------------------------------------

template<typename SuperOp>
Matrix16c two_site_superoperator_matrix(const OperatorBasis &basis, SuperOp &&s) {
    std::array<Matrix4c, 16> prod;
    for(int i = 0; i < 4; ++i)
        for(int j = 0; j < 4; ++j) prod[static_cast<std::size_t>(4 * i + j)] = kron(basis.elements[static_cast<std::size_t>(i)], basis.elements[static_cast<std::size_t>(j)]);
    Matrix16c m;
    for(int col = 0; col < 16; ++col) {
        const Matrix4c image = s(prod[static_cast<std::size_t>(col)]);
        for(int row = 0; row < 16; ++row) m(row, col) = (prod[static_cast<std::size_t>(row)].adjoint() * image).trace();
    }
    return m;
}

} // namespace openchain
