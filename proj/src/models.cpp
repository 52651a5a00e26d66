#include "openchain/models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace openchain {

namespace spin {
    Matrix2c identity() { return Matrix2c::Identity(); }
    Matrix2c sigma_x() {
        Matrix2c m;
        m << 0, 1, 1, 0;
        return m;
    }
    Matrix2c sigma_y() {
        Matrix2c m;
        m << 0, cplx(0, -1), cplx(0, 1), 0;
        return m;
    }
    Matrix2c sigma_z() {
        Matrix2c m;
        m << 1, 0, 0, -1;
        return m;
    }
    Matrix2c sigma_plus() {
        Matrix2c m;
        m << 0, 1, 0, 0;
        return m;
    }
    Matrix2c sigma_minus() {
        Matrix2c m;
        m << 0, 0, 1, 0;
        return m;
    }
} // namespace spin

std::vector<std::string> ModelParams::violations() const {
    std::vector<std::string> v;
    if(!std::isfinite(J)) v.emplace_back("J must be finite");
    if(!std::isfinite(delta)) v.emplace_back("delta must be finite");
    if(!(gamma_plus >= 0)) v.emplace_back("gamma_plus must be >= 0");
    if(!(gamma_minus >= 0)) v.emplace_back("gamma_minus must be >= 0");
    if(!(gamma_z >= 0)) v.emplace_back("gamma_z must be >= 0");
    if(!infinite) {
        if(n_sites < 2) v.emplace_back("n_sites must be >= 2");
        else if(n_sites % 2 != 0) v.emplace_back("n_sites must be even for the Neel initial state");
    }
    return v;
}

void ModelParams::validate() const {
    auto v = violations();
    if(!v.empty()) throw ConfigError(std::move(v));
}

const char *to_string(JumpChannel c) {
    switch(c) {
        case JumpChannel::plus: return "plus";
        case JumpChannel::minus: return "minus";
        case JumpChannel::dephasing: return "z";
    }
    return "?";
}

std::vector<JumpOperator> site_jump_ops(const ModelParams &p, Index site) {
    std::vector<JumpOperator> ops;
    if(p.gamma_plus > 0) ops.push_back({site, JumpChannel::plus, p.gamma_plus, std::sqrt(p.gamma_plus) * spin::sigma_plus()});
    if(p.gamma_minus > 0) ops.push_back({site, JumpChannel::minus, p.gamma_minus, std::sqrt(p.gamma_minus) * spin::sigma_minus()});
    if(p.gamma_z > 0) ops.push_back({site, JumpChannel::dephasing, p.gamma_z, std::sqrt(p.gamma_z) * spin::sigma_z()});
    return ops;
}

std::vector<JumpOperator> build_jump_ops(const ModelParams &p) {
    std::vector<JumpOperator> ops;
    const Index n = p.infinite ? 2 : p.n_sites;
    for(Index i = 0; i < n; ++i) {
        auto s = site_jump_ops(p, i);
        ops.insert(ops.end(), s.begin(), s.end());
    }
    return ops;
}

Matrix4c xxz_bond_hamiltonian(const ModelParams &p) {
    using spin::sigma_x, spin::sigma_y, spin::sigma_z;
    return -p.J / 4.0 * (kron(sigma_x(), sigma_x()) + kron(sigma_y(), sigma_y())) + p.delta / 4.0 * kron(sigma_z(), sigma_z());
}

XxzGateFactory::XxzGateFactory(const ModelParams &p) {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(xxz_bond_hamiltonian(p));
    energies_ = es.eigenvalues();
    vectors_  = es.eigenvectors();
}

Matrix4c XxzGateFactory::gate(double dt) const {
    Eigen::Vector4cd phases;
    for(int k = 0; k < 4; ++k) phases(k) = std::exp(cplx(0, -energies_(k) * dt));
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

UnitaryGate build_xxz_gate(const ModelParams &p, double dt) { return {XxzGateFactory(p).gate(dt), dt}; }

const char *to_string(BasisFlavor f) { return f == BasisFlavor::pauli ? "pauli" : "linearized"; }

BasisFlavor basis_flavor_from_string(const std::string &s) {
    if(s == "pauli") return BasisFlavor::pauli;
    if(s == "linearized") return BasisFlavor::linearized;
    throw Error(ErrorKind::invalid_argument, "unknown basis flavor '" + s + "' (expected pauli or linearized)");
}

OperatorBasis OperatorBasis::pauli() {
    const double r = 1.0 / std::sqrt(2.0);
    return {{r * spin::identity(), r * spin::sigma_x(), r * spin::sigma_y(), r * spin::sigma_z()}, BasisFlavor::pauli};
}

OperatorBasis OperatorBasis::linearized() {
    OperatorBasis b;
    b.flavor = BasisFlavor::linearized;
    for(int k = 0; k < 4; ++k) {
        b.elements[static_cast<std::size_t>(k)].setZero();
        b.elements[static_cast<std::size_t>(k)](k / 2, k % 2) = 1.0;
    }
    return b;
}

Eigen::Vector4cd OperatorBasis::coefficients(const Matrix2c &x) const {
    Eigen::Vector4cd c;
    for(int k = 0; k < 4; ++k) c(k) = (elements[static_cast<std::size_t>(k)].adjoint() * x).trace();
    return c;
}

Eigen::Vector4cd OperatorBasis::expectation_vector(const Matrix2c &o) const {
    Eigen::Vector4cd c;
    for(int k = 0; k < 4; ++k) c(k) = (o * elements[static_cast<std::size_t>(k)]).trace();
    return c;
}

Matrix2c OperatorBasis::compose(const Eigen::Vector4cd &coeffs) const {
    Matrix2c m = Matrix2c::Zero();
    for(int k = 0; k < 4; ++k) m += coeffs(k) * elements[static_cast<std::size_t>(k)];
    return m;
}

double OperatorBasis::orthonormality_error() const {
    double err = 0;
    for(int i = 0; i < 4; ++i)
        for(int j = 0; j < 4; ++j) {
            const cplx ip = (elements[static_cast<std::size_t>(i)] * elements[static_cast<std::size_t>(j)].adjoint()).trace();
            err           = std::max(err, std::abs(ip - cplx(i == j ? 1.0 : 0.0)));
        }
    return err;
}

namespace {
    Matrix2c dissipate(const std::vector<JumpOperator> &ops, const Matrix2c &x) {
        Matrix2c out = Matrix2c::Zero();
        for(const auto &j : ops) {
            const Matrix2c ldl = j.op.adjoint() * j.op;
            out += j.op * x * j.op.adjoint() - 0.5 * (ldl * x + x * ldl);
        }
        return out;
    }
} // namespace

Matrix4c local_dissipator_generator(const ModelParams &p, const OperatorBasis &basis) {
    const auto ops = site_jump_ops(p, 0);
    Matrix4c m;
    for(int k = 0; k < 4; ++k) {
        const Matrix2c image = dissipate(ops, basis.elements[static_cast<std::size_t>(k)]);
        for(int i = 0; i < 4; ++i) m(i, k) = (basis.elements[static_cast<std::size_t>(i)].adjoint() * image).trace();
    }
    return m;
}

Matrix16c super_generator(const ModelParams &p, const OperatorBasis &basis, double left_weight, double right_weight) {
    const Matrix4c h       = xxz_bond_hamiltonian(p);
    const auto ops         = site_jump_ops(p, 0);
    const Matrix2c id      = Matrix2c::Identity();
    const cplx minus_i(0, -1);
    return two_site_superoperator_matrix(basis, [&](const Matrix4c &x) {
        Matrix4c out = minus_i * (h * x - x * h);
        for(const auto &j : ops) {
            const Matrix4c l1   = kron(j.op, id);
            const Matrix4c l2   = kron(id, j.op);
            const Matrix4c l1d  = l1.adjoint() * l1;
            const Matrix4c l2d  = l2.adjoint() * l2;
            out += left_weight * (l1 * x * l1.adjoint() - 0.5 * (l1d * x + x * l1d));
            out += right_weight * (l2 * x * l2.adjoint() - 0.5 * (l2d * x + x * l2d));
        }
        return out;
    });
}

SuperGate build_super_gate(const ModelParams &p, const OperatorBasis &basis, double dt_fraction, double left_weight, double right_weight) {
    SuperGate g;
    g.generator = super_generator(p, basis, left_weight, right_weight);
    g.matrix    = (g.generator * dt_fraction).exp();
    g.dt        = dt_fraction;
    g.flavor    = basis.flavor;
    return g;
}

std::pair<double, double> boundary_weights(Index bond, Index n_sites) {
    const double left  = bond == 0 ? 1.0 : 0.5;
    const double right = bond + 2 == n_sites ? 1.0 : 0.5;
    return {left, right};
}

} // namespace openchain
