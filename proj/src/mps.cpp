#include "openchain/mps.hpp"

#include <cmath>

namespace openchain {

MpsState product_mps(const std::vector<Eigen::Vector2cd> &spinors) {
    std::vector<Eigen::VectorXcd> local(spinors.begin(), spinors.end());
    return {product_chain<cplx>(local), 0.0};
}

MpsState neel_mps(Index n) {
    if(n < 2 || n % 2 != 0) throw Error(ErrorKind::invalid_argument, "neel_mps: n must be even and >= 2, got " + std::to_string(n));
    std::vector<Eigen::Vector2cd> spinors;
    for(Index i = 0; i < n; ++i) spinors.push_back(neel_is_up(i) ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1));
    return product_mps(spinors);
}

MpsState mps_from_dense(const StateVector &psi, Index n_sites, Index chi, double cutoff) {
    if(n_sites < 1 || psi.size() != (Index{1} << n_sites)) throw Error(ErrorKind::dimension_mismatch, "mps_from_dense: vector length is not 2^n");
    // exact left-to-right SVD split into left isometries; lambdas stay 1 and canonicalize fixes the gauge
    MpsState s;
    s.chain.lambdas.assign(static_cast<std::size_t>(n_sites + 1), Eigen::VectorXd::Ones(1));
    Matrix<cplx> rest = psi.transpose();
    Index chi_l       = 1;
    for(Index k = 0; k < n_sites - 1; ++k) {
        const Index cols = rest.size() / (chi_l * 2);
        Matrix<cplx> m   = Eigen::Map<RowMatrix<cplx>>(rest.data(), chi_l * 2, cols); // rest is stored row-major-compatible below
        auto f           = truncated_svd(m, 1 << 20, 0.0);
        DenseTensor<cplx> g({chi_l, 2, f.s.size()});
        g.matrix(chi_l * 2) = f.u;
        s.chain.gammas.push_back(std::move(g));
        s.chain.lambdas[static_cast<std::size_t>(k + 1)] = Eigen::VectorXd::Ones(f.s.size());
        RowMatrix<cplx> next = f.s.asDiagonal() * f.vh;
        rest                 = Eigen::Map<Matrix<cplx>>(next.data(), 1, next.size());
        chi_l                = f.s.size();
    }
    DenseTensor<cplx> last({chi_l, 2, 1});
    for(Index k = 0; k < rest.size(); ++k) last.data()[static_cast<std::size_t>(k)] = rest.data()[k];
    s.chain.gammas.push_back(std::move(last));
    auto rep   = canonicalize(s.chain, chi, cutoff);
    s.log_norm = rep.log_norm;
    return s;
}

StateVector to_dense(const MpsState &state) { return to_dense(state.chain) * std::exp(state.log_norm); }

double apply_gate(MpsState &state, const Matrix4c &gate, Index bond, Index chi, double cutoff) {
    const Matrix<cplx> g = gate;
    auto rep             = apply_two_site_gate(state.chain, g, bond, chi, cutoff);
    state.log_norm += std::log(rep.norm);
    return rep.truncation_weight;
}

double bond_entropy(const MpsState &state, Index bond) { return bond_entropy(state.chain, bond); }

std::vector<double> bond_entropies(const MpsState &state) {
    std::vector<double> s;
    for(Index b = 0; b + 1 < state.n_sites(); ++b) s.push_back(bond_entropy(state, b));
    return s;
}

Matrix2c site_density_matrix(const MpsState &state, Index site) {
    if(site < 0 || site >= state.n_sites()) throw Error(ErrorKind::invalid_argument, "site index out of range");
    const auto c = center_tensor(state.chain, site);
    const Index chi_l = c.dim(0), chi_r = c.dim(2);
    Matrix2c rho      = Matrix2c::Zero();
    for(Index a = 0; a < chi_l; ++a) {
        ConstRowMap<cplx> block(c.raw() + a * 2 * chi_r, 2, chi_r);
        rho.noalias() += block * block.adjoint();
    }
    const cplx tr = rho.trace();
    return rho / tr;
}

cplx local_expectation_complex(const MpsState &state, const Matrix2c &op, Index site) {
    return (op * site_density_matrix(state, site)).trace();
}

double local_expectation(const MpsState &state, const Matrix2c &op, Index site) { return local_expectation_complex(state, op, site).real(); }

std::vector<double> local_expectations(const MpsState &state, const Matrix2c &op) {
    std::vector<double> out;
    for(Index i = 0; i < state.n_sites(); ++i) out.push_back(local_expectation(state, op, i));
    return out;
}

double canonical_form_error(const MpsState &state) {
    const auto &c = state.chain;
    double err    = 0.0;
    for(Index k = 0; k < c.n_sites(); ++k) {
        auto left = c.gammas[static_cast<std::size_t>(k)];
        detail::scale_left(left, c.lambdas[static_cast<std::size_t>(k)]);
        auto right = c.gammas[static_cast<std::size_t>(k)];
        detail::scale_right(right, c.lambdas[static_cast<std::size_t>(k + 1)]);
        const Index chi_l = left.dim(0), chi_r = left.dim(2);
        // sum_{a,s} conj(A[a,s,b]) A[a,s,b'] = I_{chi_r}
        auto lm             = left.matrix(chi_l * 2);
        Matrix<cplx> lenv   = lm.adjoint() * lm;
        auto rm             = right.matrix(chi_l);
        Matrix<cplx> renv   = rm * rm.adjoint();
        err = std::max(err, (lenv - Matrix<cplx>::Identity(chi_r, chi_r)).cwiseAbs().maxCoeff());
        err = std::max(err, (renv - Matrix<cplx>::Identity(chi_l, chi_l)).cwiseAbs().maxCoeff());
    }
    return err;
}

} // namespace openchain
