#pragma once

// Matrix-product chain in mixed canonical form: tensors left of `center` are
// left-orthonormal, tensors right of it right-orthonormal. Gates are applied
// at the orthogonality center, so no Schmidt values are ever inverted and the
// truncation is optimal in the 2-norm even for non-unitary gates.

#include "openchain/vidal_chain.hpp"

namespace openchain {

template<typename Scalar>
struct MixedChain {
    std::vector<DenseTensor<Scalar>> tensors;
    Index center   = 0;
    double log_norm = 0.0; ///< norm divided out of the center tensor

    [[nodiscard]] Index n_sites() const { return static_cast<Index>(tensors.size()); }
    [[nodiscard]] Index phys_dim() const { return tensors.front().dim(1); }
};

/// Right-canonical tensors Gamma[k] lambda[k+1] with the center on site 0.
template<typename Scalar>
MixedChain<Scalar> to_mixed(const VidalChain<Scalar> &c) {
    MixedChain<Scalar> m;
    for(Index k = 0; k < c.n_sites(); ++k) {
        auto t = c.gammas[static_cast<std::size_t>(k)];
        detail::scale_right(t, c.lambdas[static_cast<std::size_t>(k + 1)]);
        if(k == 0) detail::scale_left(t, c.lambdas.front());
        m.tensors.push_back(std::move(t));
    }
    return m;
}

namespace detail {
    template<typename Scalar>
    void shift_center_right(MixedChain<Scalar> &m) {
        const auto k  = static_cast<std::size_t>(m.center);
        auto &t       = m.tensors[k];
        const Index d = t.dim(1), chi_l = t.dim(0), chi_r = t.dim(2);
        Eigen::HouseholderQR<Matrix<Scalar>> qr(Matrix<Scalar>(t.matrix(chi_l * d)));
        const Index r = std::min(chi_l * d, chi_r);
        DenseTensor<Scalar> q({chi_l, d, r});
        q.matrix(chi_l * d) = qr.householderQ() * Matrix<Scalar>::Identity(chi_l * d, r);
        const Matrix<Scalar> rr = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
        auto &next = m.tensors[k + 1];
        DenseTensor<Scalar> nn({r, next.dim(1), next.dim(2)});
        nn.matrix(r).noalias() = rr * next.matrix(next.dim(0));
        t    = std::move(q);
        next = std::move(nn);
        ++m.center;
    }

    template<typename Scalar>
    void shift_center_left(MixedChain<Scalar> &m) {
        const auto k  = static_cast<std::size_t>(m.center);
        auto &t       = m.tensors[k];
        const Index d = t.dim(1), chi_l = t.dim(0), chi_r = t.dim(2);
        // LQ via QR of the adjoint
        Eigen::HouseholderQR<Matrix<Scalar>> qr(Matrix<Scalar>(t.matrix(chi_l).adjoint()));
        const Index r = std::min(chi_l, d * chi_r);
        DenseTensor<Scalar> q({r, d, chi_r});
        q.matrix(r) = (qr.householderQ() * Matrix<Scalar>::Identity(d * chi_r, r)).adjoint();
        const Matrix<Scalar> l = Matrix<Scalar>(qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>()).adjoint();
        auto &prev = m.tensors[k - 1];
        DenseTensor<Scalar> pp({prev.dim(0), prev.dim(1), r});
        pp.matrix(prev.dim(0) * prev.dim(1)).noalias() = prev.matrix(prev.dim(0) * prev.dim(1)) * l;
        t    = std::move(q);
        prev = std::move(pp);
        --m.center;
    }
} // namespace detail

template<typename Scalar>
void move_center(MixedChain<Scalar> &m, Index target) {
    if(target < 0 || target >= m.n_sites()) throw Error(ErrorKind::invalid_argument, "move_center: site out of range");
    while(m.center < target) detail::shift_center_right(m);
    while(m.center > target) detail::shift_center_left(m);
}

/// Applies a two-site gate on (bond, bond+1) at the orthogonality center and
/// leaves the center on bond+1 (move_right) or bond. Returns the discarded
/// weight relative to the updated two-site norm; the kept norm goes to log_norm.
template<typename Scalar>
double apply_two_site_gate(MixedChain<Scalar> &m, const Matrix<Scalar> &gate, Index bond, Index chi, double cutoff, bool move_right,
                           Eigen::VectorXd *schmidt = nullptr) {
    if(bond < 0 || bond + 1 >= m.n_sites()) throw Error(ErrorKind::invalid_argument, "apply_two_site_gate: bond out of range");
    if(m.center != bond && m.center != bond + 1) move_center(m, m.center < bond ? bond : bond + 1);
    const Index d = m.phys_dim();
    auto &t1      = m.tensors[static_cast<std::size_t>(bond)];
    auto &t2      = m.tensors[static_cast<std::size_t>(bond + 1)];
    const Index chi_l = t1.dim(0), chi_m = t1.dim(2), chi_r = t2.dim(2);
    RowMatrix<Scalar> theta = t1.matrix(chi_l * d) * t2.matrix(chi_m);
    RowMatrix<Scalar> updated(chi_l * d, d * chi_r);
    for(Index a = 0; a < chi_l; ++a) {
        ConstRowMap<Scalar> block(theta.data() + a * d * d * chi_r, d * d, chi_r);
        RowMap<Scalar> out(updated.data() + a * d * d * chi_r, d * d, chi_r);
        out.noalias() = gate * block;
    }
    auto f            = truncated_svd(updated, chi, cutoff);
    const double norm = f.s.norm();
    if(!(norm > 0.0)) throw Error(ErrorKind::numerical, "apply_two_site_gate: gate annihilated the state");
    const Index k = f.s.size();
    const Eigen::VectorXd s = f.s / norm;
    m.log_norm += std::log(norm);
    DenseTensor<Scalar> n1({chi_l, d, k}), n2({k, d, chi_r});
    if(move_right) {
        n1.matrix(chi_l * d) = f.u;
        n2.matrix(k)         = s.asDiagonal() * f.vh;
        m.center             = bond + 1;
    } else {
        n1.matrix(chi_l * d) = f.u * s.asDiagonal();
        n2.matrix(k)         = f.vh;
        m.center             = bond;
    }
    t1 = std::move(n1);
    t2 = std::move(n2);
    if(schmidt) *schmidt = s;
    return f.truncation_weight / std::hypot(norm, f.truncation_weight);
}

struct MixedToVidalReport {
    double log_norm          = 0.0;
    double truncation_weight = 0.0;
};

/// Exact Schmidt decomposition on every bond (center to the last site, then a
/// truncated SVD pass right to left) and conversion to Vidal form. Schmidt
/// values below inverse_lambda_threshold are dropped from the Gamma tensors.
template<typename Scalar>
MixedToVidalReport to_vidal(MixedChain<Scalar> m, VidalChain<Scalar> &out, Index chi, double cutoff) {
    const Index n = m.n_sites();
    move_center(m, n - 1);
    MixedToVidalReport rep;
    rep.log_norm = m.log_norm;
    out.gammas.assign(static_cast<std::size_t>(n), {});
    out.lambdas.assign(static_cast<std::size_t>(n + 1), Eigen::VectorXd::Ones(1));
    const Index d = m.phys_dim();
    Eigen::VectorXd lam_right = Eigen::VectorXd::Ones(1);
    for(Index k = n - 1; k >= 1; --k) {
        auto &c           = m.tensors[static_cast<std::size_t>(k)];
        const Index chi_l = c.dim(0), chi_r = c.dim(2);
        auto f            = truncated_svd(c.matrix(chi_l), chi, cutoff);
        const double ns   = f.s.norm();
        if(!(ns > 0.0)) throw Error(ErrorKind::numerical, "to_vidal: state has zero norm");
        rep.log_norm += std::log(ns);
        rep.truncation_weight = std::max(rep.truncation_weight, f.truncation_weight / std::hypot(ns, f.truncation_weight));
        const Index r       = f.s.size();
        Eigen::VectorXd lam = f.s / ns;
        DenseTensor<Scalar> g({r, d, chi_r});
        g.matrix(r) = f.vh;
        detail::scale_right(g, thresholded_inverse(lam_right));
        out.gammas[static_cast<std::size_t>(k)]  = std::move(g);
        out.lambdas[static_cast<std::size_t>(k)] = lam;
        lam_right                                = lam;
        auto &prev = m.tensors[static_cast<std::size_t>(k - 1)];
        DenseTensor<Scalar> pp({prev.dim(0), d, r});
        pp.matrix(prev.dim(0) * d).noalias() = prev.matrix(prev.dim(0) * d) * (f.u * lam.asDiagonal());
        prev = std::move(pp);
    }
    auto &c0        = m.tensors.front();
    const double n0 = c0.norm();
    if(!(n0 > 0.0)) throw Error(ErrorKind::numerical, "to_vidal: state has zero norm");
    rep.log_norm += std::log(n0);
    c0 *= Scalar(1.0 / n0);
    detail::scale_right(c0, thresholded_inverse(lam_right));
    out.gammas.front() = std::move(c0);
    return rep;
}

} // namespace openchain
