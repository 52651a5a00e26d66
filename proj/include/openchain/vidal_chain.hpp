#pragma once

// Finite matrix-product chain in Vidal form,
//
//   |x> = sum  lambda[0] Gamma[0] lambda[1] Gamma[1] ... Gamma[N-1] lambda[N]
//
// with Gamma[n] of shape (chi_left, d, chi_right) and lambda[0] = lambda[N] = {1}.
// The physical dimension d is 2 for pure states and 4 for vectorized density
// operators; everything here is agnostic of the interpretation.

#include "openchain/tensor.hpp"

#include <cmath>
#include <functional>

namespace openchain {

/// Schmidt values below this are treated as zero when dividing them out.
inline constexpr double inverse_lambda_threshold = 1e-15;

template<typename Scalar>
struct VidalChain {
    std::vector<DenseTensor<Scalar>> gammas;
    std::vector<Eigen::VectorXd> lambdas; ///< n_sites + 1 entries, boundary ones trivial

    [[nodiscard]] Index n_sites() const { return static_cast<Index>(gammas.size()); }
    [[nodiscard]] Index phys_dim() const { return gammas.empty() ? 0 : gammas.front().dim(1); }
    /// Schmidt vector on interior bond b, between sites b and b+1.
    [[nodiscard]] const Eigen::VectorXd &bond_lambda(Index b) const { return lambdas.at(static_cast<std::size_t>(b + 1)); }
    [[nodiscard]] Index bond_dim(Index b) const { return bond_lambda(b).size(); }
    [[nodiscard]] Index max_bond_dim() const {
        Index m = 1;
        for(const auto &l : lambdas) m = std::max(m, l.size());
        return m;
    }
};

/// Product state from per-site local vectors (each normalized to unit norm in the chain).
template<typename Scalar>
VidalChain<Scalar> product_chain(const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> &local) {
    VidalChain<Scalar> c;
    for(const auto &v : local) {
        DenseTensor<Scalar> g({1, v.size(), 1});
        const double n = v.norm();
        if(n == 0.0) throw Error(ErrorKind::invalid_argument, "product_chain: zero local vector");
        for(Index s = 0; s < v.size(); ++s) g({0, s, 0}) = v(s) / n;
        c.gammas.push_back(std::move(g));
    }
    c.lambdas.assign(local.size() + 1, Eigen::VectorXd::Ones(1));
    return c;
}

inline Eigen::VectorXd thresholded_inverse(const Eigen::VectorXd &lambda) {
    Eigen::VectorXd inv(lambda.size());
    for(Index k = 0; k < lambda.size(); ++k) inv(k) = lambda(k) > inverse_lambda_threshold ? 1.0 / lambda(k) : 0.0;
    return inv;
}

namespace detail {
    /// Scales the left (row) index of a (chi_l, d, chi_r) tensor by w.
    template<typename Scalar>
    void scale_left(DenseTensor<Scalar> &t, const Eigen::VectorXd &w) {
        auto m = t.matrix(t.dim(0));
        for(Index a = 0; a < m.rows(); ++a) m.row(a) *= w(a);
    }
    /// Scales the right (column) index of a (chi_l, d, chi_r) tensor by w.
    template<typename Scalar>
    void scale_right(DenseTensor<Scalar> &t, const Eigen::VectorXd &w) {
        auto m = t.matrix(t.dim(0) * t.dim(1));
        m      = m * w.asDiagonal();
    }
} // namespace detail

struct GateReport {
    double truncation_weight = 0.0; ///< relative to the norm of the updated two-site block
    double norm              = 1.0; ///< norm of the kept singular values before renormalization
};

/// Applies a (d^2 x d^2) two-site gate on sites (site, site+1) and re-splits with
/// a truncated SVD. The gate acts on the combined index s1*d + s2.
template<typename Scalar>
GateReport apply_two_site_gate(VidalChain<Scalar> &chain, const Matrix<Scalar> &gate, Index site, Index chi, double cutoff) {
    const Index n = chain.n_sites();
    if(site < 0 || site + 1 >= n) throw Error(ErrorKind::invalid_argument, "apply_two_site_gate: bond " + std::to_string(site) + " is not interior");
    const Index d = chain.phys_dim();
    if(gate.rows() != d * d || gate.cols() != d * d) throw Error(ErrorKind::dimension_mismatch, "apply_two_site_gate: gate does not match physical dimension");

    auto &g1                  = chain.gammas[static_cast<std::size_t>(site)];
    auto &g2                  = chain.gammas[static_cast<std::size_t>(site + 1)];
    const auto &lam_l         = chain.lambdas[static_cast<std::size_t>(site)];
    const auto &lam_m         = chain.lambdas[static_cast<std::size_t>(site + 1)];
    const auto &lam_r         = chain.lambdas[static_cast<std::size_t>(site + 2)];
    const Index chi_l         = g1.dim(0);
    const Index chi_m         = g1.dim(2);
    const Index chi_r         = g2.dim(2);

    RowMatrix<Scalar> left = g1.matrix(chi_l * d);
    for(Index a = 0; a < chi_l; ++a) left.middleRows(a * d, d) *= lam_l(a);
    left = left * lam_m.asDiagonal();
    RowMatrix<Scalar> right = g2.matrix(chi_m);
    {
        // right is chi_m x (d*chi_r); scale each chi_r column by lam_r
        for(Index s = 0; s < d; ++s) right.middleCols(s * chi_r, chi_r) = right.middleCols(s * chi_r, chi_r) * lam_r.asDiagonal();
    }
    RowMatrix<Scalar> theta = left * right; // (chi_l*d) x (d*chi_r)

    // gate on the (s1, s2) pair: for fixed a the block is (d*d) x chi_r
    RowMatrix<Scalar> updated(chi_l * d, d * chi_r);
    for(Index a = 0; a < chi_l; ++a) {
        ConstRowMap<Scalar> block(theta.data() + a * d * d * chi_r, d * d, chi_r);
        RowMap<Scalar> out(updated.data() + a * d * d * chi_r, d * d, chi_r);
        out.noalias() = gate * block;
    }

    auto f            = truncated_svd(updated, chi, cutoff);
    const double norm = f.s.norm();
    GateReport rep;
    rep.norm              = norm;
    rep.truncation_weight = norm > 0 ? f.truncation_weight / std::hypot(norm, f.truncation_weight) : 0.0;
    if(norm == 0.0) throw Error(ErrorKind::numerical, "apply_two_site_gate: gate annihilated the state");
    const Index k = f.s.size();

    Eigen::VectorXd inv_l = thresholded_inverse(lam_l);
    Eigen::VectorXd inv_r = thresholded_inverse(lam_r);

    DenseTensor<Scalar> new_g1({chi_l, d, k});
    new_g1.matrix(chi_l * d) = f.u;
    detail::scale_left(new_g1, inv_l);

    DenseTensor<Scalar> new_g2({k, d, chi_r});
    new_g2.matrix(k) = f.vh;
    detail::scale_right(new_g2, inv_r);

    g1                                                = std::move(new_g1);
    g2                                                = std::move(new_g2);
    chain.lambdas[static_cast<std::size_t>(site + 1)] = f.s / norm;
    return rep;
}

/// Single-site operator (d x d) applied to Gamma[site]. Preserves canonical
/// form only for unitaries.
template<typename Scalar>
void apply_site_operator(VidalChain<Scalar> &chain, const Matrix<Scalar> &op, Index site) {
    auto &g       = chain.gammas.at(static_cast<std::size_t>(site));
    const Index d = g.dim(1);
    if(op.rows() != d || op.cols() != d) throw Error(ErrorKind::dimension_mismatch, "apply_site_operator: operator does not match physical dimension");
    for(Index a = 0; a < g.dim(0); ++a) {
        RowMap<Scalar> block(g.raw() + a * d * g.dim(2), d, g.dim(2));
        block = (op * block).eval();
    }
}

/// Orthogonality-center tensor lambda[site] Gamma[site] lambda[site+1].
template<typename Scalar>
DenseTensor<Scalar> center_tensor(const VidalChain<Scalar> &chain, Index site) {
    auto c = chain.gammas.at(static_cast<std::size_t>(site));
    detail::scale_left(c, chain.lambdas[static_cast<std::size_t>(site)]);
    detail::scale_right(c, chain.lambdas[static_cast<std::size_t>(site + 1)]);
    return c;
}

struct CanonicalizeReport {
    double log_norm          = 0.0; ///< log of the 2-norm before renormalization
    double truncation_weight = 0.0; ///< largest relative weight discarded on any bond
};

/// Visitor invoked on the orthogonality center (chi_l, d, chi_r) during the
/// left-to-right pass; left of it everything is left-orthonormal. Right of it
/// the tensors are right-orthonormal only if the input chain was canonical.
template<typename Scalar>
using CenterVisitor = std::function<void(Index site, DenseTensor<Scalar> &center)>;

/// Restores Vidal canonical form with exact Schmidt values on every bond:
/// a QR pass left to right followed by an SVD pass right to left. Works for
/// arbitrary (non-canonical) chains; the state is renormalized to unit norm.
template<typename Scalar>
CanonicalizeReport canonicalize(VidalChain<Scalar> &chain, Index chi, double cutoff, const CenterVisitor<Scalar> &visit = {}) {
    const Index n = chain.n_sites();
    if(n == 0) throw Error(ErrorKind::invalid_argument, "canonicalize: empty chain");
    const Index d = chain.phys_dim();
    CanonicalizeReport rep;

    std::vector<RowMatrix<Scalar>> left_iso(static_cast<std::size_t>(n));
    DenseTensor<Scalar> c = center_tensor(chain, 0);
    for(Index k = 0;; ++k) {
        if(visit) visit(k, c);
        if(k == n - 1) break;
        const Index chi_l = c.dim(0);
        const Index chi_r = c.dim(2);
        auto cm           = c.matrix(chi_l * d);
        Eigen::HouseholderQR<Matrix<Scalar>> qr(cm);
        const Index m                           = std::min(chi_l * d, chi_r);
        left_iso[static_cast<std::size_t>(k)]   = qr.householderQ() * Matrix<Scalar>::Identity(chi_l * d, m);
        Matrix<Scalar> r                        = qr.matrixQR().topRows(m).template triangularView<Eigen::Upper>();
        auto next                               = chain.gammas[static_cast<std::size_t>(k + 1)];
        detail::scale_right(next, chain.lambdas[static_cast<std::size_t>(k + 2)]);
        DenseTensor<Scalar> nc({m, d, next.dim(2)});
        nc.matrix(m).noalias() = r * next.matrix(next.dim(0));
        c                      = std::move(nc);
    }

    // right-to-left SVD pass; c is the center on the last site
    Eigen::VectorXd lam_right = Eigen::VectorXd::Ones(1);
    for(Index k = n - 1; k >= 1; --k) {
        const Index chi_l = c.dim(0);
        const Index chi_r = c.dim(2);
        auto f            = truncated_svd(c.matrix(chi_l), chi, cutoff);
        const double ns   = f.s.norm();
        if(!(ns > 0.0)) throw Error(ErrorKind::numerical, "canonicalize: state has zero norm");
        rep.log_norm += std::log(ns);
        rep.truncation_weight = std::max(rep.truncation_weight, f.truncation_weight / std::hypot(ns, f.truncation_weight));
        const Index m       = f.s.size();
        Eigen::VectorXd lam = f.s / ns;

        DenseTensor<Scalar> g({m, d, chi_r});
        g.matrix(m) = f.vh;
        detail::scale_right(g, thresholded_inverse(lam_right));
        chain.gammas[static_cast<std::size_t>(k)]  = std::move(g);
        chain.lambdas[static_cast<std::size_t>(k)] = lam;
        lam_right                                  = lam;

        const auto &iso = left_iso[static_cast<std::size_t>(k - 1)];
        const Index pl  = iso.rows() / d;
        Matrix<Scalar> us = f.u;
        if(k == 1) {
            DenseTensor<Scalar> g0({pl, d, m});
            g0.matrix(pl * d).noalias() = iso * us;
            c                           = std::move(g0);
        } else {
            DenseTensor<Scalar> nc({pl, d, m});
            nc.matrix(pl * d).noalias() = iso * (us * lam.asDiagonal());
            c                           = std::move(nc);
        }
    }
    if(n == 1) {
        const double ns = c.norm();
        if(!(ns > 0.0)) throw Error(ErrorKind::numerical, "canonicalize: state has zero norm");
        rep.log_norm += std::log(ns);
        c *= Scalar(1.0 / ns);
    }
    chain.gammas[0]                                 = std::move(c);
    chain.lambdas.front()                           = Eigen::VectorXd::Ones(1);
    chain.lambdas[static_cast<std::size_t>(n)]      = Eigen::VectorXd::Ones(1);
    return rep;
}

/// Bond order for one sweep of a Trotter layer: even bonds (0, 2, ...) then
/// odd bonds, or the reverse order when transposed.
inline std::vector<Index> sweep_bonds(Index n_sites, bool transposed) {
    std::vector<Index> bonds;
    for(Index b = 0; b + 1 < n_sites; b += 2) bonds.push_back(b);
    for(Index b = 1; b + 1 < n_sites; b += 2) bonds.push_back(b);
    if(transposed) std::reverse(bonds.begin(), bonds.end());
    return bonds;
}

/// Von Neumann entropy (bits) of interior bond b.
template<typename Scalar>
double bond_entropy(const VidalChain<Scalar> &chain, Index bond) {
    if(bond < 0 || bond + 1 >= chain.n_sites()) throw Error(ErrorKind::invalid_argument, "bond index out of range");
    return entropy_bits(chain.bond_lambda(bond));
}

/// Dense amplitude vector of a small chain; site 0 is the most significant digit.
template<typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_dense(const VidalChain<Scalar> &chain) {
    const Index d   = chain.phys_dim();
    RowMatrix<Scalar> acc = RowMatrix<Scalar>::Ones(1, 1);
    for(Index k = 0; k < chain.n_sites(); ++k) {
        auto g = chain.gammas[static_cast<std::size_t>(k)];
        detail::scale_left(g, chain.lambdas[static_cast<std::size_t>(k)]);
        // acc: (prefix) x chi_l ; g: chi_l x (d * chi_r)
        RowMatrix<Scalar> next = acc * g.matrix(g.dim(0));
        acc = Eigen::Map<RowMatrix<Scalar>>(next.data(), next.rows() * d, g.dim(2));
    }
    return Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(acc.data(), acc.size());
}

} // namespace openchain
