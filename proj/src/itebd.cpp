#include "openchain/itebd.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace openchain {

namespace {

constexpr double inverse_floor = 1e-14;

Eigen::VectorXd safe_inverse(const Eigen::VectorXd &v) {
    Eigen::VectorXd out(v.size());
    for(Index k = 0; k < v.size(); ++k) out(k) = v(k) > inverse_floor ? 1.0 / v(k) : 0.0;
    return out;
}

template<typename Scalar>
DenseTensor<Scalar> site_tensor(const Eigen::Vector4cd &coeffs) {
    DenseTensor<Scalar> g({1, 4, 1});
    auto m = g.matrix(1);
    m      = cast_scalar<Scalar>(Eigen::Matrix<cplx, 1, 4>(coeffs.transpose()));
    return g;
}

// theta(a, s1 s2, b) = lo(a) g1(a, s1, k) lm(k) g2(k, s2, b) lo(b); rows (a, s1), cols (s2, b).
template<typename Scalar>
RowMatrix<Scalar> two_site_theta(const DenseTensor<Scalar> &g1, const Eigen::VectorXd &lm, const DenseTensor<Scalar> &g2,
                                 const Eigen::VectorXd &lo) {
    const Index co = lo.size(), cm = lm.size();
    RowMatrix<Scalar> left = g1.matrix(co * 4);
    for(Index r = 0; r < left.rows(); ++r) left.row(r) *= lo(r / 4);
    left *= lm.cast<Scalar>().asDiagonal();
    RowMatrix<Scalar> theta = left * g2.matrix(cm);
    for(Index c = 0; c < theta.cols(); ++c) theta.col(c) *= lo(c % co);
    return theta;
}

// Applies the gate to bond g1|g2 with outer weights lo and returns the relative
// truncation weight.
template<typename Scalar>
double apply_cell_gate(DenseTensor<Scalar> &g1, Eigen::VectorXd &lm, DenseTensor<Scalar> &g2, const Eigen::VectorXd &lo,
                       const Matrix<Scalar> &gate, Index chi, double cutoff) {
    const Index co = lo.size();
    RowMatrix<Scalar> theta = two_site_theta(g1, lm, g2, lo);
    for(Index a = 0; a < co; ++a) {
        RowMap<Scalar> block(theta.data() + a * 16 * co, 16, co);
        block = gate * Matrix<Scalar>(block);
    }
    auto f = truncated_svd(theta, chi, cutoff);
    const Index k            = f.s.size();
    const double kept        = f.s.norm();
    const Eigen::VectorXd li = safe_inverse(lo);
    g1                       = DenseTensor<Scalar>({co, 4, k});
    auto m1                  = g1.matrix(4 * co);
    m1                       = f.u;
    for(Index r = 0; r < m1.rows(); ++r) m1.row(r) *= li(r / 4);
    g2      = DenseTensor<Scalar>({k, 4, co});
    auto m2 = g2.matrix(k);
    m2      = f.vh;
    for(Index c = 0; c < m2.cols(); ++c) m2.col(c) *= li(c % co);
    lm = f.s / kept;
    return f.truncation_weight / std::sqrt(kept * kept + f.truncation_weight * f.truncation_weight);
}

// Cell tensor C(a, s1 s2, b) = Gamma_a lambda_a Gamma_b, stored row-major.
// wide(): (chi, 16 chi) with the blocks C_s side by side; tall(): rows (a, s).
template<typename Scalar>
RowMatrix<Scalar> cell_tensor(const InfiniteMpdo<Scalar> &st) {
    const Index cb = st.lambda_b.size(), ca = st.lambda_a.size();
    RowMatrix<Scalar> left = st.gamma_a.matrix(cb * 4);
    left *= st.lambda_a.template cast<Scalar>().asDiagonal();
    return left * st.gamma_b.matrix(ca);
}

template<typename Scalar>
ConstRowMap<Scalar> wide(const RowMatrix<Scalar> &c, Index n) {
    return ConstRowMap<Scalar>(c.data(), n, c.size() / n);
}

template<typename Scalar>
ConstRowMap<Scalar> tall(const RowMatrix<Scalar> &c, Index n) {
    return ConstRowMap<Scalar>(c.data(), c.size() / n, n);
}

// sum_s C_s K C_s^dag
template<typename Scalar>
Matrix<Scalar> right_map(const RowMatrix<Scalar> &c, Index n, const Matrix<Scalar> &k) {
    const RowMatrix<Scalar> ck = tall(c, n) * k;
    return wide(ck, n) * wide(c, n).adjoint();
}

// sum_s C_s^dag K C_s
template<typename Scalar>
Matrix<Scalar> left_map(const RowMatrix<Scalar> &c, Index n, const Matrix<Scalar> &k) {
    const RowMatrix<Scalar> kc = k * wide(c, n);
    return tall(c, n).adjoint() * tall(kc, n);
}

template<typename Scalar, typename Map>
Matrix<Scalar> fixed_point(Map &&apply, Index n, double tol, int max_iterations, int &iterations, double &residual) {
    Matrix<Scalar> x = Matrix<Scalar>::Identity(n, n) / std::sqrt(static_cast<double>(n));
    for(iterations = 1; iterations <= max_iterations; ++iterations) {
        Matrix<Scalar> y = apply(x);
        y                = (0.5 * (y + y.adjoint())).eval();
        if(real_part(y.trace()) < 0.0) y = -y;
        const double nrm = y.norm();
        if(!(nrm > 0.0) || !std::isfinite(nrm)) throw Error(ErrorKind::numerical, "reorthogonalize: transfer map collapsed");
        y /= nrm;
        residual = (y - x).norm();
        x        = std::move(y);
        if(residual < tol) return x;
    }
    throw Error(ErrorKind::numerical, "reorthogonalize: power iteration did not converge after " + std::to_string(max_iterations) +
                                          " iterations (residual " + std::to_string(residual) + ")");
}

// Square root factor of a positive semidefinite fixed point: x = f f^dag,
// with eigenvalues below the floor dropped. Returns f and its pseudo-inverse.
template<typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> psd_factor(const Matrix<Scalar> &x) {
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(x);
    if(es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "reorthogonalize: eigendecomposition failed");
    const auto &ev   = es.eigenvalues();
    const double top = ev.maxCoeff();
    std::vector<Index> keep;
    for(Index k = ev.size() - 1; k >= 0; --k)
        if(ev(k) > top * 1e-14) keep.push_back(k);
    Matrix<Scalar> f(x.rows(), static_cast<Index>(keep.size())), finv(static_cast<Index>(keep.size()), x.rows());
    for(std::size_t j = 0; j < keep.size(); ++j) {
        const double r = std::sqrt(ev(keep[j]));
        f.col(static_cast<Index>(j))     = es.eigenvectors().col(keep[j]) * r;
        finv.row(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]).adjoint() / r;
    }
    return {f, finv};
}

template<typename Scalar>
double identity_deviation(const Matrix<Scalar> &m) {
    return (m - Matrix<Scalar>::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

// Left/right canonical deviations of one site tensor (l, 4, r).
template<typename Scalar>
double site_canonical_error(const DenseTensor<Scalar> &g, const Eigen::VectorXd &ll, const Eigen::VectorXd &lr) {
    const Index cl = ll.size(), cr = lr.size();
    Matrix<Scalar> right = g.matrix(cl);  // (l, 4 r)
    for(Index c = 0; c < right.cols(); ++c) right.col(c) *= lr(c % cr);
    Matrix<Scalar> left = g.matrix(cl * 4); // (l 4, r)
    for(Index r = 0; r < left.rows(); ++r) left.row(r) *= ll(r / 4);
    return std::max(identity_deviation<Scalar>(right * right.adjoint()), identity_deviation<Scalar>(left.adjoint() * left));
}

Eigen::MatrixXcd transfer_site(const Eigen::Vector4cd &v, const Eigen::MatrixXcd &g, Index cl, Index cr) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cl, cr);
    for(int s = 0; s < 4; ++s)
        if(v(s) != cplx(0.0)) m += v(s) * g.middleCols(s * cr, cr);
    return m;
}

} // namespace

template<typename Scalar>
InfiniteMpdo<Scalar> neel_infinite_mpdo(BasisFlavor flavor) {
    if constexpr(!is_complex_v<Scalar>) {
        if(flavor != BasisFlavor::pauli) throw Error(ErrorKind::invalid_argument, "real MPDO storage requires the pauli basis");
    }
    const auto basis = OperatorBasis::of(flavor);
    Matrix2c up      = Matrix2c::Zero();
    Matrix2c down    = Matrix2c::Zero();
    up(0, 0)         = 1.0;
    down(1, 1)       = 1.0;
    InfiniteMpdo<Scalar> st;
    st.flavor   = flavor;
    st.gamma_a  = site_tensor<Scalar>(basis.coefficients(up));
    st.gamma_b  = site_tensor<Scalar>(basis.coefficients(down));
    st.lambda_a = Eigen::VectorXd::Ones(1);
    st.lambda_b = Eigen::VectorXd::Ones(1);
    return st;
}

template<typename Scalar>
ReorthogonalizeReport reorthogonalize(InfiniteMpdo<Scalar> &st, Index chi, double cutoff, double tol, int max_iterations) {
    ReorthogonalizeReport rep;
    const RowMatrix<Scalar> c = cell_tensor(st);
    const Index n             = st.lambda_b.size();
    const auto lb          = st.lambda_b.template cast<Scalar>().asDiagonal();

    int it_r = 0, it_l = 0;
    double res_r = 0.0, res_l = 0.0;
    const Matrix<Scalar> r = fixed_point<Scalar>(
        [&](const Matrix<Scalar> &x) { return right_map<Scalar>(c, n, Matrix<Scalar>(lb * x * lb)); }, n, tol, max_iterations, it_r, res_r);
    const Matrix<Scalar> l = fixed_point<Scalar>(
        [&](const Matrix<Scalar> &x) { return left_map<Scalar>(c, n, Matrix<Scalar>(lb * x * lb)); }, n, tol, max_iterations, it_l, res_l);
    rep.iterations = it_r + it_l;
    rep.residual   = std::max(res_r, res_l);

    // R = W W^dag and L = Y^dag Y
    const auto [w, w_inv]   = psd_factor<Scalar>(r);
    const auto [yd, yd_inv] = psd_factor<Scalar>(l);
    const Matrix<Scalar> y     = yd.adjoint();
    const Matrix<Scalar> y_inv = yd_inv.adjoint();

    auto f = truncated_svd(Matrix<Scalar>(y * lb * w), chi, cutoff);
    const Index k             = f.s.size();
    const Eigen::VectorXd sig = f.s / f.s.norm();

    // C'_s = V^dag W^-1 C_s Y^-1 U, then split sig C' sig into the two sites.
    const Matrix<Scalar> left_factor  = f.vh * w_inv;
    const Matrix<Scalar> right_factor = y_inv * f.u;
    const RowMatrix<Scalar> lc        = left_factor * wide(c, n);
    const RowMatrix<Scalar> cp        = tall(lc, n) * right_factor;
    RowMatrix<Scalar> theta           = ConstRowMap<Scalar>(cp.data(), 4 * k, 4 * k);
    for(Index row = 0; row < theta.rows(); ++row) theta.row(row) *= sig(row / 4);
    for(Index col = 0; col < theta.cols(); ++col) theta.col(col) *= sig(col % k);

    auto g = truncated_svd(theta, chi, cutoff);
    const Index ka             = g.s.size();
    const Eigen::VectorXd sinv = safe_inverse(sig);
    st.gamma_a                 = DenseTensor<Scalar>({k, 4, ka});
    auto ma                    = st.gamma_a.matrix(4 * k);
    ma                         = g.u;
    for(Index row = 0; row < ma.rows(); ++row) ma.row(row) *= sinv(row / 4);
    st.gamma_b = DenseTensor<Scalar>({ka, 4, k});
    auto mb    = st.gamma_b.matrix(ka);
    mb         = g.vh;
    for(Index col = 0; col < mb.cols(); ++col) mb.col(col) *= sinv(col % k);
    st.lambda_a = g.s / g.s.norm();
    st.lambda_b = sig;

    rep.canonical_error = canonical_error(st);
    return rep;
}

template<typename Scalar>
double canonical_error(const InfiniteMpdo<Scalar> &st) {
    return std::max(site_canonical_error(st.gamma_a, st.lambda_b, st.lambda_a), site_canonical_error(st.gamma_b, st.lambda_a, st.lambda_b));
}

template<typename Scalar>
double infinite_operator_entanglement(const InfiniteMpdo<Scalar> &st, int bond) {
    if(bond != 0 && bond != 1) throw Error(ErrorKind::invalid_argument, "infinite_operator_entanglement: bond must be 0 or 1");
    return entropy_bits(bond == 0 ? st.lambda_a : st.lambda_b);
}

template<typename Scalar>
std::array<double, 2> infinite_local_expectations(const InfiniteMpdo<Scalar> &st, const Matrix2c &op) {
    const auto basis  = OperatorBasis::of(st.flavor);
    const auto tv     = basis.trace_vector();
    const auto ov     = basis.expectation_vector(op);
    const Index cb    = st.lambda_b.size(), ca = st.lambda_a.size();
    const Eigen::MatrixXcd ga = st.gamma_a.matrix(cb).template cast<cplx>();
    const Eigen::MatrixXcd gb = st.gamma_b.matrix(ca).template cast<cplx>();
    const auto lb             = st.lambda_b.template cast<cplx>().asDiagonal();
    const auto la             = st.lambda_a.template cast<cplx>().asDiagonal();

    const Eigen::MatrixXcd ta = transfer_site(tv, ga, cb, ca), tb = transfer_site(tv, gb, ca, cb);
    const Eigen::MatrixXcd t  = lb * ta * la * tb;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(t), left(t.transpose());
    if(right.info() != Eigen::Success || left.info() != Eigen::Success)
        throw Error(ErrorKind::numerical, "infinite_local_expectations: eigendecomposition failed");
    auto leading = [](const Eigen::VectorXcd &ev) {
        Index best = 0;
        for(Index k = 1; k < ev.size(); ++k)
            if(std::abs(ev(k)) > std::abs(ev(best))) best = k;
        double second = 0.0;
        for(Index k = 0; k < ev.size(); ++k)
            if(k != best) second = std::max(second, std::abs(ev(k)));
        if(!(second < (1.0 - 1e-9) * std::abs(ev(best))))
            throw Error(ErrorKind::numerical, "infinite_local_expectations: leading eigenvalue of the trace transfer matrix is degenerate "
                                              "(|nu1| = " + std::to_string(std::abs(ev(best))) + ", |nu2| = " + std::to_string(second) +
                                                  "); try a smaller dt");
        return best;
    };
    const Eigen::VectorXcd r = right.eigenvectors().col(leading(right.eigenvalues()));
    const Eigen::VectorXcd l = left.eigenvectors().col(leading(left.eigenvalues()));
    const cplx norm          = l.transpose() * t * r;

    const Eigen::MatrixXcd oa = lb * transfer_site(ov, ga, cb, ca) * la * tb;
    const Eigen::MatrixXcd ob = lb * ta * la * transfer_site(ov, gb, ca, cb);
    const cplx ea             = l.transpose() * oa * r;
    const cplx eb             = l.transpose() * ob * r;
    return {(ea / norm).real(), (eb / norm).real()};
}

template<typename Scalar>
ItebdPropagator<Scalar>::ItebdPropagator(const ModelParams &p, BasisFlavor flavor, double dt, int order, int reorth_interval)
    : params_(p), basis_(OperatorBasis::of(flavor)), dt_(dt), order_(order), reorth_interval_(reorth_interval) {
    if(order != 2 && order != 4) throw Error(ErrorKind::invalid_argument, "trotter order must be 2 or 4");
    if(!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dt must be positive");
    if(reorth_interval < 1) throw Error(ErrorKind::invalid_argument, "reorthogonalization interval must be >= 1");
    if constexpr(!is_complex_v<Scalar>) {
        if(flavor != BasisFlavor::pauli) throw Error(ErrorKind::invalid_argument, "real MPDO storage requires the pauli basis");
    }
}

template<typename Scalar>
const Matrix<Scalar> &ItebdPropagator<Scalar>::gate(int numerator) {
    auto it = cache_.find(numerator);
    if(it == cache_.end()) {
        const double frac = numerator * dt_ / trotter_denominator(order_);
        it                = cache_.emplace(numerator, build_super_gate(params_, basis_, frac, 0.5, 0.5).template as<Scalar>()).first;
    }
    return it->second;
}

template<typename Scalar>
ItebdStats ItebdPropagator<Scalar>::step(InfiniteMpdo<Scalar> &st, Index chi, double cutoff) {
    if(st.flavor != basis_.flavor) throw Error(ErrorKind::invalid_argument, "ItebdPropagator: state basis flavor does not match");
    ItebdStats stats;
    for(const auto &layer : trotter_layers(order_)) {
        const auto &g = gate(layer.numerator);
        const double w = layer.odd ? apply_cell_gate(st.gamma_b, st.lambda_b, st.gamma_a, st.lambda_a, g, chi, cutoff)
                                   : apply_cell_gate(st.gamma_a, st.lambda_a, st.gamma_b, st.lambda_b, g, chi, cutoff);
        stats.max_truncation_weight = std::max(stats.max_truncation_weight, w);
    }
    if(++steps_ % reorth_interval_ == 0) {
        reorthogonalize(st, chi, cutoff);
        stats.reorthogonalized = true;
    }
    return stats;
}

#define OPENCHAIN_INSTANTIATE_ITEBD(S)                                                                                 \
    template InfiniteMpdo<S> neel_infinite_mpdo<S>(BasisFlavor);                                                       \
    template ReorthogonalizeReport reorthogonalize<S>(InfiniteMpdo<S> &, Index, double, double, int);                  \
    template double canonical_error<S>(const InfiniteMpdo<S> &);                                                       \
    template double infinite_operator_entanglement<S>(const InfiniteMpdo<S> &, int);                                   \
    template std::array<double, 2> infinite_local_expectations<S>(const InfiniteMpdo<S> &, const Matrix2c &);          \
    template class ItebdPropagator<S>;

OPENCHAIN_INSTANTIATE_ITEBD(double)
OPENCHAIN_INSTANTIATE_ITEBD(cplx)

} // namespace openchain
