#pragma once

// Dense complex/real tensors, pairwise contraction and truncated SVD.
//
// Storage is row-major: the last index runs fastest. A rank-3 site tensor
// (chi_left, d, chi_right) therefore maps without copies onto a row-major
// (chi_left*d) x chi_right or chi_left x (d*chi_right) matrix.

#include "openchain/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace openchain {

using Index = Eigen::Index;
using cplx  = std::complex<double>;

template<typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template<typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template<typename Scalar>
using RowMap = Eigen::Map<RowMatrix<Scalar>>;
template<typename Scalar>
using ConstRowMap = Eigen::Map<const RowMatrix<Scalar>>;

template<typename Scalar>
inline constexpr bool is_complex_v = false;
template<typename T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

/// Real part of a scalar, identity for real types.
template<typename Scalar>
double real_part(const Scalar &x) {
    if constexpr(is_complex_v<Scalar>) return x.real();
    else return static_cast<double>(x);
}

template<typename Scalar>
double imag_part(const Scalar &x) {
    if constexpr(is_complex_v<Scalar>) return x.imag();
    else return 0.0;
}

/// Converts a complex matrix to Scalar, throwing if Scalar is real and the
/// imaginary part exceeds `tol` anywhere.
template<typename Scalar, typename Derived>
Matrix<Scalar> cast_scalar(const Eigen::MatrixBase<Derived> &m, double tol = 1e-12) {
    if constexpr(is_complex_v<Scalar>) {
        return m.template cast<Scalar>();
    } else {
        double max_imag = m.imag().cwiseAbs().maxCoeff();
        if(max_imag > tol)
            throw Error(ErrorKind::numerical, "cannot represent matrix as real: max |Im| = " + std::to_string(max_imag));
        return m.real().template cast<Scalar>();
    }
}

template<typename Scalar>
class DenseTensor {
  public:
    using Dims = std::vector<Index>;

    DenseTensor() = default;

    /// Zero-initialized tensor with the given extents.
    explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
        check_dims(dims_);
        data_.assign(static_cast<std::size_t>(product(dims_)), Scalar(0));
    }

    DenseTensor(Dims dims, std::vector<Scalar> data) : dims_(std::move(dims)), data_(std::move(data)) {
        check_dims(dims_);
        if(static_cast<Index>(data_.size()) != product(dims_))
            throw Error(ErrorKind::dimension_mismatch, "tensor data length " + std::to_string(data_.size()) +
                                                           " does not match product of dims " + std::to_string(product(dims_)));
    }

    template<typename Derived>
    static DenseTensor from_matrix(const Eigen::MatrixBase<Derived> &m) {
        DenseTensor t({m.rows(), m.cols()});
        t.matrix(m.rows()) = m.template cast<Scalar>();
        return t;
    }

    [[nodiscard]] const Dims &dims() const noexcept { return dims_; }
    [[nodiscard]] Index dim(std::size_t axis) const { return dims_.at(axis); }
    [[nodiscard]] std::size_t rank() const noexcept { return dims_.size(); }
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(data_.size()); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<Scalar> data() noexcept { return data_; }
    [[nodiscard]] std::span<const Scalar> data() const noexcept { return data_; }
    [[nodiscard]] Scalar *raw() noexcept { return data_.data(); }
    [[nodiscard]] const Scalar *raw() const noexcept { return data_.data(); }

    [[nodiscard]] Index offset(std::span<const Index> idx) const {
        if(idx.size() != dims_.size()) throw Error(ErrorKind::invalid_argument, "index rank does not match tensor rank");
        Index off = 0;
        for(std::size_t k = 0; k < dims_.size(); ++k) {
            if(idx[k] < 0 || idx[k] >= dims_[k]) throw Error(ErrorKind::invalid_argument, "tensor index out of range");
            off = off * dims_[k] + idx[k];
        }
        return off;
    }
    Scalar &operator()(std::initializer_list<Index> idx) { return data_[static_cast<std::size_t>(offset({idx.begin(), idx.size()}))]; }
    const Scalar &operator()(std::initializer_list<Index> idx) const {
        return data_[static_cast<std::size_t>(offset({idx.begin(), idx.size()}))];
    }

    /// Row-major matrix view with `rows` rows; rows must divide size().
    RowMap<Scalar> matrix(Index rows) {
        check_split(rows);
        return RowMap<Scalar>(data_.data(), rows, rows == 0 ? 0 : size() / rows);
    }
    ConstRowMap<Scalar> matrix(Index rows) const {
        check_split(rows);
        return ConstRowMap<Scalar>(data_.data(), rows, rows == 0 ? 0 : size() / rows);
    }

    [[nodiscard]] DenseTensor reshaped(Dims new_dims) const & {
        DenseTensor t = *this;
        return std::move(t).reshaped(std::move(new_dims));
    }
    [[nodiscard]] DenseTensor reshaped(Dims new_dims) && {
        check_dims(new_dims);
        if(product(new_dims) != size()) throw Error(ErrorKind::dimension_mismatch, "reshape changes the number of elements");
        dims_ = std::move(new_dims);
        return std::move(*this);
    }

    /// Axis permutation: result axis k is source axis order[k].
    [[nodiscard]] DenseTensor permuted(std::span<const int> order) const {
        const auto r = rank();
        if(order.size() != r) throw Error(ErrorKind::invalid_argument, "permutation rank mismatch");
        std::vector<bool> seen(r, false);
        for(int ax : order) {
            if(ax < 0 || static_cast<std::size_t>(ax) >= r || seen[static_cast<std::size_t>(ax)])
                throw Error(ErrorKind::invalid_argument, "invalid axis permutation");
            seen[static_cast<std::size_t>(ax)] = true;
        }
        Dims new_dims(r);
        std::vector<Index> src_stride(r), strides(r);
        Index s = 1;
        for(std::size_t k = r; k-- > 0;) {
            src_stride[k] = s;
            s *= dims_[k];
        }
        for(std::size_t k = 0; k < r; ++k) {
            new_dims[k] = dims_[static_cast<std::size_t>(order[k])];
            strides[k]  = src_stride[static_cast<std::size_t>(order[k])];
        }
        DenseTensor out(new_dims);
        if(out.empty()) return out;
        std::vector<Index> counter(r, 0);
        Index src = 0;
        for(Index lin = 0; lin < out.size(); ++lin) {
            out.data_[static_cast<std::size_t>(lin)] = data_[static_cast<std::size_t>(src)];
            for(std::size_t k = r; k-- > 0;) {
                if(++counter[k] < new_dims[k]) {
                    src += strides[k];
                    break;
                }
                src -= strides[k] * (new_dims[k] - 1);
                counter[k] = 0;
            }
        }
        return out;
    }

    [[nodiscard]] bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](const Scalar &x) {
            return std::isfinite(real_part(x)) && std::isfinite(imag_part(x));
        });
    }

    [[nodiscard]] double norm() const {
        double acc = 0;
        for(const auto &x : data_) acc += std::norm(x);
        return std::sqrt(acc);
    }

    DenseTensor &operator*=(const Scalar &a) {
        for(auto &x : data_) x *= a;
        return *this;
    }

  private:
    static Index product(const Dims &d) { return std::accumulate(d.begin(), d.end(), Index{1}, std::multiplies<>()); }
    static void check_dims(const Dims &d) {
        for(auto e : d)
            if(e <= 0) throw Error(ErrorKind::invalid_argument, "tensor extents must be positive");
    }
    void check_split(Index rows) const {
        if(rows <= 0 || size() % rows != 0)
            throw Error(ErrorKind::dimension_mismatch, "cannot view tensor of size " + std::to_string(size()) + " with " +
                                                           std::to_string(rows) + " rows");
    }

    Dims dims_;
    std::vector<Scalar> data_;
};

/// Sums over the paired axes. Result axes: the unpaired axes of `a` in order,
/// followed by the unpaired axes of `b`.
template<typename Scalar>
DenseTensor<Scalar> contract(const DenseTensor<Scalar> &a, const DenseTensor<Scalar> &b,
                             std::span<const std::pair<int, int>> pairs) {
    const int ra = static_cast<int>(a.rank());
    const int rb = static_cast<int>(b.rank());
    std::vector<bool> used_a(static_cast<std::size_t>(ra), false), used_b(static_cast<std::size_t>(rb), false);
    Index inner = 1;
    for(auto [ia, ib] : pairs) {
        const std::string pair_name = "(" + std::to_string(ia) + ", " + std::to_string(ib) + ")";
        if(ia < 0 || ia >= ra || ib < 0 || ib >= rb)
            throw Error(ErrorKind::dimension_mismatch, "contraction axis pair " + pair_name + " out of range");
        if(used_a[static_cast<std::size_t>(ia)] || used_b[static_cast<std::size_t>(ib)])
            throw Error(ErrorKind::dimension_mismatch, "contraction axis pair " + pair_name + " repeats an axis");
        if(a.dim(static_cast<std::size_t>(ia)) != b.dim(static_cast<std::size_t>(ib)))
            throw Error(ErrorKind::dimension_mismatch, "contraction axis pair " + pair_name + " has extents " +
                                                           std::to_string(a.dim(static_cast<std::size_t>(ia))) + " vs " +
                                                           std::to_string(b.dim(static_cast<std::size_t>(ib))));
        used_a[static_cast<std::size_t>(ia)] = used_b[static_cast<std::size_t>(ib)] = true;
        inner *= a.dim(static_cast<std::size_t>(ia));
    }
    std::vector<int> order_a, order_b;
    typename DenseTensor<Scalar>::Dims out_dims;
    Index rows = 1, cols = 1;
    for(int k = 0; k < ra; ++k)
        if(!used_a[static_cast<std::size_t>(k)]) {
            order_a.push_back(k);
            out_dims.push_back(a.dim(static_cast<std::size_t>(k)));
            rows *= a.dim(static_cast<std::size_t>(k));
        }
    for(auto [ia, ib] : pairs) order_a.push_back(ia);
    for(auto [ia, ib] : pairs) order_b.push_back(ib);
    for(int k = 0; k < rb; ++k)
        if(!used_b[static_cast<std::size_t>(k)]) {
            order_b.push_back(k);
            out_dims.push_back(b.dim(static_cast<std::size_t>(k)));
            cols *= b.dim(static_cast<std::size_t>(k));
        }
    auto ap = a.permuted(order_a);
    auto bp = b.permuted(order_b);
    if(out_dims.empty()) out_dims.push_back(1);
    DenseTensor<Scalar> out(out_dims);
    ConstRowMap<Scalar> am(ap.raw(), rows, inner);
    ConstRowMap<Scalar> bm(bp.raw(), inner, cols);
    RowMap<Scalar>(out.raw(), rows, cols).noalias() = am * bm;
    return out;
}

template<typename Scalar>
DenseTensor<Scalar> contract(const DenseTensor<Scalar> &a, const DenseTensor<Scalar> &b,
                             std::initializer_list<std::pair<int, int>> pairs) {
    return contract(a, b, std::span<const std::pair<int, int>>(pairs.begin(), pairs.size()));
}

inline constexpr double default_svd_cutoff = 1e-12;

/// Thin truncated SVD factors: m ~ u * diag(s) * vh.
template<typename Scalar>
struct SvdFactors {
    Matrix<Scalar> u;
    Eigen::VectorXd s;
    Matrix<Scalar> vh;
    /// sqrt of the sum of squared discarded singular values.
    double truncation_weight = 0.0;
};

namespace detail {
    /// Thin SVD through LAPACK (gesdd, gesvd as fallback); throws svd_failure.
    SvdFactors<double> lapack_svd(Matrix<double> a);
    SvdFactors<cplx> lapack_svd(Matrix<cplx> a);
} // namespace detail

/// Keeps at most `chi_max` singular values and drops those below
/// `cutoff * s_max`. At least one value is always kept.
template<typename Derived>
SvdFactors<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived> &m, Index chi_max,
                                                   double cutoff = default_svd_cutoff) {
    using Scalar = typename Derived::Scalar;
    if(m.rows() == 0 || m.cols() == 0) throw Error(ErrorKind::invalid_argument, "truncated_svd: empty matrix");
    if(chi_max < 1) throw Error(ErrorKind::invalid_argument, "truncated_svd: chi_max must be >= 1");
    if(cutoff < 0) throw Error(ErrorKind::invalid_argument, "truncated_svd: cutoff must be non-negative");
    const auto dims = std::to_string(m.rows()) + "x" + std::to_string(m.cols());
    if(!m.allFinite()) throw Error(ErrorKind::svd_failure, "truncated_svd: non-finite entries in " + dims + " matrix");

    auto full_svd = detail::lapack_svd(Matrix<Scalar>(m.derived()));
    const Eigen::VectorXd &sv = full_svd.s;
    const Index full          = sv.size();
    const double threshold    = cutoff * sv(0);
    Index keep                = 0;
    while(keep < full && keep < chi_max && sv(keep) > 0.0 && sv(keep) >= threshold) ++keep;
    keep = std::max<Index>(keep, 1);

    SvdFactors<Scalar> out;
    out.u                 = full_svd.u.leftCols(keep);
    out.s                 = sv.head(keep);
    out.vh                = full_svd.vh.topRows(keep);
    out.truncation_weight = std::sqrt(sv.tail(full - keep).squaredNorm());
    if(!out.u.allFinite() || !out.vh.allFinite())
        throw Error(ErrorKind::svd_failure, "truncated_svd: non-finite singular vectors for " + dims + " matrix");
    return out;
}

template<typename Scalar>
struct SvdResult {
    DenseTensor<Scalar> left;            ///< rows x k, orthonormal columns
    std::vector<double> singular_values; ///< descending, non-negative
    DenseTensor<Scalar> right;           ///< k x cols, orthonormal rows
    double truncation_weight = 0.0;
};

template<typename Scalar>
SvdResult<Scalar> truncated_svd(const DenseTensor<Scalar> &m, Index chi_max, double cutoff = default_svd_cutoff) {
    if(m.rank() != 2) throw Error(ErrorKind::invalid_argument, "truncated_svd: expected a rank-2 tensor");
    auto f = truncated_svd(m.matrix(m.dim(0)), chi_max, cutoff);
    SvdResult<Scalar> r;
    r.left  = DenseTensor<Scalar>::from_matrix(f.u);
    r.right = DenseTensor<Scalar>::from_matrix(f.vh);
    r.singular_values.assign(f.s.data(), f.s.data() + f.s.size());
    r.truncation_weight = f.truncation_weight;
    return r;
}

/// Von Neumann entropy in bits of the normalized squared Schmidt values, with 0 log 0 = 0.
inline double entropy_bits(const Eigen::Ref<const Eigen::VectorXd> &schmidt) {
    const double total = schmidt.squaredNorm();
    if(total <= 0.0) return 0.0;
    double s = 0.0;
    for(Index k = 0; k < schmidt.size(); ++k) {
        const double p = schmidt(k) * schmidt(k) / total;
        if(p > 0.0) s -= p * std::log2(p);
    }
    return std::max(s, 0.0);
}

} // namespace openchain
