#include "openchain/tensor.hpp"

#include <lapacke.h>

#include <mutex>

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace openchain::detail {

namespace {

    // Parallelism lives at the trajectory level; a threaded BLAS underneath
    // only oversubscribes the cores.
    void single_threaded_blas() {
        static std::once_flag flag;
        std::call_once(flag, [] {
            if(openblas_set_num_threads) openblas_set_num_threads(1);
        });
    }

    lapack_int as_lapack(Index n) {
        if(n > std::numeric_limits<lapack_int>::max()) throw Error(ErrorKind::invalid_argument, "svd: matrix too large for LAPACK");
        return static_cast<lapack_int>(n);
    }

    template<typename Scalar, typename Gesdd, typename Gesvd>
    SvdFactors<Scalar> run(Matrix<Scalar> a, Gesdd gesdd, Gesvd gesvd) {
        single_threaded_blas();
        const lapack_int m = as_lapack(a.rows()), n = as_lapack(a.cols()), k = std::min(m, n);
        SvdFactors<Scalar> f;
        f.u.resize(m, k);
        f.s.resize(k);
        f.vh.resize(k, n);
        const Matrix<Scalar> copy = a;
        lapack_int info = gesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, f.s.data(), f.u.data(), m, f.vh.data(), k);
        if(info > 0) {
            // divide and conquer did not converge; QR iteration is slower but more robust
            a = copy;
            std::vector<double> superb(static_cast<std::size_t>(std::max(1, k - 1)));
            info = gesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, a.data(), m, f.s.data(), f.u.data(), m, f.vh.data(), k, superb.data());
        }
        if(info != 0)
            throw Error(ErrorKind::svd_failure, "svd: LAPACK returned info=" + std::to_string(info) + " for " + std::to_string(m) + "x" +
                                                    std::to_string(n) + " matrix");
        return f;
    }

} // namespace

SvdFactors<double> lapack_svd(Matrix<double> a) {
    return run<double>(std::move(a), LAPACKE_dgesdd, LAPACKE_dgesvd);
}

SvdFactors<cplx> lapack_svd(Matrix<cplx> a) {
    auto gesdd = [](int layout, char job, lapack_int m, lapack_int n, cplx *a, lapack_int lda, double *s, cplx *u, lapack_int ldu, cplx *vt,
                    lapack_int ldvt) {
        return LAPACKE_zgesdd(layout, job, m, n, reinterpret_cast<lapack_complex_double *>(a), lda, s,
                              reinterpret_cast<lapack_complex_double *>(u), ldu, reinterpret_cast<lapack_complex_double *>(vt), ldvt);
    };
    auto gesvd = [](int layout, char ju, char jv, lapack_int m, lapack_int n, cplx *a, lapack_int lda, double *s, cplx *u, lapack_int ldu,
                    cplx *vt, lapack_int ldvt, double *superb) {
        return LAPACKE_zgesvd(layout, ju, jv, m, n, reinterpret_cast<lapack_complex_double *>(a), lda, s,
                              reinterpret_cast<lapack_complex_double *>(u), ldu, reinterpret_cast<lapack_complex_double *>(vt), ldvt, superb);
    };
    return run<cplx>(std::move(a), gesdd, gesvd);
}

} // namespace openchain::detail
