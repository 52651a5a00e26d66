#include "openchain/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace openchain::oracle {

namespace {
    void check_sites(Index n, Index cap, const char *what) {
        if(n < 1 || n > cap) throw Error(ErrorKind::invalid_argument, std::string(what) + ": n_sites must be in [1, " + std::to_string(cap) + "], got " + std::to_string(n));
    }

    Index count_sites(Index dim) {
        Index n = 0;
        while((Index{1} << n) < dim) ++n;
        if((Index{1} << n) != dim) throw Error(ErrorKind::dimension_mismatch, "dimension is not a power of two");
        return n;
    }

    // op acting on `k` consecutive sites starting at `site`, applied to every column of m
    template<typename Op>
    DenseMatrix apply_left(const Op &op, Index site, Index span, Index n, const DenseMatrix &m) {
        const Index local = Index{1} << span;
        const Index inner = Index{1} << (n - site - span);
        const Index outer = Index{1} << site;
        DenseMatrix out(m.rows(), m.cols());
        Eigen::VectorXcd x(local);
        for(Index col = 0; col < m.cols(); ++col)
            for(Index o = 0; o < outer; ++o)
                for(Index i = 0; i < inner; ++i) {
                    for(Index s = 0; s < local; ++s) x(s) = m((o * local + s) * inner + i, col);
                    const Eigen::VectorXcd y = op * x;
                    for(Index s = 0; s < local; ++s) out((o * local + s) * inner + i, col) = y(s);
                }
        return out;
    }

    template<typename Op>
    DenseMatrix apply_right_adjoint(const Op &op, Index site, Index span, Index n, const DenseMatrix &m) {
        // m * op^dag on the given sites = (op * m^dag)^dag
        return apply_left(op, site, span, n, m.adjoint()).adjoint();
    }

    DenseMatrix kron_dyn(const DenseMatrix &a, const DenseMatrix &b) {
        DenseMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
        for(Index i = 0; i < a.rows(); ++i)
            for(Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return k;
    }

    double entropy_of_matrix(const Eigen::MatrixXcd &m) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        return entropy_bits(svd.singularValues());
    }
} // namespace

DenseMatrix embed_site_operator(const Matrix2c &op, Index site, Index n) {
    if(site < 0 || site >= n) throw Error(ErrorKind::invalid_argument, "embed_site_operator: site out of range");
    const Index dim = Index{1} << n;
    return apply_left(op, site, 1, n, DenseMatrix::Identity(dim, dim));
}

DenseMatrix chain_hamiltonian(const ModelParams &p) {
    const Index n   = p.n_sites;
    const Index dim = Index{1} << n;
    DenseMatrix h   = DenseMatrix::Zero(dim, dim);
    const Matrix4c hb = xxz_bond_hamiltonian(p);
    for(Index b = 0; b + 1 < n; ++b) h += apply_left(hb, b, 2, n, DenseMatrix::Identity(dim, dim));
    return h;
}

DenseVector neel_vector(Index n) {
    check_sites(n, max_pure_sites, "neel_vector");
    Index idx = 0;
    for(Index i = 0; i < n; ++i) idx = 2 * idx + (neel_is_up(i) ? 0 : 1);
    DenseVector v = DenseVector::Zero(Index{1} << n);
    v(idx)        = 1.0;
    return v;
}

DenseMatrix neel_density(Index n) {
    check_sites(n, max_density_sites, "neel_density");
    const DenseVector v = neel_vector(n);
    return v * v.adjoint();
}

DenseMatrix lindblad_rhs(const ModelParams &p, const DenseMatrix &rho) {
    const Index n     = count_sites(rho.rows());
    const Matrix4c hb = xxz_bond_hamiltonian(p);
    const cplx minus_i(0, -1);
    DenseMatrix hr = DenseMatrix::Zero(rho.rows(), rho.cols());
    for(Index b = 0; b + 1 < n; ++b) hr += apply_left(hb, b, 2, n, rho);
    DenseMatrix out = minus_i * (hr - hr.adjoint()); // rho Hermitian: rho H = (H rho)^dag
    for(Index i = 0; i < n; ++i)
        for(const auto &j : site_jump_ops(p, i)) {
            const Matrix2c ldl = j.op.adjoint() * j.op;
            const DenseMatrix lr = apply_left(j.op, i, 1, n, rho);
            out += apply_right_adjoint(j.op, i, 1, n, lr);
            const DenseMatrix ar = apply_left(ldl, i, 1, n, rho);
            out -= 0.5 * (ar + ar.adjoint());
        }
    return out;
}

namespace {
    DenseMatrix rk4_step(const ModelParams &p, const DenseMatrix &rho, double h) {
        const DenseMatrix k1 = lindblad_rhs(p, rho);
        const DenseMatrix k2 = lindblad_rhs(p, rho + 0.5 * h * k1);
        const DenseMatrix k3 = lindblad_rhs(p, rho + 0.5 * h * k2);
        const DenseMatrix k4 = lindblad_rhs(p, rho + h * k3);
        return rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    DenseMatrix rk4_interval(const ModelParams &p, DenseMatrix rho, double length, Index steps) {
        const double h = length / static_cast<double>(steps);
        for(Index s = 0; s < steps; ++s) rho = rk4_step(p, rho, h);
        return rho;
    }
} // namespace

LindbladSeries lindblad_evolve(const DenseMatrix &rho0, const ModelParams &p, double dt_obs, double t_max, double tol) {
    const Index n = count_sites(rho0.rows());
    check_sites(n, max_density_sites, "lindblad_evolve");
    if(!(dt_obs > 0.0) || !(t_max >= 0.0)) throw Error(ErrorKind::invalid_argument, "lindblad_evolve: dt_obs must be positive and t_max non-negative");
    LindbladSeries out;
    const auto n_obs = static_cast<Index>(std::llround(t_max / dt_obs));
    DenseMatrix rho  = rho0;
    out.times.push_back(0.0);
    out.states.push_back(rho);
    Index steps = std::max<Index>(1, static_cast<Index>(std::ceil(dt_obs / 0.02)));
    for(Index k = 1; k <= n_obs; ++k) {
        DenseMatrix coarse = rk4_interval(p, rho, dt_obs, steps);
        for(;;) {
            DenseMatrix fine  = rk4_interval(p, rho, dt_obs, 2 * steps);
            const double err = (fine - coarse).cwiseAbs().maxCoeff();
            steps *= 2;
            coarse = std::move(fine);
            if(err < tol) break;
            if(steps > (Index{1} << 20)) throw Error(ErrorKind::numerical, "lindblad_evolve: step halving did not reach the tolerance");
        }
        rho = std::move(coarse);
        steps /= 2; // try the coarser step again next interval
        const double drift = std::abs(rho.trace() - cplx(1.0));
        if(drift > 1e-7) {
            std::ostringstream os;
            os << "lindblad_evolve: trace drift " << drift << " at t=" << k * dt_obs << " with " << steps << " substeps";
            throw Error(ErrorKind::numerical, os.str());
        }
        out.times.push_back(static_cast<double>(k) * dt_obs);
        out.states.push_back(rho);
    }
    return out;
}

DenseMatrix liouvillian(const ModelParams &p) {
    check_sites(p.n_sites, 4, "liouvillian");
    const Index dim      = Index{1} << p.n_sites;
    const DenseMatrix id = DenseMatrix::Identity(dim, dim);
    const DenseMatrix h  = chain_hamiltonian(p);
    const cplx minus_i(0, -1);
    // column-stacked vec: vec(A X B) = (B^T kron A) vec(X)
    DenseMatrix l = minus_i * (kron_dyn(id, h) - kron_dyn(h.transpose(), id));
    for(const auto &j : build_jump_ops(p)) {
        const DenseMatrix op  = embed_site_operator(j.op, j.site, p.n_sites);
        const DenseMatrix ldl = op.adjoint() * op;
        l += kron_dyn(op.conjugate(), op) - 0.5 * kron_dyn(id, ldl) - 0.5 * kron_dyn(ldl.transpose(), id);
    }
    return l;
}

DenseMatrix lindblad_exact(const DenseMatrix &rho0, const ModelParams &p, double t) {
    const DenseMatrix prop = (liouvillian(p) * t).exp();
    const Eigen::VectorXcd v = prop * Eigen::Map<const Eigen::VectorXcd>(rho0.data(), rho0.size());
    return Eigen::Map<const DenseMatrix>(v.data(), rho0.rows(), rho0.cols());
}

double dense_oe(const DenseMatrix &rho, Index cut) {
    const Index n = count_sites(rho.rows());
    if(cut < 0 || cut + 1 >= n) throw Error(ErrorKind::invalid_argument, "dense_oe: cut must be interior");
    const Index nl = cut + 1, nr = n - nl;
    const Index dl = Index{1} << nl, dr = Index{1} << nr;
    Eigen::MatrixXcd m(dl * dl, dr * dr);
    for(Index r = 0; r < rho.rows(); ++r)
        for(Index c = 0; c < rho.cols(); ++c) m((r / dr) * dl + c / dr, (r % dr) * dr + c % dr) = rho(r, c);
    return entropy_of_matrix(m);
}

double dense_pure_entropy(const DenseVector &psi, Index cut) {
    const Index n = count_sites(psi.size());
    if(cut < 0 || cut + 1 >= n) throw Error(ErrorKind::invalid_argument, "dense_pure_entropy: cut must be interior");
    const Index dl = Index{1} << (cut + 1), dr = psi.size() / dl;
    const Eigen::MatrixXcd m = Eigen::Map<const RowMatrix<cplx>>(psi.data(), dl, dr);
    return entropy_of_matrix(m);
}

double expectation(const DenseMatrix &rho, const DenseMatrix &op) { return ((op * rho).trace() / rho.trace()).real(); }

std::vector<double> site_expectations(const DenseMatrix &rho, const Matrix2c &op) {
    const Index n = count_sites(rho.rows());
    const cplx tr = rho.trace();
    std::vector<double> out;
    for(Index i = 0; i < n; ++i) out.push_back((apply_left(op, i, 1, n, rho).trace() / tr).real());
    return out;
}

std::vector<double> site_expectations(const DenseVector &psi, const Matrix2c &op) {
    const Index n = count_sites(psi.size());
    std::vector<double> out;
    const double nn = psi.squaredNorm();
    for(Index i = 0; i < n; ++i) {
        DenseVector x = psi;
        apply_site(x, op, i);
        out.push_back((psi.dot(x) / nn).real());
    }
    return out;
}

void apply_site(DenseVector &psi, const Matrix2c &op, Index site) {
    const Index n = count_sites(psi.size());
    if(site < 0 || site >= n) throw Error(ErrorKind::invalid_argument, "apply_site: site out of range");
    DenseMatrix m = apply_left(op, site, 1, n, Eigen::Map<const DenseMatrix>(psi.data(), psi.size(), 1));
    psi           = m.col(0);
}

DenseTrajectory::DenseTrajectory(const ModelParams &p, double dt, TrajectoryStepping stepping)
    : params_(p), dt_(dt), stepping_(stepping), jumps_(build_jump_ops(p)) {
    check_sites(p.n_sites, max_pure_sites, "DenseTrajectory");
    if(!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "DenseTrajectory: dt must be positive");
    const DenseMatrix h = chain_hamiltonian(p);
    const cplx minus_i(0, -1);
    half_unitary_ = (minus_i * h * (dt / 2)).exp();
    if(stepping == TrajectoryStepping::original) {
        DenseMatrix heff = h;
        for(const auto &j : jumps_) {
            const DenseMatrix op = embed_site_operator(j.op, j.site, p.n_sites);
            heff += -0.5 * cplx(0, 1) * op.adjoint() * op;
        }
        propagator_ = (minus_i * heff * dt).exp();
    }
}

void DenseTrajectory::step(DenseVector &psi, double t, Rng &rng, std::vector<DenseJump> &log) const {
    if(stepping_ == TrajectoryStepping::original) {
        DenseVector next = propagator_ * psi;
        const double p   = 1.0 - next.squaredNorm() / psi.squaredNorm();
        if(rng.uniform() < p) {
            std::vector<double> w;
            double total = 0.0;
            for(const auto &j : jumps_) {
                DenseVector x = psi;
                apply_site(x, j.op, j.site);
                w.push_back(x.squaredNorm());
                total += w.back();
            }
            double r = rng.uniform() * total;
            std::size_t k = 0;
            while(k + 1 < w.size() && r >= w[k]) r -= w[k++];
            apply_site(psi, jumps_[k].op, jumps_[k].site);
            psi.normalize();
            log.push_back({t + dt_, jumps_[k].site, jumps_[k].channel});
        } else {
            psi = next.normalized();
        }
        return;
    }

    psi = half_unitary_ * psi;
    for(const auto &j : jumps_) {
        const double r     = rng.uniform();
        const Matrix2c ldl = j.op.adjoint() * j.op;
        // exp(-dt L^dag L / 2) for the diagonal L^dag L of the three channels
        Matrix2c decay = Matrix2c::Zero();
        for(int s = 0; s < 2; ++s) decay(s, s) = std::exp(-0.5 * dt_ * ldl(s, s).real());
        DenseVector kept = psi;
        apply_site(kept, decay, j.site);
        const double p = 1.0 - kept.squaredNorm() / psi.squaredNorm();
        if(r < p) {
            apply_site(psi, j.op, j.site);
            psi.normalize();
            log.push_back({t + 0.5 * dt_, j.site, j.channel});
        } else {
            psi = kept.normalized();
        }
    }
    psi = half_unitary_ * psi;
}

} // namespace openchain::oracle
