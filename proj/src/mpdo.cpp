#include "openchain/mpdo.hpp"
#include "openchain/mixed_chain.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace openchain {

namespace {
    template<typename Scalar>
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> local_coefficients(const OperatorBasis &basis, const Matrix2c &rho) {
        const Eigen::Vector4cd c = basis.coefficients(rho / rho.trace());
        return cast_scalar<Scalar>(Eigen::MatrixXcd(c));
    }

    // sum_s w(s) Gamma[:, s, :]
    template<typename Scalar>
    Eigen::MatrixXcd contract_physical(const DenseTensor<Scalar> &g, const Eigen::Vector4cd &w) {
        const Index chi_l = g.dim(0), d = g.dim(1), chi_r = g.dim(2);
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(chi_l, chi_r);
        for(Index a = 0; a < chi_l; ++a) {
            ConstRowMap<Scalar> block(g.raw() + a * d * chi_r, d, chi_r);
            for(Index s = 0; s < d; ++s) m.row(a) += w(s) * block.row(s).template cast<cplx>();
        }
        return m;
    }

    // Left environments L[k] (over the left bond of site k, lambda[k] not yet applied)
    // and right environments R[k] (over the right bond of site k-1, i.e. left bond of
    // site k, with everything from site k on contracted) for the trace vector.
    template<typename Scalar>
    struct TraceEnvironments {
        std::vector<Eigen::RowVectorXcd> left;
        std::vector<Eigen::VectorXcd> right;
    };

    template<typename Scalar>
    TraceEnvironments<Scalar> trace_environments(const MpdoState<Scalar> &state) {
        const auto &c = state.chain;
        const Index n = c.n_sites();
        const auto t  = state.basis().trace_vector();
        TraceEnvironments<Scalar> env;
        env.left.resize(static_cast<std::size_t>(n + 1));
        env.right.resize(static_cast<std::size_t>(n + 1));
        env.left[0] = Eigen::RowVectorXcd::Ones(1);
        for(Index k = 0; k < n; ++k) {
            Eigen::RowVectorXcd l = env.left[static_cast<std::size_t>(k)].cwiseProduct(c.lambdas[static_cast<std::size_t>(k)].transpose().template cast<cplx>());
            env.left[static_cast<std::size_t>(k + 1)] = l * contract_physical(c.gammas[static_cast<std::size_t>(k)], t);
        }
        env.right[static_cast<std::size_t>(n)] = Eigen::VectorXcd::Ones(1);
        for(Index k = n - 1; k >= 0; --k) {
            Eigen::VectorXcd r = c.lambdas[static_cast<std::size_t>(k + 1)].template cast<cplx>().cwiseProduct(env.right[static_cast<std::size_t>(k + 1)]);
            env.right[static_cast<std::size_t>(k)] = contract_physical(c.gammas[static_cast<std::size_t>(k)], t) * r;
        }
        return env;
    }

    template<typename Scalar>
    double checked_trace(const cplx &tr_unscaled, double log_scale) {
        const double tr = std::exp(log_scale) * tr_unscaled.real();
        if(!std::isfinite(tr)) throw Error(ErrorKind::numerical, "mpdo: non-finite trace");
        return tr;
    }
} // namespace

template<typename Scalar>
MpdoState<Scalar> product_mpdo(const std::vector<Matrix2c> &site_rhos, BasisFlavor flavor) {
    const auto basis = OperatorBasis::of(flavor);
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> local;
    double log_norm = 0.0;
    for(const auto &r : site_rhos) {
        if(std::abs(r.trace()) == 0.0) throw Error(ErrorKind::invalid_argument, "product_mpdo: site operator has zero trace");
        local.push_back(local_coefficients<Scalar>(basis, r));
        log_norm += std::log(local.back().norm());
    }
    MpdoState<Scalar> s;
    s.chain     = product_chain<Scalar>(local);
    s.flavor    = flavor;
    s.log_scale = log_norm;
    return s;
}

template<typename Scalar>
MpdoState<Scalar> neel_mpdo(Index n, BasisFlavor flavor) {
    if(n < 2 || n % 2 != 0) throw Error(ErrorKind::invalid_argument, "neel_mpdo: n must be even and >= 2, got " + std::to_string(n));
    Matrix2c up   = Matrix2c::Zero();
    Matrix2c down = Matrix2c::Zero();
    up(0, 0)      = 1.0;
    down(1, 1)    = 1.0;
    std::vector<Matrix2c> rhos;
    for(Index i = 0; i < n; ++i) rhos.push_back(neel_is_up(i) ? up : down);
    return product_mpdo<Scalar>(rhos, flavor);
}

template<typename Scalar>
double apply_super_gate(MpdoState<Scalar> &state, const Matrix<Scalar> &gate, Index bond, Index chi, double cutoff) {
    const auto rep = apply_two_site_gate(state.chain, gate, bond, chi, cutoff);
    state.log_scale += std::log(rep.norm);
    return rep.truncation_weight;
}

template<typename Scalar>
double apply_super_gate(MpdoState<Scalar> &state, const SuperGate &gate, Index bond, Index chi, double cutoff) {
    if(gate.flavor != state.flavor) throw Error(ErrorKind::invalid_argument, "apply_super_gate: gate basis flavor does not match the state");
    return apply_super_gate(state, gate.as<Scalar>(), bond, chi, cutoff);
}

template<typename Scalar>
double mpdo_trace(const MpdoState<Scalar> &state) {
    const auto env = trace_environments(state);
    return checked_trace<Scalar>(env.left.back()(0), state.log_scale);
}

template<typename Scalar>
std::vector<double> mpdo_local_expectations(const MpdoState<Scalar> &state, const Matrix2c &op) {
    const auto &c   = state.chain;
    const auto env  = trace_environments(state);
    const cplx tr   = env.left.back()(0);
    const auto w    = state.basis().expectation_vector(op);
    std::vector<double> out;
    for(Index k = 0; k < c.n_sites(); ++k) {
        Eigen::RowVectorXcd l = env.left[static_cast<std::size_t>(k)].cwiseProduct(c.lambdas[static_cast<std::size_t>(k)].transpose().template cast<cplx>());
        Eigen::VectorXcd r    = c.lambdas[static_cast<std::size_t>(k + 1)].template cast<cplx>().cwiseProduct(env.right[static_cast<std::size_t>(k + 1)]);
        const cplx v          = (l * contract_physical(c.gammas[static_cast<std::size_t>(k)], w) * r)(0);
        out.push_back((v / tr).real());
    }
    return out;
}

template<typename Scalar>
double mpdo_local_expectation(const MpdoState<Scalar> &state, const Matrix2c &op, Index site) {
    if(site < 0 || site >= state.n_sites()) throw Error(ErrorKind::invalid_argument, "site index out of range");
    return mpdo_local_expectations(state, op)[static_cast<std::size_t>(site)];
}

template<typename Scalar>
Matrix4c mpdo_two_site_rdm(const MpdoState<Scalar> &state, Index site) {
    const auto &c = state.chain;
    if(site < 0 || site + 1 >= c.n_sites()) throw Error(ErrorKind::invalid_argument, "mpdo_two_site_rdm: bond out of range");
    const auto env   = trace_environments(state);
    const auto basis = state.basis();
    Eigen::RowVectorXcd l = env.left[static_cast<std::size_t>(site)].cwiseProduct(c.lambdas[static_cast<std::size_t>(site)].transpose().template cast<cplx>());
    Eigen::VectorXcd r    = c.lambdas[static_cast<std::size_t>(site + 2)].template cast<cplx>().cwiseProduct(env.right[static_cast<std::size_t>(site + 2)]);
    const auto &lm        = c.lambdas[static_cast<std::size_t>(site + 1)];
    Matrix4c rho          = Matrix4c::Zero();
    std::array<Eigen::RowVectorXcd, 4> left_k;
    for(int k = 0; k < 4; ++k) {
        Eigen::Vector4cd e = Eigen::Vector4cd::Zero();
        e(k)               = 1.0;
        left_k[static_cast<std::size_t>(k)] = (l * contract_physical(c.gammas[static_cast<std::size_t>(site)], e)).cwiseProduct(lm.transpose().template cast<cplx>());
    }
    for(int q = 0; q < 4; ++q) {
        Eigen::Vector4cd e = Eigen::Vector4cd::Zero();
        e(q)               = 1.0;
        const Eigen::VectorXcd right_q = contract_physical(c.gammas[static_cast<std::size_t>(site + 1)], e) * r;
        for(int k = 0; k < 4; ++k) {
            const cplx coeff = (left_k[static_cast<std::size_t>(k)] * right_q)(0);
            rho += coeff * kron(basis.elements[static_cast<std::size_t>(k)], basis.elements[static_cast<std::size_t>(q)]);
        }
    }
    return rho / rho.trace();
}

template<typename Scalar>
double min_two_site_eigenvalue(const MpdoState<Scalar> &state) {
    double m = std::numeric_limits<double>::infinity();
    for(Index b = 0; b + 1 < state.n_sites(); ++b) {
        const Matrix4c r = mpdo_two_site_rdm(state, b);
        Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues()(0));
    }
    return m;
}

template<typename Scalar>
double operator_entanglement(const MpdoState<Scalar> &state, Index bond) {
    return bond_entropy(state.chain, bond);
}

template<typename Scalar>
double canonicalize(MpdoState<Scalar> &state, Index chi, double cutoff) {
    const auto rep = canonicalize(state.chain, chi, cutoff);
    state.log_scale += rep.log_norm;
    return rep.truncation_weight;
}

template<typename Scalar>
double renormalize_trace(MpdoState<Scalar> &state) {
    const double tr = mpdo_trace(state);
    if(!(tr > 0.0)) throw Error(ErrorKind::numerical, "mpdo: trace is not positive (" + std::to_string(tr) + "); reduce dt or increase chi");
    state.log_scale -= std::log(tr);
    return tr;
}

template<typename Scalar>
Eigen::MatrixXcd mpdo_to_dense(const MpdoState<Scalar> &state) {
    const Index n = state.n_sites();
    if(n > 8) throw Error(ErrorKind::invalid_argument, "mpdo_to_dense: chain too long for a dense operator");
    const auto coeffs = to_dense(state.chain);
    const auto basis  = state.basis();
    // B maps a local coefficient to vec(e_k) entries (row, col) -> 2 * row + col
    Eigen::Matrix4cd b;
    for(int k = 0; k < 4; ++k)
        for(int rc = 0; rc < 4; ++rc) b(rc, k) = basis.elements[static_cast<std::size_t>(k)](rc / 2, rc % 2);
    Eigen::VectorXcd v = coeffs.template cast<cplx>() * std::exp(state.log_scale);
    for(Index k = 0; k < n; ++k) {
        const Index outer = Index{1} << (2 * k);
        const Index inner = Index{1} << (2 * (n - k - 1));
        for(Index o = 0; o < outer; ++o)
            for(Index i = 0; i < inner; ++i) {
                Eigen::Vector4cd x;
                for(int s = 0; s < 4; ++s) x(s) = v((o * 4 + s) * inner + i);
                const Eigen::Vector4cd y = b * x;
                for(int s = 0; s < 4; ++s) v((o * 4 + s) * inner + i) = y(s);
            }
    }
    const Index dim = Index{1} << n;
    Eigen::MatrixXcd rho(dim, dim);
    for(Index idx = 0; idx < v.size(); ++idx) {
        Index row = 0, col = 0;
        for(Index k = 0; k < n; ++k) {
            const Index digit = (idx >> (2 * (n - 1 - k))) & 3;
            row               = 2 * row + digit / 2;
            col               = 2 * col + digit % 2;
        }
        rho(row, col) = v(idx);
    }
    return rho;
}

const std::vector<SweepStep> &fourth_order_sequence() {
    static const std::vector<SweepStep> seq = {
        {1, true},  {1, false}, {1, true}, {-2, false}, {1, true},  {1, true},  {1, true}, {1, true}, {1, false},
        {1, true},  {1, false}, {1, false}, {1, false}, {1, false}, {-2, true}, {1, false}, {1, true}, {1, false},
    };
    return seq;
}

const std::vector<SweepStep> &second_order_sequence() {
    static const std::vector<SweepStep> seq = {{1, false}, {1, true}};
    return seq;
}

std::vector<TrotterLayer> trotter_layers(int order) {
    if(order != 2 && order != 4) throw Error(ErrorKind::invalid_argument, "trotter order must be 2 or 4");
    std::vector<TrotterLayer> out;
    for(const auto &sw : order == 4 ? fourth_order_sequence() : second_order_sequence()) {
        for(bool odd : {sw.transposed, !sw.transposed}) {
            if(!out.empty() && out.back().odd == odd)
                out.back().numerator += sw.weight_numerator;
            else
                out.push_back({odd, sw.weight_numerator});
        }
    }
    std::erase_if(out, [](const TrotterLayer &l) { return l.numerator == 0; });
    return out;
}

template<typename Scalar>
MpdoPropagator<Scalar>::MpdoPropagator(const ModelParams &p, BasisFlavor flavor, double dt, int order)
    : params_(p), basis_(OperatorBasis::of(flavor)), dt_(dt), order_(order), denominator_(order == 4 ? 12 : 2) {
    if(order != 2 && order != 4) throw Error(ErrorKind::invalid_argument, "trotter order must be 2 or 4");
    if(!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dt must be positive");
    if constexpr(!is_complex_v<Scalar>) {
        if(flavor != BasisFlavor::pauli) throw Error(ErrorKind::invalid_argument, "real MPDO storage requires the pauli basis");
    }
}

template<typename Scalar>
const Matrix<Scalar> &MpdoPropagator<Scalar>::gate(int numerator, Index bond, Index n_sites) {
    const auto [lw, rw] = boundary_weights(bond, n_sites);
    const auto key      = std::make_tuple(numerator, lw, rw);
    auto it             = cache_.find(key);
    if(it == cache_.end()) {
        const double frac = numerator * dt_ / denominator_;
        it                = cache_.emplace(key, build_super_gate(params_, basis_, frac, lw, rw).template as<Scalar>()).first;
    }
    return it->second;
}

template<typename Scalar>
TrotterStats MpdoPropagator<Scalar>::step(MpdoState<Scalar> &state, Index chi, double cutoff) {
    if(state.flavor != basis_.flavor) throw Error(ErrorKind::invalid_argument, "MpdoPropagator: state basis flavor does not match");
    const Index n = state.n_sites();
    TrotterStats stats;
    std::vector<Index> even, odd;
    for(Index b = 0; b + 1 < n; ++b) (b % 2 == 0 ? even : odd).push_back(b);
    // Gates within one layer commute, so each layer is applied in whichever
    // direction the orthogonality center happens to travel.
    auto m = to_mixed(state.chain);
    for(const auto &layer : trotter_layers(order_)) {
        const auto &bonds = layer.odd ? odd : even;
        if(bonds.empty()) continue;
        const bool rightward = 2 * m.center < n;
        const Index count    = static_cast<Index>(bonds.size());
        for(Index k = 0; k < count; ++k) {
            const Index b = bonds[static_cast<std::size_t>(rightward ? k : count - 1 - k)];
            stats.max_truncation_weight =
                std::max(stats.max_truncation_weight, apply_two_site_gate(m, gate(layer.numerator, b, n), b, chi, cutoff, rightward));
        }
    }
    const auto rep = to_vidal(std::move(m), state.chain, chi, cutoff);
    state.log_scale += rep.log_norm;
    stats.max_truncation_weight = std::max(stats.max_truncation_weight, rep.truncation_weight);
    stats.trace_before          = renormalize_trace(state);
    return stats;
}

namespace {
    template<typename Scalar>
    nlohmann::json tensor_json(const DenseTensor<Scalar> &t) {
        nlohmann::json j;
        j["dims"] = t.dims();
        std::vector<double> re, im;
        for(const auto &x : t.data()) {
            re.push_back(real_part(x));
            im.push_back(imag_part(x));
        }
        j["re"] = re;
        if constexpr(is_complex_v<Scalar>) j["im"] = im;
        return j;
    }
} // namespace

template<typename Scalar>
std::string mpdo_checkpoint_json(const MpdoState<Scalar> &state, const ModelParams &p, double time) {
    nlohmann::json j;
    j["format"]    = "openchain-mpdo";
    j["version"]   = 1;
    j["flavor"]    = to_string(state.flavor);
    j["scalar"]    = is_complex_v<Scalar> ? "complex" : "real";
    j["n_sites"]   = state.n_sites();
    j["log_scale"] = state.log_scale;
    j["time"]      = time;
    j["params"]    = {{"J", p.J}, {"delta", p.delta}, {"gamma_plus", p.gamma_plus}, {"gamma_minus", p.gamma_minus}, {"gamma_z", p.gamma_z}};
    for(const auto &g : state.chain.gammas) j["tensors"].push_back(tensor_json(g));
    for(const auto &l : state.chain.lambdas) j["lambdas"].push_back(std::vector<double>(l.data(), l.data() + l.size()));
    return j.dump();
}

template<typename Scalar>
MpdoState<Scalar> mpdo_from_checkpoint_json(const std::string &text, ModelParams *p, double *time) {
    try {
        const auto j = nlohmann::json::parse(text);
        if(j.at("format") != "openchain-mpdo") throw Error(ErrorKind::io, "checkpoint: unknown format");
        const bool cplx_data = j.at("scalar") == "complex";
        if(cplx_data && !is_complex_v<Scalar>) throw Error(ErrorKind::io, "checkpoint holds complex data, real storage requested");
        MpdoState<Scalar> s;
        s.flavor    = basis_flavor_from_string(j.at("flavor").get<std::string>());
        s.log_scale = j.at("log_scale").get<double>();
        for(const auto &t : j.at("tensors")) {
            const auto dims = t.at("dims").get<std::vector<Index>>();
            const auto re   = t.at("re").get<std::vector<double>>();
            std::vector<Scalar> data(re.size());
            for(std::size_t k = 0; k < re.size(); ++k) data[k] = Scalar(re[k]);
            if constexpr(is_complex_v<Scalar>) {
                if(cplx_data) {
                    const auto im = t.at("im").get<std::vector<double>>();
                    for(std::size_t k = 0; k < re.size(); ++k) data[k] = cplx(re[k], im.at(k));
                }
            }
            s.chain.gammas.emplace_back(dims, std::move(data));
        }
        for(const auto &l : j.at("lambdas")) {
            const auto v = l.get<std::vector<double>>();
            s.chain.lambdas.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
        }
        if(s.chain.lambdas.size() != s.chain.gammas.size() + 1) throw Error(ErrorKind::io, "checkpoint: lambda count does not match tensor count");
        if(p) {
            const auto &q  = j.at("params");
            p->J           = q.at("J");
            p->delta       = q.at("delta");
            p->gamma_plus  = q.at("gamma_plus");
            p->gamma_minus = q.at("gamma_minus");
            p->gamma_z     = q.at("gamma_z");
            p->n_sites     = s.n_sites();
        }
        if(time) *time = j.at("time").get<double>();
        return s;
    } catch(const nlohmann::json::exception &e) { throw Error(ErrorKind::io, std::string("checkpoint: ") + e.what()); }
}

#define OPENCHAIN_INSTANTIATE_MPDO(S)                                                                                  \
    template MpdoState<S> neel_mpdo<S>(Index, BasisFlavor);                                                            \
    template MpdoState<S> product_mpdo<S>(const std::vector<Matrix2c> &, BasisFlavor);                                 \
    template double apply_super_gate<S>(MpdoState<S> &, const Matrix<S> &, Index, Index, double);                      \
    template double apply_super_gate<S>(MpdoState<S> &, const SuperGate &, Index, Index, double);                      \
    template double mpdo_trace<S>(const MpdoState<S> &);                                                               \
    template std::vector<double> mpdo_local_expectations<S>(const MpdoState<S> &, const Matrix2c &);                   \
    template double mpdo_local_expectation<S>(const MpdoState<S> &, const Matrix2c &, Index);                          \
    template Matrix4c mpdo_two_site_rdm<S>(const MpdoState<S> &, Index);                                               \
    template double min_two_site_eigenvalue<S>(const MpdoState<S> &);                                                  \
    template double operator_entanglement<S>(const MpdoState<S> &, Index);                                             \
    template double canonicalize<S>(MpdoState<S> &, Index, double);                                                    \
    template double renormalize_trace<S>(MpdoState<S> &);                                                              \
    template Eigen::MatrixXcd mpdo_to_dense<S>(const MpdoState<S> &);                                                  \
    template class MpdoPropagator<S>;                                                                                  \
    template std::string mpdo_checkpoint_json<S>(const MpdoState<S> &, const ModelParams &, double);                   \
    template MpdoState<S> mpdo_from_checkpoint_json<S>(const std::string &, ModelParams *, double *);

OPENCHAIN_INSTANTIATE_MPDO(double)
OPENCHAIN_INSTANTIATE_MPDO(cplx)

} // namespace openchain
