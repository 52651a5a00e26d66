#include "openchain/trajectory.hpp"

#include "openchain/mixed_chain.hpp"
#include "openchain/mpdo.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace openchain {

const char *to_string(JumpScheme s) {
    return s == JumpScheme::exact_jump_times ? "exact_jump_times" : "per_step_conditional";
}

JumpScheme jump_scheme_from_string(const std::string &s) {
    if(s == "exact_jump_times" || s == "a") return JumpScheme::exact_jump_times;
    if(s == "per_step_conditional" || s == "b") return JumpScheme::per_step_conditional;
    throw Error(ErrorKind::invalid_argument, "unknown jump scheme '" + s + "' (expected exact_jump_times or per_step_conditional)");
}

namespace {

    // k such that k * step == span, or -1
    Index exact_ratio(double span, double step) {
        const double r = span / step;
        const double k = std::round(r);
        if(k < 1 || std::abs(r - k) > 1e-9 * std::max(1.0, k)) return -1;
        return static_cast<Index>(k);
    }

} // namespace

std::vector<std::string> TrajectoryConfig::violations() const {
    auto v = model.violations();
    if(model.infinite) v.emplace_back("trajectories need a finite chain");
    if(chi < 1) v.emplace_back("chi must be >= 1");
    if(!(cutoff >= 0)) v.emplace_back("cutoff must be non-negative");
    if(!(dt > 0)) v.emplace_back("dt must be positive");
    if(!(dt_obs > 0)) v.emplace_back("dt_obs must be positive");
    if(!(t_max > 0)) v.emplace_back("t_max must be positive");
    if(trotter_order != 2 && trotter_order != 4) v.emplace_back("trotter_order must be 2 or 4");
    if(dt_obs > 0 && t_max > 0 && exact_ratio(t_max, dt_obs) < 0) v.emplace_back("t_max must be a multiple of dt_obs");
    if(scheme == JumpScheme::exact_jump_times) {
        if(model.gamma_plus != model.gamma_minus)
            v.emplace_back("exact_jump_times needs gamma_plus == gamma_minus; use per_step_conditional for imbalanced rates");
    } else if(dt > 0 && dt_obs > 0 && exact_ratio(dt_obs, dt) < 0) {
        v.emplace_back("per_step_conditional needs dt_obs to be a multiple of dt");
    }
    return v;
}

void TrajectoryConfig::validate() const {
    auto v = violations();
    if(!v.empty()) throw ConfigError(std::move(v));
}

double TrajectoryConfig::site_rate() const {
    // sigma+ sigma- + sigma- sigma+ = 1 and sz^2 = 1
    return 0.5 * (model.gamma_plus + model.gamma_minus) + model.gamma_z;
}

Index TrajectoryConfig::n_obs() const { return exact_ratio(t_max, dt_obs); }

double sample_jump_time(double t_prev, double r, Index n_sites, double gamma) {
    if(!(r > 0.0) || r > 1.0) throw Error(ErrorKind::invalid_argument, "sample_jump_time: threshold r must lie in (0, 1]");
    if(n_sites < 1 || !(gamma > 0.0)) throw Error(ErrorKind::invalid_argument, "sample_jump_time: need n_sites >= 1 and gamma > 0");
    return t_prev - std::log(r) / (static_cast<double>(n_sites) * gamma);
}

namespace {

    using Chain = MixedChain<cplx>;

    std::size_t pick(const std::vector<double> &w, double u) {
        double total = 0.0;
        for(double x : w) total += x;
        if(!(total > 0.0)) throw Error(ErrorKind::numerical, "select_jump_channel: every channel has zero weight");
        double r = u * total;
        for(std::size_t k = 0; k < w.size(); ++k) {
            if(w[k] > 0.0 && r < w[k]) return k;
            r -= w[k];
        }
        // round-off pushed r past the end: last channel with positive weight
        std::size_t k = w.size() - 1;
        while(!(w[k] > 0.0)) --k;
        return k;
    }

    double ldl_weight(const JumpOperator &j, const Matrix2c &rho) { return (j.op.adjoint() * j.op * rho).trace().real(); }

    // op acting on the physical index of the center tensor
    void apply_at_center(Chain &m, const Matrix2c &op, Index site) {
        move_center(m, site);
        auto &t       = m.tensors[static_cast<std::size_t>(site)];
        const Index l = t.dim(0), r = t.dim(2);
        DenseTensor<cplx> out({l, 2, r});
        for(Index a = 0; a < l; ++a)
            for(Index s = 0; s < 2; ++s)
                for(Index b = 0; b < r; ++b) out({a, s, b}) = op(s, 0) * t({a, 0, b}) + op(s, 1) * t({a, 1, b});
        t = std::move(out);
    }

    double center_norm(const Chain &m) { return m.tensors[static_cast<std::size_t>(m.center)].norm(); }

    void normalize_center(Chain &m, double norm) { m.tensors[static_cast<std::size_t>(m.center)] *= cplx(1.0 / norm); }

    Matrix2c center_rdm(const Chain &m) {
        const auto &t = m.tensors[static_cast<std::size_t>(m.center)];
        Matrix2c rho  = Matrix2c::Zero();
        for(Index a = 0; a < t.dim(0); ++a)
            for(Index b = 0; b < t.dim(2); ++b)
                for(Index s = 0; s < 2; ++s)
                    for(Index q = 0; q < 2; ++q) rho(s, q) += t({a, s, b}) * std::conj(t({a, q, b}));
        return rho / rho.trace().real();
    }

    class Engine {
      public:
        Engine(const TrajectoryConfig &cfg, std::uint64_t index)
            : cfg_(cfg), n_(cfg.model.n_sites), rng_(Rng::substream(cfg.seed, index)), jumps_(build_jump_ops(cfg.model)), factory_(cfg.model),
              layers_(trotter_layers(cfg.trotter_order)), denominator_(trotter_denominator(cfg.trotter_order)) {
            for(Index b = 0; b + 1 < n_; ++b) (b % 2 == 0 ? even_ : odd_).push_back(b);
            m_ = to_mixed(neel_mps(n_).chain);
        }

        EntropyTrace run() {
            record(0.0);
            if(cfg_.scheme == JumpScheme::exact_jump_times)
                run_exact();
            else
                run_conditional();
            return std::move(trace_);
        }

      private:
        void run_exact() {
            const double rate = cfg_.site_rate();
            const double inf  = std::numeric_limits<double>::infinity();
            double t          = 0.0;
            double next       = rate > 0 ? sample_jump_time(0.0, rng_.uniform_positive(), n_, rate) : inf;
            for(Index k = 1; k <= cfg_.n_obs(); ++k) {
                const double t_obs = static_cast<double>(k) * cfg_.dt_obs;
                while(next <= t_obs) {
                    evolve(next - t);
                    t = next;
                    jump_exact(t);
                    next = sample_jump_time(t, rng_.uniform_positive(), n_, rate);
                }
                evolve(t_obs - t);
                t = t_obs;
                record(t);
            }
        }

        void run_conditional() {
            const Index per_obs = exact_ratio(cfg_.dt_obs, cfg_.dt);
            const double dt     = cfg_.dt;
            Index step          = 0;
            for(Index k = 1; k <= cfg_.n_obs(); ++k) {
                for(Index s = 0; s < per_obs; ++s, ++step) {
                    const double t = static_cast<double>(step) * dt;
                    unitary_step(0.5 * dt);
                    for(const auto &j : jumps_) {
                        const double r = rng_.uniform();
                        move_center(m_, j.site);
                        const Matrix2c rho = center_rdm(m_);
                        const Matrix2c ldl = j.op.adjoint() * j.op;
                        // L^dag L is diagonal for all three channels
                        Matrix2c decay = Matrix2c::Zero();
                        for(int q = 0; q < 2; ++q) decay(q, q) = std::exp(-0.5 * dt * ldl(q, q).real());
                        const double kept = (decay.adjoint() * decay * rho).trace().real();
                        if(r < 1.0 - kept) {
                            jump(j, t + 0.5 * dt);
                        } else {
                            apply_at_center(m_, decay, j.site);
                            normalize_center(m_, center_norm(m_));
                        }
                    }
                    unitary_step(0.5 * dt);
                }
                record(static_cast<double>(k) * cfg_.dt_obs);
            }
        }

        void jump_exact(double t) {
            std::vector<double> w(jumps_.size(), 0.0);
            bool state_dependent = false;
            for(const auto &j : jumps_) state_dependent |= j.channel != JumpChannel::dephasing;
            if(state_dependent) {
                // site populations from a sweep of the orthogonality center
                const bool rightward = 2 * m_.center < n_;
                for(Index q = 0; q < n_; ++q) {
                    const Index site = rightward ? q : n_ - 1 - q;
                    move_center(m_, site);
                    const Matrix2c rho = center_rdm(m_);
                    for(std::size_t k = 0; k < jumps_.size(); ++k)
                        if(jumps_[k].site == site) w[k] = ldl_weight(jumps_[k], rho);
                }
            } else {
                for(std::size_t k = 0; k < jumps_.size(); ++k) w[k] = jumps_[k].rate;
            }
            jump(jumps_[pick(w, rng_.uniform())], t);
        }

        void jump(const JumpOperator &j, double t) {
            apply_at_center(m_, j.op, j.site);
            const double nrm = center_norm(m_);
            if(!(nrm >= 1e-14)) throw Error(ErrorKind::numerical, "apply_jump: post-jump norm below 1e-14");
            normalize_center(m_, nrm);
            trace_.jumps.push_back({t, j.site, j.channel});
        }

        void evolve(double span) {
            if(!(span > 0.0)) return;
            const auto steps = static_cast<Index>(std::max(1.0, std::ceil(span / cfg_.dt - 1e-9)));
            const double h   = span / static_cast<double>(steps);
            for(Index s = 0; s < steps; ++s) unitary_step(h);
        }

        void unitary_step(double h) {
            for(const auto &layer : layers_) {
                const auto &bonds = layer.odd ? odd_ : even_;
                if(bonds.empty()) continue;
                const Matrix<cplx> g = factory_.gate(h * layer.numerator / denominator_);
                const bool rightward = 2 * m_.center < n_;
                const Index count    = static_cast<Index>(bonds.size());
                for(Index k = 0; k < count; ++k) {
                    const Index b = bonds[static_cast<std::size_t>(rightward ? k : count - 1 - k)];
                    trace_.max_truncation_weight =
                        std::max(trace_.max_truncation_weight, apply_two_site_gate(m_, g, b, cfg_.chi, cfg_.cutoff, rightward));
                }
            }
            m_.log_norm = 0.0;
        }

        void record(double t) {
            MpsState s;
            to_vidal(m_, s.chain, cfg_.chi, cfg_.cutoff);
            trace_.times.push_back(t);
            trace_.bond_entropies.push_back(bond_entropies(s));
            trace_.sz.push_back(local_expectations(s, spin::sigma_z()));
            trace_.jumps_cum.push_back(trace_.jumps.size());
            trace_.max_bond_dim = std::max(trace_.max_bond_dim, s.max_bond_dim());
        }

        const TrajectoryConfig &cfg_;
        Index n_;
        Rng rng_;
        std::vector<JumpOperator> jumps_;
        XxzGateFactory factory_;
        std::vector<TrotterLayer> layers_;
        int denominator_;
        std::vector<Index> even_, odd_;
        Chain m_;
        EntropyTrace trace_;
    };

} // namespace

std::size_t select_jump_channel(const MpsState &state, const std::vector<JumpOperator> &jumps, Rng &rng) {
    if(jumps.empty()) throw Error(ErrorKind::invalid_argument, "select_jump_channel: no jump operators");
    std::vector<double> w;
    w.reserve(jumps.size());
    for(const auto &j : jumps) w.push_back(ldl_weight(j, site_density_matrix(state, j.site)));
    return pick(w, rng.uniform());
}

void apply_jump(MpsState &state, const JumpOperator &jump, Index chi, double cutoff) {
    const double w = ldl_weight(jump, site_density_matrix(state, jump.site));
    if(!(std::sqrt(std::max(w, 0.0)) >= 1e-14)) throw Error(ErrorKind::numerical, "apply_jump: post-jump norm below 1e-14");
    apply_site_operator(state.chain, Matrix<cplx>(jump.op), jump.site);
    // the chain is normalized again; the jump's norm is not part of the state
    canonicalize(state.chain, chi, cutoff);
}

EntropyTrace run_trajectory(const TrajectoryConfig &cfg, std::uint64_t index) {
    cfg.validate();
    return Engine(cfg, index).run();
}

std::vector<EntropyTrace> run_ensemble(const TrajectoryConfig &cfg, std::size_t n_traj, unsigned threads,
                                       const std::function<void(std::size_t)> &on_done) {
    cfg.validate();
    if(threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n_traj, 1)));
    std::vector<EntropyTrace> out(n_traj);
    std::vector<std::exception_ptr> errors(n_traj);
    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;
    std::size_t done = 0;
    auto worker      = [&] {
        for(std::size_t i = next++; i < n_traj; i = next++) {
            try {
                out[i] = Engine(cfg, i).run();
            } catch(...) {
                errors[i] = std::current_exception();
            }
            if(on_done) {
                std::lock_guard lock(done_mutex);
                on_done(++done);
            }
        }
    };
    if(threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for(unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    for(auto &e : errors)
        if(e) std::rethrow_exception(e);
    return out;
}

std::vector<Index> averaging_bonds(Index n_sites) {
    if(n_sites < 2) throw Error(ErrorKind::invalid_argument, "averaging_bonds: need at least two sites");
    const Index mid = n_sites / 2 - 1;
    if(n_sites < 12) return {mid};
    std::vector<Index> b;
    for(Index k = mid - 5; k <= mid + 5; ++k) b.push_back(k);
    return b;
}

std::vector<double> bond_averaged_entropy(const EntropyTrace &trace) {
    if(trace.bond_entropies.empty()) return {};
    const Index n = static_cast<Index>(trace.bond_entropies.front().size()) + 1;
    if(n < 12) {
        static std::once_flag warned;
        std::call_once(warned, [n] { spdlog::warn("bond averaging needs N >= 12 (got {}); using the center bond only", n); });
    }
    const auto bonds = averaging_bonds(n);
    std::vector<double> out;
    out.reserve(trace.times.size());
    for(const auto &row : trace.bond_entropies) {
        double s = 0;
        for(Index b : bonds) s += row.at(static_cast<std::size_t>(b));
        out.push_back(s / static_cast<double>(bonds.size()));
    }
    return out;
}

std::vector<double> center_entropy(const EntropyTrace &trace) {
    std::vector<double> out;
    out.reserve(trace.times.size());
    for(const auto &row : trace.bond_entropies) out.push_back(row.at((row.size() + 1) / 2 - 1));
    return out;
}

EnsembleStats ensemble_stats(const std::vector<double> &times, const std::vector<std::vector<double>> &samples) {
    if(samples.size() < 2) throw Error(ErrorKind::invalid_argument, "ensemble_stats: need at least two traces");
    for(const auto &s : samples)
        if(s.size() != times.size()) throw Error(ErrorKind::invalid_argument, "ensemble_stats: traces are not aligned on a common time grid");
    EnsembleStats st;
    st.times  = times;
    st.n_traj = samples.size();
    const double n = static_cast<double>(samples.size());
    for(std::size_t k = 0; k < times.size(); ++k) {
        // shifted by the first sample so identical traces give exactly zero spread
        const double x0 = samples.front()[k];
        double sd1 = 0, sd2 = 0;
        for(const auto &s : samples) {
            sd1 += s[k] - x0;
            sd2 += (s[k] - x0) * (s[k] - x0);
        }
        const double shift = sd1 / n;
        const double mean  = x0 + shift;
        const double sd    = std::sqrt(std::max(0.0, (sd2 - n * shift * shift) / (n - 1)));
        st.mean.push_back(mean);
        st.stddev.push_back(sd);
        st.standard_error.push_back(sd / std::sqrt(n));
    }
    return st;
}

EnsembleStats ensemble_stats(const std::vector<EntropyTrace> &traces) {
    if(traces.size() < 2) throw Error(ErrorKind::invalid_argument, "ensemble_stats: need at least two traces");
    std::vector<std::vector<double>> samples;
    samples.reserve(traces.size());
    for(const auto &t : traces) {
        if(t.times != traces.front().times) throw Error(ErrorKind::invalid_argument, "ensemble_stats: traces are not aligned on a common time grid");
        samples.push_back(bond_averaged_entropy(t));
    }
    return ensemble_stats(traces.front().times, samples);
}

} // namespace openchain
