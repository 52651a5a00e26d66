#pragma once

// Dense reference dynamics for small chains: Lindblad integration of the full
// density matrix, exact superoperator exponentials, exact trajectory steps and
// entropies from direct Schmidt decompositions.

#include "openchain/models.hpp"
#include "openchain/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace openchain::oracle {

using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

inline constexpr Index max_density_sites = 8;
inline constexpr Index max_pure_sites    = 10;

/// Site operator op on `site` of an n-site register (site 0 most significant).
DenseMatrix embed_site_operator(const Matrix2c &op, Index site, Index n);
/// Full open-chain XXZ Hamiltonian.
DenseMatrix chain_hamiltonian(const ModelParams &p);

DenseVector neel_vector(Index n);
DenseMatrix neel_density(Index n);

/// drho/dt = -i[H, rho] + sum_j D[L_j] rho, with H the open-chain Hamiltonian.
DenseMatrix lindblad_rhs(const ModelParams &p, const DenseMatrix &rho);

struct LindbladSeries {
    std::vector<double> times;
    std::vector<DenseMatrix> states;
};

/// Integrates the master equation with classic RK4, halving the step until the
/// step-doubling error estimate drops below `tol`, and records rho at
/// multiples of dt_obs up to t_max (inclusive).
LindbladSeries lindblad_evolve(const DenseMatrix &rho0, const ModelParams &p, double dt_obs, double t_max, double tol = 1e-9);

/// Full 4^n x 4^n Liouvillian acting on column-stacked vec(rho). n <= 4.
DenseMatrix liouvillian(const ModelParams &p);
/// rho(t) via the exponential of the Liouvillian; independent of the RK4 route.
DenseMatrix lindblad_exact(const DenseMatrix &rho0, const ModelParams &p, double t);

/// Operator entanglement (bits) of rho across the cut after site `cut`
/// (cut = 0 separates site 0 from the rest).
double dense_oe(const DenseMatrix &rho, Index cut);
/// Von Neumann entropy (bits) of a pure state across the same cut.
double dense_pure_entropy(const DenseVector &psi, Index cut);

double expectation(const DenseMatrix &rho, const DenseMatrix &op);
std::vector<double> site_expectations(const DenseMatrix &rho, const Matrix2c &op);
std::vector<double> site_expectations(const DenseVector &psi, const Matrix2c &op);

/// Applies a single-site operator to a pure state in place (no normalization).
void apply_site(DenseVector &psi, const Matrix2c &op, Index site);

enum class TrajectoryStepping {
    original,    ///< exp(-i H_eff dt) then one jump decision against the lost norm
    per_channel, ///< Hamiltonian half step, per-site per-channel conditional jumps, Hamiltonian half step
};

struct DenseJump {
    double time = 0.0;
    Index site  = 0;
    JumpChannel channel = JumpChannel::dephasing;
    friend bool operator==(const DenseJump &, const DenseJump &) = default;
};

/// Exact dense quantum-trajectory stepper.
class DenseTrajectory {
  public:
    DenseTrajectory(const ModelParams &p, double dt, TrajectoryStepping stepping);

    /// One step of length dt from time t; jumps are appended to `log`.
    void step(DenseVector &psi, double t, Rng &rng, std::vector<DenseJump> &log) const;

  private:
    ModelParams params_;
    double dt_;
    TrajectoryStepping stepping_;
    std::vector<JumpOperator> jumps_;
    DenseMatrix propagator_;      ///< exp(-i H_eff dt) for the original stepping
    DenseMatrix half_unitary_;    ///< exp(-i H dt / 2)
};

} // namespace openchain::oracle
