#include "openchain/mpdo.hpp"
#include "openchain/oracle.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace openchain;

namespace {

ModelParams params(Index n, double gp, double gm, double gz, double J = 1.0) {
    ModelParams p;
    p.n_sites     = n;
    p.gamma_plus  = gp;
    p.gamma_minus = gm;
    p.gamma_z     = gz;
    p.J           = J;
    p.delta       = J;
    return p;
}

Matrix2c plus_state() {
    Matrix2c r;
    r << 0.5, 0.5, 0.5, 0.5;
    return r;
}

template<typename Scalar>
MpdoState<Scalar> evolve(const ModelParams &p, BasisFlavor flavor, double dt, int steps, Index chi = 64, int order = 4) {
    auto s = neel_mpdo<Scalar>(p.n_sites, flavor);
    MpdoPropagator<Scalar> prop(p, flavor, dt, order);
    for(int k = 0; k < steps; ++k) prop.step(s, chi);
    return s;
}

} // namespace

TEST(NeelMpdo, ProductStateBasics) {
    auto s = neel_mpdo<double>(6);
    EXPECT_NEAR(mpdo_trace(s), 1.0, 1e-15);
    const auto z = mpdo_local_expectations(s, spin::sigma_z());
    for(Index i = 0; i < 6; ++i) EXPECT_NEAR(z[static_cast<std::size_t>(i)], i % 2 == 0 ? 1.0 : -1.0, 1e-15);
    for(Index b = 0; b < 5; ++b) EXPECT_EQ(operator_entanglement(s, b), 0.0);
    EXPECT_THROW(neel_mpdo<double>(3), Error);
    const auto dense = mpdo_to_dense(s);
    EXPECT_LE((dense - oracle::neel_density(6)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ApplySuperGate, ZeroTimeIsIdentity) {
    auto s        = evolve<double>(params(4, 0.5, 0.5, 0), BasisFlavor::pauli, 0.1, 3);
    const auto d0 = mpdo_to_dense(s);
    const auto g  = build_super_gate(params(4, 0.5, 0.5, 0), OperatorBasis::pauli(), 0.0);
    for(Index b = 0; b < 3; ++b) apply_super_gate(s, g, b, 64);
    EXPECT_LE((mpdo_to_dense(s) - d0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplySuperGate, TwoSpinHamiltonianEvolution) {
    const ModelParams p = params(2, 0, 0, 0);
    for(double t : {0.2, 1.0, 2.3}) {
        auto s = neel_mpdo<double>(2);
        apply_super_gate(s, build_super_gate(p, OperatorBasis::pauli(), t, 1.0, 1.0), 0, 16);
        EXPECT_NEAR(mpdo_local_expectation(s, spin::sigma_z(), 0), std::cos(t * p.J), 1e-12);
        EXPECT_NEAR(mpdo_trace(s), 1.0, 1e-12);
    }
}

TEST(ApplySuperGate, BellDensityHasOperatorEntanglementTwo) {
    const ModelParams p = params(2, 0, 0, 0);
    auto s              = neel_mpdo<double>(2);
    apply_super_gate(s, build_super_gate(p, OperatorBasis::pauli(), std::numbers::pi / 2, 1.0, 1.0), 0, 16);
    EXPECT_NEAR(operator_entanglement(s, 0), 2.0, 1e-10);
}

TEST(OperatorEntanglement, MaximallyMixedIsZero) {
    auto s = product_mpdo<double>(std::vector<Matrix2c>(4, Matrix2c::Identity()), BasisFlavor::pauli);
    for(Index b = 0; b < 3; ++b) EXPECT_EQ(operator_entanglement(s, b), 0.0);
    EXPECT_NEAR(mpdo_trace(s), 1.0, 1e-14);
    EXPECT_NEAR(min_two_site_eigenvalue(s), 0.25, 1e-14);
}

TEST(Trotter, DephasingOnlyMatchesProductChannel) {
    const double gz     = 0.7;
    const ModelParams p = params(4, 0, 0, gz, 0.0);
    auto s              = product_mpdo<double>(std::vector<Matrix2c>(4, plus_state()), BasisFlavor::pauli);
    MpdoPropagator<double> prop(p, BasisFlavor::pauli, 0.1);
    for(int k = 1; k <= 10; ++k) {
        prop.step(s, 16);
        const auto x = mpdo_local_expectations(s, spin::sigma_x());
        const auto z = mpdo_local_expectations(s, spin::sigma_z());
        for(Index i = 0; i < 4; ++i) {
            EXPECT_NEAR(x[static_cast<std::size_t>(i)], std::exp(-2 * gz * 0.1 * k), 1e-10);
            EXPECT_NEAR(z[static_cast<std::size_t>(i)], 0.0, 1e-12);
        }
    }
}

TEST(Trotter, EmissionAbsorptionOnlyMatchesProductChannel) {
    const double gp = 0.4, gm = 0.9, gz = 0.2;
    const ModelParams p = params(4, gp, gm, gz, 0.0);
    auto s              = product_mpdo<double>(std::vector<Matrix2c>(4, plus_state()), BasisFlavor::pauli);
    MpdoPropagator<double> prop(p, BasisFlavor::pauli, 0.25);
    for(int k = 0; k < 8; ++k) prop.step(s, 16);
    const double t  = 2.0;
    const double zs = (gp - gm) / (gp + gm);
    const auto x    = mpdo_local_expectations(s, spin::sigma_x());
    const auto z    = mpdo_local_expectations(s, spin::sigma_z());
    for(Index i = 0; i < 4; ++i) {
        EXPECT_NEAR(z[static_cast<std::size_t>(i)], zs * (1 - std::exp(-(gp + gm) * t)), 1e-10);
        EXPECT_NEAR(x[static_cast<std::size_t>(i)], std::exp(-(0.5 * (gp + gm) + 2 * gz) * t), 1e-10);
    }
}

TEST(Trotter, MatchesOracleAtFourSites) {
    const ModelParams p = params(4, 0.3, 0.6, 0.2);
    const double dt     = 0.05;
    auto s              = neel_mpdo<double>(4);
    MpdoPropagator<double> prop(p, BasisFlavor::pauli, dt);
    const auto ref = oracle::lindblad_evolve(oracle::neel_density(4), p, 0.25, 1.0);
    for(std::size_t k = 1; k < ref.times.size(); ++k) {
        for(int j = 0; j < 5; ++j) prop.step(s, 64);
        const auto z  = mpdo_local_expectations(s, spin::sigma_z());
        const auto zr = oracle::site_expectations(ref.states[k], spin::sigma_z());
        for(std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(z[i], zr[i], 1e-6);
        EXPECT_NEAR(operator_entanglement(s, 1), oracle::dense_oe(ref.states[k], 1), 1e-5);
        EXPECT_NEAR(mpdo_trace(s), 1.0, 1e-12);
        EXPECT_LE((mpdo_to_dense(s) - ref.states[k]).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Trotter, LinearizedAgreesWithPauli) {
    const ModelParams p = params(4, 0.5, 0.5, 0.3);
    auto a              = evolve<double>(p, BasisFlavor::pauli, 0.1, 6);
    auto b              = evolve<cplx>(p, BasisFlavor::linearized, 0.1, 6);
    EXPECT_LE((mpdo_to_dense(a) - mpdo_to_dense(b)).cwiseAbs().maxCoeff(), 1e-10);
    for(Index bond = 0; bond < 3; ++bond) EXPECT_NEAR(operator_entanglement(a, bond), operator_entanglement(b, bond), 1e-8);
}

TEST(Trotter, SecondOrderIsLessAccurate) {
    const ModelParams p = params(4, 0.5, 0.5, 0);
    const auto exact    = oracle::lindblad_exact(oracle::neel_density(4), p, 1.0);
    const double e4     = (mpdo_to_dense(evolve<double>(p, BasisFlavor::pauli, 0.2, 5, 64, 4)) - exact).norm();
    const double e2     = (mpdo_to_dense(evolve<double>(p, BasisFlavor::pauli, 0.2, 5, 64, 2)) - exact).norm();
    EXPECT_LT(e4, e2);
}

TEST(Invariants, TraceMagnetizationAndEntropyCap) {
    // Dephasing conserves the magnetization operator, so it holds under any
    // truncation. Balanced gain and loss only keep it at zero by a spin-flip
    // plus reflection symmetry that a truncating sweep does not respect, so
    // that case is checked at a bond dimension where the run is converged.
    struct Case {
        ModelParams p;
        Index chi;
        bool check_magnetization;
    };
    for(const auto &c : {Case{params(8, 0.5, 0.5, 0), 8, false}, Case{params(8, 0.5, 0.5, 0), 64, true}, Case{params(8, 0, 0, 1.0), 8, true}}) {
        auto s = neel_mpdo<double>(8);
        MpdoPropagator<double> prop(c.p, BasisFlavor::pauli, 0.1);
        for(int k = 0; k < 15; ++k) {
            const auto st = prop.step(s, c.chi);
            EXPECT_NEAR(mpdo_trace(s), 1.0, 1e-12);
            EXPECT_GT(st.trace_before, 0.0);
            double m = 0;
            for(double z : mpdo_local_expectations(s, spin::sigma_z())) m += z;
            if(c.check_magnetization) EXPECT_NEAR(m, 0.0, 1e-6);
            for(Index b = 0; b < 7; ++b) {
                EXPECT_LE(operator_entanglement(s, b), std::log2(static_cast<double>(c.chi)) + 1e-12);
                EXPECT_NEAR(s.chain.bond_lambda(b).squaredNorm(), 1.0, 1e-10);
            }
        }
        EXPECT_LE(s.max_bond_dim(), c.chi);
    }
}

TEST(Diagnostics, TwoSiteRdmMatchesDense) {
    const ModelParams p = params(4, 0.5, 0.2, 0.1);
    auto s              = evolve<double>(p, BasisFlavor::pauli, 0.1, 4);
    const auto rho      = mpdo_to_dense(s);
    // partial trace over sites 2, 3 of the dense operator
    Matrix4c r = Matrix4c::Zero();
    for(Index a = 0; a < 4; ++a)
        for(Index b = 0; b < 4; ++b)
            for(Index e = 0; e < 4; ++e) r(a, b) += rho(a * 4 + e, b * 4 + e);
    EXPECT_LE((mpdo_two_site_rdm(s, 0) - r / r.trace()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(min_two_site_eigenvalue(s), -1e-8);
}

TEST(Checkpoint, JsonRoundTrip) {
    const ModelParams p = params(4, 0.5, 0.5, 0.1);
    auto s              = evolve<double>(p, BasisFlavor::pauli, 0.1, 3);
    const auto text     = mpdo_checkpoint_json(s, p, 0.3);
    ModelParams q;
    double t = 0;
    auto r   = mpdo_from_checkpoint_json<double>(text, &q, &t);
    EXPECT_EQ(t, 0.3);
    EXPECT_EQ(q.gamma_z, 0.1);
    EXPECT_EQ(q.n_sites, 4);
    EXPECT_EQ((mpdo_to_dense(r) - mpdo_to_dense(s)).cwiseAbs().maxCoeff(), 0.0);
    auto c = evolve<cplx>(p, BasisFlavor::linearized, 0.1, 2);
    auto rc = mpdo_from_checkpoint_json<cplx>(mpdo_checkpoint_json(c, p, 0.2));
    EXPECT_EQ((mpdo_to_dense(rc) - mpdo_to_dense(c)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(mpdo_from_checkpoint_json<double>(mpdo_checkpoint_json(c, p, 0.2)), Error);
    EXPECT_THROW(mpdo_from_checkpoint_json<double>("{not json"), Error);
}
