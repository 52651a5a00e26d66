#include "openchain/tensor.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace openchain;

namespace {

DenseTensor<cplx> random_tensor(DenseTensor<cplx>::Dims dims, std::mt19937_64 &gen) {
    std::normal_distribution<double> nd;
    DenseTensor<cplx> t(std::move(dims));
    for(auto &x : t.data()) x = cplx(nd(gen), nd(gen));
    return t;
}

Matrix<cplx> random_matrix(Index r, Index c, std::mt19937_64 &gen) {
    std::normal_distribution<double> nd;
    Matrix<cplx> m(r, c);
    for(Index i = 0; i < r; ++i)
        for(Index j = 0; j < c; ++j) m(i, j) = cplx(nd(gen), nd(gen));
    return m;
}

} // namespace

TEST(Contract, IdentityTimesVector) {
    auto id = DenseTensor<double>::from_matrix(Eigen::Matrix2d::Identity());
    DenseTensor<double> v({2}, {1.0, 2.0});
    auto r = contract(id, v, {{1, 0}});
    ASSERT_EQ(r.dims(), (DenseTensor<double>::Dims{2}));
    EXPECT_DOUBLE_EQ(r({0}), 1.0);
    EXPECT_DOUBLE_EQ(r({1}), 2.0);
}

TEST(Contract, DiagonalMatrices) {
    auto a = DenseTensor<double>::from_matrix(Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix());
    auto b = DenseTensor<double>::from_matrix(Eigen::Vector2d(5, 7).asDiagonal().toDenseMatrix());
    auto c = contract(a, b, {{1, 0}});
    EXPECT_DOUBLE_EQ(c({0, 0}), 10.0);
    EXPECT_DOUBLE_EQ(c({1, 1}), 21.0);
    EXPECT_DOUBLE_EQ(c({0, 1}), 0.0);
    EXPECT_DOUBLE_EQ(c({1, 0}), 0.0);
}

TEST(Contract, MatchesNestedLoops) {
    std::mt19937_64 gen(7);
    auto a = random_tensor({2, 3, 2}, gen);
    auto b = random_tensor({2, 2}, gen);
    // pair axis 2 of a with axis 0 of b, and check against brute force
    auto c = contract(a, b, {{2, 0}});
    ASSERT_EQ(c.dims(), (DenseTensor<cplx>::Dims{2, 3, 2}));
    for(Index i = 0; i < 2; ++i)
        for(Index j = 0; j < 3; ++j)
            for(Index l = 0; l < 2; ++l) {
                cplx s = 0;
                for(Index k = 0; k < 2; ++k) s += a({i, j, k}) * b({k, l});
                EXPECT_LE(std::abs(c({i, j, l}) - s), 1e-12);
            }
    // pairing a middle axis exercises the permutation path
    auto d = random_tensor({3, 4}, gen);
    auto e = contract(a, d, {{1, 0}});
    ASSERT_EQ(e.dims(), (DenseTensor<cplx>::Dims{2, 2, 4}));
    for(Index i = 0; i < 2; ++i)
        for(Index k = 0; k < 2; ++k)
            for(Index l = 0; l < 4; ++l) {
                cplx s = 0;
                for(Index j = 0; j < 3; ++j) s += a({i, j, k}) * d({j, l});
                EXPECT_LE(std::abs(e({i, k, l}) - s), 1e-12);
            }
}

TEST(Contract, MismatchNamesAxisPair) {
    DenseTensor<double> a({2, 3});
    DenseTensor<double> b({2, 2});
    try {
        (void) contract(a, b, {{1, 0}});
        FAIL() << "expected a dimension mismatch";
    } catch(const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
        EXPECT_NE(std::string(e.what()).find("(1, 0)"), std::string::npos);
    }
}

TEST(Contract, Bilinear) {
    std::mt19937_64 gen(11);
    auto a = random_tensor({3, 4}, gen);
    auto b = random_tensor({4, 2}, gen);
    const cplx alpha(0.3, -1.7);
    auto scaled = a;
    scaled *= alpha;
    auto lhs = contract(scaled, b, {{1, 0}});
    auto rhs = contract(a, b, {{1, 0}});
    for(Index k = 0; k < lhs.size(); ++k) EXPECT_LE(std::abs(lhs.data()[k] - alpha * rhs.data()[k]), 1e-12);
}

TEST(Tensor, RejectsBadData) {
    EXPECT_THROW(DenseTensor<double>({2, 2}, {1.0, 2.0, 3.0}), Error);
    EXPECT_THROW(DenseTensor<double>({2, 0}), Error);
}

TEST(Tensor, PermuteRoundTrip) {
    std::mt19937_64 gen(3);
    auto a = random_tensor({2, 3, 4}, gen);
    const std::array<int, 3> p{2, 0, 1}, inv{1, 2, 0};
    auto b = a.permuted(p);
    EXPECT_EQ(b.dims(), (DenseTensor<cplx>::Dims{4, 2, 3}));
    EXPECT_EQ(b({3, 1, 2}), a({1, 2, 3}));
    auto c = b.permuted(inv);
    for(Index k = 0; k < a.size(); ++k) EXPECT_EQ(c.data()[k], a.data()[k]);
}

TEST(TruncatedSvd, DiagonalTruncation) {
    const Eigen::Matrix3d m = Eigen::Vector3d(3, 2, 1).asDiagonal();
    auto r = truncated_svd(DenseTensor<double>::from_matrix(m), 2);
    ASSERT_EQ(r.singular_values.size(), 2u);
    EXPECT_NEAR(r.singular_values[0], 3.0, 1e-14);
    EXPECT_NEAR(r.singular_values[1], 2.0, 1e-14);
    EXPECT_NEAR(r.truncation_weight, 1.0, 1e-14);
}

TEST(TruncatedSvd, Identity) {
    auto r = truncated_svd(DenseTensor<double>::from_matrix(Eigen::Matrix2d::Identity()), 2);
    ASSERT_EQ(r.singular_values.size(), 2u);
    EXPECT_NEAR(r.singular_values[0], 1.0, 1e-14);
    EXPECT_NEAR(r.singular_values[1], 1.0, 1e-14);
    EXPECT_EQ(r.truncation_weight, 0.0);
}

TEST(TruncatedSvd, RankOne) {
    const Eigen::Matrix2d m = Eigen::Vector2d(1, 1) * Eigen::RowVector2d(1, 1);
    auto r = truncated_svd(DenseTensor<double>::from_matrix(m), 4, 1e-14);
    ASSERT_EQ(r.singular_values.size(), 1u);
    EXPECT_NEAR(r.singular_values[0], 2.0, 1e-14);
}

TEST(TruncatedSvd, Errors) {
    EXPECT_THROW(truncated_svd(Matrix<double>(0, 3), 2), Error);
    EXPECT_THROW(truncated_svd(Matrix<double>::Identity(2, 2), 0), Error);
    Matrix<double> bad = Matrix<double>::Identity(2, 2);
    bad(0, 1)          = std::nan("");
    try {
        (void) truncated_svd(bad, 2);
        FAIL();
    } catch(const Error &e) { EXPECT_NE(std::string(e.what()).find("2x2"), std::string::npos); }
}

TEST(TruncatedSvd, ReconstructionAndOrthonormalityProperty) {
    std::mt19937_64 gen(42);
    std::uniform_int_distribution<int> dim(1, 24);
    for(int trial = 0; trial < 50; ++trial) {
        const Index r = dim(gen), c = dim(gen);
        const Matrix<cplx> m = random_matrix(r, c, gen);
        const Index chi      = 1 + trial % std::min(r, c);
        auto f               = truncated_svd(m, chi, 0.0);
        ASSERT_LE(f.s.size(), chi);
        for(Index k = 1; k < f.s.size(); ++k) EXPECT_GE(f.s(k - 1), f.s(k));
        const Matrix<cplx> rec = f.u * f.s.asDiagonal() * f.vh;
        EXPECT_NEAR((m - rec).norm(), f.truncation_weight, 1e-10);
        const Index k = f.s.size();
        EXPECT_LE((f.u.adjoint() * f.u - Matrix<cplx>::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((f.vh * f.vh.adjoint() - Matrix<cplx>::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
        auto full = truncated_svd(m, 1 << 20, 0.0);
        EXPECT_LE((m - full.u * full.s.asDiagonal() * full.vh).norm(), 1e-12 * std::max(1.0, m.norm()));
    }
}

// Graded spectra with near-degenerate pairs, the shape MPDO bond matrices take.
TEST(TruncatedSvd, ClusteredGradedSpectrum) {
    for(Index n : {16, 17, 33, 64}) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qa(Eigen::MatrixXd::Random(n, n)), qb(Eigen::MatrixXd::Random(n, n));
        const Eigen::MatrixXd ua = qa.householderQ(), ub = qb.householderQ();
        Eigen::VectorXd sv(n);
        for(Index k = 0; k < n; ++k) sv(k) = std::pow(10.0, -static_cast<double>(k / 2) * 10.0 / n) * (1 + 1e-9 * (k % 2));
        const Eigen::MatrixXd m = ua * sv.asDiagonal() * ub.transpose();
        auto f = truncated_svd(m, n, 0.0);
        EXPECT_LE((m - f.u * f.s.asDiagonal() * f.vh).norm(), 1e-13 * m.norm()) << n;
        std::sort(sv.data(), sv.data() + n, std::greater<>());
        EXPECT_LE((f.s - sv).cwiseAbs().maxCoeff(), 1e-13) << n;
    }
}

TEST(TruncatedSvd, RelativeCutoffDropsNoise) {
    const Eigen::Matrix3d m = Eigen::Vector3d(1, 1e-3, 1e-15).asDiagonal();
    auto f = truncated_svd(m, 3);
    EXPECT_EQ(f.s.size(), 2);
}

TEST(Entropy, BitsOfSchmidtValues) {
    EXPECT_DOUBLE_EQ(entropy_bits(Eigen::VectorXd::Ones(1)), 0.0);
    Eigen::VectorXd bell(2);
    bell << std::sqrt(0.5), std::sqrt(0.5);
    EXPECT_NEAR(entropy_bits(bell), 1.0, 1e-15);
    Eigen::VectorXd with_zero(3);
    with_zero << 1.0, 0.0, 0.0;
    EXPECT_DOUBLE_EQ(entropy_bits(with_zero), 0.0);
}
