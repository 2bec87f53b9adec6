#include <cmath>

#include <gtest/gtest.h>

#include <cliquedecomp/prox.hpp>

#include "oracles.hpp"

using namespace cliquedecomp;

namespace {

Matrix random_orthonormal(int n, int r, Xoshiro256& rng) {
    Matrix g(n, r);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < r; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(n, r);
}

Mask random_mask(int n, double p, Xoshiro256& rng) {
    Mask m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.bernoulli(p);
    return m;
}

Matrix random_matrix(int n, Xoshiro256& rng) {
    Matrix x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = rng.normal();
    return x;
}

} // namespace

TEST(Svt, DiagonalCase) {
    Matrix x = Eigen::Vector2d(3.0, 1.0).asDiagonal();
    Matrix expected = Eigen::Vector2d(1.0, 0.0).asDiagonal();
    EXPECT_LT((svt(x, 2.0) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Svt, ZeroMatrix) {
    EXPECT_EQ(svt(Matrix::Zero(4, 4), 0.7), Matrix::Zero(4, 4));
}

TEST(Svt, NegativeEigenvaluesShrinkTowardZero) {
    Matrix x = Eigen::Vector3d(-3.0, 0.5, 2.0).asDiagonal();
    Matrix expected = Eigen::Vector3d(-2.0, 0.0, 1.0).asDiagonal();
    EXPECT_LT((svt(x, 1.0) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Svt, MatchesFactorizedMinimizer) {
    Xoshiro256 rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix x = oracle::random_symmetric(4, rng);
        const Matrix expected = oracle::nuclear_prox(x, 0.3, trial + 1);
        EXPECT_LT((svt(x, 0.3) - expected).cwiseAbs().maxCoeff(), 1e-6) << "trial " << trial;
    }
}

TEST(Svt, RejectsAsymmetricInput) {
    Matrix x = Matrix::Zero(3, 3);
    x(0, 1) = 1e-6;
    EXPECT_THROW(svt(x, 0.1), ArgumentError);
    EXPECT_THROW(svt(Matrix::Identity(2, 2), 0.0), ArgumentError);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = std::nan("");
    EXPECT_THROW(svt(bad, 0.1), ArgumentError);
}

TEST(SoftThreshold, ScalarCases) {
    Matrix x(1, 2);
    x << 0.7, -0.3;
    const Matrix y = soft_threshold(x, 0.5);
    EXPECT_NEAR(y(0, 0), 0.2, 1e-15);
    EXPECT_EQ(y(0, 1), 0.0);
}

TEST(SoftThreshold, UnitEntriesAtUnitThresholdVanish) {
    Matrix x(3, 3);
    x << 1, -1, 1, -1, 1, -1, 1, 1, -1;
    EXPECT_EQ(soft_threshold(x, 1.0), Matrix::Zero(3, 3));
}

TEST(WeightedSoftThreshold, UnitWeightsReduceToSoftThreshold) {
    Xoshiro256 rng(8);
    const Matrix x = random_matrix(6, rng);
    EXPECT_EQ(weighted_soft_threshold(Matrix::Ones(6, 6), x, 0.4), soft_threshold(x, 0.4));
}

TEST(WeightedSoftThreshold, LargeWeightZeroesEntry) {
    Matrix c = Matrix::Ones(2, 2), x = Matrix::Constant(2, 2, 0.9);
    c(0, 1) = 20.0;
    const Matrix y = weighted_soft_threshold(c, x, 0.05);
    EXPECT_EQ(y(0, 1), 0.0);
    EXPECT_NEAR(y(0, 0), 0.85, 1e-15);
}

TEST(WeightedSoftThreshold, MatchesScalarMinimizer) {
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = random_matrix(4, rng);
        Matrix c(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) c(i, j) = 0.05 + 5.0 * rng.uniform();
        const Matrix expected = oracle::weighted_shrinkage(c, x, 0.2);
        EXPECT_LT((weighted_soft_threshold(c, x, 0.2) - expected).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(WeightedSoftThreshold, RejectsBadWeights) {
    const Matrix x = Matrix::Ones(2, 2);
    Matrix c = Matrix::Ones(2, 2);
    c(1, 1) = 0.0;
    EXPECT_THROW(weighted_soft_threshold(c, x, 0.1), ArgumentError);
    EXPECT_THROW(weighted_soft_threshold(Matrix::Ones(3, 3), x, 0.1), ArgumentError);
}

TEST(TangentSpace, FirstBasisVectorKeepsFirstRowAndColumn) {
    Xoshiro256 rng(4);
    const Matrix x = random_matrix(5, rng);
    const Matrix u = Matrix::Identity(5, 1);
    Matrix expected = Matrix::Zero(5, 5);
    expected.row(0) = x.row(0);
    expected.col(0) = x.col(0);
    EXPECT_LT((project_R(u, x) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TangentSpace, RejectsNonOrthonormalBasis) {
    EXPECT_THROW(TangentSpace(Matrix::Constant(4, 1, 1.0)), ArgumentError);
    TangentSpace t(Matrix::Identity(4, 1));
    EXPECT_THROW(t.project(Matrix::Zero(3, 3)), ArgumentError);
}

TEST(TangentSpace, ProjectionAlgebra) {
    Xoshiro256 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(8));
        const int r = 1 + static_cast<int>(rng.below(n));
        const TangentSpace t(random_orthonormal(n, r, rng));
        const Matrix x = random_matrix(n, rng);
        const Matrix px = t.project(x), qx = t.project_perp(x);
        EXPECT_LT((t.project(px) - px).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((px + qx - x).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT(std::abs((px.array() * qx.array()).sum()), 1e-10);
        EXPECT_NEAR(px.squaredNorm() + qx.squaredNorm(), x.squaredNorm(), 1e-10);
    }
}

TEST(OmegaProjection, FullAndEmptyMasks) {
    Xoshiro256 rng(5);
    const Matrix x = random_matrix(4, rng);
    EXPECT_EQ(project_Omega(Mask::Constant(4, 4, true), x), x);
    EXPECT_EQ(project_Omega(Mask::Constant(4, 4, false), x), Matrix::Zero(4, 4));
    EXPECT_THROW(project_Omega(Mask::Constant(3, 3, true), x), ArgumentError);
}

TEST(OmegaProjection, ProjectionAlgebra) {
    Xoshiro256 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(9));
        const Mask m = random_mask(n, rng.uniform(), rng);
        const Matrix x = random_matrix(n, rng);
        const Matrix px = project_Omega(m, x), qx = project_Omega_perp(m, x);
        EXPECT_EQ(project_Omega(m, px), px);
        EXPECT_EQ(px + qx, x);
        EXPECT_NEAR(px.squaredNorm() + qx.squaredNorm(), x.squaredNorm(), 1e-10);
    }
}

TEST(Norms, Identity) {
    const auto n = norms(Matrix::Identity(3, 3));
    EXPECT_NEAR(n.frobenius, std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(n.nuclear, 3.0, 1e-12);
    EXPECT_NEAR(n.spectral, 1.0, 1e-12);
    EXPECT_EQ(n.l1, 3.0);
    EXPECT_EQ(n.linf, 1.0);
}

TEST(Norms, CliqueBlock) {
    const int N = 40, n = 12;
    Matrix l = Matrix::Zero(N, N);
    l.topLeftCorner(n, n).setOnes();
    EXPECT_NEAR(nuclear_norm(l), n, 1e-10);
    EXPECT_NEAR(spectral_norm(l), n, 1e-10);
}

TEST(Norms, NonSymmetricUsesSvd) {
    Matrix x(2, 2);
    x << 0, 2, 0, 0;
    EXPECT_NEAR(spectral_norm(x), 2.0, 1e-14);
    EXPECT_NEAR(nuclear_norm(x), 2.0, 1e-14);
}
