#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rpkf/random_matrix.hpp"
#include "test_support.hpp"

using rpkf::Matrix;
using rpkf::MatrixDist;
using rpkf::Vector;
namespace rt = rpkf::testing;

namespace {

Matrix sensor_h() {
  Matrix h(2, 2);
  h << 1, 1, 1, -1;
  return h;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST(MatrixDist, RejectsMismatchedShapes) {
  EXPECT_THROW(MatrixDist({{Matrix::Zero(2, 2), 0.5}, {Matrix::Zero(2, 3), 0.5}}),
               rpkf::InvalidInput);
}

TEST(MatrixDist, RejectsProbabilitiesNotSummingToOne) {
  EXPECT_THROW(MatrixDist({{scalar(1), 0.5}, {scalar(0), 0.4}}), rpkf::InvalidInput);
  EXPECT_THROW(MatrixDist({{scalar(1), 1.5}, {scalar(0), -0.5}}), rpkf::InvalidInput);
  EXPECT_THROW(MatrixDist(std::vector<MatrixDist::Sample>{}), rpkf::InvalidInput);
}

TEST(MomentsFromDist, DropoutMeanIsScaledMatrix) {
  const Matrix h = sensor_h();
  const auto spec = rpkf::moments_from_dist(MatrixDist({{h, 0.95}, {Matrix::Zero(2, 2), 0.05}}));
  EXPECT_LT(rt::max_abs(spec.mean() - 0.95 * h), 1e-15);
  ASSERT_TRUE(spec.source().has_value());
  EXPECT_EQ(spec.source()->size(), 2u);
}

TEST(MomentsFromDist, SingleSampleIsDeterministic) {
  std::mt19937_64 rng(1);
  const Matrix m = rt::random_matrix(2, 3, rng);
  const auto spec = rpkf::moments_from_dist(MatrixDist::deterministic(m));
  EXPECT_EQ(spec.mean(), m);
  EXPECT_TRUE(spec.is_deterministic());
  EXPECT_TRUE(spec.dev_cov().flat().isZero(0.0));
}

TEST(MomentsFromDist, ThreeRotationsGoldenMean) {
  const auto dist = rt::simulation2_model().transition_dist;
  const auto spec = rpkf::moments_from_dist(dist);
  // Probability-weighted sum of the three rotations, computed offline.
  Matrix golden(2, 2);
  golden << 0.9985336161039347, 0.05107362474752255, -0.05107362474752255, 0.9985336161039347;
  EXPECT_LT(rt::max_abs(spec.mean() - golden), 1e-15);
}

TEST(MomentsFromDist, TensorMatchesDiscreteMoments) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dist = rt::random_dist(2, 3, 4, rng);
    const auto spec = rpkf::moments_from_dist(dist);
    const Matrix mean = dist.mean();
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 3; ++j)
        for (Eigen::Index m = 0; m < 2; ++m)
          for (Eigen::Index n = 0; n < 3; ++n) {
            double expected = 0.0;
            for (const auto& s : dist.samples())
              expected += s.probability * (s.value(i, j) - mean(i, j)) * (s.value(m, n) - mean(m, n));
            EXPECT_NEAR(spec.dev_cov()(i, j, m, n), expected, 1e-12);
            // Pair-swap symmetry.
            EXPECT_EQ(spec.dev_cov()(i, j, m, n), spec.dev_cov()(m, n, i, j));
          }
  }
}

TEST(CovarianceTensor, RejectsAsymmetricOrNegativeVariance) {
  Matrix flat = Matrix::Zero(2, 2);
  flat(0, 1) = 1.0;
  EXPECT_THROW(rpkf::CovarianceTensor(1, 2, flat), rpkf::InvalidInput);
  Matrix neg = Matrix::Zero(2, 2);
  neg(1, 1) = -1.0;
  EXPECT_THROW(rpkf::CovarianceTensor(1, 2, neg), rpkf::InvalidInput);
  EXPECT_THROW(rpkf::CovarianceTensor(2, 2, Matrix::Zero(3, 3)), rpkf::InvalidInput);
}

TEST(QuadForm, DeterministicGivesZero) {
  std::mt19937_64 rng(3);
  const auto spec = rpkf::RandomMatrixSpec::deterministic(rt::random_matrix(3, 2, rng));
  const Matrix out = rpkf::quad_form(spec, rt::random_spd(2, rng));
  EXPECT_EQ(out, Matrix::Zero(3, 3));
}

TEST(QuadForm, ScalarDropout) {
  // Deviations 0.05 (w.p. 0.95) and −0.95 (w.p. 0.05):
  // 0.95·0.0025 + 0.05·0.9025 = 0.0475.
  const auto spec = rpkf::moments_from_dist(MatrixDist({{scalar(1), 0.95}, {scalar(0), 0.05}}));
  EXPECT_NEAR(rpkf::quad_form(spec, scalar(1))(0, 0), 0.0475, 1e-15);
}

TEST(QuadForm, ScalarCoinFlip) {
  const auto spec = rpkf::moments_from_dist(MatrixDist({{scalar(2), 0.5}, {scalar(0), 0.5}}));
  EXPECT_DOUBLE_EQ(rpkf::quad_form(spec, scalar(1))(0, 0), 1.0);
}

TEST(QuadForm, RejectsDimensionMismatchAndAsymmetricX) {
  const auto spec = rpkf::RandomMatrixSpec::deterministic(Matrix::Identity(2, 3));
  EXPECT_THROW(rpkf::quad_form(spec, Matrix::Identity(2, 2)), rpkf::InvalidInput);
  Matrix x = Matrix::Identity(3, 3);
  x(0, 2) = 1.0;
  EXPECT_THROW(rpkf::quad_form(spec, x), rpkf::InvalidInput);
  EXPECT_THROW(rpkf::quad_form_discrete(MatrixDist::deterministic(Matrix::Identity(2, 3)),
                                        Matrix::Identity(2, 2)),
               rpkf::InvalidInput);
}

TEST(QuadFormDiscrete, SingleSampleIsZero) {
  const Matrix out =
      rpkf::quad_form_discrete(MatrixDist::deterministic(sensor_h()), Matrix::Identity(2, 2));
  EXPECT_EQ(out, Matrix::Zero(2, 2));
}

TEST(QuadFormDiscrete, TwoIndependentBlocksEnumerated) {
  // All four on/off patterns of two 1×1 blocks [1], each on w.p. 0.5.
  const Matrix on_on = (Matrix(2, 1) << 1, 1).finished();
  const Matrix on_off = (Matrix(2, 1) << 1, 0).finished();
  const Matrix off_on = (Matrix(2, 1) << 0, 1).finished();
  const Matrix off_off = Matrix::Zero(2, 1);
  const MatrixDist dist({{off_off, 0.25}, {on_on, 0.25}, {on_off, 0.25}, {off_on, 0.25}});
  const Matrix out = rpkf::quad_form_discrete(dist, scalar(1));
  EXPECT_LT(rt::max_abs(out - Matrix(Eigen::Vector2d(0.25, 0.25).asDiagonal())), 1e-15);
}

TEST(QuadFormDiscrete, SimulationOneDropoutAtIdentity) {
  const Matrix h = sensor_h();
  const MatrixDist dist({{h, 0.95}, {Matrix::Zero(2, 2), 0.05}});
  const Matrix out = rpkf::quad_form_discrete(dist, Matrix::Identity(2, 2));
  EXPECT_LT(rt::max_abs(out - 0.0475 * h * h.transpose()), 1e-14);
}

TEST(QuadFormProperty, TensorPathMatchesMixturePath) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> count(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const int p = dim(rng);
    const int q = dim(rng);
    const auto dist = rt::random_dist(p, q, static_cast<std::size_t>(count(rng)), rng, 3.0);
    const Matrix x = rt::random_spd(q, rng, 0.0);
    const Matrix tensor = rpkf::quad_form(rpkf::moments_from_dist(dist), x);
    const Matrix mixture = rpkf::quad_form_discrete(dist, x);
    const double scale = std::max(1e-300, rt::max_abs(mixture));
    EXPECT_LE(rt::max_abs(tensor - mixture) / std::max(scale, 1.0), 1e-10) << "trial " << trial;

    // Symmetric and PSD.
    EXPECT_LE(rt::max_abs(tensor - tensor.transpose()), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(tensor);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * std::max(1.0, tensor.trace()));
  }
}

TEST(SampleMatrix, DeterministicAlwaysReturnsTheMatrix) {
  rpkf::Rng rng(5);
  const Matrix m = sensor_h();
  const auto dist = MatrixDist::deterministic(m);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(rpkf::sample_matrix(dist, rng), m);
}

TEST(SampleMatrix, EmpiricalFrequency) {
  rpkf::Rng rng(12345);
  const MatrixDist dist({{scalar(1), 0.5}, {scalar(0), 0.5}});
  int hits = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) hits += rpkf::sample_matrix(dist, rng)(0, 0) == 1.0;
  const double freq = static_cast<double>(hits) / draws;
  EXPECT_GE(freq, 0.49);
  EXPECT_LE(freq, 0.51);
}

TEST(SampleMatrix, SameSeedSameSequence) {
  const MatrixDist dist({{scalar(1), 0.2}, {scalar(2), 0.3}, {scalar(3), 0.5}});
  rpkf::Rng a(99);
  rpkf::Rng b(99);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(rpkf::sample_matrix(dist, a), rpkf::sample_matrix(dist, b));
  }
}

TEST(SampleMatrix, MomentOnlySpecCannotBeSampled) {
  Matrix flat = Matrix::Identity(1, 1);
  const rpkf::RandomMatrixSpec spec(scalar(1), rpkf::CovarianceTensor(1, 1, flat));
  rpkf::Rng rng(1);
  EXPECT_THROW(rpkf::sample_matrix(spec, rng), rpkf::InvalidInput);
}

// E(F x xᵀ Fᵀ) = E(F E(x xᵀ) Fᵀ) for independent F and x, checked by
// sampling paired draws and comparing with the analytic mixture.
TEST(QuadFormProperty, IndependentMatrixAndVectorSecondMoment) {
  std::mt19937_64 gen(2024);
  const auto f_dist = rt::random_dist(2, 2, 3, gen, 2.0);
  const Vector mu = rt::random_vector(2, gen, -2.0, 2.0);
  const Matrix sigma = rt::random_spd(2, gen);
  const Matrix second = mu * mu.transpose() + sigma;

  Matrix expected = Matrix::Zero(2, 2);
  for (const auto& s : f_dist.samples()) expected += s.probability * s.value * second * s.value.transpose();
  // Same quantity via the moment algebra.
  const auto spec = rpkf::moments_from_dist(f_dist);
  const Matrix algebra = spec.mean() * second * spec.mean().transpose() + rpkf::quad_form(spec, second);
  EXPECT_LT(rt::max_abs(expected - algebra), 1e-12);

  rpkf::Rng rng(77);
  rt::MomentAccumulator acc(2, 2);
  for (int i = 0; i < 100000; ++i) {
    const Matrix& f = rpkf::sample_matrix(f_dist, rng);
    const Vector x = rpkf::sample_gaussian(mu, sigma, rng);
    const Vector fx = f * x;
    acc.add(fx * fx.transpose());
  }
  EXPECT_LE(acc.max_z(expected), 5.0);
}
