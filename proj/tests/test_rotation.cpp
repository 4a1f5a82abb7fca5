#include "factm/rotation.hpp"

#include "factm/inference.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

namespace factm::rotation {
namespace {

TEST(Rotation, KabschOfIdentityIsIdentity) {
  const Matrix r = kabsch_rotation(Matrix::Identity(4, 4));
  EXPECT_LT((r - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rotation, KabschSmallExamples) {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 3.0;
  EXPECT_LT((kabsch_rotation(d) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  Matrix h(2, 2);
  h << 0.0, 1.0, -1.0, 0.0;
  EXPECT_LT((kabsch_rotation(h) - h).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rotation, SelfAndBinaryCorrelations) {
  Vector x(4);
  x << 0.0, 0.0, 1.0, 1.0;
  EXPECT_NEAR(cross_correlation(x, {{"b", FeatureKind::binary, x}}).h(0, 0), 1.0, 1e-15);
  Matrix z(5, 2);
  z << 1, 0.3, 2, -1, 0.5, 2, 4, 0.1, 3, 0;
  EXPECT_NEAR(cross_correlation(z, {{"a", FeatureKind::numeric, z.col(0)}}).h(0, 0), 1.0, 1e-15);
}

TEST(Rotation, IdentityLeavesTheSummaryUnchanged) {
  PointSummary p;
  p.factors = Matrix::Random(6, 3);
  p.loadings = {Matrix::Random(4, 3)};
  p.view_names = {"v"};
  const PointSummary q = apply_rotation(p, Matrix::Identity(3, 3));
  EXPECT_EQ(q.factors, p.factors);
  EXPECT_EQ(q.loadings[0], p.loadings[0]);
}

TEST(Rotation, KabschRecoversAnOrthogonalMatrix) {
  std::mt19937_64 rng(1);
  const Matrix q = testing::random_orthogonal(5, rng);
  EXPECT_LT((kabsch_rotation(q) - q).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rotation, KabschMaximizesTheTrace) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix h(6, 6);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = normal(rng);
    const Matrix r = kabsch_rotation(h);
    EXPECT_LT((r * r.transpose() - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
    const double best = (h.transpose() * r).trace();
    // The optimum is the nuclear norm of H.
    Eigen::JacobiSVD<Matrix> svd(h);
    EXPECT_NEAR(best, svd.singularValues().sum(), 1e-10);
    for (int j = 0; j < 200; ++j) {
      EXPECT_GE(best, (h.transpose() * testing::random_orthogonal(6, rng)).trace());
    }
  }
}

TEST(Rotation, PointBiserialTMatchesTheTwoSampleT) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n0 = 5 + trial, n1 = 8 + 2 * trial;
    Vector x(n0 + n1), g(n0 + n1);
    for (int i = 0; i < n0 + n1; ++i) {
      x(i) = normal(rng) + (i >= n0 ? 0.7 : 0.0);
      g(i) = i >= n0 ? 1.0 : 0.0;
    }
    const Vector a = x.head(n0), b = x.tail(n1);
    const double ma = a.mean(), mb = b.mean();
    const double sp = ((a.array() - ma).square().sum() + (b.array() - mb).square().sum()) / (n0 + n1 - 2);
    const double t = (mb - ma) / std::sqrt(sp * (1.0 / n0 + 1.0 / n1));
    const double r = cross_correlation(x, {{"g", FeatureKind::binary, g}}).h(0, 0);
    EXPECT_NEAR(point_biserial_t(r, n0, n1), t, 1e-10 * std::max(1.0, std::abs(t)));
  }
}

TEST(Rotation, CrossCorrelationPadsMissingFeatures) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(30, 3);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
  const auto cc = cross_correlation(z, {{"a", FeatureKind::numeric, z.col(1)}});
  EXPECT_EQ(cc.h.rows(), 3);
  EXPECT_EQ(cc.h.cols(), 3);
  EXPECT_NEAR(cc.h(1, 0), 1.0, 1e-12);
  EXPECT_EQ(cc.h.col(2), Vector::Zero(3));
}

TEST(Rotation, ConstantFactorGetsAZeroRow) {
  Matrix z = Matrix::Zero(10, 2);
  for (int i = 0; i < 10; ++i) z(i, 1) = i;
  const auto cc = cross_correlation(z, {{"a", FeatureKind::numeric, z.col(1)}});
  EXPECT_EQ(cc.zero_variance, std::vector<int>{0});
  EXPECT_EQ(cc.h.row(0), Eigen::RowVectorXd::Zero(2));
}

TEST(Rotation, RejectsBadFeatures) {
  const Matrix z = Matrix::Random(10, 2);
  Vector g = Vector::Zero(10);
  g(0) = 2.0;
  EXPECT_THROW((void)cross_correlation(z, {{"g", FeatureKind::binary, g}}), std::invalid_argument);
  const Feature f{"a", FeatureKind::numeric, Vector::Ones(10)};
  EXPECT_THROW((void)cross_correlation(z, {f, f, f}), std::invalid_argument);
  EXPECT_THROW((void)cross_correlation(z, {{"a", FeatureKind::numeric, Vector::Ones(9)}}),
               std::invalid_argument);
}

TEST(Rotation, ReconstructionIsInvariant) {
  testing::SmallShape shape;
  shape.simple_dims = {5, 3};
  const Dataset data = testing::random_dataset(shape, 5);
  const Hyperparams hp = testing::small_hyperparams(3, {3});
  const VariationalState s = testing::warmed_state(data, hp, 1, 3);
  const PointSummary p = summarize(s, data);
  ASSERT_EQ(p.loadings.size(), 3u);
  std::mt19937_64 rng(6);
  const PointSummary q = apply_rotation(p, testing::random_orthogonal(3, rng));
  for (std::size_t v = 0; v < p.loadings.size(); ++v) {
    const Matrix a = p.factors * p.loadings[v].transpose();
    const Matrix b = q.factors * q.loadings[v].transpose();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10) << p.view_names[v];
  }
}

TEST(Rotation, RejectsNonOrthogonalMatrices) {
  PointSummary p;
  p.factors = Matrix::Ones(4, 2);
  p.loadings = {Matrix::Ones(3, 2)};
  p.view_names = {"v"};
  Matrix r = Matrix::Identity(2, 2);
  r(0, 1) = 1e-6;
  EXPECT_THROW((void)apply_rotation(p, r), std::invalid_argument);
  EXPECT_THROW((void)apply_rotation(p, Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST(Rotation, CompositionIsAssociative) {
  std::mt19937_64 rng(7);
  PointSummary p;
  p.factors = Matrix::Random(6, 3);
  p.loadings = {Matrix::Random(4, 3)};
  p.view_names = {"v"};
  const Matrix a = testing::random_orthogonal(3, rng);
  const Matrix b = testing::random_orthogonal(3, rng);
  const PointSummary twice = apply_rotation(apply_rotation(p, a), b);
  const PointSummary once = apply_rotation(p, a * b);
  EXPECT_LT((twice.factors - once.factors).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace factm::rotation
