#include "factm/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace factm::eval {
namespace {

double brute_force(const Matrix& cost, std::vector<int>& best_perm) {
  std::vector<int> perm(cost.cols());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (Eigen::Index r = 0; r < cost.rows(); ++r) c += cost(r, perm[r]);
    if (c < best - 1e-12) {
      best = c;
      best_perm.assign(perm.begin(), perm.begin() + cost.rows());
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(Hungarian, SpecExamples) {
  Matrix identity = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  const auto a = hungarian_match(identity);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(a.cost, 0.0);
  Matrix anti(2, 2);
  anti << 1, 0, 0, 1;
  const auto b = hungarian_match(anti);
  EXPECT_EQ(b.row_to_col, (std::vector<int>{1, 0}));
  EXPECT_EQ(b.cost, 0.0);
}

TEST(Hungarian, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix cost(5, 5);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
    std::vector<int> perm;
    const double best = brute_force(cost, perm);
    const auto a = hungarian_match(cost);
    EXPECT_NEAR(a.cost, best, 1e-12);
    EXPECT_EQ(a.row_to_col, perm);
  }
}

TEST(Hungarian, TiesResolveLexicographically) {
  const auto a = hungarian_match(Matrix::Zero(3, 3));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2}));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix cost(4, 4);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
    std::vector<int> perm;
    const double best = brute_force(cost, perm);
    const auto r = hungarian_match(cost);
    EXPECT_EQ(r.cost, best);
    EXPECT_EQ(r.row_to_col, perm);
  }
}

TEST(Hungarian, RectangularInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix wide(3, 5);
  for (Eigen::Index i = 0; i < wide.size(); ++i) wide.data()[i] = u(rng);
  std::vector<int> perm;
  EXPECT_NEAR(hungarian_match(wide).cost, brute_force(wide, perm), 1e-12);
  const auto tall = hungarian_match(Matrix(wide.transpose()));
  EXPECT_NEAR(tall.cost, hungarian_match(wide).cost, 1e-12);
  EXPECT_EQ(std::count(tall.row_to_col.begin(), tall.row_to_col.end(), -1), 2);
}

TEST(Correlation, AverageRanksAndSpearman) {
  Vector x(5);
  x << 3, 1, 3, 2, 5;
  Vector expected(5);
  expected << 3.5, 1, 3.5, 2, 5;
  EXPECT_EQ(average_ranks(x), expected);
  Vector y = x.array().exp();
  EXPECT_NEAR(spearman(x, y), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, -y), -1.0, 1e-15);
  EXPECT_EQ(pearson(x, Vector::Constant(5, 2.0)), 0.0);
}

TEST(FactorMatching, InvariantToPermutationAndSign) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(50, 4);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
  EXPECT_NEAR(match_factors(z, z).mean_abs_rho, 1.0, 1e-12);
  Matrix est(50, 4);
  est.col(0) = -z.col(2);
  est.col(1) = z.col(0);
  est.col(2) = z.col(3);
  est.col(3) = -z.col(1);
  const auto m = match_factors(z, est);
  EXPECT_NEAR(m.mean_abs_rho, 1.0, 1e-12);
  EXPECT_EQ(m.true_to_est, (std::vector<int>{1, 3, 0, 2}));
}

TEST(FactorMatching, NullCorrelationIsSmall) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  int below = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Matrix z(250, 5), est(250, 5);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z.data()[i] = normal(rng);
      est.data()[i] = normal(rng);
    }
    if (match_factors(z, est).mean_abs_rho < 0.2) ++below;
  }
  EXPECT_EQ(below, 200);
}

TEST(FactorMatching, ConstantColumnWarns) {
  Matrix z = Matrix::Random(10, 2);
  Matrix est = z;
  est.col(1).setConstant(1.0);
  const auto m = match_factors(z, est);
  EXPECT_FALSE(m.warnings.empty());
  EXPECT_EQ(m.spearman(1, 1), 0.0);
}

TEST(TopicMatching, RelabelingIsAbsorbed) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 9);
  std::vector<int> truth(1000);
  for (int& t : truth) t = u(rng);
  EXPECT_EQ(match_topics(truth, truth, 10, 10).accuracy, 1.0);
  const std::vector<int> relabel = {3, 1, 4, 0, 5, 9, 2, 6, 8, 7};
  std::vector<int> est(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) est[i] = relabel[truth[i]];
  const auto m = match_topics(truth, est, 10, 10);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.true_to_est, relabel);
}

TEST(TopicMatching, UniformNullIsNearChance) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> u(0, 9);
  std::vector<int> truth(25000), est(25000);
  for (int& t : truth) t = u(rng);
  for (int& t : est) t = u(rng);
  EXPECT_NEAR(match_topics(truth, est, 10, 10).accuracy, 0.1, 0.02);
}

TEST(TopicMatching, ArgmaxTakesTheFirstMaximum) {
  Matrix a(2, 3);
  a << 0.2, 0.5, 0.3,
       0.4, 0.2, 0.4;
  EXPECT_EQ(argmax_topics({a}), (std::vector<int>{1, 0}));
}

TEST(Frobenius, Examples) {
  const Matrix s = 2.0 * Matrix::Identity(3, 3);
  EXPECT_EQ(frobenius_relative(s, s, false), 0.0);
  EXPECT_NEAR(frobenius_relative(s, 2.0 * s, false), 1.0, 1e-15);
  // Scaling to correlations removes a pure rescale.
  EXPECT_NEAR(frobenius_relative(s, 3.0 * s, true), 0.0, 1e-15);
  EXPECT_NEAR(frobenius_relative(s, Matrix::Zero(3, 3), false), 1.0, 1e-15);
  Matrix c(2, 2);
  c << 2.0, 0.5, 0.5, 1.0;
  Matrix e(2, 2);
  e << 1.5, 0.2, 0.2, 3.0;
  const Vector d1 = Vector::Constant(2, 0.7), d2 = (Vector(2) << 2.0, 5.0).finished();
  EXPECT_NEAR(frobenius_relative(c, e, true),
              frobenius_relative(d1.asDiagonal() * c * d1.asDiagonal(), d2.asDiagonal() * e * d2.asDiagonal(), true),
              1e-14);
  EXPECT_THROW((void)frobenius_relative(Matrix::Zero(2, 2), s.topLeftCorner(2, 2), false),
               std::invalid_argument);
  EXPECT_THROW((void)frobenius_relative(s, Matrix::Identity(2, 2), false), std::invalid_argument);
}

TEST(Frobenius, PermuteSymmetric) {
  Matrix m(3, 3);
  m << 1, 2, 3,
       2, 4, 5,
       3, 5, 6;
  const Matrix p = permute_symmetric(m, {2, 0, 1});
  EXPECT_EQ(p(0, 0), 6);
  EXPECT_EQ(p(0, 1), 3);
  EXPECT_EQ(p(1, 2), 2);
}

}  // namespace
}  // namespace factm::eval
