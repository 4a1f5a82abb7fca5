#include "factm/simulation.hpp"

#include "factm/validate.hpp"

#include <gtest/gtest.h>

namespace factm::sim {
namespace {

ScenarioSpec small_spec() {
  ScenarioSpec spec;
  spec.n_samples = 40;
  spec.sentences_per_doc = 10;
  return spec;
}

TEST(Simulation, IsDeterministicGivenTheSeed) {
  const auto a = generate(small_spec(), 3);
  const auto b = generate(small_spec(), 3);
  const auto c = generate(small_spec(), 4);
  EXPECT_EQ(a.truth.z, b.truth.z);
  EXPECT_EQ(a.data.simple_views[1].data, b.data.simple_views[1].data);
  EXPECT_EQ(a.truth.structured[0].xi, b.truth.structured[0].xi);
  EXPECT_NE(a.truth.z, c.truth.z);
}

TEST(Simulation, ShapesFollowTheSpec) {
  const auto s = generate(small_spec(), 1);
  EXPECT_EQ(s.data.n_samples, 40);
  ASSERT_EQ(s.data.simple_views.size(), 2u);
  EXPECT_EQ(s.data.simple_views[0].data.cols(), 10);
  ASSERT_EQ(s.data.structured_views.size(), 1u);
  const auto& text = s.data.structured_views[0];
  EXPECT_EQ(text.vocab_size, 100);
  for (const Document& doc : text.documents) {
    ASSERT_EQ(doc.size(), 10u);
    for (const Sentence& sentence : doc) {
      double total = 0.0;
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        total += sentence[i].count;
        if (i > 0) {
          EXPECT_LT(sentence[i - 1].index, sentence[i].index);
        }
      }
      EXPECT_EQ(total, 10.0);
    }
  }
  Hyperparams hp;
  hp.n_factors = 5;
  hp.n_topics = {10};
  EXPECT_TRUE(validate(s.data, hp).empty());
}

TEST(Simulation, MaskHasTheDocumentedProperties) {
  const auto mask = factor_mask(ScenarioSpec{});
  ASSERT_EQ(mask.size(), 3u);
  for (int k = 0; k < 5; ++k) {
    EXPECT_TRUE(mask[0][k] || mask[1][k] || mask[2][k]) << k;
  }
  for (std::size_t v = 0; v < 3; ++v) {
    int off = 0;
    for (bool b : mask[v]) off += b ? 0 : 1;
    EXPECT_GT(off, 0);
    for (std::size_t u = v + 1; u < 3; ++u) EXPECT_NE(mask[u], mask[v]);
  }
  for (std::size_t v = 0; v < 2; ++v) {
    int shared = 0;
    for (int k = 0; k < 5; ++k) shared += (mask[v][k] && mask[2][k]) ? 1 : 0;
    EXPECT_GE(shared, 2);
  }
}

TEST(Simulation, InactiveFactorsHaveZeroLoadings) {
  const auto s = generate(small_spec(), 2);
  const auto mask = factor_mask(small_spec());
  for (std::size_t v = 0; v < 2; ++v) {
    for (int k = 0; k < 5; ++k) {
      if (!mask[v][k]) {
        EXPECT_EQ(s.truth.w[v].col(k).cwiseAbs().sum(), 0.0);
      }
    }
  }
  for (int k = 0; k < 5; ++k) {
    if (!mask[2][k]) {
      EXPECT_EQ(s.truth.structured[0].wbar.col(k).cwiseAbs().sum(), 0.0);
    }
  }
}

TEST(Simulation, SparsityZeroesActiveEntries) {
  ScenarioSpec spec = scenario(6, 3);
  spec.n_samples = 10;
  spec.sentences_per_doc = 2;
  const auto s = generate(spec, 5);
  const auto mask = factor_mask(spec);
  int active = 0;
  int zero = 0;
  for (int k = 0; k < 5; ++k) {
    if (!mask[0][k]) continue;
    active += 500;
    zero += static_cast<int>((s.truth.w[0].col(k).array() == 0.0).count());
  }
  EXPECT_EQ(zero, static_cast<int>(std::lround(0.7 * active)));
}

TEST(Simulation, ZeroLinkScaleRemovesTheLink) {
  ScenarioSpec spec = scenario(1, 0);
  spec.n_samples = 20;
  spec.sentences_per_doc = 3;
  const auto s = generate(spec, 7);
  EXPECT_EQ(s.truth.structured[0].mu_link, Matrix::Zero(20, 10));
}

TEST(Simulation, PopulationParameters) {
  const Matrix s0 = base_sigma0(4);
  Matrix expected(4, 4);
  expected << 5, 2.5, 0, 0,
              2.5, 5, 2.5, 0,
              0, 2.5, 5, 2.5,
              0, 0, 2.5, 5;
  EXPECT_EQ(s0, expected);
  const Vector mu = base_mu0(3);
  // log(1), log(2), log(3) scaled to sum one then centered.
  const double total = std::log(2.0) + std::log(3.0);
  Vector raw(3);
  raw << 0.0, std::log(2.0) / total, std::log(3.0) / total;
  raw.array() -= raw.mean();
  EXPECT_LT((mu - raw).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(mu.sum(), 0.0, 1e-15);
}

TEST(Simulation, EtaCovarianceMatchesSigma0WithoutTheLink) {
  ScenarioSpec spec = scenario(1, 0);
  spec.n_samples = 4000;
  spec.n_topics = 4;
  spec.sentences_per_doc = 1;
  spec.words_per_sentence = 1;
  const auto s = generate(spec, 8);
  const Matrix& eta = s.truth.structured[0].eta;
  const Matrix c = eta.rowwise() - eta.colwise().mean();
  const Matrix cov = c.transpose() * c / (eta.rows() - 1.0);
  EXPECT_LT((cov - base_sigma0(4)).cwiseAbs().maxCoeff(), 0.5);
}

TEST(Simulation, ScenarioTable) {
  EXPECT_EQ(scenario_levels(0), 1);
  EXPECT_EQ(scenario_levels(1), 4);
  EXPECT_EQ(scenario_levels(2), 2);
  EXPECT_EQ(scenario_levels(3), 2);
  EXPECT_EQ(scenario_levels(4), 4);
  EXPECT_EQ(scenario_levels(5), 2);
  EXPECT_EQ(scenario_levels(6), 4);
  EXPECT_EQ(scenario_levels(7), 0);
  EXPECT_EQ(scenario(1, 3).lambda_link, 2.0);
  EXPECT_EQ(scenario(2, 1).dirichlet_alpha, 10.0);
  EXPECT_EQ(scenario(3, 0).n_topics, 5);
  EXPECT_EQ(scenario(4, 0).lambda_mu0, 0.25);
  EXPECT_EQ(scenario(5, 1).lambda_sigma0, 0.6);
  EXPECT_EQ(scenario(6, 0).n_features, 500);
  EXPECT_THROW((void)scenario(2, 2), std::invalid_argument);
  EXPECT_THROW((void)scenario(9, 0), std::invalid_argument);
}

TEST(Simulation, RejectsBadSpecs) {
  ScenarioSpec spec;
  spec.n_samples = 0;
  EXPECT_THROW((void)generate(spec, 1), std::invalid_argument);
  spec = ScenarioSpec{};
  spec.feature_sparsity = 1.5;
  EXPECT_FALSE(check_spec(spec).empty());
}

}  // namespace
}  // namespace factm::sim
