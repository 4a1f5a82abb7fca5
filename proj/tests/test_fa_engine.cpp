#include "factm/fa_engine.hpp"

#include "factm/inference.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

namespace factm {
namespace {

struct Fixture {
  Dataset data;
  Hyperparams hp;
  VariationalState state;
};

Fixture make(std::uint64_t seed, bool link = true) {
  testing::SmallShape shape;
  shape.simple_dims = {5, 4};
  Fixture f;
  f.data = testing::random_dataset(shape, seed);
  f.hp = testing::small_hyperparams(3, {3});
  f.hp.link_enabled = link;
  f.state = testing::warmed_state(f.data, f.hp, seed, 2);
  return f;
}

TEST(FaEngine, ExpectedResidualMatchesMonteCarlo) {
  Fixture f = make(1);
  const Vector analytic = fa::expected_sq_residual(f.state, f.data, 0);

  // Sample z and w from q and average the squared residual.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto& sv = f.state.simple[0];
  const Matrix& y = f.data.simple_views[0].data;
  Vector total = Vector::Zero(y.cols());
  const int draws = 40000;
  for (int t = 0; t < draws; ++t) {
    Matrix z = f.state.z_mean;
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] += std::sqrt(f.state.z_var.data()[i]) * normal(rng);
    Matrix w(sv.slab_mean.rows(), sv.slab_mean.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const bool on = uniform(rng) < sv.incl_prob.data()[i];
      w.data()[i] = on ? sv.slab_mean.data()[i] + std::sqrt(sv.slab_var.data()[i]) * normal(rng) : 0.0;
    }
    total += (y - z * w.transpose()).cwiseAbs2().colwise().sum().transpose();
  }
  total /= draws;
  for (Eigen::Index d = 0; d < total.size(); ++d) {
    EXPECT_NEAR(total(d), analytic(d), 0.02 * analytic(d)) << d;
  }
}

TEST(FaEngine, ZUpdateMaximizesOverAGrid) {
  Fixture f = make(2);
  fa::update_z_factor(f.state, f.data, f.hp, 1);
  const double best = compute_elbo(f.state, f.data, f.hp);
  for (double delta : {-0.1, -0.01, 0.01, 0.1}) {
    VariationalState s = f.state;
    s.z_mean(3, 1) += delta;
    EXPECT_LT(compute_elbo(s, f.data, f.hp), best);
    s = f.state;
    s.z_var(3, 1) *= std::exp(delta);
    EXPECT_LT(compute_elbo(s, f.data, f.hp), best);
  }
}

TEST(FaEngine, SpikeSlabUpdateBeatsEveryInclusionProbability) {
  Fixture f = make(3);
  fa::update_w_factor(f.state, f.data, f.hp, 0, 0);
  const double best = compute_elbo(f.state, f.data, f.hp);
  for (double g : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    VariationalState s = f.state;
    s.simple[0].incl_prob(2, 0) = g;
    EXPECT_LE(compute_elbo(s, f.data, f.hp), best + 1e-9);
  }
}

TEST(FaEngine, ConjugateUpdatesUsePosteriorCounts) {
  Fixture f = make(4);
  fa::update_conjugates(f.state, f.data, f.hp);
  const auto& sv = f.state.simple[0];
  const double d = static_cast<double>(sv.incl_prob.rows());
  for (Eigen::Index k = 0; k < sv.incl_prob.cols(); ++k) {
    const double on = sv.incl_prob.col(k).sum();
    EXPECT_DOUBLE_EQ(sv.theta_a(k), f.hp.a0_theta + on);
    EXPECT_DOUBLE_EQ(sv.theta_b(k), f.hp.b0_theta + d - on);
    EXPECT_DOUBLE_EQ(sv.alpha_shape(k), f.hp.a0_alpha + 0.5 * on);
  }
  EXPECT_DOUBLE_EQ(sv.tau_shape(0), f.hp.a0_tau + 0.5 * f.data.n_samples);
  const auto& st = f.state.structured[0];
  EXPECT_DOUBLE_EQ(st.alphabar_shape(0), f.hp.a0_alphabar + 0.5 * st.wbar_mean.rows());
}

TEST(FaEngine, WbarIsFrozenWithoutTheLink) {
  Fixture f = make(5, false);
  const Matrix before = f.state.structured[0].wbar_mean;
  fa::update_wbar(f.state, f.hp, 0);
  EXPECT_EQ(f.state.structured[0].wbar_mean, before);
}

TEST(FaEngine, ZIgnoresStructuredViewsWithoutTheLink) {
  Fixture f = make(6, false);
  Fixture g = f;
  g.state.structured[0].wbar_mean.setRandom();
  fa::update_z(f.state, f.data, f.hp);
  fa::update_z(g.state, g.data, g.hp);
  EXPECT_EQ(f.state.z_mean, g.state.z_mean);
}

}  // namespace
}  // namespace factm
