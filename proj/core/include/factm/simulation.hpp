#ifndef FACTM_SIMULATION_HPP
#define FACTM_SIMULATION_HPP

#include "factm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace factm::sim {

struct ScenarioSpec {
  int n_samples = 250;
  int n_simple_views = 2;
  int n_structured_views = 1;
  int n_features = 10;
  int n_topics = 10;
  int n_factors = 5;
  int vocab_size = 100;
  int sentences_per_doc = 100;
  int words_per_sentence = 10;

  double lambda_link = 1.0;      // scales the link variable
  double dirichlet_alpha = 1.0;  // symmetric Dirichlet for the topics
  double lambda_mu0 = 0.0;       // scales the population mean
  double lambda_sigma0 = 1.0;    // scales the population covariance
  double feature_sparsity = 0.1;  // fraction of active loadings set to zero
};

[[nodiscard]] std::vector<std::string> check_spec(const ScenarioSpec& spec);

struct StructuredTruth {
  Matrix wbar;       // L x K
  Matrix mu_link;    // N x L
  Matrix eta;        // N x L
  std::vector<std::vector<int>> xi;  // per sample, topic of every sentence
  Matrix beta;       // L x G, rows on the simplex
  Vector mu0;        // L, already scaled by lambda_mu0
  Matrix sigma0;     // L x L, already scaled by lambda_sigma0
};

struct GroundTruth {
  Matrix z;                   // N x K
  std::vector<Matrix> w;      // per simple view, D x K
  std::vector<StructuredTruth> structured;
};

struct Simulated {
  Dataset data;
  GroundTruth truth;
};

/// Factor activity mask: entry (v, k) is true when factor k is active in
/// view v. Views are ordered simple first, then structured. For the default
/// layout (K = 5, two simple views, one structured view):
///
///            f0 f1 f2 f3 f4
///   view1     1  1  1  0  1
///   view2     1  1  0  1  0
///   text      1  0  1  1  0
///
/// Any other layout leaves every factor active in every view.
[[nodiscard]] std::vector<std::vector<bool>> factor_mask(const ScenarioSpec& spec);

/// Unscaled population mean used by the mu0 scenario: values evenly spaced
/// on [1, 3], log-transformed, scaled to sum to one, then centered.
[[nodiscard]] Vector base_mu0(int n_topics);

/// Tridiagonal population covariance with 5 on the diagonal and 2.5 next to it.
[[nodiscard]] Matrix base_sigma0(int n_topics);

/// Draws a dataset and its latent variables. Deterministic given the seed.
/// Throws std::invalid_argument for an invalid spec.
[[nodiscard]] Simulated generate(const ScenarioSpec& spec, std::uint64_t seed);

/// Number of levels of a scenario (0 for an unknown id).
[[nodiscard]] int scenario_levels(int id);

/// Baseline spec with one knob changed. Scenario 0 is the baseline itself
/// (single level). Throws std::invalid_argument for an unknown id or level.
///   1: lambda_link in {0, 0.5, 1.5, 2}
///   2: dirichlet_alpha in {5, 10}
///   3: n_topics in {5, 15}
///   4: lambda_mu0 in {0.25, 0.5, 0.75, 1}
///   5: lambda_sigma0 in {0.2, 0.6}
///   6: n_features = 500, feature_sparsity in {0.25, 0.4, 0.55, 0.7}
[[nodiscard]] ScenarioSpec scenario(int id, int level);

}  // namespace factm::sim

#endif  // FACTM_SIMULATION_HPP
