#ifndef FACTM_TESTS_FIXTURES_HPP
#define FACTM_TESTS_FIXTURES_HPP

#include "factm/types.hpp"

#include <cstdint>
#include <functional>
#include <random>

namespace factm::testing {

struct SmallShape {
  int n_samples = 20;
  std::vector<int> simple_dims = {5};
  std::vector<int> vocab_sizes = {8};
  int min_sentences = 2;
  int max_sentences = 5;
  int words_per_sentence = 4;
  bool fractional_counts = false;
};

/// Random dataset with Gaussian simple views and sparse count sentences.
Dataset random_dataset(const SmallShape& shape, std::uint64_t seed);

Hyperparams small_hyperparams(int n_factors, std::vector<int> n_topics);

/// Initialization followed by `sweeps` passes of the default schedule, so
/// that every block sits at a generic point.
VariationalState warmed_state(const Dataset& data, const Hyperparams& hp, std::uint64_t seed,
                              int sweeps);

/// Central finite difference of f at 0.
double central_difference(const std::function<double(double)>& f, double h = 1e-5);

/// Haar-distributed orthogonal matrix.
Matrix random_orthogonal(int k, std::mt19937_64& rng);

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
Matrix random_spd(int k, std::mt19937_64& rng, double lo = 0.5, double hi = 3.0);

}  // namespace factm::testing

#endif  // FACTM_TESTS_FIXTURES_HPP
