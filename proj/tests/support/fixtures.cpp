#include "fixtures.hpp"

#include "factm/inference.hpp"

#include <map>

namespace factm::testing {

Dataset random_dataset(const SmallShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> n_sent(shape.min_sentences, shape.max_sentences);
  std::uniform_real_distribution<double> weight(0.25, 2.0);

  Dataset data;
  data.n_samples = shape.n_samples;
  for (int i = 0; i < shape.n_samples; ++i) data.sample_ids.push_back("s" + std::to_string(i));

  // A shared two-dimensional signal keeps the views correlated.
  Matrix signal(shape.n_samples, 2);
  for (int i = 0; i < shape.n_samples; ++i) {
    signal(i, 0) = normal(rng);
    signal(i, 1) = normal(rng);
  }
  for (std::size_t m = 0; m < shape.simple_dims.size(); ++m) {
    SimpleView v;
    v.name = "view" + std::to_string(m);
    const int d = shape.simple_dims[m];
    Matrix w(d, 2);
    for (int r = 0; r < d; ++r) {
      w(r, 0) = normal(rng);
      w(r, 1) = normal(rng);
      v.feature_names.push_back("f" + std::to_string(r));
    }
    v.data = signal * w.transpose();
    for (int i = 0; i < shape.n_samples; ++i) {
      for (int r = 0; r < d; ++r) v.data(i, r) += 0.5 * normal(rng);
    }
    data.simple_views.push_back(std::move(v));
  }
  for (std::size_t s = 0; s < shape.vocab_sizes.size(); ++s) {
    StructuredView v;
    v.name = "text" + std::to_string(s);
    v.vocab_size = shape.vocab_sizes[s];
    std::uniform_int_distribution<int> word(0, v.vocab_size - 1);
    for (int i = 0; i < shape.n_samples; ++i) {
      Document doc;
      const int sentences = n_sent(rng);
      for (int j = 0; j < sentences; ++j) {
        std::map<int, double> counts;
        for (int w = 0; w < shape.words_per_sentence; ++w) {
          counts[word(rng)] += shape.fractional_counts ? weight(rng) : 1.0;
        }
        Sentence sentence;
        for (const auto& [index, count] : counts) sentence.push_back({index, count});
        doc.push_back(std::move(sentence));
      }
      v.documents.push_back(std::move(doc));
    }
    data.structured_views.push_back(std::move(v));
  }
  return data;
}

Hyperparams small_hyperparams(int n_factors, std::vector<int> n_topics) {
  Hyperparams hp;
  hp.n_factors = n_factors;
  hp.n_topics = std::move(n_topics);
  return hp;
}

VariationalState warmed_state(const Dataset& data, const Hyperparams& hp, std::uint64_t seed,
                              int sweeps) {
  VariationalState state = initialize(data, hp, seed);
  FitConfig cfg;
  cfg.inner_opt_max_iters = 50;
  for (int s = 0; s < sweeps; ++s) {
    for (Phase p : cfg.update_schedule) run_phase(state, data, hp, cfg, p);
  }
  return state;
}

double central_difference(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

Matrix random_orthogonal(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(k, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix random_spd(int k, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const Matrix q = random_orthogonal(k, rng);
  Vector eig(k);
  for (int i = 0; i < k; ++i) eig(i) = u(rng);
  Matrix s = q * eig.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace factm::testing
