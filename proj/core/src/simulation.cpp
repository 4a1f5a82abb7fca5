#include "factm/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace factm::sim {

namespace {

using Rng = std::mt19937_64;

Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Vector dirichlet(Rng& rng, int size, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Vector v(size);
  for (int i = 0; i < size; ++i) v(i) = gamma(rng);
  return v / v.sum();
}

int categorical(Rng& rng, const Vector& probs) {
  std::discrete_distribution<int> dist(probs.data(), probs.data() + probs.size());
  return dist(rng);
}

std::string padded(const std::string& prefix, int i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

}  // namespace

std::vector<std::string> check_spec(const ScenarioSpec& spec) {
  std::vector<std::string> out;
  const auto positive = [&](int v, const char* name) {
    if (v < 1) out.push_back(std::string(name) + " must be at least 1");
  };
  positive(spec.n_samples, "n_samples");
  positive(spec.n_features, "n_features");
  positive(spec.n_topics, "n_topics");
  positive(spec.n_factors, "n_factors");
  positive(spec.vocab_size, "vocab_size");
  positive(spec.sentences_per_doc, "sentences_per_doc");
  positive(spec.words_per_sentence, "words_per_sentence");
  if (spec.n_simple_views < 0) out.push_back("n_simple_views must be non-negative");
  if (spec.n_structured_views < 0) out.push_back("n_structured_views must be non-negative");
  if (spec.n_simple_views + spec.n_structured_views < 1) out.push_back("no views");
  if (!(spec.feature_sparsity >= 0.0 && spec.feature_sparsity <= 1.0))
    out.push_back("feature_sparsity must be in [0, 1]");
  if (!(spec.dirichlet_alpha > 0.0)) out.push_back("dirichlet_alpha must be positive");
  if (!(spec.lambda_sigma0 > 0.0)) out.push_back("lambda_sigma0 must be positive");
  if (!std::isfinite(spec.lambda_link) || !std::isfinite(spec.lambda_mu0))
    out.push_back("scaling factors must be finite");
  return out;
}

std::vector<std::vector<bool>> factor_mask(const ScenarioSpec& spec) {
  const int views = spec.n_simple_views + spec.n_structured_views;
  if (spec.n_factors == 5 && spec.n_simple_views == 2 && spec.n_structured_views == 1) {
    return {{true, true, true, false, true},
            {true, true, false, true, false},
            {true, false, true, true, false}};
  }
  return std::vector<std::vector<bool>>(static_cast<std::size_t>(views),
                                        std::vector<bool>(spec.n_factors, true));
}

Vector base_mu0(int n_topics) {
  Vector v = n_topics == 1 ? Vector::Constant(1, 1.0)
                           : Vector(Vector::LinSpaced(n_topics, 1.0, 3.0));
  v = v.array().log();
  v /= v.sum();
  v.array() -= v.mean();
  return v;
}

Matrix base_sigma0(int n_topics) {
  Matrix s = Matrix::Zero(n_topics, n_topics);
  for (int l = 0; l < n_topics; ++l) {
    s(l, l) = 5.0;
    if (l + 1 < n_topics) s(l, l + 1) = s(l + 1, l) = 2.5;
  }
  return s;
}

Simulated generate(const ScenarioSpec& spec, std::uint64_t seed) {
  if (const auto problems = check_spec(spec); !problems.empty()) {
    throw std::invalid_argument("invalid scenario: " + problems.front());
  }
  Rng rng(seed);
  const int n = spec.n_samples;
  const int k = spec.n_factors;
  const auto mask = factor_mask(spec);

  Simulated out;
  Dataset& data = out.data;
  GroundTruth& truth = out.truth;
  data.n_samples = n;
  for (int i = 0; i < n; ++i) data.sample_ids.push_back(padded("sample", i, 3));

  truth.z = standard_normal(rng, n, k);

  for (int m = 0; m < spec.n_simple_views; ++m) {
    Matrix w = standard_normal(rng, spec.n_features, k);
    std::vector<Eigen::Index> active;
    for (int j = 0; j < k; ++j) {
      if (!mask[m][j]) {
        w.col(j).setZero();
        continue;
      }
      for (Eigen::Index d = 0; d < w.rows(); ++d) active.push_back(j * w.rows() + d);
    }
    const auto n_zero = static_cast<std::size_t>(
        std::llround(spec.feature_sparsity * static_cast<double>(active.size())));
    std::shuffle(active.begin(), active.end(), rng);
    for (std::size_t i = 0; i < n_zero; ++i) w.data()[active[i]] = 0.0;

    SimpleView view;
    view.name = "view" + std::to_string(m + 1);
    for (int d = 0; d < spec.n_features; ++d) view.feature_names.push_back(padded("f", d, 3));
    view.data = truth.z * w.transpose() + standard_normal(rng, n, spec.n_features);
    data.simple_views.push_back(std::move(view));
    truth.w.push_back(std::move(w));
  }

  for (int s = 0; s < spec.n_structured_views; ++s) {
    const int l = spec.n_topics;
    const int g = spec.vocab_size;
    StructuredTruth st;
    st.wbar = standard_normal(rng, l, k);
    for (int j = 0; j < k; ++j) {
      if (!mask[spec.n_simple_views + s][j]) st.wbar.col(j).setZero();
    }
    st.mu_link = spec.lambda_link * (truth.z * st.wbar.transpose() + standard_normal(rng, n, l));
    st.mu0 = spec.lambda_mu0 * base_mu0(l);
    st.sigma0 = spec.lambda_sigma0 * base_sigma0(l);
    const Matrix chol = Eigen::LLT<Matrix>(st.sigma0).matrixL();
    st.eta = (standard_normal(rng, n, l) * chol.transpose()).rowwise() + st.mu0.transpose();
    st.eta += st.mu_link;

    st.beta.resize(l, g);
    for (int t = 0; t < l; ++t) st.beta.row(t) = dirichlet(rng, g, spec.dirichlet_alpha).transpose();

    StructuredView view;
    view.name = spec.n_structured_views == 1 ? "text" : "text" + std::to_string(s + 1);
    view.vocab_size = g;
    view.documents.resize(n);
    st.xi.resize(n);
    for (int i = 0; i < n; ++i) {
      Vector theta = st.eta.row(i).transpose();
      theta = (theta.array() - theta.maxCoeff()).exp();
      theta /= theta.sum();
      Document& doc = view.documents[i];
      for (int sent = 0; sent < spec.sentences_per_doc; ++sent) {
        const int topic = categorical(rng, theta);
        st.xi[i].push_back(topic);
        const Vector probs = st.beta.row(topic).transpose();
        std::map<int, double> counts;
        for (int word = 0; word < spec.words_per_sentence; ++word) counts[categorical(rng, probs)] += 1.0;
        Sentence sentence;
        for (const auto& [index, count] : counts) sentence.push_back({index, count});
        doc.push_back(std::move(sentence));
      }
    }
    data.structured_views.push_back(std::move(view));
    truth.structured.push_back(std::move(st));
  }
  return out;
}

int scenario_levels(int id) {
  switch (id) {
    case 0: return 1;
    case 1: return 4;
    case 2: return 2;
    case 3: return 2;
    case 4: return 4;
    case 5: return 2;
    case 6: return 4;
    default: return 0;
  }
}

ScenarioSpec scenario(int id, int level) {
  const int levels = scenario_levels(id);
  if (levels == 0) throw std::invalid_argument("unknown scenario " + std::to_string(id));
  if (level < 0 || level >= levels) {
    throw std::invalid_argument("scenario " + std::to_string(id) + " has levels 0.." +
                                std::to_string(levels - 1));
  }
  ScenarioSpec spec;
  const auto idx = static_cast<std::size_t>(level);
  switch (id) {
    case 1: spec.lambda_link = std::array{0.0, 0.5, 1.5, 2.0}[idx]; break;
    case 2: spec.dirichlet_alpha = std::array{5.0, 10.0}[idx]; break;
    case 3: spec.n_topics = std::array{5, 15}[idx]; break;
    case 4: spec.lambda_mu0 = std::array{0.25, 0.5, 0.75, 1.0}[idx]; break;
    case 5: spec.lambda_sigma0 = std::array{0.2, 0.6}[idx]; break;
    case 6:
      spec.n_features = 500;
      spec.feature_sparsity = std::array{0.25, 0.4, 0.55, 0.7}[idx];
      break;
    default: break;
  }
  return spec;
}

}  // namespace factm::sim
