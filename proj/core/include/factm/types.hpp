#ifndef FACTM_TYPES_HPP
#define FACTM_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace factm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Input data or hyperparameters violate a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite or otherwise unusable intermediate appeared during inference.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

/// One nonzero entry of a sentence: vocabulary index and its (possibly
/// fractional) count.
struct Token {
  int index = 0;
  double count = 0.0;
};

/// A data point of a structured view. Tokens are sorted by index with no
/// duplicates.
using Sentence = std::vector<Token>;
using Document = std::vector<Sentence>;

struct SimpleView {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix data;  // N x D
};

struct StructuredView {
  std::string name;
  int vocab_size = 0;
  std::vector<Document> documents;  // one per sample

  /// Total number of sentences over all samples.
  [[nodiscard]] std::size_t sentence_count() const;
};

struct Dataset {
  int n_samples = 0;
  std::vector<std::string> sample_ids;
  std::vector<SimpleView> simple_views;
  std::vector<StructuredView> structured_views;
};

// ---------------------------------------------------------------------------
// Model hyperparameters
// ---------------------------------------------------------------------------

struct Hyperparams {
  int n_factors = 5;
  std::vector<int> n_topics;  // one entry per structured view

  double link_precision = 1.0;  // t
  double a0_alpha = 1e-3;
  double b0_alpha = 1e-3;
  double a0_theta = 1.0;
  double b0_theta = 1.0;
  double a0_tau = 1e-3;
  double b0_tau = 1e-3;
  double a0_alphabar = 1e-3;
  double b0_alphabar = 1e-3;
  double alpha0_beta = 1.0;

  /// When false the link variable is removed from the model: every
  /// structured view becomes a standalone correlated topic model and the
  /// factors are informed by the simple views only.
  bool link_enabled = true;
};

// ---------------------------------------------------------------------------
// Variational state
// ---------------------------------------------------------------------------

/// q(w~, s) for one simple view stored as the conditional slab: inclusion
/// probability, slab mean and slab variance. Plus the conjugate blocks
/// q(alpha), q(theta) and q(tau) of the same view.
struct SimpleViewState {
  Matrix incl_prob;  // D x K
  Matrix slab_mean;  // D x K
  Matrix slab_var;   // D x K
  Vector alpha_shape, alpha_rate;  // K
  Vector theta_a, theta_b;         // K
  Vector tau_shape, tau_rate;      // D

  /// E[w] = gamma * mu
  [[nodiscard]] Matrix loading_mean() const;
  /// E[w^2] = gamma * (mu^2 + sigma^2)
  [[nodiscard]] Matrix loading_second_moment() const;
  [[nodiscard]] Vector tau_mean() const;
  [[nodiscard]] Vector alpha_mean() const;
};

struct StructuredViewState {
  Matrix wbar_mean;  // L x K
  Matrix wbar_var;   // L x K
  Vector alphabar_shape, alphabar_rate;  // K

  Matrix link_mean;  // N x L
  Matrix link_cov;   // L x L, shared by all samples

  Matrix eta_mean;  // N x L
  Matrix eta_var;   // N x L
  Vector zeta;      // N

  std::vector<Matrix> phi;  // per sample: I_n x L, rows on the simplex
  Matrix topic_dirichlet;   // L x G

  Vector mu0;      // L
  Matrix sigma0;   // L x L

  [[nodiscard]] int n_topics() const { return static_cast<int>(mu0.size()); }
  [[nodiscard]] Matrix wbar_second_moment() const;
  [[nodiscard]] Vector alphabar_mean() const;
};

struct VariationalState {
  Matrix z_mean;  // N x K
  Matrix z_var;   // N x K
  std::vector<SimpleViewState> simple;
  std::vector<StructuredViewState> structured;

  [[nodiscard]] int n_samples() const { return static_cast<int>(z_mean.rows()); }
  [[nodiscard]] int n_factors() const { return static_cast<int>(z_mean.cols()); }
  [[nodiscard]] Matrix z_second_moment() const;
};

// ---------------------------------------------------------------------------
// Fitting configuration and report
// ---------------------------------------------------------------------------

enum class Phase { xi, eta, mu_link, beta, population, w, conjugates, z, wbar };

[[nodiscard]] std::string_view phase_name(Phase phase);
/// Throws std::invalid_argument for an unknown name.
[[nodiscard]] Phase parse_phase(std::string_view name);
[[nodiscard]] std::vector<Phase> default_schedule();

struct FitConfig {
  int max_sweeps = 500;
  double elbo_rel_tol = 1e-6;
  int inner_opt_max_iters = 25;
  double inner_opt_grad_tol = 1e-6;
  std::uint64_t seed = 0;
  int n_restarts = 1;
  std::vector<Phase> update_schedule = default_schedule();

  /// Scale of the positive noise added to the topic Dirichlets at
  /// initialization, relative to the average count mass per (topic, word).
  double init_topic_noise = 1.0;
  /// Record the ELBO after every phase, not only after every sweep.
  bool record_phase_elbo = false;
  /// Worker threads for per-sample updates; 0 means all cores.
  int threads = 0;
};

struct ElboPoint {
  int sweep = 0;
  double elbo = 0.0;
};

struct PhaseElbo {
  int sweep = 0;
  Phase phase = Phase::xi;
  double elbo = 0.0;
};

struct FitReport {
  std::vector<ElboPoint> elbo_trace;
  std::vector<PhaseElbo> phase_trace;
  bool converged = false;
  int sweeps_used = 0;
  std::vector<int> factor_order;
  Matrix variance_explained;  // (simple views + structured views) x K
  std::vector<double> wall_time_per_sweep;
  int eta_nonconverged = 0;
  int best_restart = 0;
  std::vector<double> restart_elbos;
};

}  // namespace factm

#endif  // FACTM_TYPES_HPP
