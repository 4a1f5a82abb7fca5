#ifndef FACTM_CTM_ENGINE_HPP
#define FACTM_CTM_ENGINE_HPP

#include "factm/types.hpp"

namespace factm::ctm {

/// E[log beta_g] = digamma(alpha_g) - digamma(sum alpha) for one Dirichlet.
[[nodiscard]] Vector expected_log_beta(const Eigen::Ref<const Vector>& alpha);
/// Row-wise version for an L x G matrix of Dirichlet parameters.
[[nodiscard]] Matrix expected_log_beta_rows(const Matrix& topic_dirichlet);

/// Closed-form maximizer of the eta bound over zeta:
/// sum_l exp(mean_l + var_l / 2).
[[nodiscard]] double optimal_zeta(const Eigen::Ref<const Vector>& mean,
                                  const Eigen::Ref<const Vector>& var);

/// Everything the eta bound of one sample needs besides (mean, var, zeta).
struct EtaInputs {
  Vector link_mean;   // E[mu_n]; zero when the link is disabled
  Vector mu0;
  Matrix sigma0_inv;
  Vector phi_sum;     // sum_i phi_{n,i}
  double n_sentences = 0.0;
};

[[nodiscard]] EtaInputs eta_inputs(const StructuredViewState& view, const Matrix& sigma0_inv,
                                   int sample);

struct EtaObjective {
  double value = 0.0;
  Vector grad_mean;
  Vector grad_var;
};

/// Lower bound f(mean, var, zeta) on the eta-dependent ELBO terms of one
/// sample (constants dropped) and its analytic gradients.
[[nodiscard]] EtaObjective eta_objective(const Eigen::Ref<const Vector>& mean,
                                         const Eigen::Ref<const Vector>& var, double zeta,
                                         const EtaInputs& in);

struct EtaResult {
  Vector mean;
  Vector var;
  double zeta = 0.0;
  double value_before = 0.0;
  double value_after = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Maximizes f over (mean, log var) with zeta held at its closed form, which
/// makes every evaluation the zeta-profiled bound. The result never has a
/// lower f than the incoming (mean, var, zeta).
[[nodiscard]] EtaResult optimize_eta(const Eigen::Ref<const Vector>& mean,
                                     const Eigen::Ref<const Vector>& var, double zeta,
                                     const EtaInputs& in, int max_iters, double grad_tol);

/// Updates q(eta_n) and zeta_n for one sample. Returns false when the inner
/// optimizer stopped before meeting the gradient tolerance.
bool update_eta_sample(VariationalState& state, int view, int sample, const FitConfig& cfg);
/// All samples of one view; returns the number of non-converged samples.
int update_eta(VariationalState& state, int view, const FitConfig& cfg);

/// q(mu_n) for all samples of a view: shared covariance (tI + Sigma0^-1)^-1.
/// Throws NumericalError when Sigma0 is not positive definite.
void update_mu_link(VariationalState& state, const Hyperparams& hp, int view);

/// phi_{n,i} for every sentence of one sample.
void update_xi_sample(VariationalState& state, const Dataset& data, int view, int sample,
                      const Matrix& e_log_beta);
void update_xi(VariationalState& state, const Dataset& data, int view);

/// q(beta_l) = Dirichlet(alpha0 + sum_{n,i} phi_{n,i,l} y_{n,i,.}).
void update_beta(VariationalState& state, const Dataset& data, const Hyperparams& hp, int view);

/// Maximum-likelihood mu0 and Sigma0.
void update_population(VariationalState& state, int view);

/// Bound contribution of one structured view: link term (if enabled),
/// eta prior, zeta-bounded topic-assignment term, word likelihood, topic
/// prior and the entropies of q(mu), q(eta), q(xi), q(beta).
[[nodiscard]] double structured_elbo_terms(const VariationalState& state, const Dataset& data,
                                           const Hyperparams& hp, int view);

/// Cholesky-based inverse of an SPD matrix; throws NumericalError otherwise.
[[nodiscard]] Matrix spd_inverse(const Matrix& m);

}  // namespace factm::ctm

#endif  // FACTM_CTM_ENGINE_HPP
