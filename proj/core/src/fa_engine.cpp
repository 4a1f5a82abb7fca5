#include "factm/fa_engine.hpp"

#include "factm/special.hpp"

#include <cassert>
#include <cmath>

namespace factm::fa {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + what);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Spike-and-slab contribution of one (d, k) entry, excluding the likelihood.
double spike_slab_terms(double gamma, double mean, double var, double e_log_theta,
                        double e_log_1m_theta, double e_alpha, double e_log_alpha) {
  double v = gamma * e_log_theta + (1.0 - gamma) * e_log_1m_theta;
  v -= xlogx(gamma) + xlogx(1.0 - gamma);
  if (gamma > 0.0) {
    v += gamma * (0.5 * e_log_alpha - 0.5 * e_alpha * (mean * mean + var) +
                  0.5 * std::log(var) + 0.5);
  }
  return v;
}

}  // namespace

void update_z_factor(VariationalState& state, const Dataset& data, const Hyperparams& hp,
                     int k) {
  const int n = state.n_samples();
  double precision = 1.0;
  Vector numerator = Vector::Zero(n);

  for (std::size_t m = 0; m < state.simple.size(); ++m) {
    const auto& view = state.simple[m];
    const Matrix& y = data.simple_views[m].data;
    const Matrix w_mean = view.loading_mean();
    const Vector tau = view.tau_mean();
    const Vector w2 = view.loading_second_moment().col(k);
    const Vector tw = tau.cwiseProduct(w_mean.col(k));
    precision += tau.dot(w2);
    // Residual excluding factor k, projected on tau * w_k.
    numerator += y * tw - state.z_mean * (w_mean.transpose() * tw) +
                 state.z_mean.col(k) * w_mean.col(k).dot(tw);
  }

  if (hp.link_enabled) {
    const double t = hp.link_precision;
    for (const auto& view : state.structured) {
      const Vector wk = view.wbar_mean.col(k);
      precision += t * view.wbar_second_moment().col(k).sum();
      numerator += t * (view.link_mean * wk - state.z_mean * (view.wbar_mean.transpose() * wk) +
                        state.z_mean.col(k) * wk.squaredNorm());
    }
  }

  const double var = 1.0 / precision;
  state.z_var.col(k).setConstant(var);
  state.z_mean.col(k) = var * numerator;
  require_finite(state.z_mean, "q(z) means");
}

void update_z(VariationalState& state, const Dataset& data, const Hyperparams& hp) {
  for (int k = 0; k < state.n_factors(); ++k) update_z_factor(state, data, hp, k);
}

void update_w_factor(VariationalState& state, const Dataset& data, const Hyperparams& hp,
                     int view_index, int k) {
  (void)hp;
  auto& view = state.simple[view_index];
  const Matrix& y = data.simple_views[view_index].data;
  const Vector tau = view.tau_mean();
  const Matrix w_mean = view.loading_mean();

  const Vector zk = state.z_mean.col(k);
  const double szz = state.z_var.col(k).sum() + zk.squaredNorm();
  const Vector ztz = state.z_mean.transpose() * zk;
  // r_d = sum_n E[z_nk] (y_nd - sum_{k' != k} E[w_dk'] E[z_nk'])
  const Vector r = y.transpose() * zk - w_mean * ztz + w_mean.col(k) * ztz(k);

  const double e_alpha = view.alpha_shape(k) / view.alpha_rate(k);
  const double e_log_alpha = gamma_log_mean(view.alpha_shape(k), view.alpha_rate(k));
  // E[log theta] - E[log(1 - theta)]; the digamma of a + b cancels.
  const double log_odds_prior = digamma(view.theta_a(k)) - digamma(view.theta_b(k));

  for (Eigen::Index d = 0; d < y.cols(); ++d) {
    const double precision = tau(d) * szz + e_alpha;
    assert(precision > 0.0);
    const double var = 1.0 / precision;
    const double mean = var * tau(d) * r(d);
    const double logit = log_odds_prior + 0.5 * mean * mean / var + 0.5 * std::log(var) +
                         0.5 * e_log_alpha;
    view.slab_var(d, k) = var;
    view.slab_mean(d, k) = mean;
    view.incl_prob(d, k) = sigmoid(logit);
  }
  require_finite(view.slab_mean, "q(w) slab means");
}

void update_w(VariationalState& state, const Dataset& data, const Hyperparams& hp, int view) {
  for (int k = 0; k < state.n_factors(); ++k) update_w_factor(state, data, hp, view, k);
}

void update_alpha(VariationalState& state, const Hyperparams& hp, int view_index) {
  auto& view = state.simple[view_index];
  const Matrix w2 = view.loading_second_moment();
  for (Eigen::Index k = 0; k < w2.cols(); ++k) {
    view.alpha_shape(k) = hp.a0_alpha + 0.5 * view.incl_prob.col(k).sum();
    view.alpha_rate(k) = hp.b0_alpha + 0.5 * w2.col(k).sum();
  }
}

void update_theta(VariationalState& state, const Hyperparams& hp, int view_index) {
  auto& view = state.simple[view_index];
  const double d = static_cast<double>(view.incl_prob.rows());
  for (Eigen::Index k = 0; k < view.incl_prob.cols(); ++k) {
    const double included = view.incl_prob.col(k).sum();
    view.theta_a(k) = hp.a0_theta + included;
    view.theta_b(k) = hp.b0_theta + d - included;
  }
}

void update_tau(VariationalState& state, const Dataset& data, const Hyperparams& hp,
                int view_index) {
  auto& view = state.simple[view_index];
  const Vector residual = expected_sq_residual(state, data, view_index);
  const double shape = hp.a0_tau + 0.5 * state.n_samples();
  view.tau_shape.setConstant(shape);
  view.tau_rate = (hp.b0_tau + 0.5 * residual.array()).matrix();
  require_finite(view.tau_rate, "q(tau) rates");
}

void update_alphabar(VariationalState& state, const Hyperparams& hp, int view_index) {
  auto& view = state.structured[view_index];
  const Matrix w2 = view.wbar_second_moment();
  const double l = static_cast<double>(w2.rows());
  for (Eigen::Index k = 0; k < w2.cols(); ++k) {
    view.alphabar_shape(k) = hp.a0_alphabar + 0.5 * l;
    view.alphabar_rate(k) = hp.b0_alphabar + 0.5 * w2.col(k).sum();
  }
}

void update_conjugates(VariationalState& state, const Dataset& data, const Hyperparams& hp) {
  for (int m = 0; m < static_cast<int>(state.simple.size()); ++m) {
    update_alpha(state, hp, m);
    update_theta(state, hp, m);
    update_tau(state, data, hp, m);
  }
  if (hp.link_enabled) {
    for (int s = 0; s < static_cast<int>(state.structured.size()); ++s) {
      update_alphabar(state, hp, s);
    }
  }
}

void update_wbar_factor(VariationalState& state, const Hyperparams& hp, int view_index, int k) {
  auto& view = state.structured[view_index];
  const double t = hp.link_precision;
  const Vector zk = state.z_mean.col(k);
  const double szz = state.z_var.col(k).sum() + zk.squaredNorm();
  const Vector ztz = state.z_mean.transpose() * zk;
  const Vector r = view.link_mean.transpose() * zk - view.wbar_mean * ztz +
                   view.wbar_mean.col(k) * ztz(k);
  const double e_alphabar = view.alphabar_shape(k) / view.alphabar_rate(k);
  const double var = 1.0 / (t * szz + e_alphabar);
  view.wbar_var.col(k).setConstant(var);
  view.wbar_mean.col(k) = (t * var) * r;
  require_finite(view.wbar_mean, "q(wbar) means");
}

void update_wbar(VariationalState& state, const Hyperparams& hp, int view) {
  if (!hp.link_enabled) return;
  for (int k = 0; k < state.n_factors(); ++k) update_wbar_factor(state, hp, view, k);
}

Vector expected_sq_residual(const VariationalState& state, const Dataset& data, int view_index) {
  const auto& view = state.simple[view_index];
  const Matrix& y = data.simple_views[view_index].data;
  const Matrix w_mean = view.loading_mean();
  const Matrix w2 = view.loading_second_moment();
  const Vector z2_sum = state.z_second_moment().colwise().sum().transpose();
  const Vector zm2_sum = state.z_mean.cwiseAbs2().colwise().sum().transpose();
  const Matrix residual = y - state.z_mean * w_mean.transpose();
  return residual.cwiseAbs2().colwise().sum().transpose() + w2 * z2_sum -
         w_mean.cwiseAbs2() * zm2_sum;
}

double expected_link_sq_residual(const VariationalState& state, int view_index) {
  const auto& view = state.structured[view_index];
  const Matrix residual = view.link_mean - state.z_mean * view.wbar_mean.transpose();
  const Vector z2_sum = state.z_second_moment().colwise().sum().transpose();
  const Vector zm2_sum = state.z_mean.cwiseAbs2().colwise().sum().transpose();
  const double n = static_cast<double>(state.n_samples());
  return residual.squaredNorm() + n * view.link_cov.trace() +
         (view.wbar_second_moment() * z2_sum).sum() -
         (view.wbar_mean.cwiseAbs2() * zm2_sum).sum();
}

double wbar_elbo_terms(const VariationalState& state, const Hyperparams& hp, int view_index) {
  if (!hp.link_enabled) return 0.0;
  const auto& view = state.structured[view_index];
  const Matrix w2 = view.wbar_second_moment();
  double total = 0.0;
  for (Eigen::Index k = 0; k < w2.cols(); ++k) {
    const double a = view.alphabar_shape(k);
    const double b = view.alphabar_rate(k);
    const double e_alpha = a / b;
    const double e_log_alpha = gamma_log_mean(a, b);
    for (Eigen::Index l = 0; l < w2.rows(); ++l) {
      // prior N(0, 1/alphabar) + entropy of N(mean, var); log(2 pi) cancels
      total += 0.5 * e_log_alpha - 0.5 * e_alpha * w2(l, k) + 0.5 * std::log(view.wbar_var(l, k)) +
               0.5;
    }
    total += gamma_expected_log_density(hp.a0_alphabar, hp.b0_alphabar, a, b) +
             gamma_entropy(a, b);
  }
  return total;
}

double fa_elbo_terms(const VariationalState& state, const Dataset& data, const Hyperparams& hp) {
  double total = 0.0;

  // z: standard normal prior + Gaussian entropy
  for (Eigen::Index k = 0; k < state.z_mean.cols(); ++k) {
    for (Eigen::Index n = 0; n < state.z_mean.rows(); ++n) {
      const double var = state.z_var(n, k);
      const double mean = state.z_mean(n, k);
      total += -0.5 * (mean * mean + var) + 0.5 * std::log(var) + 0.5;
    }
  }

  const double n = static_cast<double>(state.n_samples());
  for (std::size_t m = 0; m < state.simple.size(); ++m) {
    const auto& view = state.simple[m];
    const Vector residual = expected_sq_residual(state, data, static_cast<int>(m));
    for (Eigen::Index d = 0; d < residual.size(); ++d) {
      const double a = view.tau_shape(d);
      const double b = view.tau_rate(d);
      total += n * 0.5 * (gamma_log_mean(a, b) - kLog2Pi) - 0.5 * (a / b) * residual(d);
      total += gamma_expected_log_density(hp.a0_tau, hp.b0_tau, a, b) + gamma_entropy(a, b);
    }
    for (Eigen::Index k = 0; k < view.incl_prob.cols(); ++k) {
      const double ta = view.theta_a(k);
      const double tb = view.theta_b(k);
      const double psi_ab = digamma(ta + tb);
      const double e_log_theta = digamma(ta) - psi_ab;
      const double e_log_1m_theta = digamma(tb) - psi_ab;
      const double aa = view.alpha_shape(k);
      const double ab = view.alpha_rate(k);
      const double e_alpha = aa / ab;
      const double e_log_alpha = gamma_log_mean(aa, ab);
      for (Eigen::Index d = 0; d < view.incl_prob.rows(); ++d) {
        total += spike_slab_terms(view.incl_prob(d, k), view.slab_mean(d, k), view.slab_var(d, k),
                                  e_log_theta, e_log_1m_theta, e_alpha, e_log_alpha);
      }
      total += gamma_expected_log_density(hp.a0_alpha, hp.b0_alpha, aa, ab) +
               gamma_entropy(aa, ab);
      total += beta_expected_log_density(hp.a0_theta, hp.b0_theta, ta, tb) +
               beta_entropy(ta, tb);
    }
  }

  for (std::size_t s = 0; s < state.structured.size(); ++s) {
    total += wbar_elbo_terms(state, hp, static_cast<int>(s));
  }
  return total;
}

}  // namespace factm::fa
