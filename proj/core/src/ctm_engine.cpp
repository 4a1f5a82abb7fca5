#include "factm/ctm_engine.hpp"

#include "factm/fa_engine.hpp"
#include "factm/lbfgs.hpp"
#include "factm/special.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace factm::ctm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Shifted evaluation of sum_l exp(mean_l + var_l / 2) / zeta.
double scaled_exp_sum(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& var,
                      double zeta, Vector* terms) {
  const Vector a = mean + 0.5 * var;
  const double lse = log_sum_exp(a);
  const double log_zeta = std::log(zeta);
  if (terms) *terms = (a.array() - log_zeta).exp().matrix();
  return std::exp(lse - log_zeta);
}

// Reductions below are plain loops with a fixed summation order so that
// results do not depend on how Eigen vectorizes a build.
double dot(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a(i) * b(i);
  return s;
}

Vector sym_times(const Matrix& p, const Vector& d) {
  Vector out(d.size());
  for (Eigen::Index l = 0; l < d.size(); ++l) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < d.size(); ++b) s += p(l, b) * d(b);
    out(l) = s;
  }
  return out;
}

}  // namespace

Matrix spd_inverse(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance matrix is singular or not positive definite");
  }
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

Vector expected_log_beta(const Eigen::Ref<const Vector>& alpha) {
  double total = 0.0;
  for (Eigen::Index g = 0; g < alpha.size(); ++g) total += alpha(g);
  const double psi_total = digamma(total);
  Vector out(alpha.size());
  for (Eigen::Index g = 0; g < alpha.size(); ++g) out(g) = digamma(alpha(g)) - psi_total;
  return out;
}

Matrix expected_log_beta_rows(const Matrix& topic_dirichlet) {
  Matrix out(topic_dirichlet.rows(), topic_dirichlet.cols());
  for (Eigen::Index l = 0; l < topic_dirichlet.rows(); ++l) {
    out.row(l) = expected_log_beta(topic_dirichlet.row(l).transpose()).transpose();
  }
  return out;
}

double optimal_zeta(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& var) {
  return std::exp(log_sum_exp(mean + 0.5 * var));
}

EtaInputs eta_inputs(const StructuredViewState& view, const Matrix& sigma0_inv, int sample) {
  EtaInputs in;
  in.link_mean = view.link_mean.row(sample).transpose();
  in.mu0 = view.mu0;
  in.sigma0_inv = sigma0_inv;
  const Matrix& phi = view.phi[sample];
  in.phi_sum = Vector::Zero(phi.cols());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    for (Eigen::Index l = 0; l < phi.cols(); ++l) in.phi_sum(l) += phi(i, l);
  }
  in.n_sentences = static_cast<double>(phi.rows());
  return in;
}

EtaObjective eta_objective(const Eigen::Ref<const Vector>& mean,
                           const Eigen::Ref<const Vector>& var, double zeta,
                           const EtaInputs& in) {
  const Vector d = mean - in.link_mean - in.mu0;
  const Vector pd = sym_times(in.sigma0_inv, d);
  const Vector p_diag = in.sigma0_inv.diagonal();
  Vector e;
  const double exp_sum = scaled_exp_sum(mean, var, zeta, &e);

  double log_var_sum = 0.0;
  for (Eigen::Index l = 0; l < var.size(); ++l) log_var_sum += std::log(var(l));
  EtaObjective out;
  out.value = -0.5 * dot(var, p_diag) - 0.5 * dot(d, pd) + dot(mean, in.phi_sum) -
              in.n_sentences * (std::log(zeta) + exp_sum - 1.0) + 0.5 * log_var_sum;
  out.grad_mean = -pd + in.phi_sum - in.n_sentences * e;
  out.grad_var = (-0.5 * p_diag.array() - 0.5 * in.n_sentences * e.array() +
                  0.5 / var.array())
                     .matrix();
  return out;
}

EtaResult optimize_eta(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& var,
                       double zeta, const EtaInputs& in, int max_iters, double grad_tol) {
  const Eigen::Index l = mean.size();
  EtaResult result;
  result.value_before = eta_objective(mean, var, zeta, in).value;

  // Profiled objective over x = (mean, log var), negated for minimization.
  // With zeta at its optimum the bound's zeta terms reduce to log-sum-exp.
  const Vector p_diag = in.sigma0_inv.diagonal();
  Vector native_grad(2 * l);
  Vector v(l), a(l), d(l);
  const auto objective = [&](const Vector& x, Vector& grad) {
    for (Eigen::Index j = 0; j < l; ++j) {
      v(j) = std::exp(x(l + j));
      a(j) = x(j) + 0.5 * v(j);
      d(j) = x(j) - in.link_mean(j) - in.mu0(j);
    }
    const double lse = log_sum_exp(a);
    double f = 0.0;
    for (Eigen::Index j = 0; j < l; ++j) {
      double pd = 0.0;
      for (Eigen::Index b = 0; b < l; ++b) pd += in.sigma0_inv(j, b) * d(b);
      const double soft = std::exp(a(j) - lse);
      const double g_mean = -pd + in.phi_sum(j) - in.n_sentences * soft;
      const double g_var = -0.5 * p_diag(j) - 0.5 * in.n_sentences * soft + 0.5 / v(j);
      native_grad(j) = g_mean;
      native_grad(l + j) = g_var;
      grad(j) = -g_mean;
      grad(l + j) = -(g_var * v(j));
      f += -0.5 * v(j) * p_diag(j) - 0.5 * d(j) * pd + x(j) * in.phi_sum(j) + 0.5 * x(l + j);
    }
    f -= in.n_sentences * lse;
    return -f;
  };
  // The optimizer tests the point it evaluated last, so native_grad is current.
  const auto stop = [&](const Vector&, const Vector&) {
    return native_grad.lpNorm<Eigen::Infinity>() < grad_tol;
  };

  // Scalar std::log/std::exp rather than Eigen's vectorized versions, which
  // differ in the last bit and would break reproducibility across builds.
  Vector x0(2 * l);
  for (Eigen::Index j = 0; j < l; ++j) {
    x0(j) = mean(j);
    x0(l + j) = std::log(var(j));
  }

  optim::LbfgsOptions options;
  options.max_iters = max_iters;
  options.grad_tol = grad_tol;
  const auto opt = optim::minimize_lbfgs(objective, x0, options, stop);

  result.mean = opt.x.head(l);
  result.var.resize(l);
  for (Eigen::Index j = 0; j < l; ++j) result.var(j) = std::exp(opt.x(l + j));
  result.zeta = optimal_zeta(result.mean, result.var);
  result.iterations = opt.iterations;
  result.converged = opt.converged;
  result.value_after = eta_objective(result.mean, result.var, result.zeta, in).value;

  // The profiled start is never below the incoming value, and the line search
  // only accepts decreases of the negated profile; guard against rounding.
  if (result.value_after < result.value_before) {
    result.mean = mean;
    result.var = var;
    const double z0 = optimal_zeta(mean, var);
    const double v0 = eta_objective(mean, var, z0, in).value;
    result.zeta = v0 >= result.value_before ? z0 : zeta;
    result.value_after = std::max(v0, result.value_before);
  }
  return result;
}

bool update_eta_sample(VariationalState& state, int view_index, int sample,
                       const FitConfig& cfg) {
  auto& view = state.structured[view_index];
  const Matrix sigma0_inv = spd_inverse(view.sigma0);
  const EtaInputs in = eta_inputs(view, sigma0_inv, sample);
  const EtaResult r =
      optimize_eta(view.eta_mean.row(sample).transpose(), view.eta_var.row(sample).transpose(),
                   view.zeta(sample), in, cfg.inner_opt_max_iters, cfg.inner_opt_grad_tol);
  view.eta_mean.row(sample) = r.mean.transpose();
  view.eta_var.row(sample) = r.var.transpose();
  view.zeta(sample) = r.zeta;
  return r.converged;
}

int update_eta(VariationalState& state, int view_index, const FitConfig& cfg) {
  auto& view = state.structured[view_index];
  const Matrix sigma0_inv = spd_inverse(view.sigma0);
  const int n = static_cast<int>(view.eta_mean.rows());
  std::vector<char> converged(n, 1);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const EtaInputs in = eta_inputs(view, sigma0_inv, i);
    const EtaResult r =
        optimize_eta(view.eta_mean.row(i).transpose(), view.eta_var.row(i).transpose(),
                     view.zeta(i), in, cfg.inner_opt_max_iters, cfg.inner_opt_grad_tol);
    view.eta_mean.row(i) = r.mean.transpose();
    view.eta_var.row(i) = r.var.transpose();
    view.zeta(i) = r.zeta;
    converged[i] = r.converged ? 1 : 0;
  }
  if (!view.eta_mean.allFinite() || !view.eta_var.allFinite()) {
    throw NumericalError("non-finite values in q(eta)");
  }
  int failures = 0;
  for (char c : converged) failures += c ? 0 : 1;
  return failures;
}

void update_mu_link(VariationalState& state, const Hyperparams& hp, int view_index) {
  if (!hp.link_enabled) return;
  auto& view = state.structured[view_index];
  const double t = hp.link_precision;
  const Matrix sigma0_inv = spd_inverse(view.sigma0);
  Matrix precision = sigma0_inv;
  precision.diagonal().array() += t;
  view.link_cov = spd_inverse(precision);

  // Rows: t * E[z_n] E[wbar]' + Sigma0^-1 (E[eta_n] - mu0)
  Matrix rhs = t * (state.z_mean * view.wbar_mean.transpose());
  const Matrix centered = view.eta_mean.rowwise() - view.mu0.transpose();
  rhs += centered * sigma0_inv;  // sigma0_inv is symmetric
  view.link_mean = rhs * view.link_cov;
  if (!view.link_mean.allFinite()) throw NumericalError("non-finite values in q(mu)");
}

void update_xi_sample(VariationalState& state, const Dataset& data, int view_index, int sample,
                      const Matrix& e_log_beta) {
  auto& view = state.structured[view_index];
  const Document& doc = data.structured_views[view_index].documents[sample];
  const Eigen::Index l_count = view.mu0.size();
  Matrix& phi = view.phi[sample];
  std::vector<double> logit(l_count);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < l_count; ++l) {
      double v = view.eta_mean(sample, l);
      for (const Token& tok : doc[i]) v += tok.count * e_log_beta(l, tok.index);
      logit[l] = v;
      if (v > max_logit) max_logit = v;
    }
    double total = 0.0;
    for (Eigen::Index l = 0; l < l_count; ++l) {
      logit[l] = std::exp(logit[l] - max_logit);
      total += logit[l];
    }
    for (Eigen::Index l = 0; l < l_count; ++l) phi(i, l) = logit[l] / total;
  }
}

void update_xi(VariationalState& state, const Dataset& data, int view_index) {
  const Matrix e_log_beta = expected_log_beta_rows(state.structured[view_index].topic_dirichlet);
  const int n = static_cast<int>(state.structured[view_index].phi.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) update_xi_sample(state, data, view_index, i, e_log_beta);
}

void update_beta(VariationalState& state, const Dataset& data, const Hyperparams& hp,
                 int view_index) {
  auto& view = state.structured[view_index];
  const auto& docs = data.structured_views[view_index].documents;
  const Eigen::Index l_count = view.mu0.size();
  Matrix alpha = Matrix::Constant(l_count, data.structured_views[view_index].vocab_size,
                                  hp.alpha0_beta);
  for (std::size_t n = 0; n < docs.size(); ++n) {
    const Matrix& phi = view.phi[n];
    for (std::size_t i = 0; i < docs[n].size(); ++i) {
      for (const Token& tok : docs[n][i]) {
        for (Eigen::Index l = 0; l < l_count; ++l) alpha(l, tok.index) += phi(i, l) * tok.count;
      }
    }
  }
  view.topic_dirichlet = std::move(alpha);
}

void update_population(VariationalState& state, int view_index) {
  auto& view = state.structured[view_index];
  const Eigen::Index n = view.eta_mean.rows();
  const Eigen::Index l_count = view.mu0.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  Vector mu0 = Vector::Zero(l_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < l_count; ++l) {
      mu0(l) += view.eta_mean(i, l) - view.link_mean(i, l);
    }
  }
  mu0 *= inv_n;

  Matrix scatter = Matrix::Zero(l_count, l_count);
  Vector d(l_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < l_count; ++l) {
      d(l) = view.eta_mean(i, l) - view.link_mean(i, l) - mu0(l);
    }
    for (Eigen::Index a = 0; a < l_count; ++a) {
      scatter(a, a) += view.eta_var(i, a) + d(a) * d(a);
      for (Eigen::Index b = a + 1; b < l_count; ++b) scatter(a, b) += d(a) * d(b);
    }
  }
  Matrix sigma0(l_count, l_count);
  for (Eigen::Index a = 0; a < l_count; ++a) {
    for (Eigen::Index b = a; b < l_count; ++b) {
      const double v = view.link_cov(a, b) + scatter(a, b) * inv_n;
      sigma0(a, b) = v;
      sigma0(b, a) = v;
    }
  }

  Eigen::LLT<Matrix> llt(sigma0);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-8 * sigma0.diagonal().mean();
    for (int attempt = 0; attempt < 20 && llt.info() != Eigen::Success; ++attempt) {
      sigma0.diagonal().array() += jitter * std::pow(10.0, attempt);
      llt.compute(sigma0);
    }
    if (llt.info() != Eigen::Success) throw NumericalError("Sigma0 update is not positive definite");
  }
  view.mu0 = std::move(mu0);
  view.sigma0 = std::move(sigma0);
}

double structured_elbo_terms(const VariationalState& state, const Dataset& data,
                             const Hyperparams& hp, int view_index) {
  const auto& view = state.structured[view_index];
  const auto& docs = data.structured_views[view_index].documents;
  const Eigen::Index l_count = view.mu0.size();
  const Eigen::Index g_count = view.topic_dirichlet.cols();
  const int n = static_cast<int>(docs.size());

  Eigen::LLT<Matrix> llt(view.sigma0);
  if (llt.info() != Eigen::Success) throw NumericalError("Sigma0 is not positive definite");
  const Matrix sigma0_inv = spd_inverse(view.sigma0);
  const double logdet_sigma0 = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Vector p_diag = sigma0_inv.diagonal();
  const Matrix e_log_beta = expected_log_beta_rows(view.topic_dirichlet);
  const double trace_link = hp.link_enabled ? (view.link_cov * sigma0_inv).trace() : 0.0;

  std::vector<double> per_sample(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const Vector mean = view.eta_mean.row(i).transpose();
    const Vector var = view.eta_var.row(i).transpose();
    Vector d = mean - view.mu0;
    if (hp.link_enabled) d -= view.link_mean.row(i).transpose();
    // E log N(eta | mu + mu0, Sigma0)
    double v = -0.5 * static_cast<double>(l_count) * kLog2Pi - 0.5 * logdet_sigma0 -
               0.5 * (var.dot(p_diag) + trace_link) - 0.5 * d.dot(sigma0_inv * d);
    // topic assignments with the zeta bound
    const Matrix& phi = view.phi[i];
    const Vector phi_sum = phi.colwise().sum().transpose();
    const double n_sent = static_cast<double>(phi.rows());
    const double zeta = view.zeta(i);
    v += mean.dot(phi_sum) -
         n_sent * (std::log(zeta) + scaled_exp_sum(mean, var, zeta, nullptr) - 1.0);
    // words
    for (std::size_t s = 0; s < docs[i].size(); ++s) {
      for (Eigen::Index l = 0; l < l_count; ++l) {
        double lw = 0.0;
        for (const Token& tok : docs[i][s]) lw += tok.count * e_log_beta(l, tok.index);
        v += phi(s, l) * lw;
        v -= xlogx(phi(s, l));
      }
    }
    // entropy of q(eta)
    v += 0.5 * var.array().log().sum() + 0.5 * static_cast<double>(l_count) * (kLog2Pi + 1.0);
    per_sample[i] = v;
  }

  double total = 0.0;
  for (double v : per_sample) total += v;

  // Dirichlet prior on topics and entropy of q(beta)
  const double a0 = hp.alpha0_beta;
  const double g = static_cast<double>(g_count);
  for (Eigen::Index l = 0; l < l_count; ++l) {
    const auto alpha = view.topic_dirichlet.row(l);
    double log_norm = log_gamma(alpha.sum());
    double cross = 0.0;
    for (Eigen::Index w = 0; w < g_count; ++w) {
      log_norm -= log_gamma(alpha(w));
      cross += (alpha(w) - 1.0) * e_log_beta(l, w);
    }
    total += log_gamma(g * a0) - g * log_gamma(a0) + (a0 - 1.0) * e_log_beta.row(l).sum();
    total -= log_norm + cross;
  }

  if (hp.link_enabled) {
    const double t = hp.link_precision;
    const double nl = static_cast<double>(n) * static_cast<double>(l_count);
    total += nl * 0.5 * (std::log(t) - kLog2Pi) -
             0.5 * t * fa::expected_link_sq_residual(state, view_index);
    Eigen::LLT<Matrix> link_llt(view.link_cov);
    if (link_llt.info() != Eigen::Success) {
      throw NumericalError("link covariance is not positive definite");
    }
    const double logdet_link = 2.0 * link_llt.matrixLLT().diagonal().array().log().sum();
    total += static_cast<double>(n) *
             0.5 * (static_cast<double>(l_count) * (kLog2Pi + 1.0) + logdet_link);
  }
  return total;
}

}  // namespace factm::ctm
