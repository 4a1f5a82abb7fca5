#include "factm/inference.hpp"

#include "factm/ctm_engine.hpp"
#include "factm/fa_engine.hpp"
#include "factm/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#ifdef FACTM_HAVE_OPENMP
#include <omp.h>
#endif

namespace factm {

namespace {

// Leading principal-component scores of the concatenated standardized simple
// views, scaled to unit variance. Returns as many columns as are available.
Matrix principal_scores(const Dataset& data, int k) {
  const Eigen::Index n = data.n_samples;
  Eigen::Index total_cols = 0;
  for (const auto& v : data.simple_views) total_cols += v.data.cols();
  if (total_cols == 0 || n < 2) return Matrix(n, 0);

  Matrix x(n, total_cols);
  Eigen::Index c = 0;
  for (const auto& v : data.simple_views) {
    for (Eigen::Index d = 0; d < v.data.cols(); ++d, ++c) {
      Vector col = v.data.col(d);
      col.array() -= col.mean();
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
      x.col(c) = sd > 0.0 ? Vector(col / sd) : Vector::Zero(n);
    }
  }
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double tol = sv.size() ? sv(0) * 1e-10 : 0.0;
  Eigen::Index usable = 0;
  while (usable < sv.size() && usable < k && sv(usable) > tol) ++usable;
  return svd.matrixU().leftCols(usable) * std::sqrt(static_cast<double>(n));
}

void check_finite_state(const VariationalState& state, Phase phase) {
  bool ok = state.z_mean.allFinite() && state.z_var.allFinite();
  for (const auto& v : state.simple) {
    ok = ok && v.incl_prob.allFinite() && v.slab_mean.allFinite() && v.slab_var.allFinite() &&
         v.tau_rate.allFinite() && v.alpha_rate.allFinite();
  }
  for (const auto& v : state.structured) {
    ok = ok && v.eta_mean.allFinite() && v.eta_var.allFinite() && v.link_mean.allFinite() &&
         v.topic_dirichlet.allFinite() && v.sigma0.allFinite() && v.zeta.allFinite();
  }
  if (!ok) {
    throw NumericalError("non-finite variational parameters after phase '" +
                         std::string(phase_name(phase)) + "'");
  }
}

struct RunOutcome {
  VariationalState state;
  std::vector<ElboPoint> trace;
  std::vector<PhaseElbo> phase_trace;
  std::vector<double> sweep_seconds;
  bool converged = false;
  int sweeps = 0;
  int eta_nonconverged = 0;
  double final_elbo = 0.0;
};

RunOutcome run_single(const Dataset& data, const Hyperparams& hp, const FitConfig& cfg,
                      std::uint64_t seed, const VariationalState* start) {
  RunOutcome out;
  out.state = start ? *start : initialize(data, hp, seed, cfg.init_topic_noise);
  std::vector<double> history{compute_elbo(out.state, data, hp)};
  out.final_elbo = history.back();

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    const auto start = std::chrono::steady_clock::now();
    for (Phase phase : cfg.update_schedule) {
      try {
        out.eta_nonconverged += run_phase(out.state, data, hp, cfg, phase);
      } catch (const NumericalError& e) {
        throw NumericalError("phase '" + std::string(phase_name(phase)) + "' in sweep " +
                             std::to_string(sweep) + ": " + e.what());
      }
      check_finite_state(out.state, phase);
      if (cfg.record_phase_elbo) {
        const double e = compute_elbo(out.state, data, hp);
        if (!std::isfinite(e)) {
          throw NumericalError("non-finite ELBO after phase '" + std::string(phase_name(phase)) +
                               "' in sweep " + std::to_string(sweep));
        }
        out.phase_trace.push_back({sweep, phase, e});
      }
    }
    const double elbo = compute_elbo(out.state, data, hp);
    const auto stop = std::chrono::steady_clock::now();
    out.sweep_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    if (!std::isfinite(elbo)) {
      throw NumericalError("non-finite ELBO after sweep " + std::to_string(sweep));
    }
    out.trace.push_back({sweep, elbo});
    history.push_back(elbo);
    out.sweeps = sweep;
    out.final_elbo = elbo;

    // Average relative improvement over the last three sweeps.
    constexpr std::size_t kWindow = 3;
    if (history.size() > kWindow) {
      const double old = history[history.size() - 1 - kWindow];
      const double rel = (elbo - old) / (static_cast<double>(kWindow) * std::abs(elbo));
      if (std::abs(rel) < cfg.elbo_rel_tol) {
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

void check_compatible(const VariationalState& s, const Dataset& data, const Hyperparams& hp) {
  const auto fail = [](const std::string& what) {
    throw ValidationError("starting state does not match the data: " + what);
  };
  const int n = data.n_samples;
  const int k = hp.n_factors;
  if (s.z_mean.rows() != n || s.z_mean.cols() != k || s.z_var.rows() != n || s.z_var.cols() != k)
    fail("factor block");
  if (s.simple.size() != data.simple_views.size()) fail("number of simple views");
  if (s.structured.size() != data.structured_views.size()) fail("number of structured views");
  for (std::size_t m = 0; m < s.simple.size(); ++m) {
    const auto d = data.simple_views[m].data.cols();
    const auto& v = s.simple[m];
    if (v.incl_prob.rows() != d || v.incl_prob.cols() != k || v.slab_mean.rows() != d ||
        v.slab_var.rows() != d || v.tau_shape.size() != d || v.tau_rate.size() != d ||
        v.alpha_shape.size() != k || v.alpha_rate.size() != k || v.theta_a.size() != k ||
        v.theta_b.size() != k)
      fail("simple view " + std::to_string(m));
  }
  for (std::size_t v = 0; v < s.structured.size(); ++v) {
    const auto& st = s.structured[v];
    const auto& view = data.structured_views[v];
    const int l = hp.n_topics[v];
    bool ok = st.wbar_mean.rows() == l && st.wbar_mean.cols() == k && st.wbar_var.rows() == l &&
              st.alphabar_shape.size() == k && st.link_mean.rows() == n &&
              st.link_mean.cols() == l && st.link_cov.rows() == l && st.eta_mean.rows() == n &&
              st.eta_mean.cols() == l && st.eta_var.rows() == n && st.zeta.size() == n &&
              st.topic_dirichlet.rows() == l && st.topic_dirichlet.cols() == view.vocab_size &&
              st.mu0.size() == l && st.sigma0.rows() == l &&
              st.phi.size() == static_cast<std::size_t>(n);
    for (int i = 0; ok && i < n; ++i) {
      ok = st.phi[i].rows() == static_cast<Eigen::Index>(view.documents[i].size()) &&
           st.phi[i].cols() == l;
    }
    if (!ok) fail("structured view " + std::to_string(v));
  }
}

template <typename Derived>
void permute_columns(Eigen::MatrixBase<Derived>& m, const std::vector<int>& order) {
  typename Derived::PlainObject copy = m;
  for (std::size_t j = 0; j < order.size(); ++j) m.col(j) = copy.col(order[j]);
}

void permute_entries(Vector& v, const std::vector<int>& order) {
  const Vector copy = v;
  for (std::size_t j = 0; j < order.size(); ++j) v(j) = copy(order[j]);
}

}  // namespace

VariationalState initialize(const Dataset& data, const Hyperparams& hp, std::uint64_t seed,
                            double topic_noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int n = data.n_samples;
  const int k = hp.n_factors;
  VariationalState state;

  const Matrix scores = principal_scores(data, k);
  state.z_mean.resize(n, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < n; ++i) {
      const double noise = normal(rng);
      state.z_mean(i, j) = j < scores.cols() ? scores(i, j) + 0.1 * noise : noise;
    }
  }
  state.z_var = Matrix::Ones(n, k);

  for (const auto& view : data.simple_views) {
    const Eigen::Index d = view.data.cols();
    SimpleViewState s;
    s.incl_prob = Matrix::Constant(d, k, 0.5);
    s.slab_mean.resize(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) s.slab_mean(i, j) = 0.01 * normal(rng);
    }
    s.slab_var = Matrix::Ones(d, k);
    // Precisions start at mean one with the concentration of a posterior
    // that has seen the whole view; starting at the vague prior would put
    // E[log alpha] near -1000 and switch every loading off in the first sweep.
    const double half_d = 0.5 * static_cast<double>(d);
    s.alpha_shape = Vector::Constant(k, half_d);
    s.alpha_rate = Vector::Constant(k, half_d);
    s.theta_a = Vector::Constant(k, hp.a0_theta);
    s.theta_b = Vector::Constant(k, hp.b0_theta);
    s.tau_shape = Vector::Constant(d, 0.5 * n);
    s.tau_rate = Vector::Constant(d, 0.5 * n);
    state.simple.push_back(std::move(s));
  }

  for (std::size_t v = 0; v < data.structured_views.size(); ++v) {
    const auto& view = data.structured_views[v];
    const int l = hp.n_topics[v];
    const int g = view.vocab_size;
    StructuredViewState s;
    s.wbar_mean.resize(l, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < l; ++i) s.wbar_mean(i, j) = 0.01 * normal(rng);
    }
    s.wbar_var = Matrix::Ones(l, k);
    s.alphabar_shape = Vector::Constant(k, 0.5 * l);
    s.alphabar_rate = Vector::Constant(k, 0.5 * l);
    s.link_mean = Matrix::Zero(n, l);
    s.link_cov = hp.link_enabled
                     ? Matrix(Matrix::Identity(l, l) / (1.0 + hp.link_precision))
                     : Matrix(Matrix::Zero(l, l));
    s.eta_mean = Matrix::Zero(n, l);
    s.eta_var = Matrix::Ones(n, l);
    s.zeta = Vector::Constant(n, ctm::optimal_zeta(Vector::Zero(l), Vector::Ones(l)));
    s.phi.resize(n);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      s.phi[i] = Matrix::Constant(static_cast<Eigen::Index>(view.documents[i].size()), l,
                                  1.0 / l);
      for (const auto& sentence : view.documents[i]) {
        for (const Token& tok : sentence) mass += tok.count;
      }
    }
    const double scale = topic_noise * mass / (static_cast<double>(l) * g);
    s.topic_dirichlet.resize(l, g);
    for (int w = 0; w < g; ++w) {
      for (int i = 0; i < l; ++i) s.topic_dirichlet(i, w) = hp.alpha0_beta + scale * uniform(rng);
    }
    s.mu0 = Vector::Zero(l);
    s.sigma0 = Matrix::Identity(l, l);
    state.structured.push_back(std::move(s));
  }
  return state;
}

int run_phase(VariationalState& state, const Dataset& data, const Hyperparams& hp,
              const FitConfig& cfg, Phase phase) {
  const int n_simple = static_cast<int>(state.simple.size());
  const int n_structured = static_cast<int>(state.structured.size());
  int failures = 0;
  switch (phase) {
    case Phase::xi:
      for (int s = 0; s < n_structured; ++s) ctm::update_xi(state, data, s);
      break;
    case Phase::eta:
      for (int s = 0; s < n_structured; ++s) failures += ctm::update_eta(state, s, cfg);
      break;
    case Phase::mu_link:
      for (int s = 0; s < n_structured; ++s) ctm::update_mu_link(state, hp, s);
      break;
    case Phase::beta:
      for (int s = 0; s < n_structured; ++s) ctm::update_beta(state, data, hp, s);
      break;
    case Phase::population:
      for (int s = 0; s < n_structured; ++s) ctm::update_population(state, s);
      break;
    case Phase::w:
      for (int m = 0; m < n_simple; ++m) fa::update_w(state, data, hp, m);
      break;
    case Phase::conjugates:
      fa::update_conjugates(state, data, hp);
      break;
    case Phase::z:
      fa::update_z(state, data, hp);
      break;
    case Phase::wbar:
      for (int s = 0; s < n_structured; ++s) fa::update_wbar(state, hp, s);
      break;
  }
  return failures;
}

FitResult fit(const Dataset& data, const Hyperparams& hp, const FitConfig& cfg,
              const VariationalState* start) {
  require_valid(data, hp);
  if (const auto v = validate(cfg); !v.empty()) throw ValidationError(describe(v));
  if (start) check_compatible(*start, data, hp);

#ifdef FACTM_HAVE_OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

  FitResult best;
  bool have_best = false;
  double best_elbo = 0.0;
  std::vector<double> restart_elbos;
  const int restarts = start ? 1 : cfg.n_restarts;
  for (int r = 0; r < restarts; ++r) {
    RunOutcome run = run_single(data, hp, cfg, cfg.seed + static_cast<std::uint64_t>(r), start);
    restart_elbos.push_back(run.final_elbo);
    if (!have_best || run.final_elbo > best_elbo) {
      best_elbo = run.final_elbo;
      best.state = std::move(run.state);
      best.report = FitReport{};
      best.report.elbo_trace = std::move(run.trace);
      best.report.phase_trace = std::move(run.phase_trace);
      best.report.wall_time_per_sweep = std::move(run.sweep_seconds);
      best.report.converged = run.converged;
      best.report.sweeps_used = run.sweeps;
      best.report.eta_nonconverged = run.eta_nonconverged;
      best.report.best_restart = r;
      have_best = true;
    }
  }
  best.report.restart_elbos = restart_elbos;

  const Matrix ve = variance_explained(best.state, data, hp);
  best.report.factor_order = order_by_variance(ve);
  reorder_factors(best.state, best.report.factor_order);
  normalize_signs(best.state, hp);
  best.report.variance_explained = variance_explained(best.state, data, hp);
  return best;
}

Matrix variance_explained(const VariationalState& state, const Dataset& data,
                          const Hyperparams& hp) {
  const int k = state.n_factors();
  const std::size_t rows = state.simple.size() + state.structured.size();
  Matrix ve = Matrix::Zero(static_cast<Eigen::Index>(rows), k);

  const auto explained = [&](const Matrix& y, const Matrix& loadings) {
    Vector out = Vector::Zero(k);
    const double total = y.squaredNorm();
    if (!(total > 0.0)) return out;
    for (int j = 0; j < k; ++j) {
      const double resid = (y - state.z_mean.col(j) * loadings.col(j).transpose()).squaredNorm();
      out(j) = std::clamp(1.0 - resid / total, 0.0, 1.0);
    }
    return out;
  };

  Eigen::Index row = 0;
  for (std::size_t m = 0; m < state.simple.size(); ++m, ++row) {
    ve.row(row) = explained(data.simple_views[m].data, state.simple[m].loading_mean()).transpose();
  }
  for (std::size_t s = 0; s < state.structured.size(); ++s, ++row) {
    if (!hp.link_enabled) continue;
    ve.row(row) =
        explained(state.structured[s].link_mean, state.structured[s].wbar_mean).transpose();
  }
  return ve;
}

std::vector<int> order_by_variance(const Matrix& ve) {
  const Vector total = ve.colwise().sum().transpose();
  std::vector<int> order(static_cast<std::size_t>(ve.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return total(a) > total(b); });
  return order;
}

void reorder_factors(VariationalState& state, const std::vector<int>& order) {
  permute_columns(state.z_mean, order);
  permute_columns(state.z_var, order);
  for (auto& v : state.simple) {
    permute_columns(v.incl_prob, order);
    permute_columns(v.slab_mean, order);
    permute_columns(v.slab_var, order);
    permute_entries(v.alpha_shape, order);
    permute_entries(v.alpha_rate, order);
    permute_entries(v.theta_a, order);
    permute_entries(v.theta_b, order);
  }
  for (auto& v : state.structured) {
    permute_columns(v.wbar_mean, order);
    permute_columns(v.wbar_var, order);
    permute_entries(v.alphabar_shape, order);
    permute_entries(v.alphabar_rate, order);
  }
}

void normalize_signs(VariationalState& state, const Hyperparams& hp) {
  for (int k = 0; k < state.n_factors(); ++k) {
    double largest = 0.0;
    for (const auto& v : state.simple) {
      const Vector w = v.loading_mean().col(k);
      for (Eigen::Index d = 0; d < w.size(); ++d) {
        if (std::abs(w(d)) > std::abs(largest)) largest = w(d);
      }
    }
    if (hp.link_enabled) {
      for (const auto& v : state.structured) {
        for (Eigen::Index l = 0; l < v.wbar_mean.rows(); ++l) {
          if (std::abs(v.wbar_mean(l, k)) > std::abs(largest)) largest = v.wbar_mean(l, k);
        }
      }
    }
    if (largest >= 0.0) continue;
    state.z_mean.col(k) *= -1.0;
    for (auto& v : state.simple) v.slab_mean.col(k) *= -1.0;
    for (auto& v : state.structured) v.wbar_mean.col(k) *= -1.0;
  }
}

}  // namespace factm
