#include "factm/special.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <limits>

namespace factm {

double digamma(double x) { return boost::math::digamma(x); }

double gamma_expected_log_density(double a0, double b0, double shape, double rate) {
  const double e_log = gamma_log_mean(shape, rate);
  const double e_x = shape / rate;
  return a0 * std::log(b0) - log_gamma(a0) + (a0 - 1.0) * e_log - b0 * e_x;
}

double gamma_entropy(double shape, double rate) {
  return shape - std::log(rate) + log_gamma(shape) + (1.0 - shape) * digamma(shape);
}

double beta_expected_log_density(double a0, double b0, double a, double b) {
  const double psi_ab = digamma(a + b);
  const double e_log = digamma(a) - psi_ab;
  const double e_log1m = digamma(b) - psi_ab;
  const double log_beta_fn = log_gamma(a0) + log_gamma(b0) - log_gamma(a0 + b0);
  return -log_beta_fn + (a0 - 1.0) * e_log + (b0 - 1.0) * e_log1m;
}

double beta_entropy(double a, double b) {
  const double log_beta_fn = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  return log_beta_fn - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) +
         (a + b - 2.0) * digamma(a + b);
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  double m = v(0);
  for (Eigen::Index i = 1; i < v.size(); ++i) m = std::max(m, v(i));
  if (!std::isfinite(m)) return m;
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) total += std::exp(v(i) - m);
  return m + std::log(total);
}

}  // namespace factm
