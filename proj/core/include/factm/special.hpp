#ifndef FACTM_SPECIAL_HPP
#define FACTM_SPECIAL_HPP

#include <Eigen/Dense>

#include <cmath>

namespace factm {

double digamma(double x);

inline double log_gamma(double x) { return std::lgamma(x); }

/// x * log(x) with the convention 0 * log(0) = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// E[log x] for x ~ Gamma(shape, rate).
inline double gamma_log_mean(double shape, double rate) {
  return digamma(shape) - std::log(rate);
}

/// E_q[log Gamma(x | a0, b0)] for q = Gamma(shape, rate).
double gamma_expected_log_density(double a0, double b0, double shape, double rate);
/// Entropy of Gamma(shape, rate).
double gamma_entropy(double shape, double rate);
/// E_q[log Beta(theta | a0, b0)] for q = Beta(a, b).
double beta_expected_log_density(double a0, double b0, double a, double b);
double beta_entropy(double a, double b);

/// log(sum(exp(v))) evaluated with max subtraction.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace factm

#endif  // FACTM_SPECIAL_HPP
