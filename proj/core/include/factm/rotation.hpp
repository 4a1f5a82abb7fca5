#ifndef FACTM_ROTATION_HPP
#define FACTM_ROTATION_HPP

#include "factm/types.hpp"

#include <string>
#include <vector>

namespace factm::rotation {

enum class FeatureKind { numeric, binary };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  Vector values;  // length N; binary features encoded 0/1
};

using FeatureSet = std::vector<Feature>;

/// Returns the invariant violations of a feature set against N samples.
[[nodiscard]] std::vector<std::string> check_features(const FeatureSet& features, int n_samples);

struct CrossCorrelation {
  Matrix h;                       // K x K, columns beyond the features are zero
  std::vector<int> zero_variance;  // factors whose row was set to zero
};

/// Pearson correlation of every factor with every feature. For a binary
/// feature this is the point-biserial correlation.
[[nodiscard]] CrossCorrelation cross_correlation(const Matrix& factors, const FeatureSet& features);

/// Point-biserial r turned into the pooled-variance two-sample t statistic,
/// r * sqrt((n0 + n1 - 2) / (1 - r^2)).
[[nodiscard]] double point_biserial_t(double r, int n0, int n1);

/// R = UV' from H = USV'. Reflections are allowed.
[[nodiscard]] Matrix kabsch_rotation(const Matrix& h);

/// Mean factors and mean loadings of a fitted model. Only these point
/// summaries are rotated; variances and inclusion probabilities stay as
/// fitted.
struct PointSummary {
  Matrix factors;                      // N x K
  std::vector<std::string> view_names;  // simple views then structured views
  std::vector<Matrix> loadings;         // E[w] per simple view, then w-bar means
};

[[nodiscard]] PointSummary summarize(const VariationalState& state, const Dataset& data);

/// Right-multiplies the factors and every loading matrix by R. Throws
/// std::invalid_argument if R is not square of size K or ||RR' - I||inf > 1e-8.
[[nodiscard]] PointSummary apply_rotation(const PointSummary& summary, const Matrix& r);

}  // namespace factm::rotation

#endif  // FACTM_ROTATION_HPP
