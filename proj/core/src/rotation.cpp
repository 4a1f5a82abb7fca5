#include "factm/rotation.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace factm::rotation {

std::vector<std::string> check_features(const FeatureSet& features, int n_samples) {
  std::vector<std::string> problems;
  for (const auto& f : features) {
    if (f.values.size() != n_samples) {
      problems.push_back("feature '" + f.name + "' has " + std::to_string(f.values.size()) +
                         " values, expected " + std::to_string(n_samples));
      continue;
    }
    if (!f.values.allFinite()) {
      problems.push_back("feature '" + f.name + "' has non-finite values");
      continue;
    }
    if (f.kind == FeatureKind::binary) {
      int zeros = 0;
      int ones = 0;
      bool other = false;
      for (double v : f.values) {
        if (v == 0.0) ++zeros;
        else if (v == 1.0) ++ones;
        else other = true;
      }
      if (other) problems.push_back("binary feature '" + f.name + "' has values other than 0/1");
      else if (zeros == 0 || ones == 0)
        problems.push_back("binary feature '" + f.name + "' needs both classes");
    } else {
      const double mean = f.values.mean();
      if ((f.values.array() - mean).square().sum() <= 0.0)
        problems.push_back("numeric feature '" + f.name + "' has zero variance");
    }
  }
  return problems;
}

CrossCorrelation cross_correlation(const Matrix& factors, const FeatureSet& features) {
  const Eigen::Index n = factors.rows();
  const Eigen::Index k = factors.cols();
  if (static_cast<Eigen::Index>(features.size()) > k) {
    throw std::invalid_argument("more features than factors");
  }
  if (n < 3) throw std::invalid_argument("cross_correlation needs at least 3 samples");
  if (const auto problems = check_features(features, static_cast<int>(n)); !problems.empty()) {
    throw std::invalid_argument(problems.front());
  }

  CrossCorrelation out;
  out.h = Matrix::Zero(k, k);
  Matrix centered_f(n, static_cast<Eigen::Index>(features.size()));
  for (std::size_t p = 0; p < features.size(); ++p) {
    Vector c = features[p].values.array() - features[p].values.mean();
    centered_f.col(static_cast<Eigen::Index>(p)) = c / c.norm();
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector c = factors.col(j).array() - factors.col(j).mean();
    const double norm = c.norm();
    if (!(norm > 0.0)) {
      out.zero_variance.push_back(static_cast<int>(j));
      continue;
    }
    c /= norm;
    for (Eigen::Index p = 0; p < centered_f.cols(); ++p) out.h(j, p) = c.dot(centered_f.col(p));
  }
  return out;
}

double point_biserial_t(double r, int n0, int n1) {
  return r * std::sqrt(static_cast<double>(n0 + n1 - 2) / (1.0 - r * r));
}

Matrix kabsch_rotation(const Matrix& h) {
  Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

PointSummary summarize(const VariationalState& state, const Dataset& data) {
  PointSummary s;
  s.factors = state.z_mean;
  for (std::size_t m = 0; m < state.simple.size(); ++m) {
    s.view_names.push_back(m < data.simple_views.size() ? data.simple_views[m].name
                                                         : "simple" + std::to_string(m));
    s.loadings.push_back(state.simple[m].loading_mean());
  }
  for (std::size_t v = 0; v < state.structured.size(); ++v) {
    s.view_names.push_back(v < data.structured_views.size() ? data.structured_views[v].name
                                                             : "structured" + std::to_string(v));
    s.loadings.push_back(state.structured[v].wbar_mean);
  }
  return s;
}

PointSummary apply_rotation(const PointSummary& summary, const Matrix& r) {
  const Eigen::Index k = summary.factors.cols();
  if (r.rows() != k || r.cols() != k) {
    throw std::invalid_argument("rotation must be " + std::to_string(k) + "x" + std::to_string(k));
  }
  const double err = (r * r.transpose() - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(err <= 1e-8)) throw std::invalid_argument("rotation matrix is not orthogonal");

  PointSummary out = summary;
  out.factors = summary.factors * r;
  for (auto& w : out.loadings) w = w * r;
  return out;
}

}  // namespace factm::rotation
