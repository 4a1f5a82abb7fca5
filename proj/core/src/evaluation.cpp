#include "factm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace factm::eval {

namespace {

// Square assignment via shortest augmenting paths with potentials; returns
// row -> col and the total cost.
std::pair<std::vector<int>, double> solve_square(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) total += a(i, row_to_col[i]);
  return {row_to_col, total};
}

// Optimal cost of the square problem restricted to the given rows/columns.
double restricted_cost(const Matrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.empty()) return 0.0;
  Matrix sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = a(rows[i], cols[j]);
  }
  return solve_square(sub).second;
}

}  // namespace

Assignment hungarian_match(const Matrix& cost) {
  if (!cost.allFinite()) throw std::invalid_argument("hungarian_match: non-finite cost");
  const int r = static_cast<int>(cost.rows());
  const int c = static_cast<int>(cost.cols());
  Assignment out;
  out.row_to_col.assign(r, -1);
  if (r == 0 || c == 0) return out;

  // Pad to square with zero-cost dummy rows/columns; dummy columns sort last.
  const int n = std::max(r, c);
  Matrix a = Matrix::Zero(n, n);
  a.topLeftCorner(r, c) = cost;
  const double optimum = solve_square(a).second;
  const double tol = 1e-9 * (1.0 + cost.cwiseAbs().sum());

  // Fix rows one at a time to the smallest column that keeps the optimum.
  std::vector<int> free_rows(n), free_cols(n);
  std::iota(free_rows.begin(), free_rows.end(), 0);
  std::iota(free_cols.begin(), free_cols.end(), 0);
  double fixed = 0.0;
  for (int i = 0; i < r; ++i) {
    free_rows.erase(std::find(free_rows.begin(), free_rows.end(), i));
    for (std::size_t jj = 0; jj < free_cols.size(); ++jj) {
      const int j = free_cols[jj];
      std::vector<int> cols = free_cols;
      cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(jj));
      const double total = fixed + a(i, j) + restricted_cost(a, free_rows, cols);
      if (total <= optimum + tol) {
        fixed += a(i, j);
        out.row_to_col[i] = j < c ? j : -1;
        free_cols = std::move(cols);
        break;
      }
    }
  }
  for (int i = 0; i < r; ++i) {
    if (out.row_to_col[i] >= 0) out.cost += cost(i, out.row_to_col[i]);
  }
  return out;
}

Vector average_ranks(const Vector& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x(a) < x(b); });
  Vector ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && x(idx[j + 1]) == x(idx[i])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index t = i; t <= j; ++t) ranks(idx[t]) = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double denom = ca.norm() * cb.norm();
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(ca.dot(cb) / denom, -1.0, 1.0);
}

double spearman(const Vector& a, const Vector& b) {
  return pearson(average_ranks(a), average_ranks(b));
}

FactorMatch match_factors(const Matrix& true_z, const Matrix& est_z) {
  if (true_z.rows() != est_z.rows()) throw std::invalid_argument("match_factors: sample mismatch");
  if (true_z.rows() < 3) throw std::invalid_argument("match_factors: need at least 3 samples");
  const Eigen::Index kt = true_z.cols();
  const Eigen::Index ke = est_z.cols();
  FactorMatch out;

  std::vector<Vector> true_ranks, est_ranks;
  for (Eigen::Index j = 0; j < kt; ++j) {
    true_ranks.push_back(average_ranks(true_z.col(j)));
    if (true_ranks.back().minCoeff() == true_ranks.back().maxCoeff())
      out.warnings.push_back("true factor " + std::to_string(j) + " is constant");
  }
  for (Eigen::Index j = 0; j < ke; ++j) {
    est_ranks.push_back(average_ranks(est_z.col(j)));
    if (est_ranks.back().minCoeff() == est_ranks.back().maxCoeff())
      out.warnings.push_back("estimated factor " + std::to_string(j) + " is constant");
  }
  out.spearman.resize(kt, ke);
  for (Eigen::Index i = 0; i < kt; ++i) {
    for (Eigen::Index j = 0; j < ke; ++j) out.spearman(i, j) = pearson(true_ranks[i], est_ranks[j]);
  }
  const Matrix cost = 1.0 - out.spearman.cwiseAbs().array();
  const Assignment a = hungarian_match(cost);
  out.true_to_est = a.row_to_col;
  out.abs_rho.assign(static_cast<std::size_t>(kt), 0.0);
  double sum = 0.0;
  int matched = 0;
  for (Eigen::Index i = 0; i < kt; ++i) {
    if (a.row_to_col[i] < 0) continue;
    out.abs_rho[i] = std::abs(out.spearman(i, a.row_to_col[i]));
    sum += out.abs_rho[i];
    ++matched;
  }
  out.mean_abs_rho = matched > 0 ? sum / matched : 0.0;
  return out;
}

std::vector<int> argmax_topics(const std::vector<Matrix>& phi) {
  std::vector<int> out;
  for (const Matrix& p : phi) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index best = 0;
      p.row(i).maxCoeff(&best);
      out.push_back(static_cast<int>(best));
    }
  }
  return out;
}

std::vector<int> flatten(const std::vector<std::vector<int>>& labels) {
  std::vector<int> out;
  for (const auto& v : labels) out.insert(out.end(), v.begin(), v.end());
  return out;
}

TopicMatch match_topics(const std::vector<int>& true_labels, const std::vector<int>& est_labels,
                        int n_true, int n_est) {
  if (true_labels.size() != est_labels.size()) {
    throw std::invalid_argument("match_topics: label count mismatch");
  }
  TopicMatch out;
  out.contingency = Matrix::Zero(n_true, n_est);
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const int t = true_labels[i];
    const int e = est_labels[i];
    if (t < 0 || t >= n_true || e < 0 || e >= n_est) {
      throw std::invalid_argument("match_topics: label out of range");
    }
    out.contingency(t, e) += 1.0;
  }
  const Assignment a = hungarian_match(-out.contingency);
  out.true_to_est = a.row_to_col;
  if (!true_labels.empty()) {
    out.accuracy = -a.cost / static_cast<double>(true_labels.size());
  }
  return out;
}

Matrix permute_symmetric(const Matrix& est, const std::vector<int>& true_to_est) {
  const auto l = static_cast<Eigen::Index>(true_to_est.size());
  Matrix out(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = 0; j < l; ++j) {
      if (true_to_est[i] < 0 || true_to_est[j] < 0) {
        throw std::invalid_argument("permute_symmetric: unmatched topic");
      }
      out(i, j) = est(true_to_est[i], true_to_est[j]);
    }
  }
  return out;
}

double frobenius_relative(const Matrix& truth, const Matrix& est, bool scale_to_correlation) {
  if (truth.rows() != est.rows() || truth.cols() != est.cols()) {
    throw std::invalid_argument("frobenius_relative: shape mismatch");
  }
  Matrix t = truth;
  Matrix e = est;
  if (scale_to_correlation) {
    if (t.rows() != t.cols()) throw std::invalid_argument("frobenius_relative: not square");
    const auto scale = [](Matrix& m) {
      const Vector d = m.diagonal();
      if (!(d.minCoeff() > 0.0)) {
        throw std::invalid_argument("frobenius_relative: non-positive diagonal");
      }
      const Vector inv = d.cwiseSqrt().cwiseInverse();
      m = inv.asDiagonal() * m * inv.asDiagonal();
    };
    scale(t);
    scale(e);
  }
  const double norm = t.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("frobenius_relative: true matrix has zero norm");
  return (e - t).norm() / norm;
}

}  // namespace factm::eval
