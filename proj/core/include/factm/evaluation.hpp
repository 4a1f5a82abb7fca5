#ifndef FACTM_EVALUATION_HPP
#define FACTM_EVALUATION_HPP

#include "factm/types.hpp"

#include <string>
#include <vector>

namespace factm::eval {

struct Assignment {
  std::vector<int> row_to_col;  // -1 for rows left unassigned when rows > cols
  double cost = 0.0;
};

/// Minimum-cost assignment of min(R, C) row/column pairs. Among optimal
/// assignments the lexicographically smallest row_to_col is returned.
[[nodiscard]] Assignment hungarian_match(const Matrix& cost);

/// Ranks starting at 1, ties receive their average rank.
[[nodiscard]] Vector average_ranks(const Vector& x);

/// Pearson correlation; 0 when either argument is constant.
[[nodiscard]] double pearson(const Vector& a, const Vector& b);
[[nodiscard]] double spearman(const Vector& a, const Vector& b);

struct FactorMatch {
  Matrix spearman;                 // K_true x K_est, signed
  std::vector<int> true_to_est;    // -1 when unmatched
  std::vector<double> abs_rho;     // per true factor, 0 when unmatched
  double mean_abs_rho = 0.0;       // over matched pairs
  std::vector<std::string> warnings;
};

/// Matches estimated to true factor columns by Hungarian assignment on
/// 1 - |Spearman rho|.
[[nodiscard]] FactorMatch match_factors(const Matrix& true_z, const Matrix& est_z);

struct TopicMatch {
  Matrix contingency;            // L_true x L_est sentence counts
  std::vector<int> true_to_est;  // -1 when unmatched
  double accuracy = 0.0;
};

/// Most probable topic of every sentence, flattened over samples.
[[nodiscard]] std::vector<int> argmax_topics(const std::vector<Matrix>& phi);

/// Flattens per-sample topic labels in sample order.
[[nodiscard]] std::vector<int> flatten(const std::vector<std::vector<int>>& labels);

/// Hungarian matching on the contingency table of true versus estimated
/// labels; accuracy is the matched diagonal mass over the sentence count.
[[nodiscard]] TopicMatch match_topics(const std::vector<int>& true_labels,
                                      const std::vector<int>& est_labels, int n_true, int n_est);

/// Reorders rows and columns of an estimated L x L matrix into the true
/// topic order: out(i, j) = est(true_to_est[i], true_to_est[j]).
[[nodiscard]] Matrix permute_symmetric(const Matrix& est, const std::vector<int>& true_to_est);

/// ||est - true||_F / ||true||_F, optionally after scaling both matrices to
/// unit diagonal. Throws std::invalid_argument on shape mismatch, zero true
/// norm, or a non-positive diagonal when scaling.
[[nodiscard]] double frobenius_relative(const Matrix& truth, const Matrix& est,
                                        bool scale_to_correlation);

}  // namespace factm::eval

#endif  // FACTM_EVALUATION_HPP
