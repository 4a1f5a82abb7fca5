#ifndef FACTM_LBFGS_HPP
#define FACTM_LBFGS_HPP

#include "factm/types.hpp"

#include <functional>

namespace factm::optim {

struct LbfgsOptions {
  int max_iters = 100;
  double grad_tol = 1e-6;
  int history = 8;
  double armijo_c1 = 1e-4;
  int max_line_search = 50;
};

struct LbfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Returns f(x) and writes the gradient into `grad` (already sized).
using Objective = std::function<double(const Vector& x, Vector& grad)>;

/// Optional convergence test replacing the default max-norm gradient check.
/// It is only called on the point the objective evaluated most recently.
using StopTest = std::function<bool(const Vector& x, const Vector& grad)>;

/// Limited-memory BFGS minimization with a backtracking Armijo line search.
/// Every accepted step satisfies the sufficient-decrease condition,
/// so the returned value never exceeds f(x0).
LbfgsResult minimize_lbfgs(const Objective& objective, Vector x0, const LbfgsOptions& options,
                           const StopTest& stop = {});

}  // namespace factm::optim

#endif  // FACTM_LBFGS_HPP
