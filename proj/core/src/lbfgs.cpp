#include "factm/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace factm::optim {

namespace {

struct Correction {
  Vector s;
  Vector y;
  double rho;
};

// Two-loop recursion: returns -H * g.
Vector search_direction(const Vector& g, const std::deque<Correction>& memory) {
  Vector q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * memory[i].s.dot(q);
    q -= alpha[i] * memory[i].y;
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q += (alpha[i] - beta) * memory[i].s;
  }
  return -q;
}

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Vector x0, const LbfgsOptions& options,
                           const StopTest& stop) {
  const auto is_converged = [&](const Vector& x, const Vector& g) {
    if (stop) return stop(x, g);
    return g.size() == 0 || g.lpNorm<Eigen::Infinity>() < options.grad_tol;
  };

  LbfgsResult result;
  result.x = std::move(x0);
  Vector grad(result.x.size());
  result.value = objective(result.x, grad);
  if (!std::isfinite(result.value)) return result;

  std::deque<Correction> memory;
  Vector trial_grad(result.x.size());
  for (int iter = 0; iter < options.max_iters; ++iter) {
    if (is_converged(result.x, grad)) {
      result.converged = true;
      return result;
    }

    Vector direction = search_direction(grad, memory);
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      memory.clear();
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    if (memory.empty()) {
      const double gmax = grad.lpNorm<Eigen::Infinity>();
      if (gmax > 1.0) step = 1.0 / gmax;
    }

    bool accepted = false;
    Vector trial;
    double trial_value = 0.0;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      trial = result.x + step * direction;
      trial_value = objective(trial, trial_grad);
      // Near the optimum the decrease drops below the resolution of f; a
      // step that leaves f unchanged still counts if it shrinks the gradient.
      if (std::isfinite(trial_value) &&
          trial_value <= result.value + options.armijo_c1 * step * slope &&
          (trial_value < result.value || trial_grad.squaredNorm() < grad.squaredNorm())) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // result.x already failed the stop test at the top of this iteration.
      result.iterations = iter;
      return result;
    }

    Correction c{trial - result.x, trial_grad - grad, 0.0};
    const double sy = c.s.dot(c.y);
    if (sy > 1e-12 * c.y.squaredNorm() && sy > 0.0) {
      c.rho = 1.0 / sy;
      memory.push_back(std::move(c));
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }

    result.x = std::move(trial);
    result.value = trial_value;
    grad = trial_grad;
    result.iterations = iter + 1;
  }
  result.converged = is_converged(result.x, grad);
  return result;
}

}  // namespace factm::optim
