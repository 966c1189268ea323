#pragma once

#include <functional>

#include "multidirsbm/types.hpp"

namespace mdsbm::optim {

/// Objective for minimization: returns f(x) and writes the gradient.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

struct BoxOptions {
  int memory = 10;
  int max_iterations = 500;
  /// Stop when the projected gradient sup-norm falls below this.
  double pgtol = 1e-8;
  /// Stop when the relative decrease of f falls below this.
  double ftol = 1e-15;
  int max_backtracks = 60;
};

enum class BoxStatus { Converged, FunctionTolerance, MaxIterations, LineSearchFailed, NonFinite };

struct BoxResult {
  Vector x;
  double f = 0.0;
  Vector grad;
  double projected_grad_norm = 0.0;  // sup-norm
  int iterations = 0;
  BoxStatus status = BoxStatus::MaxIterations;

  bool ok() const { return status == BoxStatus::Converged || status == BoxStatus::FunctionTolerance; }
};

/// Projected limited-memory BFGS for min f(x) subject to lower <= x <= upper.
///
/// Each iteration fixes the variables sitting on a bound whose gradient
/// points outward, builds a two-loop L-BFGS direction on the remaining free
/// variables, and backtracks along the projected path with an Armijo test.
/// Falls back to projected steepest descent (memory reset) whenever the
/// quasi-Newton step does not yield sufficient decrease.
BoxResult minimize_box(const Objective& f, Vector x0, const Vector& lower, const Vector& upper,
                       const BoxOptions& options = {});

/// Sup-norm of P(x - g) - x.
double projected_gradient_norm(const Vector& x, const Vector& grad, const Vector& lower, const Vector& upper);

}  // namespace mdsbm::optim
