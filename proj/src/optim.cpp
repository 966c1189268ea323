#include "multidirsbm/optim.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace mdsbm::optim {

namespace {

Vector project(const Vector& x, const Vector& lower, const Vector& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Bound-constrained variables that stay fixed for this iteration.
Eigen::Array<bool, Eigen::Dynamic, 1> active_set(const Vector& x, const Vector& g, const Vector& lower,
                                                 const Vector& upper) {
  Eigen::Array<bool, Eigen::Dynamic, 1> active(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double tol = 1e-12 * std::max(1.0, std::abs(x[i]));
    active[i] = (x[i] <= lower[i] + tol && g[i] > 0.0) || (x[i] >= upper[i] - tol && g[i] < 0.0);
  }
  return active;
}

struct Pair {
  Vector s;
  Vector y;
};

Vector masked(const Vector& v, const Eigen::Array<bool, Eigen::Dynamic, 1>& active) {
  Vector out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (active[i]) out[i] = 0.0;
  return out;
}

// -H g restricted to the free variables (two-loop recursion).
Vector lbfgs_direction(const Vector& g, const std::deque<Pair>& pairs,
                       const Eigen::Array<bool, Eigen::Dynamic, 1>& active) {
  Vector q = masked(g, active);
  std::vector<double> alpha(pairs.size(), 0.0), rho(pairs.size(), 0.0);
  std::vector<Vector> s(pairs.size()), y(pairs.size());
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    s[m] = masked(pairs[m].s, active);
    y[m] = masked(pairs[m].y, active);
    const double sy = s[m].dot(y[m]);
    rho[m] = sy > 0.0 ? 1.0 / sy : 0.0;
  }
  for (std::size_t m = pairs.size(); m-- > 0;) {
    alpha[m] = rho[m] * s[m].dot(q);
    q -= alpha[m] * y[m];
  }
  double gamma = 1.0;
  for (std::size_t m = pairs.size(); m-- > 0;) {
    if (rho[m] > 0.0) {
      gamma = 1.0 / (rho[m] * y[m].squaredNorm());
      break;
    }
  }
  Vector r = gamma * q;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const double beta = rho[m] * y[m].dot(r);
    r += s[m] * (alpha[m] - beta);
  }
  return -masked(r, active);
}

}  // namespace

double projected_gradient_norm(const Vector& x, const Vector& grad, const Vector& lower, const Vector& upper) {
  return (project(x - grad, lower, upper) - x).lpNorm<Eigen::Infinity>();
}

BoxResult minimize_box(const Objective& f, Vector x0, const Vector& lower, const Vector& upper,
                       const BoxOptions& options) {
  const Eigen::Index dim = x0.size();
  if (lower.size() != dim || upper.size() != dim) throw std::invalid_argument("minimize_box: bound size mismatch");
  if ((lower.array() > upper.array()).any()) throw std::invalid_argument("minimize_box: lower > upper");

  BoxResult res;
  res.x = project(x0, lower, upper);
  res.grad = Vector::Zero(dim);
  res.f = f(res.x, res.grad);
  if (!std::isfinite(res.f) || !res.grad.allFinite()) {
    res.status = BoxStatus::NonFinite;
    return res;
  }

  std::deque<Pair> pairs;
  Vector g_new(dim);
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    res.projected_grad_norm = projected_gradient_norm(res.x, res.grad, lower, upper);
    if (res.projected_grad_norm <= options.pgtol) {
      res.status = BoxStatus::Converged;
      return res;
    }
    const auto active = active_set(res.x, res.grad, lower, upper);

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vector d = pairs.empty() ? Vector(-masked(res.grad, active)) : lbfgs_direction(res.grad, pairs, active);
      if (res.grad.dot(d) >= 0.0) {
        pairs.clear();
        d = -masked(res.grad, active);
      }
      double step = 1.0;
      if (pairs.empty()) step = std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300));

      for (int bt = 0; bt < options.max_backtracks; ++bt, step *= 0.5) {
        const Vector x_new = project(res.x + step * d, lower, upper);
        const Vector delta = x_new - res.x;
        const double slope = res.grad.dot(delta);
        if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
        const double f_new = f(x_new, g_new);
        if (std::isfinite(f_new) && g_new.allFinite() && f_new <= res.f + 1e-4 * slope && slope < 0.0) {
          const Vector y = g_new - res.grad;
          if (delta.dot(y) > 1e-12 * y.squaredNorm()) {
            pairs.push_back({delta, y});
            if (static_cast<int>(pairs.size()) > options.memory) pairs.pop_front();
          }
          const double decrease = res.f - f_new;
          res.x = x_new;
          res.grad = g_new;
          const double scale = std::max({std::abs(res.f), std::abs(f_new), 1.0});
          res.f = f_new;
          accepted = true;
          if (decrease <= options.ftol * scale) {
            res.projected_grad_norm = projected_gradient_norm(res.x, res.grad, lower, upper);
            res.status = res.projected_grad_norm <= options.pgtol ? BoxStatus::Converged
                                                                   : BoxStatus::FunctionTolerance;
            ++res.iterations;
            return res;
          }
          break;
        }
      }
      if (!accepted) {
        if (pairs.empty()) break;
        pairs.clear();
      }
    }
    if (!accepted) {
      res.projected_grad_norm = projected_gradient_norm(res.x, res.grad, lower, upper);
      res.status = res.projected_grad_norm <= options.pgtol ? BoxStatus::Converged : BoxStatus::LineSearchFailed;
      return res;
    }
  }
  res.projected_grad_norm = projected_gradient_norm(res.x, res.grad, lower, upper);
  res.status = res.projected_grad_norm <= options.pgtol ? BoxStatus::Converged : BoxStatus::MaxIterations;
  return res;
}

}  // namespace mdsbm::optim
