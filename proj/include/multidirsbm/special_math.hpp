#pragma once

#include <atomic>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <boost/math/special_functions/digamma.hpp>

namespace mdsbm {

namespace detail {
inline std::atomic<long>& clamped_share_counter() {
  static std::atomic<long> counter{0};
  return counter;
}
}  // namespace detail

/// Smallest share taken into a logarithm; smaller values are raised to it.
inline constexpr double kMinShare = 1e-300;

/// Number of shares clamped to kMinShare since start (or the last reset).
inline long clamped_share_count() { return detail::clamped_share_counter().load(); }
inline void reset_clamped_share_count() { detail::clamped_share_counter().store(0); }

/// log x for a share, with the kMinShare floor.
template <typename Scalar>
Scalar log_share(Scalar x) {
  if (x < Scalar(kMinShare)) {
    detail::clamped_share_counter().fetch_add(1, std::memory_order_relaxed);
    x = Scalar(kMinShare);
  }
  using std::log;
  return log(x);
}

/// log Gamma(x) for x > 0.
template <typename Scalar>
Scalar log_gamma(Scalar x) {
  if (!(x > Scalar(0))) throw std::domain_error("log_gamma: argument must be positive");
  if constexpr (std::is_same_v<Scalar, double>) {
    int sign = 0;
    return ::lgamma_r(x, &sign);  // reentrant; std::lgamma writes signgam
  } else {
    using std::lgamma;
    return lgamma(x);
  }
}

/// Digamma psi(x) for x > 0.
template <typename Scalar>
Scalar digamma(Scalar x) {
  if (!(x > Scalar(0))) throw std::domain_error("digamma: argument must be positive");
  return boost::math::digamma(x);
}

/// Dirichlet log-density log Dir(x | alpha), evaluated in log space.
/// A one-dimensional simplex is the point mass (1), with log-density 0.
template <typename DerivedX, typename DerivedA>
typename DerivedX::Scalar dirichlet_log_density(const Eigen::MatrixBase<DerivedX>& x,
                                                const Eigen::MatrixBase<DerivedA>& alpha) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != alpha.size())
    throw std::invalid_argument("dirichlet_log_density: dimension mismatch");
  if (x.size() == 0) throw std::invalid_argument("dirichlet_log_density: empty vector");
  for (Eigen::Index j = 0; j < alpha.size(); ++j)
    if (!(alpha(j) > Scalar(0))) throw std::invalid_argument("dirichlet_log_density: alpha must be positive");
  if (x.size() == 1) return Scalar(0);

  Scalar total(0), value(0);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    total += alpha(j);
    value += (alpha(j) - Scalar(1)) * log_share(Scalar(x(j))) - log_gamma(Scalar(alpha(j)));
  }
  return value + log_gamma(total);
}

/// Numerically stable log(sum_k exp(v_k)); -inf for an all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  Scalar acc(0);
  for (Eigen::Index k = 0; k < v.size(); ++k) acc += std::exp(v(k) - m);
  return m + std::log(acc);
}

}  // namespace mdsbm
