#include "multidirsbm/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "multidirsbm/special_math.hpp"

namespace mdsbm {

ModelParams ModelParams::neutral(int num_clusters, int num_layers) {
  ModelParams p;
  p.theta = Vector::Constant(num_clusters, 1.0 / num_clusters);
  p.P.assign(num_layers, Matrix::Constant(num_clusters, num_clusters, 0.5));
  p.A.assign(num_layers, Matrix::Ones(num_clusters, num_clusters));
  return p;
}

void check_compatible(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part) {
  const int k = params.num_clusters();
  if (k < 1) throw std::invalid_argument("model has no clusters");
  if (part.num_clusters != k)
    throw std::invalid_argument(fmt::format("partition has K={}, parameters K={}", part.num_clusters, k));
  if (part.num_nodes() != net.num_nodes())
    throw std::invalid_argument(fmt::format("partition covers {} nodes, network has {}", part.num_nodes(), net.num_nodes()));
  if (params.num_layers() != net.num_layers() || static_cast<int>(params.A.size()) != net.num_layers())
    throw std::invalid_argument("parameter layer count differs from network");
  for (int s = 0; s < params.num_layers(); ++s) {
    if (params.P[s].rows() != k || params.P[s].cols() != k || params.A[s].rows() != k || params.A[s].cols() != k)
      throw std::invalid_argument(fmt::format("layer {} parameter matrices are not {}x{}", s + 1, k, k));
    if (!(params.A[s].array() > 0.0).all())
      throw std::invalid_argument(fmt::format("layer {} has a nonpositive concentration", s + 1));
  }
  for (int i = 0; i < part.num_nodes(); ++i)
    if (part.labels[i] < 0 || part.labels[i] >= k)
      throw std::invalid_argument(fmt::format("label of node {} out of range", i + 1));
  if (part.responsibilities &&
      (part.responsibilities->rows() != net.num_nodes() || part.responsibilities->cols() != k))
    throw std::invalid_argument("responsibility matrix has wrong shape");
}

LayerStats layer_stats(const CompositionalMultiplex& net, int layer, const Labels& labels, int num_clusters) {
  const int n = net.num_nodes();
  const EdgeMatrix& e = net.edges[layer];
  const Matrix& x = net.shares[layer];
  const Eigen::VectorXi sizes = cluster_sizes(labels, num_clusters);

  LayerStats st;
  st.out_counts = Matrix::Zero(n, num_clusters);
  st.log_share_sums = Matrix::Zero(n, num_clusters);
  st.pair_counts = sizes.cast<double>().transpose().replicate(n, 1);
  st.degrees = Eigen::VectorXi::Zero(n);
  for (int i = 0; i < n; ++i) {
    st.pair_counts(i, labels[i]) -= 1.0;
    for (int j = 0; j < n; ++j) {
      if (!e(i, j)) continue;
      const int h = labels[j];
      st.out_counts(i, h) += 1.0;
      st.log_share_sums(i, h) += log_share(x(i, j));
      ++st.degrees[i];
    }
  }
  return st;
}

Matrix sender_log_terms(const LayerStats& st, const Matrix& P, const Matrix& A, ModelKind kind) {
  const Eigen::Index n = st.out_counts.rows();
  const Eigen::Index k_count = P.rows();
  const Matrix log_p = P.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor).array().log().matrix();
  const Matrix log_q = (1.0 - P.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor).array()).log().matrix();
  const Matrix absent = st.pair_counts - st.out_counts;

  // Bernoulli: (n x K) * (K x K)^T
  Matrix terms = st.out_counts * log_p.transpose() + absent * log_q.transpose();
  if (kind == ModelKind::BinaryOnly) return terms;

  Matrix lgamma_a(k_count, k_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    for (Eigen::Index h = 0; h < k_count; ++h) lgamma_a(k, h) = log_gamma(A(k, h));

  const Matrix alpha_mass = st.out_counts * A.transpose();          // sum_j e_ij alpha~_j
  const Matrix lgamma_mass = st.out_counts * lgamma_a.transpose();  // sum_j e_ij log Gamma(alpha~_j)
  const Matrix shape_term = st.log_share_sums * (A.array() - 1.0).matrix().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (st.degrees[i] == 0) continue;  // Dirichlet factor is exactly 1
    for (Eigen::Index k = 0; k < k_count; ++k)
      terms(i, k) += log_gamma(alpha_mass(i, k)) - lgamma_mass(i, k) + shape_term(i, k);
  }
  return terms;
}

Matrix sender_log_terms(const CompositionalMultiplex& net, const ModelParams& params, const Labels& labels, int layer,
                        ModelKind kind) {
  const int k = params.num_clusters();
  return sender_log_terms(layer_stats(net, layer, labels, k), params.P[layer], params.A[layer], kind);
}

namespace {

Vector log_theta(const Vector& theta) { return theta.array().log().matrix(); }

// 0 * log 0 contributes 0.
double weighted(double weight, double value) { return weight == 0.0 ? 0.0 : weight * value; }

}  // namespace

double hybrid_log_likelihood(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                             ModelKind kind) {
  check_compatible(net, params, part);
  const Eigen::RowVectorXd lt = log_theta(params.theta).transpose();
  double total = 0.0;
  for (int s = 0; s < net.num_layers(); ++s) {
    const Matrix terms = sender_log_terms(net, params, part.labels, s, kind);
    for (int i = 0; i < net.num_nodes(); ++i) total += log_sum_exp((terms.row(i) + lt).transpose());
  }
  return total;
}

double complete_log_likelihood(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                               ModelKind kind) {
  check_compatible(net, params, part);
  double total = 0.0;
  for (int s = 0; s < net.num_layers(); ++s) {
    const Matrix terms = sender_log_terms(net, params, part.labels, s, kind);
    for (int i = 0; i < net.num_nodes(); ++i) {
      const int k = part.labels[i];
      total += std::log(params.theta[k]) + terms(i, k);
    }
  }
  return total;
}

double expected_complete_ll(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                            ModelKind kind) {
  check_compatible(net, params, part);
  if (!part.responsibilities) throw std::invalid_argument("expected_complete_ll needs responsibilities");
  const Matrix& zhat = *part.responsibilities;
  const Vector lt = log_theta(params.theta);
  double total = 0.0;
  for (int s = 0; s < net.num_layers(); ++s) {
    const Matrix terms = sender_log_terms(net, params, part.labels, s, kind);
    for (int i = 0; i < net.num_nodes(); ++i)
      for (int k = 0; k < params.num_clusters(); ++k) total += weighted(zhat(i, k), lt[k] + terms(i, k));
  }
  return total;
}

Matrix grad_A_expected_complete_ll(const CompositionalMultiplex& net, const ModelParams& params,
                                   const Partition& part, int layer) {
  check_compatible(net, params, part);
  if (!part.responsibilities) throw std::invalid_argument("gradient needs responsibilities");
  const Matrix& zhat = *part.responsibilities;
  const Matrix& A = params.A[layer];
  const int kc = params.num_clusters();
  const LayerStats st = layer_stats(net, layer, part.labels, kc);

  Matrix digamma_a(kc, kc);
  for (int k = 0; k < kc; ++k)
    for (int h = 0; h < kc; ++h) digamma_a(k, h) = digamma(A(k, h));

  const Matrix alpha_mass = st.out_counts * A.transpose();
  Matrix grad = Matrix::Zero(kc, kc);
  for (int i = 0; i < net.num_nodes(); ++i) {
    if (st.degrees[i] == 0) continue;  // m_ih = 0 and no shares
    for (int k = 0; k < kc; ++k) {
      const double w = zhat(i, k);
      if (w == 0.0) continue;
      const double psi_mass = digamma(alpha_mass(i, k));
      for (int h = 0; h < kc; ++h) {
        const double m = st.out_counts(i, h);
        grad(k, h) += w * (m * (psi_mass - digamma_a(k, h)) + st.log_share_sums(i, h));
      }
    }
  }
  return grad;
}

}  // namespace mdsbm
