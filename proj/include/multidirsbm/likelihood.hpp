#pragma once

#include <optional>

#include "multidirsbm/network.hpp"
#include "multidirsbm/types.hpp"

namespace mdsbm {

/// Mixing proportions, per-layer connectivity P^(s) and Dirichlet
/// concentrations A^(s). Row k of P/A describes senders in cluster k.
struct ModelParams {
  Vector theta;
  LayerStack P;
  LayerStack A;

  int num_clusters() const { return static_cast<int>(theta.size()); }
  int num_layers() const { return static_cast<int>(P.size()); }

  /// theta uniform, P = 1/2, A = 1.
  static ModelParams neutral(int num_clusters, int num_layers);
};

/// Hard labels (0-based) and, once an E-step has run, responsibilities.
struct Partition {
  Labels labels;
  int num_clusters = 0;
  std::optional<Matrix> responsibilities;  // n x K, rows sum to 1

  Partition() = default;
  Partition(Labels c, int k, std::optional<Matrix> zhat = std::nullopt)
      : labels(std::move(c)), num_clusters(k), responsibilities(std::move(zhat)) {}

  int num_nodes() const { return static_cast<int>(labels.size()); }
  Matrix Z() const { return one_hot(labels, num_clusters); }
};

/// Full multiplex Dirichlet model, or its edge-only (Bernoulli) part.
enum class ModelKind { Full, BinaryOnly };

/// Probabilities enter logarithms clamped to [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-12;

/// Sufficient statistics of one layer under fixed receiver labels.
struct LayerStats {
  Matrix out_counts;       // m_ih: edges i -> cluster h
  Matrix pair_counts;      // number of j != i with label h
  Matrix log_share_sums;   // sum of log x_ij over edges i -> cluster h
  Eigen::VectorXi degrees; // d_i
};

LayerStats layer_stats(const CompositionalMultiplex& net, int layer, const Labels& labels, int num_clusters);

/// n x K matrix whose (i, k) entry is log p(e_i, x_i | c_i = k, c_-i) in one
/// layer: Bernoulli terms plus, for ModelKind::Full, the Dirichlet term
/// (switched off for isolated senders).
Matrix sender_log_terms(const LayerStats& stats, const Matrix& P, const Matrix& A, ModelKind kind = ModelKind::Full);

Matrix sender_log_terms(const CompositionalMultiplex& net, const ModelParams& params, const Labels& labels, int layer,
                        ModelKind kind = ModelKind::Full);

/// Observed hybrid log-likelihood: sum over layers and senders of the
/// log-sum-exp over candidate sender clusters.
double hybrid_log_likelihood(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                             ModelKind kind = ModelKind::Full);

/// Complete-data hybrid log-likelihood at the hard labels.
double complete_log_likelihood(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                               ModelKind kind = ModelKind::Full);

/// Expected complete-data hybrid log-likelihood with z_ik replaced by the
/// responsibilities (the M-step objective). Requires part.responsibilities.
double expected_complete_ll(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                            ModelKind kind = ModelKind::Full);

/// Gradient of expected_complete_ll with respect to A^(layer).
Matrix grad_A_expected_complete_ll(const CompositionalMultiplex& net, const ModelParams& params,
                                   const Partition& part, int layer);

/// Throws std::invalid_argument when dimensions or parameter ranges disagree.
void check_compatible(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part);

}  // namespace mdsbm
