#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "multidirsbm/likelihood.hpp"
#include "multidirsbm/network.hpp"
#include "multidirsbm/rng.hpp"

namespace mdsbm {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EmptyClusterPolicy {
  Forbid,  ///< the C-step never moves the last member of a cluster
  Reseed,  ///< after the sweep, the least confident node refills each empty cluster
};

struct FitConfig {
  int K = 2;
  int restarts = 5;
  double tol = 1e-4;
  int max_iter = 200;
  std::uint64_t seed = 1;
  double alpha_min = 1e-6;
  double alpha_max = 1e4;
  EmptyClusterPolicy empty_cluster_policy = EmptyClusterPolicy::Forbid;
  ModelKind kind = ModelKind::Full;
  /// Restarts run on up to this many threads; results do not depend on it.
  int threads = 1;

  void validate() const;
};

/// Counters for conditions that are tolerated but worth reporting.
struct FitDiagnostics {
  long empty_blocks = 0;          // P entries with no possible pairs, set to 0
  long optimizer_failures = 0;    // A rows where the optimizer stopped early
  long reseeded_clusters = 0;

  FitDiagnostics& operator+=(const FitDiagnostics& o) {
    empty_blocks += o.empty_blocks;
    optimizer_failures += o.optimizer_failures;
    reseeded_clusters += o.reseeded_clusters;
    return *this;
  }
};

struct FitResult {
  ModelParams params;
  Partition partition;
  std::vector<double> ll_trace;
  bool converged = false;
  int iterations = 0;
  int best_restart_index = 0;
  std::uint64_t seed = 0;
  double elapsed_seconds = 0.0;
  ModelKind kind = ModelKind::Full;
  FitDiagnostics diagnostics;

  /// Hybrid log-likelihood at the returned parameters and labels.
  double hybrid_ll() const { return ll_trace.back(); }
};

/// Responsibilities z_ik ∝ theta_k prod_s p(e_i, x_i | c_i = k, c~_-i),
/// normalized with log-sum-exp. Throws EstimationError on an all -inf row.
Matrix e_step(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
              ModelKind kind = ModelKind::Full);

/// Greedy sequential relabelling. Each node in index order takes the label
/// maximizing the hybrid log-likelihood with all other labels fixed; moves
/// take effect before the next node is visited; ties keep the incumbent.
/// Scores are updated incrementally from the terms the moved node touches.
Partition c_step(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                 EmptyClusterPolicy policy = EmptyClusterPolicy::Forbid, ModelKind kind = ModelKind::Full,
                 FitDiagnostics* diagnostics = nullptr);

Vector m_step_theta(const Matrix& zhat);

/// Per-layer p_kh = sum_ij zhat_ik z~_jh e_ij / sum_{i != j} zhat_ik z~_jh.
/// Blocks with an empty denominator are set to 0 and counted.
LayerStack m_step_p(const CompositionalMultiplex& net, const Matrix& zhat, const Labels& labels,
                    FitDiagnostics* diagnostics = nullptr);

struct AlphaBounds {
  double lower = 1e-6;
  double upper = 1e4;
};

/// Box-constrained maximizer of the expected complete hybrid log-likelihood
/// in A^(layer), warm-started at warm_start. Rows of A decouple, so each row
/// is optimized separately. Throws EstimationError if the objective cannot
/// be evaluated from either the warm start or the all-ones matrix.
Matrix estimate_A(const CompositionalMultiplex& net, const Matrix& zhat, const Labels& labels, int layer,
                  const Matrix& warm_start, AlphaBounds bounds = {}, FitDiagnostics* diagnostics = nullptr);

/// theta, then P, then A for every layer.
ModelParams m_step(const CompositionalMultiplex& net, const Matrix& zhat, const Labels& labels,
                   const LayerStack& warm_A, const FitConfig& config, FitDiagnostics* diagnostics = nullptr);

/// The observed hybrid likelihood sums over each sender's own cluster, so it
/// cannot tell which row of theta/P/A belongs to which label: permuting the
/// rows (and the columns of the responsibilities) leaves it unchanged. This
/// picks the row order maximizing sum_i zhat(i, row of c_i) and applies it in
/// place, so that row k describes the senders labelled k. Exhaustive for
/// K <= 8, greedy above. Returns new row k = old row perm[k].
std::vector<int> align_sender_rows(ModelParams& params, Partition& part);

/// Uniform labels, redrawn until every cluster is occupied.
Labels random_partition(int num_nodes, int num_clusters, Rng& rng);

/// One CEM run from the given labels.
FitResult fit_from(const CompositionalMultiplex& net, const Labels& initial, const FitConfig& config);

/// `restarts` CEM runs from random partitions; returns the run with the
/// highest final hybrid log-likelihood. Deterministic given config.seed.
FitResult fit(const CompositionalMultiplex& net, const FitConfig& config);

}  // namespace mdsbm
