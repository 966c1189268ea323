#pragma once

#include <optional>
#include <string>
#include <vector>

#include "multidirsbm/cem.hpp"

namespace mdsbm {

/// K^2 S log[S n(n-1)] for the full model (2K^2 parameters per layer, half
/// log-count each); half of that for the edge-only model.
double bic_penalty(int num_clusters, int num_layers, int num_nodes, ModelKind kind = ModelKind::Full);

/// bic_penalty plus (K-1)/2 log n for the mixing proportions.
double icl_penalty(int num_clusters, int num_layers, int num_nodes, ModelKind kind = ModelKind::Full);

/// Complete-data hybrid log-likelihood at the fit's hard labels, penalized.
double icl(const FitResult& fit, const CompositionalMultiplex& net);

/// Observed hybrid log-likelihood at the fit, penalized.
double bic(const FitResult& fit, const CompositionalMultiplex& net);

struct SelectionRow {
  int K = 0;
  std::optional<FitResult> fit;  // empty when the fit failed
  std::string error;
  double hybrid_ll = 0.0;
  double complete_hybrid_ll = 0.0;
  double bic = 0.0;
  double icl = 0.0;

  bool ok() const { return fit.has_value(); }
};

struct SelectionReport {
  std::vector<SelectionRow> rows;
  int chosen_K_bic = 0;  // 0 when no K could be fitted
  int chosen_K_icl = 0;
  ModelKind kind = ModelKind::Full;
};

/// Fits K = k_min..k_max with per-K seeds derived from config.seed and
/// records both criteria. Per-K failures are stored in the row.
SelectionReport select_k(const CompositionalMultiplex& net, int k_min, int k_max, const FitConfig& config);

/// Seed used for the K-cluster fit inside select_k.
std::uint64_t selection_seed(std::uint64_t seed, int num_clusters);

}  // namespace mdsbm
