#include "multidirsbm/selection.hpp"

#include <cmath>

#include <fmt/format.h>

namespace mdsbm {

double bic_penalty(int num_clusters, int num_layers, int num_nodes, ModelKind kind) {
  const double k2s = static_cast<double>(num_clusters) * num_clusters * num_layers;
  const double log_pairs = std::log(static_cast<double>(num_layers) * num_nodes * (num_nodes - 1.0));
  const double per_layer_blocks = kind == ModelKind::Full ? 1.0 : 0.5;
  return per_layer_blocks * k2s * log_pairs;
}

double icl_penalty(int num_clusters, int num_layers, int num_nodes, ModelKind kind) {
  return bic_penalty(num_clusters, num_layers, num_nodes, kind) +
         0.5 * (num_clusters - 1.0) * std::log(static_cast<double>(num_nodes));
}

double icl(const FitResult& fit, const CompositionalMultiplex& net) {
  const Partition hard(fit.partition.labels, fit.partition.num_clusters);
  return complete_log_likelihood(net, fit.params, hard, fit.kind) -
         icl_penalty(fit.params.num_clusters(), net.num_layers(), net.num_nodes(), fit.kind);
}

double bic(const FitResult& fit, const CompositionalMultiplex& net) {
  return hybrid_log_likelihood(net, fit.params, fit.partition, fit.kind) -
         bic_penalty(fit.params.num_clusters(), net.num_layers(), net.num_nodes(), fit.kind);
}

std::uint64_t selection_seed(std::uint64_t seed, int num_clusters) {
  return derive_seed(seed, 1000u + static_cast<std::uint64_t>(num_clusters));
}

SelectionReport select_k(const CompositionalMultiplex& net, int k_min, int k_max, const FitConfig& config) {
  if (k_min < 1 || k_max < k_min || k_max > net.num_nodes())
    throw std::invalid_argument(fmt::format("invalid K range [{}, {}] for {} nodes", k_min, k_max, net.num_nodes()));
  SelectionReport report;
  report.kind = config.kind;
  for (int k = k_min; k <= k_max; ++k) {
    SelectionRow row;
    row.K = k;
    FitConfig cfg = config;
    cfg.K = k;
    cfg.seed = selection_seed(config.seed, k);
    try {
      FitResult res = fit(net, cfg);
      row.hybrid_ll = res.hybrid_ll();
      row.complete_hybrid_ll =
          complete_log_likelihood(net, res.params, Partition(res.partition.labels, k), res.kind);
      row.bic = row.hybrid_ll - bic_penalty(k, net.num_layers(), net.num_nodes(), res.kind);
      row.icl = row.complete_hybrid_ll - icl_penalty(k, net.num_layers(), net.num_nodes(), res.kind);
      row.fit = std::move(res);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  double best_bic = -std::numeric_limits<double>::infinity();
  double best_icl = -std::numeric_limits<double>::infinity();
  for (const SelectionRow& row : report.rows) {
    if (!row.ok()) continue;
    if (row.bic > best_bic || report.chosen_K_bic == 0) {
      best_bic = row.bic;
      report.chosen_K_bic = row.K;
    }
    if (row.icl > best_icl || report.chosen_K_icl == 0) {
      best_icl = row.icl;
      report.chosen_K_icl = row.K;
    }
  }
  return report;
}

}  // namespace mdsbm
