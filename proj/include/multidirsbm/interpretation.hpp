#pragma once

#include <string>
#include <vector>

#include "multidirsbm/network.hpp"
#include "multidirsbm/types.hpp"

namespace mdsbm {

/// Expected exchange shares implied by fitted concentrations.
struct InterpretationSummary {
  LayerStack W;  // n x n per layer, node-to-node
  LayerStack V;  // K x K per layer, cluster-to-cluster
  /// (layer, sender cluster) pairs whose V row is zero for lack of out-edges.
  std::vector<std::pair<int, int>> silent_clusters;
};

/// w_ij = e_ij a(c_i, c_j) / sum_l e_il a(c_i, c_l); zero rows for isolated senders.
LayerStack node_shares(const CompositionalMultiplex& net, const Labels& labels, const LayerStack& A);

/// v_kh = alpha-weighted edge mass from cluster k into h over the total from k.
/// Clusters without out-edges get a zero row and are reported in `silent`.
LayerStack cluster_shares(const CompositionalMultiplex& net, const Labels& labels, const LayerStack& A,
                          std::vector<std::pair<int, int>>* silent = nullptr);

InterpretationSummary interpret(const CompositionalMultiplex& net, const Labels& labels, const LayerStack& A);

/// Long-format (layer, sender, receiver, share) rows for chord diagrams.
struct ChordRow {
  std::string layer;
  int sender;    // 1-based cluster
  int receiver;  // 1-based cluster
  double share;
};

std::vector<ChordRow> chord_table(const InterpretationSummary& summary, const std::vector<std::string>& layer_names);

}  // namespace mdsbm
