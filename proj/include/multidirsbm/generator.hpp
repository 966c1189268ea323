#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "multidirsbm/likelihood.hpp"
#include "multidirsbm/network.hpp"

namespace mdsbm {

/// Parameters of a synthetic multiplex plus the seed that drives sampling.
struct Scenario {
  std::string name;
  std::string description;
  int n = 0;
  ModelParams params;
  std::uint64_t seed = 1;

  int num_clusters() const { return params.num_clusters(); }
  int num_layers() const { return params.num_layers(); }

  /// Throws std::invalid_argument if the parameters break ModelParams ranges.
  void validate() const;
};

struct GeneratedNetwork {
  RawMultiplex raw;
  CompositionalMultiplex network;
  Labels labels;  // 0-based truth
};

/// Samples labels ~ Categorical(theta), edges ~ Bernoulli(P^(s)), weights
/// ~ Gamma(A^(s), 1) on present edges, and normalizes rows. Node ids are
/// zero-padded so that lexicographic order equals index order.
GeneratedNetwork generate(const Scenario& scenario);

/// Built-in scenario presets (simulation table rows, uniform mixing).
const std::vector<Scenario>& presets();
std::vector<std::string> preset_names();
/// Throws std::out_of_range listing the available presets.
Scenario preset(std::string_view name);

/// The embedded preset document and its FNV-1a 64-bit checksum.
std::string_view presets_document();
std::uint64_t fnv1a64(std::string_view bytes);

/// Parses a scenario document: {name?, n, K, S?, theta?, P: [...], A: [...], seed?}.
Scenario scenario_from_json(std::string_view text);

/// Node id used by the generator for 0-based index i out of n.
std::string synthetic_node_id(int index, int num_nodes);

}  // namespace mdsbm
