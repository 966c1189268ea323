#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "multidirsbm/types.hpp"

namespace mdsbm {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw nonnegative weights per layer over one shared, ordered node set.
struct RawMultiplex {
  std::vector<std::string> node_ids;
  std::vector<std::string> layer_names;
  LayerStack weights;  // Y^(s), n x n, zero diagonal

  int num_nodes() const { return static_cast<int>(node_ids.size()); }
  int num_layers() const { return static_cast<int>(weights.size()); }
};

/// Row-normalized sender compositions plus their edge indicators.
struct CompositionalMultiplex {
  std::vector<std::string> node_ids;
  std::vector<std::string> layer_names;
  EdgeStack edges;      // E^(s)
  LayerStack shares;    // X^(s)

  int num_nodes() const { return static_cast<int>(node_ids.size()); }
  int num_layers() const { return static_cast<int>(edges.size()); }

  /// Out-degree d_i^(s).
  int out_degree(int layer, int node) const;
  /// n x S matrix of out-degrees.
  Eigen::MatrixXi out_degrees() const;
};

struct Violation {
  int layer;  // 0-based
  int row;
  int col;
  std::string rule;
  std::string message;  // 1-based human-readable form
};

/// Diagnoses RawMultiplex invariants: shape, zero diagonal, nonnegative finite
/// weights. Empty result means the input is valid.
std::vector<Violation> validate(const RawMultiplex& raw);

/// Structural and share-sum invariants of a compositional network.
std::vector<Violation> validate(const CompositionalMultiplex& net, double tol = 1e-12);

struct ZeroMode {
  enum class Kind { Absent, Replace };
  Kind kind = Kind::Absent;
  double epsilon = 0.001;

  static ZeroMode absent() { return {}; }
  static ZeroMode replace(double eps = 0.001) { return {Kind::Replace, eps}; }
};

/// Converts raw weights to sender compositions. Absent: zeros mean no edge.
/// Replace(eps): every off-diagonal zero becomes eps first, so every
/// off-diagonal pair is an edge. Throws ValidationError on invalid input or
/// a nonpositive eps.
CompositionalMultiplex to_compositional(const RawMultiplex& raw, ZeroMode mode = ZeroMode::absent());

/// True if the union of all layers' edges, ignoring direction, is connected.
bool union_weakly_connected(const CompositionalMultiplex& net);

/// Permutation that sorts ids lexicographically: result[new_index] = old_index.
std::vector<int> lexicographic_order(const std::vector<std::string>& ids);

}  // namespace mdsbm
