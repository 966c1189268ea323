#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "multidirsbm/likelihood.hpp"
#include "multidirsbm/network.hpp"

namespace mdsbm {

/// Adjusted Rand index from the contingency table. Evaluated as a single
/// ratio of exact integers, so equal rationals give identical doubles.
/// Label values are arbitrary integers. Throws on length mismatch or n < 2.
double ari(const Labels& a, const Labels& b);

/// Parameter distances after the best global relabelling of the estimate.
struct Alignment {
  double frobenius_P = 0.0;  // mean over layers of ||P - P_hat||_F
  double frobenius_A = 0.0;
  std::vector<int> permutation;  // true cluster k <-> estimated cluster permutation[k]
};

/// Searches all K! relabellings of `estimate` for the one minimizing the
/// summed per-layer Frobenius distance on A, then reports per-layer means for
/// P and A under it. Throws std::invalid_argument for K > 8 or shape mismatch.
Alignment aligned_frobenius(const ModelParams& truth, const ModelParams& estimate);

/// Estimate relabelled by `permutation` (row/column k taken from permutation[k]).
ModelParams permute_clusters(const ModelParams& params, const std::vector<int>& permutation);

struct Metrics {
  std::optional<double> ari;
  std::optional<Alignment> alignment;
};

struct KMeansResult {
  Labels labels;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
KMeansResult kmeans(const Matrix& observations, int num_clusters, std::uint64_t seed, int restarts = 10,
                    int max_iter = 300);

/// n x (S n) design: row i concatenates node i's outgoing raw weights over layers.
Matrix stacked_features(const RawMultiplex& raw);

/// k-means on the raw stacked sender rows, 10 restarts.
Labels kmeans_baseline(const RawMultiplex& raw, int num_clusters, std::uint64_t seed);

}  // namespace mdsbm
