#include "multidirsbm/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

#include "multidirsbm/rng.hpp"

namespace mdsbm {

namespace {

std::int64_t pairs_of(std::int64_t m) { return m * (m - 1) / 2; }

std::vector<int> dense_codes(const Labels& labels, int& count) {
  std::map<int, int> codes;
  std::vector<int> out(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = codes.try_emplace(labels[i], static_cast<int>(codes.size()));
    out[i] = it->second;
  }
  count = static_cast<int>(codes.size());
  return out;
}

}  // namespace

double ari(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: partitions have different lengths");
  if (a.size() < 2) throw std::invalid_argument("ari: need at least two items");
  int ka = 0, kb = 0;
  const std::vector<int> ca = dense_codes(a, ka), cb = dense_codes(b, kb);
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> table =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(ka, kb);
  for (std::size_t i = 0; i < ca.size(); ++i) ++table(ca[i], cb[i]);

  std::int64_t index = 0, sum_a = 0, sum_b = 0;
  for (int r = 0; r < ka; ++r) sum_a += pairs_of(table.row(r).sum());
  for (int c = 0; c < kb; ++c) sum_b += pairs_of(table.col(c).sum());
  for (int r = 0; r < ka; ++r)
    for (int c = 0; c < kb; ++c) index += pairs_of(table(r, c));
  const std::int64_t total = pairs_of(static_cast<std::int64_t>(a.size()));

  // ARI = 2 (C x - s_a s_b) / (C (s_a + s_b) - 2 s_a s_b), with C = n choose 2.
  const std::int64_t numerator = 2 * (total * index - sum_a * sum_b);
  const std::int64_t denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
  if (denominator == 0) return 1.0;  // both trivial (one cluster or all singletons)
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

ModelParams permute_clusters(const ModelParams& params, const std::vector<int>& perm) {
  const int kc = params.num_clusters();
  ModelParams out = params;
  for (int k = 0; k < kc; ++k) out.theta[k] = params.theta[perm[k]];
  for (int s = 0; s < params.num_layers(); ++s)
    for (int k = 0; k < kc; ++k)
      for (int h = 0; h < kc; ++h) {
        out.P[s](k, h) = params.P[s](perm[k], perm[h]);
        out.A[s](k, h) = params.A[s](perm[k], perm[h]);
      }
  return out;
}

Alignment aligned_frobenius(const ModelParams& truth, const ModelParams& estimate) {
  const int kc = truth.num_clusters();
  if (estimate.num_clusters() != kc || estimate.num_layers() != truth.num_layers())
    throw std::invalid_argument("aligned_frobenius: K or S differ");
  if (kc > 8) throw std::invalid_argument("aligned_frobenius: K > 8 needs an assignment solver");
  const int layers = truth.num_layers();

  std::vector<int> perm(kc);
  std::iota(perm.begin(), perm.end(), 0);
  Alignment best;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int s = 0; s < layers; ++s) {
      double sq = 0.0;
      for (int k = 0; k < kc; ++k)
        for (int h = 0; h < kc; ++h) {
          const double d = truth.A[s](k, h) - estimate.A[s](perm[k], perm[h]);
          sq += d * d;
        }
      cost += std::sqrt(sq);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const ModelParams aligned = permute_clusters(estimate, best.permutation);
  for (int s = 0; s < layers; ++s) {
    best.frobenius_P += (truth.P[s] - aligned.P[s]).norm();
    best.frobenius_A += (truth.A[s] - aligned.A[s]).norm();
  }
  best.frobenius_P /= layers;
  best.frobenius_A /= layers;
  return best;
}

Matrix stacked_features(const RawMultiplex& raw) {
  const int n = raw.num_nodes();
  Matrix features(n, static_cast<Eigen::Index>(n) * raw.num_layers());
  for (int s = 0; s < raw.num_layers(); ++s) features.middleCols(static_cast<Eigen::Index>(s) * n, n) = raw.weights[s];
  return features;
}

namespace {

KMeansResult lloyd(const Matrix& x, int kc, Rng& rng, int max_iter) {
  const Eigen::Index n = x.rows();
  Matrix centers(kc, x.cols());

  // k-means++ seeding
  boost::random::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = x.row(first(rng));
  Vector dist2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < kc; ++c) {
    Eigen::Index pick = 0;
    if (dist2.sum() > 0.0) {
      boost::random::discrete_distribution<Eigen::Index, double> draw(dist2.data(), dist2.data() + n);
      pick = draw(rng);
    } else {
      pick = first(rng);
    }
    centers.row(c) = x.row(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  KMeansResult res;
  res.labels = Labels::Constant(n, -1);
  Vector best_dist(n);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int arg = 0;
      double d_best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < kc; ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < d_best) {
          d_best = d;
          arg = c;
        }
      }
      best_dist[i] = d_best;
      if (res.labels[i] != arg) {
        res.labels[i] = arg;
        changed = true;
      }
    }
    if (!changed && it > 0) break;

    Matrix sums = Matrix::Zero(kc, x.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(kc);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(res.labels[i]) += x.row(i);
      ++counts[res.labels[i]];
    }
    for (int c = 0; c < kc; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // empty cluster: take over the point farthest from its center
      Eigen::Index far = 0;
      best_dist.maxCoeff(&far);
      centers.row(c) = x.row(far);
      best_dist[far] = 0.0;
      res.labels[far] = c;
    }
  }
  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) res.inertia += (x.row(i) - centers.row(res.labels[i])).squaredNorm();
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& observations, int num_clusters, std::uint64_t seed, int restarts, int max_iter) {
  if (num_clusters < 1 || num_clusters > observations.rows())
    throw std::invalid_argument(fmt::format("k-means: K={} invalid for {} observations", num_clusters,
                                            observations.rows()));
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult run = lloyd(observations, num_clusters, rng, max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

Labels kmeans_baseline(const RawMultiplex& raw, int num_clusters, std::uint64_t seed) {
  return kmeans(stacked_features(raw), num_clusters, seed, 10).labels;
}

}  // namespace mdsbm
