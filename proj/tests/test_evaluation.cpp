#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "multidirsbm/evaluation.hpp"
#include "multidirsbm/generator.hpp"
#include "multidirsbm/rng.hpp"
#include "oracle.hpp"

using namespace mdsbm;

namespace {

Labels labels(std::initializer_list<int> v) {
  Labels l(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (int x : v) l[i++] = x;
  return l;
}

// exhaustive search with the cost written out independently
double brute_cost(const ModelParams& t, const ModelParams& e, const std::vector<int>& perm) {
  double cost = 0.0;
  for (int s = 0; s < t.num_layers(); ++s) {
    double sq = 0.0;
    for (int k = 0; k < t.num_clusters(); ++k)
      for (int h = 0; h < t.num_clusters(); ++h) sq += std::pow(t.A[s](k, h) - e.A[s](perm[k], perm[h]), 2);
    cost += std::sqrt(sq);
  }
  return cost;
}

}  // namespace

TEST(Ari, IdenticalAndRelabelled) {
  const Labels a = labels({0, 0, 1, 1, 2, 2, 2});
  EXPECT_EQ(ari(a, a), 1.0);
  EXPECT_EQ(ari(a, labels({5, 5, -1, -1, 9, 9, 9})), 1.0);
}

TEST(Ari, SmallExampleMatchesPairCounting) {
  const Labels a = labels({1, 1, 2, 2}), b = labels({1, 2, 2, 2});
  EXPECT_EQ(ari(a, b), oracle::pair_counting_ari(a, b));
  // pairs: 1 together in both, 1 only in a, 2 only in b, 2 in neither; ad - bc = 0
  EXPECT_EQ(ari(a, b), 0.0);
}

TEST(Ari, AllPartitionsUpToSixNodes) {
  // ARI from the contingency table and from pair counting are the same
  // rational number; both are evaluated as one exact integer ratio.
  for (int n = 2; n <= 6; ++n) {
    const std::vector<Labels> parts = oracle::all_partitions(n);
    for (const Labels& x : parts)
      for (const Labels& y : parts) {
        const double v = ari(x, y);
        ASSERT_EQ(v, oracle::pair_counting_ari(x, y)) << "n=" << n;
        ASSERT_EQ(v, ari(y, x));
        ASSERT_LE(v, 1.0);
        ASSERT_GE(v, -1.0);
        if (v == 1.0 && n >= 3) {
          // 1 only for identical partitions up to relabelling (or both trivial)
          const bool trivial_x = x.maxCoeff() == 0 || x.maxCoeff() == n - 1;
          const bool trivial_y = y.maxCoeff() == 0 || y.maxCoeff() == n - 1;
          if (!(trivial_x && trivial_y)) ASSERT_EQ(x, y);
        }
      }
  }
}

TEST(Ari, PermutationInvariance) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const Labels x = oracle::random_labels(30, 4, rng), y = oracle::random_labels(30, 3, rng);
    std::vector<int> perm = {2, 0, 3, 1};
    Labels xp = x;
    for (int i = 0; i < 30; ++i) xp[i] = perm[x[i]];
    EXPECT_EQ(ari(x, y), ari(xp, y));
  }
}

TEST(Ari, Errors) {
  EXPECT_THROW(ari(labels({0, 1}), labels({0, 1, 1})), std::invalid_argument);
  EXPECT_THROW(ari(labels({0}), labels({0})), std::invalid_argument);
}

TEST(AlignedFrobenius, RelabelledTruthIsZero) {
  std::mt19937_64 rng(4);
  const ModelParams t = oracle::random_params(4, 2, rng);
  const std::vector<int> perm = {3, 1, 0, 2};
  // estimate with cluster perm[k] playing the role of true cluster k
  ModelParams e = t;
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < 4; ++k)
      for (int h = 0; h < 4; ++h) {
        e.P[s](perm[k], perm[h]) = t.P[s](k, h);
        e.A[s](perm[k], perm[h]) = t.A[s](k, h);
      }
  const Alignment al = aligned_frobenius(t, e);
  EXPECT_EQ(al.frobenius_A, 0.0);
  EXPECT_EQ(al.frobenius_P, 0.0);
  EXPECT_EQ(al.permutation, perm);
}

TEST(AlignedFrobenius, SingleEntryPerturbation) {
  std::mt19937_64 rng(5);
  const ModelParams t = oracle::random_params(3, 2, rng);
  ModelParams e = t;
  e.A[1](0, 2) += 0.1;
  e.P[0](2, 1) += 0.1;
  const Alignment al = aligned_frobenius(t, e);
  EXPECT_NEAR(al.frobenius_A, 0.05, 1e-12);
  EXPECT_NEAR(al.frobenius_P, 0.05, 1e-12);
}

TEST(AlignedFrobenius, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 40; ++t) {
    const int k = 1 + t % 5, s = 1 + t % 3;
    const ModelParams tr = oracle::random_params(k, s, rng), es = oracle::random_params(k, s, rng);
    std::vector<int> perm(k), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = 1e300;
    do {
      const double c = brute_cost(tr, es, perm);
      if (c < best_cost) best_cost = c, best = perm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    const Alignment al = aligned_frobenius(tr, es);
    EXPECT_NEAR(al.frobenius_A, best_cost / s, 1e-12);
    // the reported P distance uses the same single permutation
    double p = 0.0;
    for (int l = 0; l < s; ++l) {
      double sq = 0.0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sq += std::pow(tr.P[l](a, b) - es.P[l](best[a], best[b]), 2);
      p += std::sqrt(sq);
    }
    EXPECT_NEAR(al.frobenius_P, p / s, 1e-12);
    // aligning never does worse than the identity labelling
    std::vector<int> id(k);
    std::iota(id.begin(), id.end(), 0);
    EXPECT_LE(al.frobenius_A, brute_cost(tr, es, id) / s + 1e-12);
  }
}

TEST(AlignedFrobenius, Errors) {
  const ModelParams a = ModelParams::neutral(9, 1), b = ModelParams::neutral(9, 1);
  EXPECT_THROW(aligned_frobenius(a, b), std::invalid_argument);
  EXPECT_THROW(aligned_frobenius(ModelParams::neutral(2, 1), ModelParams::neutral(3, 1)), std::invalid_argument);
  EXPECT_THROW(aligned_frobenius(ModelParams::neutral(2, 1), ModelParams::neutral(2, 2)), std::invalid_argument);
}

TEST(KMeans, SeparableClusters) {
  Matrix x(10, 3);
  for (int i = 0; i < 10; ++i) x.row(i) = (i < 4 ? Eigen::RowVector3d(0, 0, 1) : Eigen::RowVector3d(50, 50, 0));
  const KMeansResult r = kmeans(x, 2, 1);
  EXPECT_EQ(ari(r.labels, labels({0, 0, 0, 0, 1, 1, 1, 1, 1, 1})), 1.0);
  EXPECT_NEAR(r.inertia, 0.0, 1e-12);
}

TEST(KMeans, SingleCluster) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Matrix x(15, 4);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 4; ++j) x(i, j) = nd(rng);
  const KMeansResult r = kmeans(x, 1, 3);
  EXPECT_TRUE((r.labels.array() == 0).all());
  const Eigen::RowVectorXd mean = x.colwise().mean();
  EXPECT_NEAR(r.inertia, (x.rowwise() - mean).squaredNorm(), 1e-10);
}

TEST(KMeans, DeterministicAndErrors) {
  const GeneratedNetwork g = generate(preset("t1-row3"));
  EXPECT_EQ(kmeans_baseline(g.raw, 3, 11), kmeans_baseline(g.raw, 3, 11));
  EXPECT_THROW(kmeans_baseline(g.raw, 51, 1), std::invalid_argument);
  EXPECT_THROW(kmeans_baseline(g.raw, 0, 1), std::invalid_argument);
}

TEST(KMeans, StackedFeatureLayout) {
  RawMultiplex raw;
  raw.node_ids = {"a", "b"};
  raw.layer_names = {"x", "y"};
  Matrix y1(2, 2), y2(2, 2);
  y1 << 0, 1, 2, 0;
  y2 << 0, 3, 4, 0;
  raw.weights = {y1, y2};
  Matrix expect(2, 4);
  expect << 0, 1, 0, 3, 2, 0, 4, 0;
  EXPECT_EQ(stacked_features(raw), expect);
}

TEST(KMeans, PublishedBaselineOnEasiestScenario) {
  // 20 replicates of n=50, K=2, S=2, high density, no overlap;
  // the published mean ARI is 0.949 and the tolerance is 0.15.
  double total = 0.0;
  for (int r = 0; r < 20; ++r) {
    Scenario sc = preset("t1-row1");
    sc.seed = derive_seed(2024, r);
    const GeneratedNetwork g = generate(sc);
    total += ari(kmeans_baseline(g.raw, 2, derive_seed(sc.seed, 7)), g.labels);
  }
  const double mean = total / 20.0;
  EXPECT_NEAR(mean, 0.95, 0.15) << "mean ARI " << mean;
}
