#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "multidirsbm/likelihood.hpp"
#include "multidirsbm/special_math.hpp"
#include "oracle.hpp"

using namespace mdsbm;

namespace {

CompositionalMultiplex full_network(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  RawMultiplex raw;
  for (int i = 0; i < n; ++i) raw.node_ids.push_back("n" + std::to_string(i));
  raw.layer_names = {"only"};
  Matrix y(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) y(i, j) = i == j ? 0.0 : u(rng);
  raw.weights = {y};
  return to_compositional(raw);
}

// Finite-difference check of the A-gradient; returns ||g - fd||_F / ||fd||_F.
double gradient_relative_error(const CompositionalMultiplex& net, const ModelParams& params, const Partition& part,
                               int layer) {
  const Matrix g = grad_A_expected_complete_ll(net, params, part, layer);
  Matrix fd(g.rows(), g.cols());
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < g.rows(); ++k)
    for (Eigen::Index l = 0; l < g.cols(); ++l) {
      ModelParams up = params, down = params;
      up.A[layer](k, l) += h;
      down.A[layer](k, l) -= h;
      fd(k, l) = (expected_complete_ll(net, up, part) - expected_complete_ll(net, down, part)) / (2 * h);
    }
  return (g - fd).norm() / std::max(fd.norm(), 1e-300);
}

}  // namespace

TEST(HybridLikelihood, IsolatedSenderHasOnlyBernoulliTerms) {
  Matrix y = Matrix::Zero(3, 3);
  y(1, 0) = 1.0;
  y(1, 2) = 3.0;
  RawMultiplex raw{{"a", "b", "c"}, {"x"}, {y}};
  const auto net = to_compositional(raw);
  ModelParams p = ModelParams::neutral(2, 1);
  p.A[0] << 0.4, 2.5, 1.7, 0.9;
  p.P[0] << 0.3, 0.6, 0.2, 0.8;
  Labels c(3);
  c << 0, 1, 1;
  const Matrix full = sender_log_terms(net, p, c, 0, ModelKind::Full);
  const Matrix bern = sender_log_terms(net, p, c, 0, ModelKind::BinaryOnly);
  EXPECT_EQ(full.row(0), bern.row(0));  // node a sends nothing
  EXPECT_EQ(full.row(2), bern.row(2));
  EXPECT_NE(full(1, 0), bern(1, 0));
}

TEST(HybridLikelihood, SingleClusterFullyConnectedClosedForm) {
  std::mt19937_64 rng(5);
  const int n = 6;
  const auto net = full_network(n, rng);
  ModelParams p = ModelParams::neutral(1, 1);
  p.P[0].setConstant(1.0);
  p.A[0].setConstant(1.0);
  const Partition part(Labels::Zero(n), 1);
  EXPECT_NEAR(hybrid_log_likelihood(net, p, part), n * std::lgamma(n - 1.0), 1e-10);
}

TEST(HybridLikelihood, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 40; ++t) {
    const int n = 3 + t % 5, k = 1 + t % 3, s = 1 + t % 2;
    const auto net = oracle::random_network(n, s, 0.6, rng);
    const auto p = oracle::random_params(k, s, rng);
    const auto c = oracle::random_labels(n, k, rng);
    const Partition part(c, k);
    EXPECT_NEAR(hybrid_log_likelihood(net, p, part), oracle::hybrid(net, p, c), 1e-10);
    EXPECT_NEAR(complete_log_likelihood(net, p, part), oracle::complete(net, p, c), 1e-10);
    EXPECT_NEAR(hybrid_log_likelihood(net, p, part, ModelKind::BinaryOnly), oracle::hybrid(net, p, c, false), 1e-10);
  }
}

TEST(HybridLikelihood, ThreeNodeSingleLayerTwoClusters) {
  std::mt19937_64 rng(99);
  const auto net = oracle::random_network(3, 1, 0.7, rng);
  const auto p = oracle::random_params(2, 1, rng);
  Labels c(3);
  c << 0, 1, 0;
  EXPECT_NEAR(hybrid_log_likelihood(net, p, Partition(c, 2)), oracle::hybrid(net, p, c), 1e-10);
}

TEST(HybridLikelihood, ReducesToDirichletOnlyModelWhenFullyConnected) {
  std::mt19937_64 rng(13);
  const auto net = full_network(6, rng);
  auto p = oracle::random_params(2, 1, rng);
  p.P[0].setConstant(1.0);
  const auto c = oracle::random_labels(6, 2, rng);
  // Dirichlet-only hybrid likelihood, evaluated independently
  double dirsbm = 0.0;
  for (int i = 0; i < 6; ++i) {
    double acc = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double full = oracle::sender_term(net, p, c, 0, i, k, true);
      const double bern = oracle::sender_term(net, p, c, 0, i, k, false);
      acc += p.theta[k] * std::exp(full - bern);
    }
    dirsbm += std::log(acc);
  }
  EXPECT_NEAR(hybrid_log_likelihood(net, p, Partition(c, 2)), dirsbm, 1e-10);
}

TEST(HybridLikelihood, InvariantUnderClusterRelabelling) {
  std::mt19937_64 rng(21);
  const auto net = oracle::random_network(7, 2, 0.5, rng);
  const auto p = oracle::random_params(3, 2, rng);
  const auto c = oracle::random_labels(7, 3, rng);
  const Matrix z = oracle::random_responsibilities(7, 3, rng);
  const std::vector<int> perm{2, 0, 1};  // new cluster perm[k] = old cluster k
  ModelParams q = p;
  Labels d(7);
  Matrix w(7, 3);
  for (int k = 0; k < 3; ++k) {
    q.theta[perm[k]] = p.theta[k];
    for (int s = 0; s < 2; ++s)
      for (int h = 0; h < 3; ++h) {
        q.P[s](perm[k], perm[h]) = p.P[s](k, h);
        q.A[s](perm[k], perm[h]) = p.A[s](k, h);
      }
    w.col(perm[k]) = z.col(k);
  }
  for (int i = 0; i < 7; ++i) d[i] = perm[c[i]];
  EXPECT_NEAR(hybrid_log_likelihood(net, p, Partition(c, 3)), hybrid_log_likelihood(net, q, Partition(d, 3)), 1e-10);
  EXPECT_NEAR(complete_log_likelihood(net, p, Partition(c, 3)), complete_log_likelihood(net, q, Partition(d, 3)),
              1e-10);
  EXPECT_NEAR(expected_complete_ll(net, p, Partition(c, 3, z)), expected_complete_ll(net, q, Partition(d, 3, w)),
              1e-10);
}

TEST(HybridLikelihood, FiniteAtExtremeParameters) {
  std::mt19937_64 rng(2);
  const auto net = oracle::random_network(6, 2, 0.5, rng);
  auto p = oracle::random_params(2, 2, rng);
  p.P[0] << 0.0, 1.0, 1.0, 0.0;
  p.A[0] << 1e-8, 1e4, 1e4, 1e-8;
  const auto c = oracle::random_labels(6, 2, rng);
  EXPECT_TRUE(std::isfinite(hybrid_log_likelihood(net, p, Partition(c, 2))));
  EXPECT_TRUE(std::isfinite(complete_log_likelihood(net, p, Partition(c, 2))));
  // estimates themselves are stored unclamped
  EXPECT_EQ(p.P[0](0, 0), 0.0);
}

TEST(ExpectedCompleteLl, CollapsesForHardResponsibilities) {
  std::mt19937_64 rng(4);
  const auto net = oracle::random_network(6, 2, 0.6, rng);
  const auto p = oracle::random_params(3, 2, rng);
  const auto c = oracle::random_labels(6, 3, rng);
  const Partition part(c, 3, one_hot(c, 3));
  EXPECT_NEAR(expected_complete_ll(net, p, part), complete_log_likelihood(net, p, part), 1e-10);
}

TEST(ExpectedCompleteLl, UniformThetaTermIsNLogHalf) {
  std::mt19937_64 rng(8);
  const int n = 5;
  const auto net = oracle::random_network(n, 1, 0.6, rng);
  auto p = oracle::random_params(2, 1, rng);
  p.theta.setConstant(0.5);
  const auto c = oracle::random_labels(n, 2, rng);
  const Matrix z = Matrix::Constant(n, 2, 0.5);
  double without_theta = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k) without_theta += 0.5 * oracle::sender_term(net, p, c, 0, i, k);
  EXPECT_NEAR(expected_complete_ll(net, p, Partition(c, 2, z)) - without_theta, n * std::log(0.5), 1e-10);
}

TEST(ExpectedCompleteLl, MatchesOracle) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const int n = 3 + t % 5, k = 1 + t % 3, s = 1 + t % 2;
    const auto net = oracle::random_network(n, s, 0.6, rng);
    const auto p = oracle::random_params(k, s, rng);
    const auto c = oracle::random_labels(n, k, rng);
    const Matrix z = oracle::random_responsibilities(n, k, rng);
    EXPECT_NEAR(expected_complete_ll(net, p, Partition(c, k, z)), oracle::expected_complete(net, p, c, z), 1e-10);
  }
}

TEST(ExpectedCompleteLl, RequiresResponsibilities) {
  std::mt19937_64 rng(1);
  const auto net = oracle::random_network(4, 1, 0.6, rng);
  const auto p = oracle::random_params(2, 1, rng);
  EXPECT_THROW(expected_complete_ll(net, p, Partition(oracle::random_labels(4, 2, rng), 2)), std::invalid_argument);
}

TEST(GradA, MatchesCentralDifferences) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + t % 6, k = 1 + t % 3, s = 1 + t % 2;
    const auto net = oracle::random_network(n, s, 0.3 + 0.6 * (t % 4) / 3.0, rng);
    const auto p = oracle::random_params(k, s, rng);
    const auto c = oracle::random_labels(n, k, rng);
    const Partition part(c, k, oracle::random_responsibilities(n, k, rng));
    for (int layer = 0; layer < s; ++layer) EXPECT_LT(gradient_relative_error(net, p, part, layer), 1e-5) << t;
  }
}

TEST(GradA, SymmetricUnderClusterSwap) {
  // nodes 0,1 in cluster 0 and 2,3 in cluster 1; the map 0<->2, 1<->3 is an automorphism
  Matrix y = Matrix::Zero(4, 4);
  y(0, 1) = 1.0, y(0, 2) = 2.0, y(0, 3) = 0.5;
  y(1, 0) = 3.0, y(1, 3) = 1.0;
  y(2, 3) = 1.0, y(2, 0) = 2.0, y(2, 1) = 0.5;
  y(3, 2) = 3.0, y(3, 1) = 1.0;
  const auto net = to_compositional(RawMultiplex{{"a", "b", "c", "d"}, {"x"}, {y}});
  ModelParams p = ModelParams::neutral(2, 1);
  p.A[0] << 1.3, 0.7, 0.7, 1.3;
  p.P[0] << 0.6, 0.4, 0.4, 0.6;
  Labels c(4);
  c << 0, 0, 1, 1;
  Matrix z(4, 2);
  z << 0.8, 0.2, 0.6, 0.4, 0.2, 0.8, 0.4, 0.6;
  const Matrix g = grad_A_expected_complete_ll(net, p, Partition(c, 2, z), 0);
  EXPECT_NEAR(g(0, 0), g(1, 1), 1e-12);
  EXPECT_NEAR(g(0, 1), g(1, 0), 1e-12);
}

TEST(CheckCompatible, RejectsMismatches) {
  std::mt19937_64 rng(1);
  const auto net = oracle::random_network(4, 2, 0.6, rng);
  auto p = oracle::random_params(2, 2, rng);
  const auto c = oracle::random_labels(4, 2, rng);
  EXPECT_NO_THROW(check_compatible(net, p, Partition(c, 2)));
  EXPECT_THROW(check_compatible(net, p, Partition(c, 3)), std::invalid_argument);
  auto one_layer = p;
  one_layer.P.pop_back();
  one_layer.A.pop_back();
  EXPECT_THROW(check_compatible(net, one_layer, Partition(c, 2)), std::invalid_argument);
  auto bad_alpha = p;
  bad_alpha.A[1](0, 1) = 0.0;
  EXPECT_THROW(hybrid_log_likelihood(net, bad_alpha, Partition(c, 2)), std::invalid_argument);
}
