#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "multidirsbm/generator.hpp"
#include "multidirsbm/rng.hpp"

using namespace mdsbm;

namespace {

Scenario make(int n, const Vector& theta, const LayerStack& P, const LayerStack& A, std::uint64_t seed) {
  Scenario sc;
  sc.name = "test";
  sc.n = n;
  sc.params.theta = theta;
  sc.params.P = P;
  sc.params.A = A;
  sc.seed = seed;
  return sc;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// one-sample KS distance of u against Uniform(0, 1)
double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
  return d;
}

}  // namespace

TEST(Generate, SaturatedConnectivityGivesCompleteLayers) {
  const Matrix ones = Matrix::Ones(2, 2);
  const GeneratedNetwork g = generate(make(12, Vector::Constant(2, 0.5), {ones, ones, ones}, {ones, 2 * ones, ones}, 9));
  for (int s = 0; s < 3; ++s)
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) EXPECT_EQ(g.network.edges[s](i, j), i == j ? 0 : 1);
}

TEST(Generate, ZeroConnectivityGivesEmptyLayers) {
  const GeneratedNetwork g =
      generate(make(8, Vector::Constant(1, 1.0), {Matrix::Zero(1, 1)}, {Matrix::Ones(1, 1)}, 2));
  EXPECT_EQ(g.network.edges[0].cast<int>().sum(), 0);
  EXPECT_EQ(g.network.shares[0].sum(), 0.0);
  EXPECT_TRUE(validate(g.network).empty());
}

TEST(Generate, UniformDirichletMeanShare) {
  // K=1, alpha=1, p=1: x_ij ~ Beta(1, n-2), mean 1/(n-1)
  const int n = 10, reps = 10000;
  const Scenario base = make(n, Vector::Constant(1, 1.0), {Matrix::Ones(1, 1)}, {Matrix::Ones(1, 1)}, 0);
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Scenario sc = base;
    sc.seed = derive_seed(77, r);
    const double x = generate(sc).network.shares[0](0, 1);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / (reps - 1.0));
  EXPECT_LT(std::abs(mean - 1.0 / (n - 1)), 3.0 * se) << "mean " << mean << " se " << se;
}

TEST(Generate, BlockEdgeFrequencies) {
  const LayerStack P = {mat2(0.7, 0.1, 0.25, 0.5), mat2(0.05, 0.9, 0.4, 0.3)};
  const LayerStack A = {Matrix::Ones(2, 2), Matrix::Ones(2, 2)};
  Vector theta(2);
  theta << 0.4, 0.6;
  const GeneratedNetwork g = generate(make(200, theta, P, A, 31));
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < 2; ++k)
      for (int h = 0; h < 2; ++h) {
        double edges = 0.0, pairs = 0.0;
        for (int i = 0; i < 200; ++i)
          for (int j = 0; j < 200; ++j) {
            if (i == j || g.labels[i] != k || g.labels[j] != h) continue;
            pairs += 1.0;
            edges += g.network.edges[s](i, j);
          }
        ASSERT_GT(pairs, 0.0);
        const double p = P[s](k, h);
        const double se = std::sqrt(p * (1.0 - p) / pairs);
        EXPECT_LT(std::abs(edges / pairs - p), 3.0 * se) << "layer " << s << " block " << k << h;
      }
}

TEST(Generate, NormalizedGammaRowsHaveDirichletMarginals) {
  // Probability integral transform of x_01 through its Beta(a_j, sum a - a_j)
  // marginal, given that replicate's labels; the result must be Uniform(0, 1).
  const int n = 6, reps = 10000;
  const Matrix a = mat2(0.7, 2.0, 3.0, 1.5);
  const Scenario base = make(n, Vector::Constant(2, 0.5), {Matrix::Ones(2, 2)}, {a}, 0);
  std::vector<double> u;
  u.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    Scenario sc = base;
    sc.seed = derive_seed(123, r);
    const GeneratedNetwork g = generate(sc);
    const int ci = g.labels[0];
    double mass = 0.0;
    for (int j = 1; j < n; ++j) mass += a(ci, g.labels[j]);
    const double aj = a(ci, g.labels[1]);
    u.push_back(boost::math::ibeta(aj, mass - aj, g.network.shares[0](0, 1)));
  }
  const double d = ks_uniform(u);
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(reps))) << "KS distance " << d;
}

TEST(Generate, RawAndCompositionalAgree) {
  const Scenario sc = preset("t1-row6");
  const GeneratedNetwork g = generate(sc);
  EXPECT_TRUE(validate(g.raw).empty());
  EXPECT_TRUE(validate(g.network).empty());
  const CompositionalMultiplex again = to_compositional(g.raw);
  for (int s = 0; s < sc.num_layers(); ++s) {
    EXPECT_TRUE((again.edges[s].array() == g.network.edges[s].array()).all());
    EXPECT_LT((again.shares[s] - g.network.shares[s]).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(((g.raw.weights[s].array() > 0.0) == (g.network.edges[s].array() == 1)).all());
  }
  EXPECT_EQ(g.labels.size(), sc.n);
  EXPECT_GE(g.labels.minCoeff(), 0);
  EXPECT_LT(g.labels.maxCoeff(), sc.num_clusters());
}

TEST(Generate, EveryPresetProducesValidNetworks) {
  for (const Scenario& sc : presets()) {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
      Scenario s = sc;
      s.seed = seed;
      const GeneratedNetwork g = generate(s);
      EXPECT_TRUE(validate(g.network).empty()) << sc.name;
      EXPECT_EQ(g.network.num_nodes(), sc.n);
      EXPECT_EQ(g.network.num_layers(), sc.num_layers());
    }
  }
}

TEST(Generate, DeterministicGivenSeed) {
  Scenario sc = preset("t1-row3");
  sc.seed = 42;
  const GeneratedNetwork a = generate(sc), b = generate(sc);
  EXPECT_EQ(a.labels, b.labels);
  for (int s = 0; s < sc.num_layers(); ++s) EXPECT_EQ(a.raw.weights[s], b.raw.weights[s]);
  sc.seed = 43;
  const GeneratedNetwork c = generate(sc);
  EXPECT_NE(a.raw.weights[0], c.raw.weights[0]);
}

TEST(Generate, NodeIdsSortInIndexOrder) {
  const GeneratedNetwork g = generate(preset("t1-row5"));
  EXPECT_EQ(g.raw.node_ids.front(), "n001");
  EXPECT_EQ(g.raw.node_ids.back(), "n100");
  EXPECT_TRUE(std::is_sorted(g.raw.node_ids.begin(), g.raw.node_ids.end()));
  EXPECT_EQ(synthetic_node_id(0, 9), "n1");
  EXPECT_EQ(synthetic_node_id(9, 10), "n10");
}

TEST(Generate, InvalidScenarioThrows) {
  Scenario sc = make(5, Vector::Constant(2, 0.5), {mat2(0.5, 1.2, 0, 0)}, {Matrix::Ones(2, 2)}, 1);
  EXPECT_THROW(generate(sc), std::invalid_argument);
  sc.params.P[0] = Matrix::Constant(2, 2, 0.5);
  sc.params.A[0](1, 0) = 0.0;
  EXPECT_THROW(generate(sc), std::invalid_argument);
  sc.params.A[0](1, 0) = 1.0;
  sc.params.theta << 0.7, 0.7;
  EXPECT_THROW(generate(sc), std::invalid_argument);
}

TEST(Presets, NamesAndShapes) {
  const std::vector<std::string> names = preset_names();
  ASSERT_EQ(names.size(), 8u);
  const int n[] = {50, 50, 50, 50, 100, 100, 100, 100};
  const int k[] = {2, 2, 3, 3, 3, 3, 5, 5};
  const int s[] = {2, 4, 2, 4, 2, 4, 2, 4};
  for (int r = 0; r < 8; ++r) {
    const Scenario sc = preset("t1-row" + std::to_string(r + 1));
    EXPECT_EQ(sc.n, n[r]);
    EXPECT_EQ(sc.num_clusters(), k[r]);
    EXPECT_EQ(sc.num_layers(), s[r]);
    EXPECT_NEAR(sc.params.theta.sum(), 1.0, 1e-15);
  }
  EXPECT_NE(preset("t1-row1").description.find("no overlap"), std::string::npos);
}

TEST(Presets, UnknownNameListsAvailable) {
  try {
    preset("t1-row9");
    FAIL() << "expected throw";
  } catch (const std::out_of_range& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("t1-row9"), std::string::npos);
    for (const std::string& name : preset_names()) EXPECT_NE(msg.find(name), std::string::npos);
  }
}

TEST(Presets, ChecksumIsFrozen) {
  // Any edit to data/presets.json must be deliberate and update this constant.
  EXPECT_EQ(fnv1a64(presets_document()), 0x65d13d6236c4a8dcULL);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Presets, SpotValuesFromPublishedMatrices) {
  // K=3, second concentration matrix
  Matrix a2(3, 3);
  a2 << 1.1, 0.7, 0.4, 0.8, 1.0, 0.5, 0.4, 0.6, 1.3;
  EXPECT_EQ(preset("t1-row3").params.A[1], a2);
  // K=5, S=4, low density with overlap: fourth connectivity matrix
  Matrix p4(5, 5);
  p4 << 0.6, 0.1, 0.5, 0.2, 0.25, 0.2, 0.65, 0.15, 0.5, 0.1, 0.25, 0.3, 0.4, 0.35, 0.15, 0.3, 0.15, 0.25, 0.45,
      0.35, 0.4, 0.2, 0.3, 0.15, 0.55;
  EXPECT_EQ(preset("t1-row8").params.P[3], p4);
  // K=5 second concentration row 4
  EXPECT_EQ(preset("t1-row7").params.A[1](3, 3), 1.4);
  EXPECT_EQ(preset("t1-row7").params.A[1](4, 4), 1.7);
}

TEST(ScenarioJson, ParsesAndValidates) {
  const Scenario sc = scenario_from_json(R"({"name":"x","n":7,"K":2,"P":[[[0.5,0.1],[0.2,0.9]]],
      "A":[[[1,2],[3,4]]],"seed":5,"theta":[0.25,0.75]})");
  EXPECT_EQ(sc.name, "x");
  EXPECT_EQ(sc.n, 7);
  EXPECT_EQ(sc.seed, 5u);
  EXPECT_EQ(sc.num_layers(), 1);
  EXPECT_DOUBLE_EQ(sc.params.theta[1], 0.75);
  EXPECT_DOUBLE_EQ(sc.params.A[0](1, 0), 3.0);
  EXPECT_THROW(scenario_from_json(R"({"n":7,"K":2,"P":[[[0.5,0.1],[0.2,0.9]]],"A":[[[1,2],[3,-4]]]})"),
               std::invalid_argument);
  EXPECT_THROW(scenario_from_json(R"({"n":7,"K":3,"P":[[[0.5,0.1],[0.2,0.9]]],"A":[[[1,2],[3,4]]]})"),
               std::exception);
}
