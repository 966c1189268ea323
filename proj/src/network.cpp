#include "multidirsbm/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace mdsbm {

int CompositionalMultiplex::out_degree(int layer, int node) const {
  int d = 0;
  const EdgeMatrix& e = edges[layer];
  for (Eigen::Index j = 0; j < e.cols(); ++j) d += e(node, j);
  return d;
}

Eigen::MatrixXi CompositionalMultiplex::out_degrees() const {
  Eigen::MatrixXi d(num_nodes(), num_layers());
  for (int s = 0; s < num_layers(); ++s)
    for (int i = 0; i < num_nodes(); ++i) d(i, s) = out_degree(s, i);
  return d;
}

namespace {

Violation make_violation(int s, int i, int j, std::string rule, std::string what) {
  std::string msg = fmt::format("{} at ({},{}) layer {}", what, i + 1, j + 1, s + 1);
  return {s, i, j, std::move(rule), std::move(msg)};
}

}  // namespace

std::vector<Violation> validate(const RawMultiplex& raw) {
  std::vector<Violation> out;
  const int n = raw.num_nodes();
  if (!raw.layer_names.empty() && static_cast<int>(raw.layer_names.size()) != raw.num_layers())
    out.push_back({-1, -1, -1, "shape", "layer name count differs from layer count"});
  for (int s = 0; s < raw.num_layers(); ++s) {
    const Matrix& y = raw.weights[s];
    if (y.rows() != n || y.cols() != n) {
      out.push_back({s, -1, -1, "shape",
                     fmt::format("layer {} is {}x{}, expected {}x{}", s + 1, y.rows(), y.cols(), n, n)});
      continue;
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double v = y(i, j);
        if (!std::isfinite(v)) {
          out.push_back(make_violation(s, i, j, "finite", "non-finite weight"));
        } else if (v < 0.0) {
          out.push_back(make_violation(s, i, j, "nonnegative", "negative weight"));
        } else if (i == j && v != 0.0) {
          out.push_back(make_violation(s, i, j, "zero-diagonal", "nonzero diagonal"));
        }
      }
    }
  }
  return out;
}

std::vector<Violation> validate(const CompositionalMultiplex& net, double tol) {
  std::vector<Violation> out;
  const int n = net.num_nodes();
  if (net.shares.size() != net.edges.size())
    out.push_back({-1, -1, -1, "shape", "edge and share layer counts differ"});
  const int layers = static_cast<int>(std::min(net.shares.size(), net.edges.size()));
  for (int s = 0; s < layers; ++s) {
    const EdgeMatrix& e = net.edges[s];
    const Matrix& x = net.shares[s];
    if (e.rows() != n || e.cols() != n || x.rows() != n || x.cols() != n) {
      out.push_back({s, -1, -1, "shape", fmt::format("layer {} has wrong dimensions", s + 1)});
      continue;
    }
    for (int i = 0; i < n; ++i) {
      double row_sum = 0.0;
      int degree = 0;
      for (int j = 0; j < n; ++j) {
        const double v = x(i, j);
        if (e(i, j) > 1) out.push_back(make_violation(s, i, j, "binary", "non-binary edge indicator"));
        if (i == j && (e(i, j) != 0 || v != 0.0)) {
          out.push_back(make_violation(s, i, j, "zero-diagonal", "self-loop"));
          continue;
        }
        if (!std::isfinite(v) || v < 0.0) {
          out.push_back(make_violation(s, i, j, "share-range", "invalid share"));
          continue;
        }
        if ((v > 0.0) != (e(i, j) == 1))
          out.push_back(make_violation(s, i, j, "edge-share", "share/edge mismatch"));
        row_sum += v;
        degree += e(i, j);
      }
      const double target = degree > 0 ? 1.0 : 0.0;
      if (std::abs(row_sum - target) > tol)
        out.push_back({s, i, -1, "row-sum",
                       fmt::format("row {} layer {} sums to {:.17g}", i + 1, s + 1, row_sum)});
    }
  }
  return out;
}

CompositionalMultiplex to_compositional(const RawMultiplex& raw, ZeroMode mode) {
  if (mode.kind == ZeroMode::Kind::Replace && !(mode.epsilon > 0.0))
    throw ValidationError(fmt::format("replacement value must be positive, got {}", mode.epsilon));
  if (const auto v = validate(raw); !v.empty())
    throw ValidationError("invalid raw multiplex: " + v.front().message);

  const int n = raw.num_nodes();
  CompositionalMultiplex net;
  net.node_ids = raw.node_ids;
  net.layer_names = raw.layer_names;
  if (net.layer_names.empty())
    for (int s = 0; s < raw.num_layers(); ++s) net.layer_names.push_back(fmt::format("layer{}", s + 1));

  for (const Matrix& y_in : raw.weights) {
    Matrix y = y_in;
    if (mode.kind == ZeroMode::Kind::Replace) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && y(i, j) == 0.0) y(i, j) = mode.epsilon;
    }
    EdgeMatrix e = EdgeMatrix::Zero(n, n);
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) total += y(i, j);
      if (total <= 0.0) continue;
      for (int j = 0; j < n; ++j) {
        if (j == i || y(i, j) <= 0.0) continue;
        e(i, j) = 1;
        x(i, j) = y(i, j) / total;
      }
    }
    net.edges.push_back(std::move(e));
    net.shares.push_back(std::move(x));
  }
  return net;
}

bool union_weakly_connected(const CompositionalMultiplex& net) {
  const int n = net.num_nodes();
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  int components = n;
  for (const EdgeMatrix& e : net.edges)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (e(i, j)) {
          const int a = find(i), b = find(j);
          if (a != b) {
            parent[a] = b;
            --components;
          }
        }
  return components == 1;
}

std::vector<int> lexicographic_order(const std::vector<std::string>& ids) {
  std::vector<int> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ids[a] < ids[b]; });
  return order;
}

}  // namespace mdsbm
