#include "multidirsbm/interpretation.hpp"

#include <stdexcept>

#include <spdlog/spdlog.h>

namespace mdsbm {

namespace {

void check_inputs(const CompositionalMultiplex& net, const Labels& labels, const LayerStack& A) {
  if (labels.size() != net.num_nodes()) throw std::invalid_argument("label count differs from node count");
  if (static_cast<int>(A.size()) != net.num_layers()) throw std::invalid_argument("A layer count differs");
}

}  // namespace

LayerStack node_shares(const CompositionalMultiplex& net, const Labels& labels, const LayerStack& A) {
  check_inputs(net, labels, A);
  const int n = net.num_nodes();
  LayerStack W;
  for (int s = 0; s < net.num_layers(); ++s) {
    const EdgeMatrix& e = net.edges[s];
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        if (e(i, j)) w(i, j) = A[s](labels[i], labels[j]);
      const double total = w.row(i).sum();
      if (total > 0.0) w.row(i) /= total;
    }
    W.push_back(std::move(w));
  }
  return W;
}

LayerStack cluster_shares(const CompositionalMultiplex& net, const Labels& labels, const LayerStack& A,
                          std::vector<std::pair<int, int>>* silent) {
  check_inputs(net, labels, A);
  const int n = net.num_nodes();
  LayerStack V;
  for (int s = 0; s < net.num_layers(); ++s) {
    const auto kc = A[s].rows();
    const EdgeMatrix& e = net.edges[s];
    Matrix v = Matrix::Zero(kc, kc);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (e(i, j)) v(labels[i], labels[j]) += A[s](labels[i], labels[j]);
    for (Eigen::Index k = 0; k < kc; ++k) {
      const double total = v.row(k).sum();
      if (total > 0.0) {
        v.row(k) /= total;
      } else {
        spdlog::warn("cluster {} sends no edges in layer {}; its share row is zero", k + 1, s + 1);
        if (silent) silent->emplace_back(s, static_cast<int>(k));
      }
    }
    V.push_back(std::move(v));
  }
  return V;
}

InterpretationSummary interpret(const CompositionalMultiplex& net, const Labels& labels, const LayerStack& A) {
  InterpretationSummary out;
  out.W = node_shares(net, labels, A);
  out.V = cluster_shares(net, labels, A, &out.silent_clusters);
  return out;
}

std::vector<ChordRow> chord_table(const InterpretationSummary& summary, const std::vector<std::string>& layer_names) {
  std::vector<ChordRow> rows;
  for (std::size_t s = 0; s < summary.V.size(); ++s) {
    const Matrix& v = summary.V[s];
    for (Eigen::Index k = 0; k < v.rows(); ++k)
      for (Eigen::Index h = 0; h < v.cols(); ++h)
        rows.push_back({layer_names.at(s), static_cast<int>(k) + 1, static_cast<int>(h) + 1, v(k, h)});
  }
  return rows;
}

}  // namespace mdsbm
