#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace mdsbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = Eigen::VectorXi;

/// Binary edge indicators of one layer; entry (i, j) is the edge i -> j.
using EdgeMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// One K x K (or n x n) matrix per layer.
using LayerStack = std::vector<Matrix>;
using EdgeStack = std::vector<EdgeMatrix>;

/// One-hot n x K indicator matrix for 0-based labels.
Matrix one_hot(const Labels& labels, int num_clusters);

/// Cluster sizes for 0-based labels.
Eigen::VectorXi cluster_sizes(const Labels& labels, int num_clusters);

}  // namespace mdsbm
