#include "multidirsbm/types.hpp"

namespace mdsbm {

Matrix one_hot(const Labels& labels, int num_clusters) {
  Matrix z = Matrix::Zero(labels.size(), num_clusters);
  for (Eigen::Index i = 0; i < labels.size(); ++i) z(i, labels[i]) = 1.0;
  return z;
}

Eigen::VectorXi cluster_sizes(const Labels& labels, int num_clusters) {
  Eigen::VectorXi sizes = Eigen::VectorXi::Zero(num_clusters);
  for (Eigen::Index i = 0; i < labels.size(); ++i) ++sizes[labels[i]];
  return sizes;
}

}  // namespace mdsbm
