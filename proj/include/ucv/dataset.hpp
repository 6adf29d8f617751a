#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ucv {

// Observations with a partition into clusters. Cluster ids must be
// contiguous 0..C-1 and every cluster nonempty; arbitrary labels are
// remapped in first-appearance order via from_labels().
class ClusteredDataset {
 public:
  ClusteredDataset(Eigen::VectorXd y, Eigen::MatrixXd x,
                   std::vector<int> cluster_of);

  static ClusteredDataset from_labels(Eigen::VectorXd y, Eigen::MatrixXd x,
                                      const std::vector<std::string>& labels);

  int n() const { return static_cast<int>(y_.size()); }
  int k() const { return static_cast<int>(x_.cols()); }
  int num_clusters() const { return static_cast<int>(rows_.size()); }

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const std::vector<int>& cluster_of() const { return cluster_of_; }
  // Row indices per cluster, in input order.
  const std::vector<std::vector<int>>& cluster_rows() const { return rows_; }
  const std::vector<int>& cluster_sizes() const { return sizes_; }

  // ẍ = Σ_c n_c²
  double sum_sq_sizes() const { return sum_sq_sizes_; }

  // Regressor rows of cluster c (n_c × k).
  Eigen::MatrixXd cluster_x(int c) const;
  // Outcome entries of cluster c.
  Eigen::VectorXd cluster_y(int c) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  std::vector<int> cluster_of_;
  std::vector<std::vector<int>> rows_;
  std::vector<int> sizes_;
  double sum_sq_sizes_ = 0.0;
};

}  // namespace ucv
