#include "ucv/dataset.hpp"

#include <unordered_map>
#include <utility>

#include "ucv/errors.hpp"

namespace ucv {

ClusteredDataset::ClusteredDataset(Eigen::VectorXd y, Eigen::MatrixXd x,
                                   std::vector<int> cluster_of)
    : y_(std::move(y)), x_(std::move(x)), cluster_of_(std::move(cluster_of)) {
  const auto n = y_.size();
  if (n == 0) fail(ErrorCode::ShapeMismatch, "empty dataset");
  if (x_.rows() != n)
    fail(ErrorCode::ShapeMismatch, "X has " + std::to_string(x_.rows()) +
                                       " rows but y has " + std::to_string(n));
  if (static_cast<Eigen::Index>(cluster_of_.size()) != n)
    fail(ErrorCode::ShapeMismatch, "cluster map length mismatch");

  int max_id = -1;
  for (int c : cluster_of_) {
    if (c < 0) fail(ErrorCode::ShapeMismatch, "negative cluster index");
    max_id = std::max(max_id, c);
  }
  rows_.assign(max_id + 1, {});
  for (Eigen::Index i = 0; i < n; ++i)
    rows_[cluster_of_[i]].push_back(static_cast<int>(i));

  sizes_.reserve(rows_.size());
  for (size_t c = 0; c < rows_.size(); ++c) {
    if (rows_[c].empty())
      fail(ErrorCode::EmptyCluster,
           "cluster " + std::to_string(c) + " has no observations; "
           "indices must be contiguous 0..C-1");
    sizes_.push_back(static_cast<int>(rows_[c].size()));
    sum_sq_sizes_ += static_cast<double>(rows_[c].size()) * rows_[c].size();
  }
}

ClusteredDataset ClusteredDataset::from_labels(
    Eigen::VectorXd y, Eigen::MatrixXd x,
    const std::vector<std::string>& labels) {
  std::unordered_map<std::string, int> ids;
  std::vector<int> cluster_of;
  cluster_of.reserve(labels.size());
  for (const auto& label : labels) {
    auto [it, inserted] = ids.emplace(label, static_cast<int>(ids.size()));
    cluster_of.push_back(it->second);
  }
  return ClusteredDataset(std::move(y), std::move(x), std::move(cluster_of));
}

Eigen::MatrixXd ClusteredDataset::cluster_x(int c) const {
  const auto& rows = rows_[c];
  Eigen::MatrixXd out(rows.size(), x_.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(i) = x_.row(rows[i]);
  return out;
}

Eigen::VectorXd ClusteredDataset::cluster_y(int c) const {
  const auto& rows = rows_[c];
  Eigen::VectorXd out(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) out[i] = y_[rows[i]];
  return out;
}

}  // namespace ucv
