#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "ucv/dataset.hpp"

namespace ucv {

// OLS fit together with every cluster-level aggregate the variance
// estimators consume. Immutable after construction; cheap to copy because
// the dataset is shared.
struct OlsFit {
  std::shared_ptr<const ClusteredDataset> data;
  Eigen::VectorXd y;  // outcome this fit was computed from

  Eigen::VectorXd beta_hat;
  Eigen::VectorXd resid;              // ε̂ = y - X β̂
  Eigen::VectorXd resid_cluster_sum;  // ε̃_c = Σ_{i∈c} ε̂_i, length C
  Eigen::MatrixXd gram;               // X'X
  Eigen::MatrixXd gram_inv;
  Eigen::MatrixXd xtil;                         // X̃: row c is the column sum of X over cluster c
  std::vector<Eigen::MatrixXd> per_cluster_gram;  // X_c'X_c
  Eigen::MatrixXd xte;                // column c is X_c'ε̂_c, k × C

  double rss = 0.0;          // ε̂'ε̂
  double rss_cluster = 0.0;  // ε̃'ε̃
  Eigen::VectorXd cluster_rss;     // ε̂_c'ε̂_c
  Eigen::VectorXd cluster_sum_sq;  // ε̃_c²

  int n() const { return data->n(); }
  int k() const { return data->k(); }
  int num_clusters() const { return data->num_clusters(); }

  Eigen::VectorXd cluster_resid(int c) const;
};

// Solves the normal equations. Throws RankDeficient when the Gram matrix
// is singular beyond 1e-10 relative to its largest diagonal entry.
OlsFit fit_ols(ClusteredDataset data);

// Refit with a new outcome on the same design; reuses the factorized
// Gram and per-cluster caches of `base`. Pure: returns a new fit.
OlsFit refit_ols(const OlsFit& base, Eigen::VectorXd y);

// Trace statistics of the projection restricted to cluster structure:
//   s  = tr (X'X)⁻¹ X̃'X̃          (= Σ_c s̃_c)
//   ṡ  = tr ((X'X)⁻¹ X̃'X̃)²
//   s̆  = tr (X'X)⁻¹ X̃' Δ_n X̃
//   s_c = tr (X'X)⁻¹ X_c'X_c,  s̃_c = x̃_c'(X'X)⁻¹x̃_c
struct ScalarStats {
  double s = 0.0;
  double s_dot = 0.0;
  double s_breve = 0.0;
  Eigen::VectorXd s_c;
  Eigen::VectorXd s_tilde;
};

ScalarStats scalar_stats(const OlsFit& fit);

}  // namespace ucv
