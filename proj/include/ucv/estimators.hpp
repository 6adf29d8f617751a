#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ucv/ols.hpp"
#include "ucv/variance.hpp"

namespace ucv {

// Each unbiased estimator is a fixed linear map applied to residual
// aggregates. The solvers below factor the residual-independent part once
// so study loops can reuse it across replications; estimate() consumes
// only aggregates, which also lets the dense oracle feed expected values
// through the identical production path.

// Equicorrelated structure: Σ = σ²I + τ²BB'.
class Uv1Solver {
 public:
  Uv1Solver(const OlsFit& fit, const ScalarStats& stats);  // throws SingularPsi

  VarianceEstimate estimate(double rss, double rss_cluster) const;

  // Weights (r1, r2) of the quadratic form ε̂'Aε̂ reproducing entry
  // (ell, ell): A_c = r1 I + r2 ιι'.
  Eigen::Vector2d quad_weights(int ell) const;

  const Eigen::Matrix2d& psi() const { return psi_; }

 private:
  Eigen::MatrixXd base1_;  // (X'X)⁻¹
  Eigen::MatrixXd base2_;  // (X'X)⁻¹X̃'X̃(X'X)⁻¹
  Eigen::Matrix2d psi_;
  Eigen::Matrix2d psi_inv_;
};

// Cluster-specific structure: Σ = Σ_c (σ_c² G_cG_c' + τ_c² b_cb_c').
class Uv2Solver {
 public:
  Uv2Solver(const OlsFit& fit, const ScalarStats& stats);  // throws SingularPhi

  // rhs layout: (ε̂_1'ε̂_1,…,ε̂_C'ε̂_C, ε̃_1²,…,ε̃_C²).
  VarianceEstimate estimate(const Eigen::VectorXd& rhs) const;

  // (r1_c, r2_c) per cluster for coefficient ell.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> quad_weights(int ell) const;

  const Eigen::MatrixXd& phi() const { return phi_; }

 private:
  int num_clusters_;
  std::vector<Eigen::MatrixXd> base1_;  // (X'X)⁻¹X_c'X_c(X'X)⁻¹
  std::vector<Eigen::MatrixXd> base2_;  // (X'X)⁻¹x̃_c x̃_c'(X'X)⁻¹
  Eigen::MatrixXd phi_;                 // 2C × 2C, symmetric
  Eigen::FullPivLU<Eigen::MatrixXd> phi_lu_;
};

// Unrestricted within-cluster correlation: Σ = diag Λ_c.
class Uv3Solver {
 public:
  explicit Uv3Solver(const OlsFit& fit);  // throws SingularSc / SingularOuter

  // outer[c] = X_c'ε̂_c ε̂_c'X_c (k×k); expected-value variants welcome.
  VarianceEstimate estimate(const std::vector<Eigen::MatrixXd>& outer) const;
  VarianceEstimate estimate(const OlsFit& fit) const;

  // Symmetrized Q_c with A_c = X_c Q_c X_c' for coefficient ell.
  std::vector<Eigen::MatrixXd> quad_weights(int ell) const;

 private:
  int k_;
  int num_clusters_;
  std::vector<Eigen::FullPivLU<Eigen::MatrixXd>> sc_lu_;  // S_c, k²×k²
  Eigen::FullPivLU<Eigen::MatrixXd> outer_lu_;            // X'X⊗X'X + Σ S_c⁻¹(X_c'X_c⊗X_c'X_c)
};

// HC2 leverage correction: caches (I_c - P_cc)^{-1/2} per cluster.
class Hc2Solver {
 public:
  explicit Hc2Solver(const OlsFit& fit);  // throws DegenerateLeverage

  VarianceEstimate estimate(const OlsFit& fit) const;

  // Rank-one quadratic-form factor a_c with A_c = a_c a_c' for ell.
  std::vector<Eigen::VectorXd> quad_factors(int ell) const;

  const Eigen::MatrixXd& inv_sqrt(int c) const { return w_[c]; }

 private:
  Eigen::MatrixXd ginv_;
  std::vector<Eigen::MatrixXd> w_;    // (I_c - P_cc)^{-1/2}
  std::vector<Eigen::MatrixXd> xw_;   // X_c' W_c, k × n_c
};

VarianceEstimate uv1(const OlsFit& fit, const ScalarStats& stats);
VarianceEstimate uv2(const OlsFit& fit, const ScalarStats& stats);
VarianceEstimate uv3(const OlsFit& fit);

// Liang–Zeger sandwich with the Stata small-sample factor
// C/(C-1) · (n-1)/(n-k).
VarianceEstimate lz1_stata(const OlsFit& fit);
double stata_factor(int n, int k, int num_clusters);

// Liang–Zeger sandwich with the HC2 cluster leverage correction.
VarianceEstimate lz2_hc2(const OlsFit& fit);

// Moment estimates of (σ², τ²) and the plug-in sandwich they imply.
std::pair<ReParams, VarianceEstimate> plugin_re(const OlsFit& fit);

// Per-cluster (σ_c², τ_c²) plug-in.
std::pair<ReParams, VarianceEstimate> plugin_cluster_re(const OlsFit& fit);

// Cluster generalization of White's estimator (no correction factor).
VarianceEstimate plugin_unrestricted(const OlsFit& fit);

}  // namespace ucv
