#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ucv/dataset.hpp"
#include "ucv/ols.hpp"
#include "ucv/panel.hpp"
#include "ucv/variance.hpp"

// Dense brute-force reference implementations used by tests and the
// acceptance suite. Everything here materializes n×n (and n²-sized)
// objects, so inputs are capped at desk scale; nothing in this namespace
// belongs on a production path.
namespace ucv::oracle {

inline constexpr int kDefaultCap = 64;

enum class Structure { Equicorrelated, ClusterSpecific, Unrestricted, Panel };

// Columns of D span the vec'd covariance family, vec Σ = D π.
struct DenseDesign {
  Eigen::MatrixXd d;  // n² × r
  Structure structure;
};

DenseDesign build_design(Structure structure,
                         const std::vector<std::vector<int>>& cluster_rows,
                         int n, int cap = kDefaultCap);
DenseDesign build_panel_design(int num_units, int num_waves, int cap = kDefaultCap);

Eigen::MatrixXd annihilator(const Eigen::MatrixXd& x);  // M = I - X(X'X)⁻¹X'

// v̂ = R'[D'(M⊗M)D]⁻¹D'(ε̂⊗ε̂), all matrices explicit.
Eigen::VectorXd dense_hrk(const DenseDesign& design, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& resid);

// Same estimator through the rearranged route
// v̂ = (W + F'A⁻¹F)⁻¹ F'A⁻¹ D'(ε̂⊗ε̂).
Eigen::VectorXd dense_hrk_woodbury(const DenseDesign& design,
                                   const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& resid);

// Biased projection route: π̃ = (D'D)⁻¹D'(ε̂⊗ε̂), ṽ = R'π̃.
struct Projection {
  Eigen::VectorXd pi;
  Eigen::VectorXd v;
};
Projection dense_projection(const DenseDesign& design, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& resid);

enum class EstimatorKind {
  UV1,
  UV2,
  UV3,
  PluginRE,
  PluginClusterRE,
  PluginUnrestricted,
};

// Applies the estimator's linear functional to E[ε̂⊗ε̂] = (M⊗M)vec Σ and
// returns the max relative error against vec[(X'X)⁻¹X'ΣX(X'X)⁻¹]. Exactly
// zero (up to roundoff) characterizes unbiasedness under the given Σ.
double expectation_check(const OlsFit& fit, EstimatorKind kind,
                         const Eigen::MatrixXd& sigma, int cap = kDefaultCap);

double expectation_check_panel(const PanelFit& pf, const Eigen::MatrixXd& sigma,
                               int cap = kDefaultCap);

}  // namespace ucv::oracle
