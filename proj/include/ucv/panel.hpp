#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ucv/ols.hpp"
#include "ucv/variance.hpp"

namespace ucv {

// Rectangular panel: N units × T waves, rows ordered unit-major. Ragged
// panels are rejected; the homogeneous structure Σ = I_N ⊗ Λ needs a
// common T.
struct PanelDataset {
  int num_units = 0;
  int num_waves = 0;
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
};

PanelDataset make_panel(int num_units, int num_waves, Eigen::VectorXd y,
                        Eigen::MatrixXd x);

struct PanelFit {
  PanelDataset data;
  OlsFit fit;  // units as clusters

  int num_units() const { return data.num_units; }
  int num_waves() const { return data.num_waves; }
};

PanelFit fit_panel(PanelDataset data);

struct PanelEstimate {
  Eigen::MatrixXd lambda;  // T×T wave covariance estimate
  VarianceEstimate v;
};

// Unbiased Λ̂ under Σ = I_N ⊗ Λ; the only matrix factorized beyond the
// OLS Gram is of order T²×T².
class PanelSolver {
 public:
  explicit PanelSolver(const PanelFit& pf);  // throws SingularPanelSystem

  // outer[i] = ε̂_i ε̂_i' (T×T); expected-value variants welcome.
  PanelEstimate estimate(const std::vector<Eigen::MatrixXd>& outer) const;
  PanelEstimate estimate(const PanelFit& pf) const;

 private:
  int num_waves_;
  Eigen::MatrixXd ginv_;
  std::vector<Eigen::MatrixXd> unit_x_;
  Eigen::FullPivLU<Eigen::MatrixXd> core_lu_;  // A + F W⁻¹ F', T²×T²
};

PanelEstimate panel_unbiased(const PanelFit& pf);

// Λ̂ = Σ_i ε̂_i ε̂_i' / N, no unbiasedness correction.
PanelEstimate panel_plugin(const PanelFit& pf);

}  // namespace ucv
