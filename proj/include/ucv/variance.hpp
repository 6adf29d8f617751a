#pragma once

#include <Eigen/Dense>

namespace ucv {

enum class VarianceMethod {
  UV1,
  UV2,
  UV3,
  LZ1,
  LZ2,
  PluginRE,
  PluginClusterRE,
  PluginUnrestricted,
  PanelUnbiased,
  PanelPlugin,
};

const char* variance_method_name(VarianceMethod m);

struct VarianceDiagnostics {
  double symmetry_residual = 0.0;  // ‖V - V'‖_max
  double min_eigenvalue = 0.0;     // of (V + V')/2
  bool negative_diagonal = false;
  bool psd_repaired = false;
};

// k×k covariance estimate for β̂. Unbiased estimates can be indefinite;
// that is reported through the diagnostics, never silently clipped.
struct VarianceEstimate {
  Eigen::MatrixXd v;
  VarianceMethod method;
  VarianceDiagnostics diagnostics;
};

VarianceEstimate make_variance_estimate(Eigen::MatrixXd v, VarianceMethod m);

// Optional repair for downstream inference: eigenvalues of the
// symmetrized estimate truncated at zero. Off by default everywhere.
VarianceEstimate psd_truncate(const VarianceEstimate& est);

// Random-effects variance components. Method-of-moments estimates may be
// negative; they are reported as-is.
struct ReParams {
  double sigma2 = 0.0;
  double tau2 = 0.0;
  Eigen::VectorXd sigma2_c;  // per-cluster variants (empty when homogeneous)
  Eigen::VectorXd tau2_c;
};

}  // namespace ucv
