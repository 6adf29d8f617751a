#include "ucv/variance.hpp"

#include <Eigen/Eigenvalues>
#include <utility>

namespace ucv {

const char* variance_method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::UV1: return "uv1";
    case VarianceMethod::UV2: return "uv2";
    case VarianceMethod::UV3: return "uv3";
    case VarianceMethod::LZ1: return "lz1";
    case VarianceMethod::LZ2: return "lz2";
    case VarianceMethod::PluginRE: return "plugin-re";
    case VarianceMethod::PluginClusterRE: return "plugin-cre";
    case VarianceMethod::PluginUnrestricted: return "plugin-u";
    case VarianceMethod::PanelUnbiased: return "panel-unbiased";
    case VarianceMethod::PanelPlugin: return "panel-plugin";
  }
  return "unknown";
}

VarianceEstimate make_variance_estimate(Eigen::MatrixXd v, VarianceMethod m) {
  VarianceEstimate est;
  est.method = m;
  est.v = std::move(v);

  est.diagnostics.symmetry_residual =
      (est.v - est.v.transpose()).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd sym = 0.5 * (est.v + est.v.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym,
                                                     Eigen::EigenvaluesOnly);
  est.diagnostics.min_eigenvalue = eig.eigenvalues().minCoeff();
  est.diagnostics.negative_diagonal = est.v.diagonal().minCoeff() < 0.0;
  return est;
}

VarianceEstimate psd_truncate(const VarianceEstimate& est) {
  const Eigen::MatrixXd sym = 0.5 * (est.v + est.v.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  VarianceEstimate out = make_variance_estimate(
      eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose(),
      est.method);
  out.diagnostics.psd_repaired = true;
  return out;
}

}  // namespace ucv
