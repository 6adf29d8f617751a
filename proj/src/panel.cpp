#include "ucv/panel.hpp"

#include <string>
#include <utility>

#include "ucv/errors.hpp"
#include "ucv/linalg.hpp"

namespace ucv {

PanelDataset make_panel(int num_units, int num_waves, Eigen::VectorXd y,
                        Eigen::MatrixXd x) {
  if (num_units < 1 || num_waves < 1)
    fail(ErrorCode::RaggedPanel, "need N ≥ 1 units and T ≥ 1 waves");
  const Eigen::Index n = static_cast<Eigen::Index>(num_units) * num_waves;
  if (y.size() != n || x.rows() != n)
    fail(ErrorCode::RaggedPanel,
         "panel must be rectangular with N·T = " + std::to_string(n) +
             " rows, unit-major");
  PanelDataset out;
  out.num_units = num_units;
  out.num_waves = num_waves;
  out.y = std::move(y);
  out.x = std::move(x);
  return out;
}

PanelFit fit_panel(PanelDataset data) {
  std::vector<int> unit_of(data.num_units * data.num_waves);
  for (int i = 0; i < data.num_units; ++i)
    for (int t = 0; t < data.num_waves; ++t)
      unit_of[i * data.num_waves + t] = i;
  PanelFit pf;
  pf.fit = fit_ols(ClusteredDataset(data.y, data.x, std::move(unit_of)));
  pf.data = std::move(data);
  return pf;
}

PanelSolver::PanelSolver(const PanelFit& pf)
    : num_waves_(pf.num_waves()), ginv_(pf.fit.gram_inv) {
  const int num_units = pf.num_units();
  const int t = num_waves_;
  const int t2 = t * t;
  if (num_units < 2)
    fail(ErrorCode::SingularPanelSystem, "need at least 2 units");

  unit_x_.resize(num_units);
  Eigen::MatrixXd p_sum = Eigen::MatrixXd::Zero(t, t);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(t2, pf.fit.k() * pf.fit.k());
  for (int i = 0; i < num_units; ++i) {
    unit_x_[i] = pf.data.x.middleRows(i * t, t);
    p_sum.noalias() += unit_x_[i] * ginv_ * unit_x_[i].transpose();
    f += kron(unit_x_[i], unit_x_[i]);
  }

  const Eigen::MatrixXd eye_t = Eigen::MatrixXd::Identity(t, t);
  const Eigen::MatrixXd a =
      static_cast<double>(num_units) * Eigen::MatrixXd::Identity(t2, t2) -
      kron(eye_t, p_sum) - kron(p_sum, eye_t);
  // W⁻¹ = (X'X)⁻¹ ⊗ (X'X)⁻¹ comes from the Gram already factorized by the
  // OLS fit; the T²×T² core is the only new factorization.
  const Eigen::MatrixXd core =
      a + f * kron(ginv_, ginv_) * f.transpose();
  core_lu_ = lu_checked(core, ErrorCode::SingularPanelSystem,
                        "T²×T² panel system singular");
}

PanelEstimate PanelSolver::estimate(
    const std::vector<Eigen::MatrixXd>& outer) const {
  const int t = num_waves_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(t * t);
  for (const auto& o : outer)
    rhs += Eigen::Map<const Eigen::VectorXd>(o.data(), t * t);
  const Eigen::VectorXd vec_lambda = core_lu_.solve(rhs);
  const Eigen::MatrixXd raw =
      Eigen::Map<const Eigen::MatrixXd>(vec_lambda.data(), t, t);

  PanelEstimate out;
  out.lambda = 0.5 * (raw + raw.transpose());  // absorb solve roundoff
  Eigen::MatrixXd inner =
      Eigen::MatrixXd::Zero(ginv_.rows(), ginv_.cols());
  for (const auto& xi : unit_x_)
    inner.noalias() += xi.transpose() * out.lambda * xi;
  out.v = make_variance_estimate(ginv_ * inner * ginv_,
                                 VarianceMethod::PanelUnbiased);
  return out;
}

PanelEstimate PanelSolver::estimate(const PanelFit& pf) const {
  const int t = num_waves_;
  std::vector<Eigen::MatrixXd> outer(pf.num_units());
  for (int i = 0; i < pf.num_units(); ++i) {
    const Eigen::VectorXd e = pf.fit.resid.segment(i * t, t);
    outer[i] = e * e.transpose();
  }
  return estimate(outer);
}

PanelEstimate panel_unbiased(const PanelFit& pf) {
  return PanelSolver(pf).estimate(pf);
}

PanelEstimate panel_plugin(const PanelFit& pf) {
  const int t = pf.num_waves();
  const int num_units = pf.num_units();
  PanelEstimate out;
  out.lambda = Eigen::MatrixXd::Zero(t, t);
  for (int i = 0; i < num_units; ++i) {
    const Eigen::VectorXd e = pf.fit.resid.segment(i * t, t);
    out.lambda.noalias() += e * e.transpose();
  }
  out.lambda /= static_cast<double>(num_units);

  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(pf.fit.k(), pf.fit.k());
  for (int i = 0; i < num_units; ++i) {
    const Eigen::MatrixXd xi = pf.data.x.middleRows(i * t, t);
    inner.noalias() += xi.transpose() * out.lambda * xi;
  }
  out.v = make_variance_estimate(pf.fit.gram_inv * inner * pf.fit.gram_inv,
                                 VarianceMethod::PanelPlugin);
  return out;
}

}  // namespace ucv
