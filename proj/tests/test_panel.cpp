#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "testutil.hpp"
#include "ucv/errors.hpp"
#include "ucv/estimators.hpp"
#include "ucv/linalg.hpp"
#include "ucv/oracle.hpp"
#include "ucv/panel.hpp"

using namespace ucv;

namespace {

PanelDataset random_panel(uint64_t seed, int num_units, int num_waves, int k) {
  RngStream rng(seed, 41);
  const int n = num_units * num_waves;
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) x(i, j) = j == 0 ? 1.0 : rng.normal();
    y[i] = 0.4 * x.row(i).sum() + rng.normal();
  }
  return make_panel(num_units, num_waves, y, x);
}

}  // namespace

TEST_CASE("panel validation rejects ragged shapes") {
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  CHECK_THROWS_AS(make_panel(2, 3, y, Eigen::MatrixXd::Ones(5, 1)), Error);
  CHECK_THROWS_AS(make_panel(0, 3, y, Eigen::MatrixXd::Ones(5, 1)), Error);
}

TEST_CASE("zero residuals give zero estimates") {
  const int num_units = 4, num_waves = 2;
  Eigen::MatrixXd x(8, 2);
  x.col(0).setOnes();
  x.col(1) << 1, 2, 3, 4, 5, 6, 7, 8;
  const Eigen::VectorXd y = x * Eigen::Vector2d(1.0, -2.0);
  const auto pf = fit_panel(make_panel(num_units, num_waves, y, x));
  const auto ub = panel_unbiased(pf);
  CHECK(ub.lambda.cwiseAbs().maxCoeff() < 1e-18);
  CHECK(ub.v.v.cwiseAbs().maxCoeff() < 1e-18);
  const auto pl = panel_plugin(pf);
  CHECK(pl.lambda.cwiseAbs().maxCoeff() < 1e-18);
  CHECK(pl.v.v.cwiseAbs().maxCoeff() < 1e-18);
}

TEST_CASE("T = 1 reduces to the classical unbiased residual variance") {
  const auto pd = random_panel(3, 12, 1, 2);
  const auto pf = fit_panel(pd);
  const auto est = panel_unbiased(pf);
  CHECK(est.lambda(0, 0) ==
        doctest::Approx(pf.fit.rss / (pf.fit.n() - pf.fit.k()))
            .epsilon(1e-10));
  // Agrees with the dense generic engine on the panel design matrix.
  const auto design = oracle::build_panel_design(12, 1);
  const Eigen::VectorXd v =
      oracle::dense_hrk(design, pd.x, pf.fit.resid);
  CHECK(testutil::max_rel_err(
            est.v.v, Eigen::Map<const Eigen::MatrixXd>(v.data(), 2, 2)) <
        1e-10);
}

TEST_CASE("panel unbiased equals the dense generic estimator") {
  const auto pd = random_panel(5, 5, 3, 2);
  const auto pf = fit_panel(pd);
  const auto est = panel_unbiased(pf);
  const auto design = oracle::build_panel_design(5, 3);
  const Eigen::VectorXd v = oracle::dense_hrk(design, pd.x, pf.fit.resid);
  CHECK(testutil::max_rel_err(
            est.v.v, Eigen::Map<const Eigen::MatrixXd>(v.data(), 2, 2)) <
        1e-10);
  CHECK(est.lambda.isApprox(est.lambda.transpose(), 1e-10));
}

TEST_CASE("panel exact unbiasedness: N=5, T=3, random PSD Λ") {
  const auto pd = random_panel(8, 5, 3, 2);
  const auto pf = fit_panel(pd);
  RngStream rng(8, 43);
  Eigen::MatrixXd root(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) root(i, j) = rng.normal();
  const Eigen::MatrixXd lambda =
      root * root.transpose() + 0.2 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd sigma =
      kron(Eigen::MatrixXd::Identity(5, 5), lambda);
  CHECK(oracle::expectation_check_panel(pf, sigma) < 1e-8);
}

TEST_CASE("plugin: N = 1 gives the rank-one outer product") {
  const auto pd = random_panel(11, 1, 4, 2);
  const auto pf = fit_panel(pd);
  const auto est = panel_plugin(pf);
  const Eigen::VectorXd e = pf.fit.resid;
  CHECK(testutil::max_rel_err(est.lambda, e * e.transpose()) < 1e-12);
}

TEST_CASE("plugin sandwich equals direct evaluation") {
  const auto pd = random_panel(12, 6, 3, 2);
  const auto pf = fit_panel(pd);
  const auto est = panel_plugin(pf);

  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 6; ++i) {
    const Eigen::VectorXd e = pf.fit.resid.segment(3 * i, 3);
    lambda += e * e.transpose() / 6.0;
  }
  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < 6; ++i) {
    const Eigen::MatrixXd xi = pd.x.middleRows(3 * i, 3);
    inner += xi.transpose() * lambda * xi;
  }
  const Eigen::MatrixXd want = pf.fit.gram_inv * inner * pf.fit.gram_inv;
  CHECK(testutil::max_rel_err(est.v.v, want) < 1e-12);
}

TEST_CASE("unbiased solver needs at least two units") {
  const auto pd = random_panel(13, 1, 5, 2);
  CHECK_THROWS_AS(panel_unbiased(fit_panel(pd)), Error);
}
