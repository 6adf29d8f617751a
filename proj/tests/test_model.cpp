#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "testutil.hpp"
#include "ucv/dataset.hpp"
#include "ucv/errors.hpp"
#include "ucv/ols.hpp"

using namespace ucv;

TEST_CASE("dataset validates cluster structure") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 1);

  CHECK_THROWS_AS(ClusteredDataset(y, x, {0, 2, 2}), Error);  // gap at 1
  CHECK_THROWS_AS(ClusteredDataset(y, x, {0, -1, 1}), Error);
  CHECK_THROWS_AS(ClusteredDataset(y, Eigen::MatrixXd::Ones(2, 1), {0, 1, 1}),
                  Error);

  const ClusteredDataset data(y, x, {1, 0, 1});
  CHECK(data.num_clusters() == 2);
  CHECK(data.cluster_sizes()[0] == 1);
  CHECK(data.cluster_sizes()[1] == 2);
  CHECK(data.sum_sq_sizes() == doctest::Approx(5.0));
}

TEST_CASE("from_labels maps by first appearance") {
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
  const auto data =
      ClusteredDataset::from_labels(y, x, {"tx", "ca", "tx", "ny"});
  CHECK(data.cluster_of() == std::vector<int>{0, 1, 0, 2});
}

TEST_CASE("perfect fit has zero residuals") {
  Eigen::MatrixXd x(6, 2);
  x << 1, 0.5, 1, -1, 1, 2, 1, 0.2, 1, 1.4, 1, -0.3;
  const Eigen::VectorXd y = x * Eigen::Vector2d(1.0, 2.0);
  const auto fit = fit_ols(ClusteredDataset(y, x, {0, 0, 1, 1, 2, 2}));
  CHECK(fit.beta_hat.isApprox(Eigen::Vector2d(1.0, 2.0), 1e-12));
  CHECK(fit.resid.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.rss == doctest::Approx(0.0));
}

TEST_CASE("intercept-only fit is the sample mean") {
  Eigen::VectorXd y(5);
  y << 3, 1, 4, 1, 5;
  const auto fit =
      fit_ols(ClusteredDataset(y, Eigen::MatrixXd::Ones(5, 1), {0, 0, 1, 1, 1}));
  CHECK(fit.beta_hat[0] == doctest::Approx(y.mean()).epsilon(1e-14));
  CHECK(fit.resid.isApprox((y.array() - y.mean()).matrix(), 1e-12));
}

TEST_CASE("random instance matches explicit normal-equations solve") {
  const auto data = testutil::random_instance(42, {3, 4, 3}, 2);
  const auto fit = fit_ols(data);

  // Independent route: solve X'Xβ = X'y by explicit inversion.
  const Eigen::MatrixXd xtx = data.x().transpose() * data.x();
  const Eigen::VectorXd beta =
      xtx.inverse() * (data.x().transpose() * data.y());
  CHECK((fit.beta_hat - beta).cwiseAbs().maxCoeff() < 1e-10);

  // Residual orthogonality relative to the scale of X'y.
  const double scale = (data.x().transpose() * data.y()).cwiseAbs().maxCoeff();
  CHECK((data.x().transpose() * fit.resid).cwiseAbs().maxCoeff() <
        1e-8 * scale);

  // Gram identity and per-cluster reconstruction.
  CHECK((fit.gram * fit.gram_inv - Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& g : fit.per_cluster_gram) sum += g;
  CHECK(testutil::max_rel_err(sum, fit.gram) < 1e-12);

  // Cluster residual sums.
  for (int c = 0; c < data.num_clusters(); ++c) {
    double s = 0;
    for (int i : data.cluster_rows()[c]) s += fit.resid[i];
    CHECK(fit.resid_cluster_sum[c] == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("rank deficiency raises") {
  Eigen::MatrixXd x(4, 2);
  x.col(0).setOnes();
  x.col(1).setOnes();  // duplicated column
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  CHECK_THROWS_AS(fit_ols(ClusteredDataset(y, x, {0, 0, 1, 1})), Error);

  // n <= k rejected as well.
  Eigen::MatrixXd wide(2, 3);
  wide << 1, 0, 1, 0, 1, 1;
  Eigen::VectorXd y2(2);
  y2 << 1, 2;
  CHECK_THROWS_AS(fit_ols(ClusteredDataset(y2, wide, {0, 1})), Error);
}

TEST_CASE("refit matches a fresh fit") {
  const auto data = testutil::random_instance(7, {4, 5, 3, 4}, 3);
  const auto base = fit_ols(data);
  Eigen::VectorXd y2 = data.y();
  y2.array() += 0.5;
  const auto refit = refit_ols(base, y2);
  const auto fresh = fit_ols(ClusteredDataset(y2, data.x(), data.cluster_of()));
  CHECK((refit.beta_hat - fresh.beta_hat).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((refit.resid - fresh.resid).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(refit.rss_cluster == doctest::Approx(fresh.rss_cluster));
}

TEST_CASE("scalar stats: hand instance") {
  // Intercept only, two clusters of two: X'X = 4, X̃ = (2,2)'.
  Eigen::VectorXd y(4);
  y << 1, -1, 0, 0;
  const auto fit =
      fit_ols(ClusteredDataset(y, Eigen::MatrixXd::Ones(4, 1), {0, 0, 1, 1}));
  const auto st = scalar_stats(fit);
  CHECK(st.s == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(st.s_dot == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(st.s_breve == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("scalar stats: singleton clusters give s = k") {
  const auto data = testutil::random_instance(3, {1, 1, 1, 1, 1, 1}, 2);
  const auto st = scalar_stats(fit_ols(data));
  CHECK(st.s == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scalar stats: identity s = Σ s̃_c and dense oracle") {
  const auto data = testutil::random_instance(11, {3, 5, 2, 4}, 3);
  const auto fit = fit_ols(data);
  const auto st = scalar_stats(fit);

  CHECK(st.s == doctest::Approx(st.s_tilde.sum()).epsilon(1e-10));
  CHECK(st.s >= 0.0);
  CHECK(st.s_dot >= 0.0);
  CHECK(st.s_breve >= 0.0);

  // Dense oracle through an explicit B.
  const Eigen::MatrixXd b = testutil::dense_b(data);
  const Eigen::MatrixXd xt = b.transpose() * data.x();
  const Eigen::MatrixXd ginv = (data.x().transpose() * data.x()).inverse();
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(4, 4);
  for (int c = 0; c < 4; ++c) delta(c, c) = data.cluster_sizes()[c];
  CHECK(st.s ==
        doctest::Approx((ginv * xt.transpose() * xt).trace()).epsilon(1e-10));
  CHECK(st.s_dot == doctest::Approx((ginv * xt.transpose() * xt * ginv *
                                     xt.transpose() * xt)
                                        .trace())
                        .epsilon(1e-10));
  CHECK(st.s_breve ==
        doctest::Approx((ginv * xt.transpose() * delta * xt).trace())
            .epsilon(1e-10));
  for (int c = 0; c < 4; ++c) {
    const Eigen::VectorXd xtc = xt.row(c).transpose();
    CHECK(st.s_tilde[c] ==
          doctest::Approx(xtc.dot(ginv * xtc)).epsilon(1e-10));
  }
}
