#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "testutil.hpp"
#include "ucv/dof.hpp"
#include "ucv/errors.hpp"
#include "ucv/oracle.hpp"
#include "ucv/rng.hpp"

using namespace ucv;

namespace {

Eigen::MatrixXd dense_a(const ABlocks& blocks, const OlsFit& fit) {
  std::vector<Eigen::MatrixXd> per_cluster;
  per_cluster.reserve(fit.num_clusters());
  for (int c = 0; c < fit.num_clusters(); ++c)
    per_cluster.push_back(blocks.dense_block(fit, c));
  return testutil::block_diag(*fit.data, per_cluster);
}

// Dense tr(AMAM), tr(B'MAMAMB), tr((B'MAMB)²) straight from definitions.
struct DenseTraces {
  double tr_am, tr_bmamb, tr_amam, tr_mid, tr_outer;
};

DenseTraces dense_traces(const ABlocks& blocks, const OlsFit& fit) {
  const Eigen::MatrixXd a = dense_a(blocks, fit);
  const Eigen::MatrixXd m = oracle::annihilator(fit.data->x());
  const Eigen::MatrixXd b = testutil::dense_b(*fit.data);
  const Eigen::MatrixXd am = a * m;
  const Eigen::MatrixXd bmamb = b.transpose() * m * a * m * b;
  return DenseTraces{am.trace(),
                     bmamb.trace(),
                     (am * am).trace(),
                     (b.transpose() * m * a * m * a * m * b).trace(),
                     (bmamb * bmamb).trace()};
}

ClusteredDataset treated_design(uint64_t seed, const std::vector<int>& sizes,
                                int treated) {
  RngStream rng(seed, 23);
  int n = 0;
  for (int s : sizes) n += s;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  std::vector<int> cl(n);
  int pos = 0;
  for (size_t c = 0; c < sizes.size(); ++c)
    for (int i = 0; i < sizes[c]; ++i, ++pos) {
      cl[pos] = static_cast<int>(c);
      x(pos, 0) = 1.0;
      x(pos, 1) = static_cast<int>(c) < treated ? 1.0 : 0.0;
      x(pos, 2) = rng.normal();
      y[pos] = rng.normal();
    }
  return ClusteredDataset(y, x, cl);
}

}  // namespace

TEST_CASE("uv1 hand case: quadratic-form weights and identity") {
  Eigen::VectorXd y(4);
  y << 1, 1, -1, -1;
  const auto fit =
      fit_ols(ClusteredDataset(y, Eigen::MatrixXd::Ones(4, 1), {0, 0, 1, 1}));
  const auto blocks = build_a_blocks(fit, VarianceMethod::UV1, 0);
  // (r1, r2) = (1/4, 1/2) Ψ⁻¹ with Ψ = [[3,2],[2,4]] gives (0, 1/8), and
  // ε̂'Aε̂ = ε̃'ε̃/8 = 1 matches the UV1 output for this outcome.
  CHECK(blocks.r1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(blocks.r2 == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(blocks.quad_form(fit) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quadratic form reproduces the variance diagonal for all methods") {
  const auto data = testutil::random_instance(17, {4, 5, 3, 4}, 3);
  const auto fit = fit_ols(data);
  const auto stats = scalar_stats(fit);
  const Uv1Solver s1(fit, stats);
  const Uv2Solver s2(fit, stats);
  const Uv3Solver s3(fit);
  const Hc2Solver sh(fit);
  Eigen::VectorXd rhs(2 * fit.num_clusters());
  rhs << fit.cluster_rss, fit.cluster_sum_sq;

  for (int ell = 0; ell < 3; ++ell) {
    CHECK(build_a_blocks_uv1(fit, s1, ell).quad_form(fit) ==
          doctest::Approx(s1.estimate(fit.rss, fit.rss_cluster).v(ell, ell))
              .epsilon(1e-10));
    CHECK(build_a_blocks_uv2(fit, s2, ell).quad_form(fit) ==
          doctest::Approx(s2.estimate(rhs).v(ell, ell)).epsilon(1e-10));
    CHECK(build_a_blocks_uv3(fit, s3, ell).quad_form(fit) ==
          doctest::Approx(s3.estimate(fit).v(ell, ell)).epsilon(1e-10));
    CHECK(build_a_blocks_hc2(fit, sh, ell).quad_form(fit) ==
          doctest::Approx(sh.estimate(fit).v(ell, ell)).epsilon(1e-10));
  }
}

TEST_CASE("blocks depend on the design only, not on the outcome") {
  const auto data = testutil::random_instance(18, {3, 4, 4}, 2);
  const auto fit_a = fit_ols(data);
  Eigen::VectorXd y2 = data.y();
  y2.array() *= -2.7;
  y2[0] += 1.0;
  const auto fit_b = refit_ols(fit_a, y2);
  for (auto method : {VarianceMethod::UV1, VarianceMethod::UV2,
                      VarianceMethod::UV3, VarianceMethod::LZ2}) {
    const auto blocks_a = build_a_blocks(fit_a, method, 1);
    const auto blocks_b = build_a_blocks(fit_b, method, 1);
    for (int c = 0; c < data.num_clusters(); ++c)
      CHECK((blocks_a.dense_block(fit_a, c) - blocks_b.dense_block(fit_b, c))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
  }
}

TEST_CASE("dense blocks equal the estimator's linear-map row") {
  // Build A densely from the dense-oracle core and compare.
  const auto data = testutil::random_instance(19, {3, 3, 2}, 2);
  const auto fit = fit_ols(data);
  const int n = data.n();
  const int ell = 1;

  const auto design = oracle::build_design(oracle::Structure::Equicorrelated,
                                           data.cluster_rows(), n);
  const Eigen::MatrixXd m = oracle::annihilator(data.x());
  // Row (ell,ell) of R'[D'(M⊗M)D]⁻¹D' as a quadratic form in ε̂.
  Eigen::MatrixXd mmd(n * n, design.d.cols());
  for (int j = 0; j < design.d.cols(); ++j) {
    const Eigen::Map<const Eigen::MatrixXd> dj(design.d.col(j).data(), n, n);
    const Eigen::MatrixXd mdm = m * dj * m;
    mmd.col(j) = Eigen::Map<const Eigen::VectorXd>(mdm.data(), n * n);
  }
  const Eigen::MatrixXd core = design.d.transpose() * mmd;
  const Eigen::MatrixXd ginv = fit.gram_inv;
  const Eigen::MatrixXd xtx_til = fit.xtil.transpose() * fit.xtil;
  Eigen::RowVector2d r_row(ginv(ell, ell),
                           (ginv * xtx_til * ginv)(ell, ell));
  const Eigen::RowVectorXd a_row = r_row * core.inverse() * design.d.transpose();
  const Eigen::Map<const Eigen::MatrixXd> a_dense(a_row.data(), n, n);

  const auto blocks = build_a_blocks(fit, VarianceMethod::UV1, ell);
  CHECK((dense_a(blocks, fit) - 0.5 * (a_dense + a_dense.transpose()))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("structured traces equal dense traces for every method") {
  const auto data = testutil::random_instance(20, {4, 3, 5, 3}, 3);
  const auto fit = fit_ols(data);
  for (auto method : {VarianceMethod::UV1, VarianceMethod::UV2,
                      VarianceMethod::UV3, VarianceMethod::LZ2}) {
    for (int ell : {0, 1, 2}) {
      const auto blocks = build_a_blocks(fit, method, ell);
      const auto got = build_dof_traces(blocks, fit);
      const auto want = dense_traces(blocks, fit);
      CHECK(got.tr_am == doctest::Approx(want.tr_am).epsilon(1e-8));
      CHECK(got.tr_amam == doctest::Approx(want.tr_amam).epsilon(1e-8));
      CHECK(got.tr_bmamb == doctest::Approx(want.tr_bmamb).epsilon(1e-8));
      CHECK(got.tr_mid == doctest::Approx(want.tr_mid).epsilon(1e-8));
      CHECK(got.tr_outer == doctest::Approx(want.tr_outer).epsilon(1e-8));
    }
  }
}

TEST_CASE("rv1 denominator equals dense tr(AMΣMAMΣM)") {
  const auto data = testutil::random_instance(21, {3, 4, 4}, 2);
  const auto fit = fit_ols(data);
  const double sigma2 = 1.1, tau2 = 0.4;
  const Eigen::MatrixXd sigma = testutil::re_sigma(data, sigma2, tau2);
  const Eigen::MatrixXd m = oracle::annihilator(data.x());

  for (auto method : {VarianceMethod::UV1, VarianceMethod::UV3}) {
    const auto blocks = build_a_blocks(fit, method, 1);
    const auto tr = build_dof_traces(blocks, fit);
    const double denom = sigma2 * sigma2 * tr.tr_amam +
                         2.0 * sigma2 * tau2 * tr.tr_mid +
                         tau2 * tau2 * tr.tr_outer;
    const Eigen::MatrixXd amsm = dense_a(blocks, fit) * m * sigma * m;
    CHECK(denom == doctest::Approx((amsm * amsm).trace()).epsilon(1e-8));
  }
}

TEST_CASE("dof_rv0: errors and scale invariance") {
  const auto data = testutil::random_instance(22, {4, 4, 4}, 2);
  const auto fit = fit_ols(data);
  const auto blocks = build_a_blocks(fit, VarianceMethod::UV1, 1);
  const auto d = dof_rv0(blocks, fit);
  CHECK(d.d >= 1.0);
  CHECK(d.d <= fit.n() - fit.k());

  // Rescaling the outcome leaves the RV0 d.f. untouched.
  Eigen::VectorXd y2 = 3.5 * data.y();
  const auto fit2 = refit_ols(fit, y2);
  const auto d2 = dof_rv0(build_a_blocks(fit2, VarianceMethod::UV1, 1), fit2);
  CHECK(d.d == doctest::Approx(d2.d).epsilon(1e-12));

  // Degenerate blocks: A = 0 has no valid trace.
  ABlocks zero = blocks;
  zero.r1 = zero.r2 = 0.0;
  zero.tr_a = zero.tr_a2 = 0.0;
  zero.lambda_c.setZero();
  zero.kappa_c.setZero();
  zero.mu.setZero();
  zero.rho.setZero();
  zero.xax.setZero();
  zero.xa2x.setZero();
  CHECK_THROWS_AS(dof_rv0(zero, fit), Error);
}

TEST_CASE("moment design diagonals match dense extraction") {
  const auto data = testutil::random_instance(23, {3, 5, 2, 4}, 2);
  const auto fit = fit_ols(data);
  const auto md = build_moment_design(fit);

  const Eigen::MatrixXd m = oracle::annihilator(data.x());
  const Eigen::MatrixXd b = testutil::dense_b(data);
  const Eigen::MatrixXd bb = b * b.transpose();
  const auto diag_of = [](const Eigen::MatrixXd& z) {
    return Eigen::VectorXd(z.diagonal());
  };
  CHECK((md.m10 - diag_of(m)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((md.m11 - diag_of(bb * m)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((md.m21 - diag_of(m * bb * m)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((md.m12 - diag_of(bb * m * bb)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((md.m22 - diag_of(bb * m * bb * m)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((md.m23 - diag_of(bb * m * bb * m * bb)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(md.m10.minCoeff() >= 0.0);
  CHECK(md.m10.maxCoeff() <= 1.0);
}

TEST_CASE("moment estimates vanish on zero residuals") {
  Eigen::MatrixXd x(6, 1);
  x.setOnes();
  Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 2.0);
  const auto fit = fit_ols(ClusteredDataset(y, x, {0, 0, 0, 1, 1, 1}));
  const auto m = estimate_re_moments(fit);
  CHECK(m.sigma4 == doctest::Approx(0.0));
  CHECK(m.sigma2tau2 == doctest::Approx(0.0));
  CHECK(m.tau4 == doctest::Approx(0.0));
}

TEST_CASE("moment system singular when every cluster is a singleton") {
  const auto data = testutil::random_instance(24, {1, 1, 1, 1, 1}, 1);
  CHECK_THROWS_AS(build_moment_design(fit_ols(data)), Error);
}

TEST_CASE("moment system is the exact expectation map (Monte Carlo)") {
  const auto data = testutil::random_instance(25, {10, 10, 10, 10}, 2);
  const auto base = fit_ols(data);
  const auto md = build_moment_design(base);
  const double sigma2 = 1.0, tau2 = 0.1;

  const long reps = 20000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum_sq = Eigen::Vector3d::Zero();
  for (long r = 0; r < reps; ++r) {
    RngStream rng(4242, r);
    Eigen::VectorXd eps(data.n());
    int pos = 0;
    for (int c = 0; c < data.num_clusters(); ++c) {
      const double shared = std::sqrt(tau2) * rng.normal();
      for (int i = 0; i < data.cluster_sizes()[c]; ++i, ++pos)
        eps[pos] = shared + std::sqrt(sigma2) * rng.normal();
    }
    const auto fit = refit_ols(base, eps);
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (int i = 0; i < fit.n(); ++i) {
      const double e = fit.resid[i];
      const double s = fit.resid_cluster_sum[data.cluster_of()[i]];
      rhs += Eigen::Vector3d(e * e * e * e, e * e * s * s, s * s * s * s);
    }
    sum += rhs;
    sum_sq += rhs.cwiseProduct(rhs);
  }
  const Eigen::Vector3d mean = sum / reps;
  const Eigen::Vector3d want =
      md.system * Eigen::Vector3d(sigma2 * sigma2, sigma2 * tau2, tau2 * tau2);
  for (int i = 0; i < 3; ++i) {
    const double var = sum_sq[i] / reps - mean[i] * mean[i];
    const double se = std::sqrt(var / reps);
    CHECK(std::fabs(mean[i] - want[i]) < 3.0 * se);
  }
}

TEST_CASE("rv1 with moments (σ⁴, 0, 0) collapses onto rv0") {
  const auto data = testutil::random_instance(26, {4, 5, 3}, 2);
  const auto fit = fit_ols(data);
  const auto blocks = build_a_blocks(fit, VarianceMethod::UV1, 1);
  const auto traces = build_dof_traces(blocks, fit);
  const auto rv0 = dof_rv0(traces, fit);
  const auto rv1 = dof_rv1(traces, fit, ReMoments{2.7, 0.0, 0.0});
  CHECK(rv1.d == doctest::Approx(rv0.d).epsilon(1e-13));
}

TEST_CASE("rv1 fallback records instead of failing") {
  const auto data = testutil::random_instance(27, {4, 4, 4}, 2);
  const auto fit = fit_ols(data);
  const auto traces =
      build_dof_traces(build_a_blocks(fit, VarianceMethod::UV1, 1), fit);
  const ReMoments bad{1.0, -100.0, 0.0};  // drives the denominator negative
  CHECK_THROWS_AS(dof_rv1(traces, fit, bad), Error);
  const auto fallen = dof_rv1_or_rv0(traces, fit, bad);
  CHECK(fallen.fallback_from_rv1);
  CHECK(fallen.reference == DofReference::RV0);
  CHECK(fallen.d == doctest::Approx(dof_rv0(traces, fit).d));
}

TEST_CASE("balanced treated design: UV1 d.f. equals C - 2") {
  // The identity sharpens as clusters grow; at desk scale at least one of
  // the two references must land within 0.1 of C - 2 = 12.
  const auto data = treated_design(31, std::vector<int>(14, 50), 7);
  const auto fit = fit_ols(data);
  const auto blocks = build_a_blocks(fit, VarianceMethod::UV1, 1);
  const auto traces = build_dof_traces(blocks, fit);
  const double rv0 = dof_rv0(traces, fit).d;
  const double rv1 = dof_rv1(traces, fit, ReMoments{1.0, 0.1, 0.01}).d;
  CHECK(std::min(std::fabs(rv0 - 12.0), std::fabs(rv1 - 12.0)) < 0.1);

  // At the larger cluster size both references agree with C - 2.
  const auto big = treated_design(31, std::vector<int>(14, 200), 7);
  const auto big_fit = fit_ols(big);
  const auto big_traces =
      build_dof_traces(build_a_blocks(big_fit, VarianceMethod::UV1, 1), big_fit);
  CHECK(dof_rv0(big_traces, big_fit).d == doctest::Approx(12.0).epsilon(0.1 / 12.0));
  CHECK(dof_rv1(big_traces, big_fit, ReMoments{1.0, 0.1, 0.01}).d ==
        doctest::Approx(12.0).epsilon(0.1 / 12.0));
}

TEST_CASE("unbalanced single-treated design: RV1 departs from RV0") {
  std::vector<int> sizes;
  for (int c = 1; c <= 14; ++c)
    sizes.push_back(
        static_cast<int>(50.0 * 14.0 * std::exp(2.0 * c / 14.0) / 47.99) + 1);
  const auto data = treated_design(32, sizes, 1);
  const auto fit = fit_ols(data);
  const auto traces =
      build_dof_traces(build_a_blocks(fit, VarianceMethod::UV1, 1), fit);
  const double rv0 = dof_rv0(traces, fit).d;
  const double rv1 = dof_rv1(traces, fit, ReMoments{1.0, 0.1, 0.01}).d;
  CHECK(std::fabs(rv1 - rv0) / rv0 > 0.10);
}

TEST_CASE("satterthwaite d.f. under the plug-in reference: dense check") {
  const auto data = testutil::random_instance(33, {4, 5, 4}, 2);
  const auto fit = fit_ols(data);
  const auto blocks = build_a_blocks(fit, VarianceMethod::LZ2, 1);
  const auto traces = build_dof_traces(blocks, fit);
  const double s2 = 0.9, t2 = 0.2;
  const auto d = dof_satterthwaite_re(traces, fit, s2, t2);

  const Eigen::MatrixXd sigma = testutil::re_sigma(data, s2, t2);
  const Eigen::MatrixXd m = oracle::annihilator(data.x());
  const Eigen::MatrixXd amsm = dense_a(blocks, fit) * m * sigma * m;
  const double want = amsm.trace() * amsm.trace() / (amsm * amsm).trace();
  CHECK(d.d == doctest::Approx(want).epsilon(1e-8));
}
