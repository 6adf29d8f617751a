#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "testutil.hpp"
#include "ucv/config.hpp"
#include "ucv/errors.hpp"
#include "ucv/simulation.hpp"

using namespace ucv;

TEST_CASE("cluster sizes: balanced and small cases") {
  const auto balanced = cluster_sizes(14, 2800, Balance{BalanceKind::Balanced});
  CHECK(balanced == std::vector<int>(14, 200));
  CHECK(cluster_sizes(2, 4, Balance{BalanceKind::Balanced}) ==
        std::vector<int>{2, 2});
  CHECK_THROWS_AS(cluster_sizes(3, 10, Balance{BalanceKind::Balanced}), Error);
}

TEST_CASE("cluster sizes: imbalance rule reproduces the 67..438 range") {
  const auto sizes =
      cluster_sizes(14, 2800, Balance{BalanceKind::Unbalanced, 2.0});
  CHECK(*std::min_element(sizes.begin(), sizes.end()) == 67);
  CHECK(*std::max_element(sizes.begin(), sizes.end()) == 438);
  CHECK(std::accumulate(sizes.begin(), sizes.end(), 0) == 2800);
  // Sizes increase with the cluster index; the remainder goes last.
  CHECK(std::is_sorted(sizes.begin(), sizes.end()));
}

TEST_CASE("cluster sizes: extreme imbalance empties a cluster") {
  CHECK_THROWS_AS(cluster_sizes(14, 100, Balance{BalanceKind::Unbalanced, 60.0}),
                  Error);
}

TEST_CASE("generated design: dummy structure and determinism") {
  SimulationConfig config;
  config.num_clusters = 6;
  config.n = 60;
  config.treated_counts = {2};
  config.seed = 9;
  const auto x1 = draw_continuous(config, 0);
  const auto x2 = draw_continuous(config, 0);
  CHECK((x1 - x2).cwiseAbs().maxCoeff() == 0.0);  // one draw per study

  const auto dm = generate_design(config, 2, x1);
  for (int i = 0; i < config.n; ++i) {
    const int c = dm.cluster_of[i];
    CHECK(dm.x(i, 0) == 1.0);
    CHECK(dm.x(i, 1) == (c < 2 ? 1.0 : 0.0));
  }
}

TEST_CASE("continuous regressor moments at n = 2800") {
  SimulationConfig config;  // defaults: C=14, n=2800
  const auto x = draw_continuous(config, 0);
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / (x.size() - 1);
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(2800.0));
  CHECK(std::fabs(var - 1.0) < 4.0 * std::sqrt(2.0 / 2800.0));
}

TEST_CASE("sv2 variances range from 1 to 2 at the default slope") {
  ErrorDesign design;
  design.kind = DesignKind::SV2;
  const int num_clusters = 14;
  // First cluster carries exp(2δ) = 2, last carries 1.
  const double first = std::exp(2.0 * design.delta);
  CHECK(first == doctest::Approx(2.0).epsilon(1e-12));

  std::vector<int> sizes(num_clusters, 400);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(400 * num_clusters);
  RngStream rng(17, 1);
  const Eigen::VectorXd eps = draw_errors(design, sizes, x, rng);
  // Sample variances per cluster reflect σ_c²(1 + ρ) within sampling noise.
  const double v_first = eps.segment(0, 400).squaredNorm() / 400.0;
  const double v_last = eps.segment(400 * 13, 400).squaredNorm() / 400.0;
  CHECK(v_first > v_last);
}

TEST_CASE("sv1 with τ² = 0 leaves within-cluster draws uncorrelated") {
  ErrorDesign design;
  design.tau2 = 0.0;
  std::vector<int> sizes(2, 2);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  double sum_cross = 0.0;
  const long reps = 20000;
  for (long r = 0; r < reps; ++r) {
    RngStream rng(33, r);
    const Eigen::VectorXd eps = draw_errors(design, sizes, x, rng);
    sum_cross += eps[0] * eps[1];
  }
  CHECK(std::fabs(sum_cross / reps) < 3.0 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("sv1 cluster covariance matches its target (Monte Carlo)") {
  ErrorDesign design;  // σ² = 1, τ² = 0.1
  std::vector<int> sizes{3};
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d sum_sq = Eigen::Matrix3d::Zero();
  const long reps = 100000;
  for (long r = 0; r < reps; ++r) {
    RngStream rng(71, r);
    const Eigen::VectorXd eps = draw_errors(design, sizes, x, rng);
    const Eigen::Matrix3d outer = eps * eps.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  const Eigen::Matrix3d mean = sum / reps;
  Eigen::Matrix3d target = Eigen::Matrix3d::Constant(0.1);
  target.diagonal().array() += 1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double var = sum_sq(i, j) / reps - mean(i, j) * mean(i, j);
      CHECK(std::fabs(mean(i, j) - target(i, j)) <
            3.0 * std::sqrt(var / reps));
    }
}

TEST_CASE("sv3 adds the regressor-driven diagonal (Monte Carlo)") {
  ErrorDesign design;
  design.kind = DesignKind::SV3;
  std::vector<int> sizes{2};
  Eigen::VectorXd x(2);
  x << 2.0, 0.0;
  double sum0 = 0.0, sum1 = 0.0;
  const long reps = 100000;
  for (long r = 0; r < reps; ++r) {
    RngStream rng(72, r);
    const Eigen::VectorXd eps = draw_errors(design, sizes, x, rng);
    sum0 += eps[0] * eps[0];
    sum1 += eps[1] * eps[1];
  }
  // Var(ε_i) = σ² + τ² + x_i²/2.
  CHECK(sum0 / reps == doctest::Approx(1.1 + 2.0).epsilon(0.05));
  CHECK(sum1 / reps == doctest::Approx(1.1).epsilon(0.05));
}

TEST_CASE("config validation catches bad fields") {
  SimulationConfig config;
  config.num_clusters = 1;
  CHECK_THROWS_AS(config.validate(), Error);
  config = SimulationConfig{};
  config.treated_counts = {14};
  CHECK_THROWS_AS(config.validate(), Error);
  config = SimulationConfig{};
  config.levels = {1.5};
  CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("config file parsing: schema, sweep, errors") {
  const std::string text = R"(# example
clusters = 6
observations = 120
balance = unbalanced
imbalance_gamma = 1.0
design = sv2
rho = 0.2
treated = 1..3
replications = 10
levels = 0.05, 0.1
seed = 17
methods = stata, uv1-rv1
)";
  const auto config = parse_study_config_string(text);
  CHECK(config.num_clusters == 6);
  CHECK(config.balance.kind == BalanceKind::Unbalanced);
  CHECK(config.design.kind == DesignKind::SV2);
  CHECK(config.treated_counts == std::vector<int>{1, 2, 3});
  CHECK(config.levels == std::vector<double>{0.05, 0.1});
  CHECK(config.methods ==
        std::vector<Method>{Method::Stata, Method::Uv1Rv1});

  CHECK_THROWS_WITH_AS(parse_study_config_string("bogus = 1\n"),
                       doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS(parse_study_config_string("methods = uv9\n"),
                       doctest::Contains("unknown method"), Error);
}

TEST_CASE("run_study: zero replications yield an empty result") {
  SimulationConfig config;
  config.num_clusters = 4;
  config.n = 40;
  config.treated_counts = {2};
  config.replications = 0;
  config.methods = {Method::Stata};
  const auto result = run_study(config);
  CHECK(result.rows.empty());
}

TEST_CASE("run_study: nonexistence bookkeeping for few treated clusters") {
  SimulationConfig config;
  config.num_clusters = 8;
  config.n = 80;
  config.design.tau2 = 0.1;
  config.treated_counts = {1, 2, 3};
  config.replications = 20;
  config.seed = 5;
  config.methods = {Method::Lzik, Method::Uv2Rv0, Method::Uv3Rv0,
                    Method::Uv1Rv0};
  const auto result = run_study(config);

  const auto find = [&](Method m, int c1) {
    for (const auto& row : result.rows)
      if (row.method == m && row.treated_count == c1 && row.coefficient == 1)
        return row;
    REQUIRE(false);
    return result.rows.front();
  };
  // C1 = 1: the HC2 benchmark and both generalized estimators are missing.
  CHECK(find(Method::Lzik, 1).n_exists == 0);
  CHECK(find(Method::Uv2Rv0, 1).n_exists == 0);
  CHECK(find(Method::Uv3Rv0, 1).n_exists == 0);
  CHECK(find(Method::Uv1Rv0, 1).n_exists == 20);
  CHECK(find(Method::Lzik, 1).size_zero_rule == 0.0);
  CHECK(std::isnan(find(Method::Lzik, 1).size));
  // C1 = 2: HC2 exists again, the generalized estimators still do not.
  CHECK(find(Method::Lzik, 2).n_exists == 20);
  CHECK(find(Method::Uv2Rv0, 2).n_exists == 0);
  CHECK(find(Method::Uv3Rv0, 2).n_exists == 0);
  // C1 = 3: everything exists.
  CHECK(find(Method::Uv2Rv0, 3).n_exists == 20);
  CHECK(find(Method::Uv3Rv0, 3).n_exists == 20);
}

TEST_CASE("run_study: identical bytes at 1, 2 and 4 workers") {
  SimulationConfig config;
  config.num_clusters = 6;
  config.n = 120;
  config.treated_counts = {2, 3};
  config.replications = 2500;  // spans several chunks
  config.seed = 31;
  config.methods = {Method::Stata, Method::Uv1Rv0, Method::Uv1Rv1,
                    Method::Exact};
  const auto csv1 = size_study_csv(run_study(config, 1));
  const auto csv2 = size_study_csv(run_study(config, 2));
  const auto csv4 = size_study_csv(run_study(config, 4));
  CHECK(csv1 == csv2);
  CHECK(csv1 == csv4);
  CHECK(csv1.find("uv1-rv1") != std::string::npos);
}

TEST_CASE("run_study: exact-normal reference attains nominal size") {
  SimulationConfig config;
  config.num_clusters = 6;
  config.n = 60;
  config.treated_counts = {3};
  config.replications = 20000;
  config.seed = 77;
  config.levels = {0.05};
  config.methods = {Method::Exact};
  const auto result = run_study(config);
  REQUIRE(result.rows.size() == 2);
  const double se = std::sqrt(0.05 * 0.95 / config.replications);
  for (const auto& row : result.rows)
    CHECK(std::fabs(row.size - 0.05) < 3.0 * se);
}

TEST_CASE("resample: full fraction and every cluster once is the identity") {
  const auto data = testutil::random_instance(81, {3, 5, 4}, 2);
  RngStream rng(1, 2);
  ResampleScheme scheme;
  scheme.kind = ResampleSchemeKind::BySize;
  scheme.top = 3;
  scheme.bottom = 0;
  const auto out = resample_clusters(data, scheme, 1.0, 2, rng);

  CHECK(out.n() == data.n());
  CHECK(out.num_clusters() == 3);
  CHECK(out.k() == data.k() + 1);
  // Same multiset of (y, x-row); policy column is cluster-constant.
  std::multiset<double> y_in(data.y().begin(), data.y().end());
  std::multiset<double> y_out(out.y().begin(), out.y().end());
  CHECK(y_in == y_out);
  int treated_clusters = 0;
  for (int c = 0; c < out.num_clusters(); ++c) {
    const Eigen::VectorXd policy = out.cluster_x(c).col(data.k());
    CHECK((policy.array() == policy[0]).all());
    treated_clusters += policy[0] == 1.0 ? 1 : 0;
  }
  CHECK(treated_clusters == 2);
}

TEST_CASE("resample: by-size selection keeps 3 largest + 11 smallest of 51") {
  std::vector<int> sizes(51);
  for (int c = 0; c < 51; ++c) sizes[c] = 5 + c;
  const auto data = testutil::random_instance(82, sizes, 1);
  RngStream rng(3, 4);
  ResampleScheme scheme;
  scheme.kind = ResampleSchemeKind::BySize;
  scheme.top = 3;
  scheme.bottom = 11;
  const auto out = resample_clusters(data, scheme, 0.2, 5, rng);
  CHECK(out.num_clusters() == 14);
}

TEST_CASE("resample: duplicated draws become distinct clusters") {
  const auto data = testutil::random_instance(83, {4, 4}, 1);
  RngStream rng(5, 6);
  ResampleScheme scheme;
  scheme.kind = ResampleSchemeKind::RandomWithReplacement;
  scheme.count = 6;  // duplicates guaranteed from 2 source clusters
  const auto out = resample_clusters(data, scheme, 1.0, 3, rng);
  CHECK(out.num_clusters() == 6);
}

TEST_CASE("resample: fraction rounding to zero raises") {
  const auto data = testutil::random_instance(84, {2, 2, 2}, 1);
  RngStream rng(7, 8);
  ResampleScheme scheme;
  scheme.kind = ResampleSchemeKind::BySize;
  scheme.top = 3;
  scheme.bottom = 0;
  CHECK_THROWS_AS(resample_clusters(data, scheme, 0.1, 1, rng), Error);
}
