#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ucv/dataset.hpp"
#include "ucv/rng.hpp"

namespace ucv {

enum class BalanceKind { Balanced, Unbalanced };

struct Balance {
  BalanceKind kind = BalanceKind::Balanced;
  double gamma = 2.0;  // imbalance exponent (unbalanced only)
};

enum class DesignKind { SV1, SV2, SV3 };

// Error covariance used to simulate:
//   SV1: Σ_c = σ²I + τ²ιι'
//   SV2: Σ_c = σ_c²I + τ_c²ιι', σ_c² = exp(2δ(C-c)/(C-1)), τ_c² = ρσ_c²
//        (1-based cluster index c; the first cluster has the largest σ_c²)
//   SV3: SV1 plus diag(x_c)²/2 on the diagonal
struct ErrorDesign {
  DesignKind kind = DesignKind::SV1;
  double sigma2 = 1.0;
  double tau2 = 0.1;
  double rho = 0.1;
  double delta = std::log(2.0) / 2.0;
};

enum class Method {
  Stata,    // LZ1 sandwich, t(C-1)
  Lzik,     // HC2 sandwich, Satterthwaite d.f. under the plug-in RE reference
  Uv1Rv0,
  Uv1Rv1,
  Uv2Rv0,
  Uv2Rv1,
  Uv3Rv0,
  Uv3Rv1,
  Exact,    // known-variance normal test; validates the harness itself
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);  // throws ConfigError

struct SimulationConfig {
  int num_clusters = 14;
  int n = 2800;
  Balance balance;
  ErrorDesign design;
  std::vector<int> treated_counts = {7};  // C1 sweep points
  double alpha = 0.0;   // intercept
  double beta = 0.0;    // treatment-dummy coefficient
  double gamma_coef = 0.0;  // continuous-regressor coefficient
  long replications = 200000;
  std::vector<double> levels = {0.05};
  uint64_t seed = 1;
  std::vector<Method> methods = {Method::Stata,  Method::Lzik,
                                 Method::Uv1Rv0, Method::Uv1Rv1,
                                 Method::Uv2Rv0, Method::Uv2Rv1,
                                 Method::Uv3Rv0, Method::Uv3Rv1};
  bool redraw_x = false;  // redraw the continuous regressor per sweep point

  void validate() const;  // throws ConfigError
};

// Cluster sizes: balanced requires C | n; unbalanced uses
// n_c = int(n·exp(γc/C)/Σ_d exp(γd/C)) for c = 1..C-1 and the remainder
// for the last cluster.
std::vector<int> cluster_sizes(int num_clusters, int n, const Balance& balance);

struct DesignMatrix {
  Eigen::MatrixXd x;            // columns: intercept, treatment dummy, continuous
  std::vector<int> cluster_of;  // contiguous blocks, cluster 0 first
  std::vector<int> sizes;
  int treated_count = 0;
};

// Continuous regressor draw for a study; one draw is shared across the
// treated-count sweep unless redraw_x is set.
Eigen::VectorXd draw_continuous(const SimulationConfig& config, uint64_t sweep_index);

DesignMatrix generate_design(const SimulationConfig& config, int treated_count,
                             const Eigen::VectorXd& continuous);

Eigen::VectorXd draw_errors(const ErrorDesign& design, const std::vector<int>& sizes,
                            const Eigen::VectorXd& continuous, RngStream& rng);

// One result row per (method, treated count, coefficient, level).
struct SizeStudyRow {
  Method method;
  int treated_count = 0;
  int coefficient = 0;  // 1 = dummy, 2 = continuous
  double level = 0.0;
  double size = 0.0;            // NaN when the estimator does not exist
  double size_zero_rule = 0.0;  // nonexistence rendered as zero
  double mean_dof = 0.0;        // NaN for the exact-normal reference
  long n_exists = 0;
  long n_fallback = 0;   // RV1 → RV0 denominator fallbacks
  long n_negvar = 0;     // replications with a nonpositive variance entry
  std::string error;     // nonexistence reason, empty otherwise
};

struct SizeStudyResult {
  SimulationConfig config;
  std::vector<SizeStudyRow> rows;
  double elapsed_seconds = 0.0;
};

SizeStudyResult run_study(const SimulationConfig& config, int num_threads = 1);

// Long-format CSV of the rows; byte-deterministic for a given config and
// seed, independent of the worker count.
std::string size_study_csv(const SizeStudyResult& result);

enum class ResampleSchemeKind { RandomWithReplacement, BySize };

struct ResampleScheme {
  ResampleSchemeKind kind = ResampleSchemeKind::RandomWithReplacement;
  int count = 14;  // clusters drawn (with replacement)
  int top = 3;     // largest clusters kept (BySize)
  int bottom = 11; // smallest clusters kept (BySize)
};

// Cluster resampling with a fake cluster-constant policy column appended
// as the last regressor. Duplicated draws become distinct clusters;
// within each sampled cluster a fraction of observations is subsampled
// (without replacement; fraction 1 keeps every row).
ClusteredDataset resample_clusters(const ClusteredDataset& data,
                                   const ResampleScheme& scheme,
                                   double within_fraction, int treated_count,
                                   RngStream& rng);

}  // namespace ucv
