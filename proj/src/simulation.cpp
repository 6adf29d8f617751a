#include "ucv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "ucv/csv.hpp"
#include "ucv/dof.hpp"
#include "ucv/errors.hpp"
#include "ucv/estimators.hpp"
#include "ucv/inference.hpp"
#include "ucv/ols.hpp"

namespace ucv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr uint64_t kXStreamTag = 1;
constexpr uint64_t kRepStreamTagBase = 16;
constexpr long kChunkSize = 1024;

double normal_two_sided_p(double t) { return std::erfc(std::fabs(t) / std::sqrt(2.0)); }

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::Stata: return "stata";
    case Method::Lzik: return "lzik";
    case Method::Uv1Rv0: return "uv1-rv0";
    case Method::Uv1Rv1: return "uv1-rv1";
    case Method::Uv2Rv0: return "uv2-rv0";
    case Method::Uv2Rv1: return "uv2-rv1";
    case Method::Uv3Rv0: return "uv3-rv0";
    case Method::Uv3Rv1: return "uv3-rv1";
    case Method::Exact: return "exact";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  static const std::pair<const char*, Method> table[] = {
      {"stata", Method::Stata},    {"lzik", Method::Lzik},
      {"uv1-rv0", Method::Uv1Rv0}, {"uv1-rv1", Method::Uv1Rv1},
      {"uv2-rv0", Method::Uv2Rv0}, {"uv2-rv1", Method::Uv2Rv1},
      {"uv3-rv0", Method::Uv3Rv0}, {"uv3-rv1", Method::Uv3Rv1},
      {"exact", Method::Exact}};
  for (const auto& [token, m] : table)
    if (name == token) return m;
  fail(ErrorCode::ConfigError, "unknown method '" + name + "'");
}

void SimulationConfig::validate() const {
  if (num_clusters < 2) fail(ErrorCode::ConfigError, "clusters: need C ≥ 2");
  if (n < num_clusters) fail(ErrorCode::ConfigError, "observations: need n ≥ C");
  if (treated_counts.empty())
    fail(ErrorCode::ConfigError, "treated: at least one sweep point required");
  for (int c1 : treated_counts)
    if (c1 < 1 || c1 > num_clusters - 1)
      fail(ErrorCode::ConfigError,
           "treated: C1 must lie in 1..C-1, got " + std::to_string(c1));
  if (replications < 0)
    fail(ErrorCode::ConfigError, "replications: must be nonnegative");
  if (levels.empty()) fail(ErrorCode::ConfigError, "levels: none given");
  for (double level : levels)
    if (!(level > 0.0 && level < 1.0))
      fail(ErrorCode::ConfigError, "levels: must lie strictly in (0,1)");
  if (methods.empty()) fail(ErrorCode::ConfigError, "methods: none selected");
  if (!(design.sigma2 > 0.0)) fail(ErrorCode::ConfigError, "sigma2: must be positive");
  if (design.tau2 < 0.0) fail(ErrorCode::ConfigError, "tau2: must be nonnegative");
  if (design.rho < 0.0) fail(ErrorCode::ConfigError, "rho: must be nonnegative");
}

std::vector<int> cluster_sizes(int num_clusters, int n, const Balance& balance) {
  if (num_clusters < 1 || n < num_clusters)
    fail(ErrorCode::ConfigError, "need n ≥ C ≥ 1");
  std::vector<int> sizes(num_clusters);
  if (balance.kind == BalanceKind::Balanced) {
    if (n % num_clusters != 0)
      fail(ErrorCode::NotDivisible,
           "balanced design needs C | n, got n=" + std::to_string(n) +
               ", C=" + std::to_string(num_clusters));
    std::fill(sizes.begin(), sizes.end(), n / num_clusters);
    return sizes;
  }
  // n_c = int(n · exp(γc/C) / Σ_d exp(γd/C)), 1-based c, remainder last.
  double denom = 0.0;
  for (int c = 1; c <= num_clusters; ++c)
    denom += std::exp(balance.gamma * c / num_clusters);
  long long used = 0;
  for (int c = 1; c < num_clusters; ++c) {
    const double share =
        n * std::exp(balance.gamma * c / num_clusters) / denom;
    sizes[c - 1] = static_cast<int>(share);
    used += sizes[c - 1];
    if (sizes[c - 1] <= 0)
      fail(ErrorCode::NonpositiveSize,
           "imbalance gamma=" + std::to_string(balance.gamma) +
               " empties cluster " + std::to_string(c));
  }
  sizes[num_clusters - 1] = static_cast<int>(n - used);
  if (sizes[num_clusters - 1] <= 0)
    fail(ErrorCode::NonpositiveSize, "remainder cluster empty");
  return sizes;
}

Eigen::VectorXd draw_continuous(const SimulationConfig& config,
                                uint64_t sweep_index) {
  RngStream rng(config.seed,
                stream_id(kXStreamTag, config.redraw_x ? sweep_index + 1 : 0));
  Eigen::VectorXd x(config.n);
  for (int i = 0; i < config.n; ++i) x[i] = rng.normal();
  return x;
}

DesignMatrix generate_design(const SimulationConfig& config, int treated_count,
                             const Eigen::VectorXd& continuous) {
  DesignMatrix dm;
  dm.sizes = cluster_sizes(config.num_clusters, config.n, config.balance);
  dm.treated_count = treated_count;
  dm.x.resize(config.n, 3);
  dm.cluster_of.resize(config.n);
  int pos = 0;
  for (int c = 0; c < config.num_clusters; ++c) {
    for (int i = 0; i < dm.sizes[c]; ++i, ++pos) {
      dm.cluster_of[pos] = c;
      dm.x(pos, 0) = 1.0;
      dm.x(pos, 1) = c < treated_count ? 1.0 : 0.0;
      dm.x(pos, 2) = continuous[pos];
    }
  }
  return dm;
}

Eigen::VectorXd draw_errors(const ErrorDesign& design,
                            const std::vector<int>& sizes,
                            const Eigen::VectorXd& continuous, RngStream& rng) {
  const int num_clusters = static_cast<int>(sizes.size());
  const int n = std::accumulate(sizes.begin(), sizes.end(), 0);
  Eigen::VectorXd eps(n);
  int pos = 0;
  for (int c = 0; c < num_clusters; ++c) {
    double sigma2 = design.sigma2;
    double tau2 = design.tau2;
    if (design.kind == DesignKind::SV2) {
      sigma2 = std::exp(2.0 * design.delta * (num_clusters - 1 - c) /
                        (num_clusters - 1));
      tau2 = design.rho * sigma2;
    }
    const double shared = std::sqrt(tau2) * rng.normal();
    for (int i = 0; i < sizes[c]; ++i)
      eps[pos + i] = shared + std::sqrt(sigma2) * rng.normal();
    if (design.kind == DesignKind::SV3)
      for (int i = 0; i < sizes[c]; ++i)
        eps[pos + i] +=
            std::fabs(continuous[pos + i]) / std::sqrt(2.0) * rng.normal();
    pos += sizes[c];
  }
  return eps;
}

namespace {

bool is_rv1(Method m) {
  return m == Method::Uv1Rv1 || m == Method::Uv2Rv1 || m == Method::Uv3Rv1;
}

struct MethodEngine {
  Method method;
  bool exists = true;
  std::string error;
  std::optional<Uv1Solver> uv1;
  std::optional<Uv2Solver> uv2;
  std::optional<Uv3Solver> uv3;
  std::optional<Hc2Solver> hc2;
  // Index 0 tests the dummy coefficient (ell = 1), index 1 the
  // continuous one (ell = 2).
  DofTraces traces[2];
  double dof_rv0_const[2] = {0.0, 0.0};
};

struct StudyPoint {
  int treated_count = 0;
  OlsFit base;
  Eigen::VectorXd mean;  // Xβ under the configured coefficients
  std::optional<MomentDesign> mdesign;
  std::string mdesign_error;
  bool needs_moments = false;
  Eigen::MatrixXd v_true;  // exact coefficient covariance under the design
  std::vector<MethodEngine> engines;
};

struct CellTally {
  std::vector<long> rejects;
  double dof_sum = 0.0;
  long dof_count = 0;
  long fallbacks = 0;
  long negvar = 0;
};

struct ChunkTally {
  // [method][coefficient]
  std::vector<std::array<CellTally, 2>> cells;
};

Eigen::MatrixXd true_variance(const SimulationConfig& config,
                              const DesignMatrix& dm, const OlsFit& fit) {
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
  int pos = 0;
  for (int c = 0; c < config.num_clusters; ++c) {
    double sigma2 = config.design.sigma2;
    double tau2 = config.design.tau2;
    if (config.design.kind == DesignKind::SV2) {
      sigma2 = std::exp(2.0 * config.design.delta *
                        (config.num_clusters - 1 - c) /
                        (config.num_clusters - 1));
      tau2 = config.design.rho * sigma2;
    }
    const Eigen::VectorXd xt = fit.xtil.row(c).transpose();
    meat += sigma2 * fit.per_cluster_gram[c] + tau2 * xt * xt.transpose();
    if (config.design.kind == DesignKind::SV3)
      for (int i = 0; i < dm.sizes[c]; ++i) {
        const Eigen::VectorXd row = dm.x.row(pos + i).transpose();
        meat += (dm.x(pos + i, 2) * dm.x(pos + i, 2) / 2.0) * row *
                row.transpose();
      }
    pos += dm.sizes[c];
  }
  return fit.gram_inv * meat * fit.gram_inv;
}

StudyPoint build_point(const SimulationConfig& config, int treated_count,
                       const Eigen::VectorXd& continuous) {
  StudyPoint pt;
  pt.treated_count = treated_count;
  const DesignMatrix dm = generate_design(config, treated_count, continuous);
  pt.base = fit_ols(ClusteredDataset(Eigen::VectorXd::Zero(config.n), dm.x,
                                     dm.cluster_of));
  pt.mean = dm.x * Eigen::Vector3d(config.alpha, config.beta, config.gamma_coef);
  pt.v_true = true_variance(config, dm, pt.base);

  try {
    pt.mdesign = build_moment_design(pt.base);
  } catch (const Error& err) {
    pt.mdesign_error = err.what();
  }

  const ScalarStats stats = scalar_stats(pt.base);
  for (Method m : config.methods) {
    MethodEngine e;
    e.method = m;
    try {
      switch (m) {
        case Method::Stata:
          if (config.num_clusters < 2)
            fail(ErrorCode::TooFewClusters, "need C ≥ 2");
          break;
        case Method::Exact:
          break;
        case Method::Lzik: {
          e.hc2.emplace(pt.base);
          for (int j = 0; j < 2; ++j)
            e.traces[j] = build_dof_traces(
                build_a_blocks_hc2(pt.base, *e.hc2, j + 1), pt.base);
          break;
        }
        case Method::Uv1Rv0:
        case Method::Uv1Rv1: {
          e.uv1.emplace(pt.base, stats);
          for (int j = 0; j < 2; ++j)
            e.traces[j] = build_dof_traces(
                build_a_blocks_uv1(pt.base, *e.uv1, j + 1), pt.base);
          break;
        }
        case Method::Uv2Rv0:
        case Method::Uv2Rv1: {
          e.uv2.emplace(pt.base, stats);
          for (int j = 0; j < 2; ++j)
            e.traces[j] = build_dof_traces(
                build_a_blocks_uv2(pt.base, *e.uv2, j + 1), pt.base);
          break;
        }
        case Method::Uv3Rv0:
        case Method::Uv3Rv1: {
          e.uv3.emplace(pt.base);
          for (int j = 0; j < 2; ++j)
            e.traces[j] = build_dof_traces(
                build_a_blocks_uv3(pt.base, *e.uv3, j + 1), pt.base);
          break;
        }
      }
      if (e.exists && m != Method::Stata && m != Method::Exact)
        for (int j = 0; j < 2; ++j)
          e.dof_rv0_const[j] = dof_rv0(e.traces[j], pt.base).d;
      if (is_rv1(m) && !pt.mdesign)
        fail(ErrorCode::SingularMomentSystem, pt.mdesign_error);
    } catch (const Error& err) {
      e.exists = false;
      e.error = err.what();
    }
    pt.engines.push_back(std::move(e));
  }
  // The HC2 benchmark needs only the plug-in RE parameters; the unbiased
  // fourth moments are computed when some RV1 reference is in play.
  for (const auto& e : pt.engines)
    if (e.exists && is_rv1(e.method)) pt.needs_moments = true;
  return pt;
}

void run_replication(const SimulationConfig& config, const StudyPoint& pt,
                     int point_index, long rep, ChunkTally& tally) {
  RngStream rng(config.seed,
                stream_id(kRepStreamTagBase + point_index, static_cast<uint64_t>(rep)));
  const ClusteredDataset& data = *pt.base.data;
#ifndef NDEBUG
  for (int i = 0; i < data.n(); ++i)
    assert(data.x()(i, 1) ==
           (data.cluster_of()[i] < pt.treated_count ? 1.0 : 0.0));
#endif
  const Eigen::VectorXd eps = draw_errors(
      config.design, data.cluster_sizes(),
      data.x().col(2), rng);
  const OlsFit fit = refit_ols(pt.base, pt.mean + eps);

  std::optional<ReMoments> moments;
  if (pt.needs_moments && pt.mdesign)
    moments = re_moments_from_resid(*pt.mdesign, fit);

  // Plug-in RE parameters for the HC2 benchmark reference.
  double ik_sigma2 = 0.0, ik_tau2 = 0.0;
  {
    const double nddot = data.sum_sq_sizes();
    if (nddot > fit.n()) {
      ik_tau2 = (fit.rss_cluster - fit.rss) / (nddot - fit.n());
      ik_sigma2 = fit.rss / fit.n() - ik_tau2;
    } else {
      ik_sigma2 = fit.rss / fit.n();
    }
  }

  for (size_t mi = 0; mi < pt.engines.size(); ++mi) {
    const MethodEngine& e = pt.engines[mi];
    if (!e.exists) continue;

    Eigen::MatrixXd v;
    double dof[2] = {0.0, 0.0};
    bool fell_back[2] = {false, false};
    bool have_dof = true;
    switch (e.method) {
      case Method::Stata:
        v = lz1_stata(fit).v;
        dof[0] = dof[1] = config.num_clusters - 1;
        break;
      case Method::Exact:
        v = pt.v_true;
        have_dof = false;
        break;
      case Method::Lzik: {
        v = e.hc2->estimate(fit).v;
        for (int j = 0; j < 2; ++j) {
          try {
            dof[j] = dof_satterthwaite_re(e.traces[j], fit, ik_sigma2, ik_tau2).d;
          } catch (const Error&) {
            // Independence reference with the parameters cancelled.
            dof[j] = std::clamp(e.traces[j].tr_am * e.traces[j].tr_am /
                                    e.traces[j].tr_amam,
                                1.0, static_cast<double>(fit.n() - fit.k()));
            fell_back[j] = true;
          }
        }
        break;
      }
      case Method::Uv1Rv0:
      case Method::Uv1Rv1:
        v = e.uv1->estimate(fit.rss, fit.rss_cluster).v;
        break;
      case Method::Uv2Rv0:
      case Method::Uv2Rv1: {
        Eigen::VectorXd rhs(2 * config.num_clusters);
        rhs << fit.cluster_rss, fit.cluster_sum_sq;
        v = e.uv2->estimate(rhs).v;
        break;
      }
      case Method::Uv3Rv0:
      case Method::Uv3Rv1:
        v = e.uv3->estimate(fit).v;
        break;
    }
    if (e.method == Method::Uv1Rv0 || e.method == Method::Uv2Rv0 ||
        e.method == Method::Uv3Rv0)
      for (int j = 0; j < 2; ++j) dof[j] = e.dof_rv0_const[j];
    if (is_rv1(e.method))
      for (int j = 0; j < 2; ++j) {
        const DofEstimate d = dof_rv1_or_rv0(e.traces[j], fit, *moments);
        dof[j] = d.d;
        fell_back[j] = d.fallback_from_rv1;
      }

    for (int j = 0; j < 2; ++j) {
      const int ell = j + 1;
      CellTally& cell = tally.cells[mi][j];
      if (have_dof) {
        cell.dof_sum += dof[j];
        cell.dof_count += 1;
        if (fell_back[j]) cell.fallbacks += 1;
      }
      const double vll = v(ell, ell);
      if (!(vll > 0.0)) {
        cell.negvar += 1;  // counted as a non-rejection
        continue;
      }
      const double t = fit.beta_hat[ell] / std::sqrt(vll);
      const double p = e.method == Method::Exact
                           ? normal_two_sided_p(t)
                           : student_t_two_sided_p(t, dof[j]);
      for (size_t li = 0; li < config.levels.size(); ++li)
        if (p < config.levels[li]) cell.rejects[li] += 1;
    }
  }
}

}  // namespace

SizeStudyResult run_study(const SimulationConfig& config, int num_threads) {
  config.validate();
  if (num_threads < 1) num_threads = 1;
  const auto t0 = std::chrono::steady_clock::now();

  SizeStudyResult result;
  result.config = config;
  const long reps = config.replications;

  for (size_t point_index = 0; point_index < config.treated_counts.size();
       ++point_index) {
    const Eigen::VectorXd continuous = draw_continuous(config, point_index);
    const StudyPoint pt =
        build_point(config, config.treated_counts[point_index], continuous);

    const long n_chunks = reps > 0 ? (reps + kChunkSize - 1) / kChunkSize : 0;
    std::vector<ChunkTally> tallies(n_chunks);
    for (auto& tally : tallies) {
      tally.cells.resize(pt.engines.size());
      for (auto& pair : tally.cells)
        for (auto& cell : pair) cell.rejects.assign(config.levels.size(), 0);
    }

    std::atomic<long> next_chunk{0};
    auto worker = [&]() {
      for (;;) {
        const long chunk = next_chunk.fetch_add(1);
        if (chunk >= n_chunks) return;
        const long lo = chunk * kChunkSize;
        const long hi = std::min(reps, lo + kChunkSize);
        for (long rep = lo; rep < hi; ++rep)
          run_replication(config, pt, static_cast<int>(point_index), rep,
                          tallies[chunk]);
      }
    };
    if (num_threads == 1 || n_chunks <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      const int workers = static_cast<int>(
          std::min<long>(num_threads, std::max<long>(n_chunks, 1)));
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    // Deterministic reduction: chunk sums combined in index order.
    for (size_t mi = 0; mi < pt.engines.size(); ++mi) {
      const MethodEngine& e = pt.engines[mi];
      for (int j = 0; j < 2; ++j) {
        CellTally total;
        total.rejects.assign(config.levels.size(), 0);
        for (const auto& tally : tallies) {
          const CellTally& cell = tally.cells[mi][j];
          for (size_t li = 0; li < total.rejects.size(); ++li)
            total.rejects[li] += cell.rejects[li];
          total.dof_sum += cell.dof_sum;
          total.dof_count += cell.dof_count;
          total.fallbacks += cell.fallbacks;
          total.negvar += cell.negvar;
        }
        if (reps == 0) continue;
        for (size_t li = 0; li < config.levels.size(); ++li) {
          SizeStudyRow row;
          row.method = e.method;
          row.treated_count = pt.treated_count;
          row.coefficient = j + 1;
          row.level = config.levels[li];
          row.n_exists = e.exists ? reps : 0;
          row.n_fallback = total.fallbacks;
          row.n_negvar = total.negvar;
          row.error = e.error;
          if (e.exists) {
            row.size = static_cast<double>(total.rejects[li]) / reps;
            row.size_zero_rule = row.size;
            row.mean_dof =
                total.dof_count > 0 ? total.dof_sum / total.dof_count : kNaN;
          } else {
            row.size = kNaN;
            row.size_zero_rule = 0.0;  // nonexistence rendered as zero
            row.mean_dof = kNaN;
          }
          result.rows.push_back(std::move(row));
        }
      }
    }
  }

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

std::string size_study_csv(const SizeStudyResult& result) {
  std::string out =
      "method,c1,coefficient,level,size,size_zero,mean_dof,n_exists,"
      "n_fallback,n_negvar,error\n";
  const auto num = [](double v) {
    return std::isnan(v) ? std::string() : format_double(v);
  };
  for (const auto& row : result.rows) {
    out += csv_line({method_name(row.method), std::to_string(row.treated_count),
                     row.coefficient == 1 ? "beta" : "gamma",
                     format_double(row.level), num(row.size),
                     num(row.size_zero_rule), num(row.mean_dof),
                     std::to_string(row.n_exists),
                     std::to_string(row.n_fallback),
                     std::to_string(row.n_negvar), row.error});
    out += "\n";
  }
  return out;
}

ClusteredDataset resample_clusters(const ClusteredDataset& data,
                                   const ResampleScheme& scheme,
                                   double within_fraction, int treated_count,
                                   RngStream& rng) {
  if (!(within_fraction > 0.0 && within_fraction <= 1.0))
    fail(ErrorCode::ConfigError, "within fraction must lie in (0, 1]");
  const int C = data.num_clusters();

  std::vector<int> sampled;
  if (scheme.kind == ResampleSchemeKind::RandomWithReplacement) {
    if (scheme.count < 1) fail(ErrorCode::ConfigError, "count must be ≥ 1");
    sampled.reserve(scheme.count);
    for (int j = 0; j < scheme.count; ++j)
      sampled.push_back(static_cast<int>(rng.uniform_int(C)));
  } else {
    if (scheme.top < 0 || scheme.bottom < 0 || scheme.top + scheme.bottom < 1)
      fail(ErrorCode::ConfigError, "need top + bottom ≥ 1 clusters");
    std::vector<int> by_size(C);
    std::iota(by_size.begin(), by_size.end(), 0);
    std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
      return data.cluster_sizes()[a] > data.cluster_sizes()[b];
    });
    for (int j = 0; j < std::min(scheme.top, C); ++j)
      sampled.push_back(by_size[j]);
    for (int j = 0; j < std::min(scheme.bottom, C); ++j)
      sampled.push_back(by_size[C - 1 - j]);
  }

  const int drawn = static_cast<int>(sampled.size());
  if (treated_count < 1 || treated_count > drawn)
    fail(ErrorCode::ConfigError,
         "treated count must lie in 1.." + std::to_string(drawn));

  // Within-cluster subsample without replacement; fraction 1 keeps all rows.
  std::vector<int> rows_out;
  std::vector<int> cluster_out;
  for (int j = 0; j < drawn; ++j) {
    const auto& rows = data.cluster_rows()[sampled[j]];
    const long keep = std::llround(within_fraction * rows.size());
    if (keep < 1)
      fail(ErrorCode::EmptySubsample,
           "fraction " + std::to_string(within_fraction) +
               " keeps no observations of cluster " +
               std::to_string(sampled[j]));
    std::vector<int> pick(rows);
    for (long i = 0; i < keep; ++i) {
      const long swap_with = i + static_cast<long>(rng.uniform_int(pick.size() - i));
      std::swap(pick[i], pick[swap_with]);
    }
    for (long i = 0; i < keep; ++i) {
      rows_out.push_back(pick[i]);
      cluster_out.push_back(j);  // duplicates become distinct clusters
    }
  }

  // Fake cluster-constant policy on a random subset of sampled clusters.
  std::vector<int> order(drawn);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < treated_count; ++i) {
    const int swap_with = i + static_cast<int>(rng.uniform_int(drawn - i));
    std::swap(order[i], order[swap_with]);
  }
  std::vector<char> treated(drawn, 0);
  for (int i = 0; i < treated_count; ++i) treated[order[i]] = 1;

  const int m = static_cast<int>(rows_out.size());
  Eigen::VectorXd y(m);
  Eigen::MatrixXd x(m, data.k() + 1);
  for (int i = 0; i < m; ++i) {
    y[i] = data.y()[rows_out[i]];
    x.row(i).head(data.k()) = data.x().row(rows_out[i]);
    x(i, data.k()) = treated[cluster_out[i]] ? 1.0 : 0.0;
  }
  return ClusteredDataset(std::move(y), std::move(x), std::move(cluster_out));
}

}  // namespace ucv
