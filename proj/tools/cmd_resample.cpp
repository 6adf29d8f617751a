#include <CLI11.hpp>
#include <iostream>
#include <memory>
#include <optional>

#include "common.hpp"
#include "ucv/dof.hpp"
#include "ucv/estimators.hpp"
#include "ucv/inference.hpp"
#include "ucv/simulation.hpp"

namespace ucvcli {

namespace {

using namespace ucv;

struct ResampleOptions {
  std::string input;
  std::string output;
  std::string scheme = "random";
  int count = 14;
  int top = 3;
  int bottom = 11;
  double within_fraction = 0.2;
  int treated = 1;
  long replications = 1000;
  std::vector<double> levels = {0.05};
  std::vector<std::string> methods = {"stata",   "lzik",    "uv1-rv0",
                                      "uv1-rv1", "uv2-rv0", "uv2-rv1",
                                      "uv3-rv0", "uv3-rv1"};
  uint64_t seed = 1;
};

struct Tally {
  long exists = 0;
  long negvar = 0;
  long fallback = 0;
  double dof_sum = 0.0;
  long dof_count = 0;
  std::vector<long> rejects;
};

// Test of the policy coefficient (last column) for one resampled dataset.
void evaluate(const OlsFit& fit, Method m, const std::vector<double>& levels,
              Tally& tally) {
  const int ell = fit.k() - 1;
  Eigen::MatrixXd v;
  double dof = 0.0;
  bool fell_back = false;

  const auto uv_dof = [&](const ABlocks& blocks, bool rv1) {
    const auto traces = build_dof_traces(blocks, fit);
    if (!rv1) return dof_rv0(traces, fit);
    const auto est =
        dof_rv1_or_rv0(traces, fit, estimate_re_moments(fit));
    return est;
  };

  switch (m) {
    case Method::Stata:
      v = lz1_stata(fit).v;
      dof = fit.num_clusters() - 1;
      break;
    case Method::Lzik: {
      const Hc2Solver solver(fit);
      v = solver.estimate(fit).v;
      const auto traces =
          build_dof_traces(build_a_blocks_hc2(fit, solver, ell), fit);
      double s2 = fit.rss / fit.n(), t2 = 0.0;
      if (fit.data->sum_sq_sizes() > fit.n()) {
        t2 = (fit.rss_cluster - fit.rss) /
             (fit.data->sum_sq_sizes() - fit.n());
        s2 = fit.rss / fit.n() - t2;
      }
      dof = dof_satterthwaite_re(traces, fit, s2, t2).d;
      break;
    }
    case Method::Uv1Rv0:
    case Method::Uv1Rv1: {
      const auto stats = scalar_stats(fit);
      const Uv1Solver solver(fit, stats);
      v = solver.estimate(fit.rss, fit.rss_cluster).v;
      const auto est =
          uv_dof(build_a_blocks_uv1(fit, solver, ell), m == Method::Uv1Rv1);
      dof = est.d;
      fell_back = est.fallback_from_rv1;
      break;
    }
    case Method::Uv2Rv0:
    case Method::Uv2Rv1: {
      const auto stats = scalar_stats(fit);
      const Uv2Solver solver(fit, stats);
      Eigen::VectorXd rhs(2 * fit.num_clusters());
      rhs << fit.cluster_rss, fit.cluster_sum_sq;
      v = solver.estimate(rhs).v;
      const auto est =
          uv_dof(build_a_blocks_uv2(fit, solver, ell), m == Method::Uv2Rv1);
      dof = est.d;
      fell_back = est.fallback_from_rv1;
      break;
    }
    case Method::Uv3Rv0:
    case Method::Uv3Rv1: {
      const Uv3Solver solver(fit);
      v = solver.estimate(fit).v;
      const auto est =
          uv_dof(build_a_blocks_uv3(fit, solver, ell), m == Method::Uv3Rv1);
      dof = est.d;
      fell_back = est.fallback_from_rv1;
      break;
    }
    case Method::Exact:
      fail(ErrorCode::ConfigError, "exact reference needs a known design");
  }

  tally.exists += 1;
  tally.dof_sum += dof;
  tally.dof_count += 1;
  if (fell_back) tally.fallback += 1;
  const double vll = v(ell, ell);
  if (!(vll > 0.0)) {
    tally.negvar += 1;
    return;
  }
  const double t = fit.beta_hat[ell] / std::sqrt(vll);
  const double p = student_t_two_sided_p(t, dof);
  for (size_t li = 0; li < levels.size(); ++li)
    if (p < levels[li]) tally.rejects[li] += 1;
}

int resample_main(const ResampleOptions& opt) {
  RunManifest manifest;
  manifest.subcommand = "resample";
  manifest.inputs = {opt.input};
  manifest.seed = opt.seed;
  manifest.has_seed = true;
  manifest.started_utc = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  if (opt.replications < 1)
    fail(ErrorCode::ConfigError, "replications must be ≥ 1");
  std::vector<Method> methods;
  for (const auto& name : opt.methods) methods.push_back(method_from_name(name));

  ResampleScheme scheme;
  if (opt.scheme == "random") {
    scheme.kind = ResampleSchemeKind::RandomWithReplacement;
    scheme.count = opt.count;
  } else {
    scheme.kind = ResampleSchemeKind::BySize;
    scheme.top = opt.top;
    scheme.bottom = opt.bottom;
  }

  if (!(opt.within_fraction > 0.0 && opt.within_fraction <= 1.0))
    fail(ErrorCode::ConfigError, "--within-fraction must lie in (0, 1]");
  if (opt.treated < 1) fail(ErrorCode::ConfigError, "--treated must be ≥ 1");

  const LoadedData loaded = load_estimation_csv(opt.input);
  std::vector<Tally> tallies(methods.size());
  for (auto& tally : tallies) tally.rejects.assign(opt.levels.size(), 0);

  long degenerate = 0;
  for (long rep = 0; rep < opt.replications; ++rep) {
    RngStream rng(opt.seed, static_cast<uint64_t>(rep));
    try {
      const ClusteredDataset sample = resample_clusters(
          loaded.data, scheme, opt.within_fraction, opt.treated, rng);
      const OlsFit fit = fit_ols(sample);
      for (size_t mi = 0; mi < methods.size(); ++mi) {
        try {
          evaluate(fit, methods[mi], opt.levels, tallies[mi]);
        } catch (const Error&) {
          // nonexistence in this resample; tallied through `exists`
        }
      }
    } catch (const Error&) {
      // resample unusable as a whole (rank-deficient fit, empty subsample)
      ++degenerate;
    }
  }
  if (degenerate > 0)
    std::cerr << "resample: " << degenerate << " of " << opt.replications
              << " resamples were degenerate and were skipped\n";

  std::string csv = "method,replications,n_exists,n_negvar,n_fallback,mean_dof";
  for (double level : opt.levels) csv += ",reject_" + format_double(level);
  csv += "\n";
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    const Tally& tally = tallies[mi];
    csv += csv_line({method_name(methods[mi]), std::to_string(opt.replications),
                     std::to_string(tally.exists), std::to_string(tally.negvar),
                     std::to_string(tally.fallback),
                     tally.dof_count > 0
                         ? format_double(tally.dof_sum / tally.dof_count)
                         : ""});
    for (size_t li = 0; li < opt.levels.size(); ++li)
      csv += "," + (tally.exists > 0 ? format_double(static_cast<double>(
                                           tally.rejects[li]) /
                                       tally.exists)
                                     : std::string());
    csv += "\n";
  }

  manifest.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (opt.output.empty()) {
    std::cout << csv;
  } else {
    manifest.outputs = {opt.output};
    write_text_file(opt.output, csv);
    write_manifest_sidecar(manifest, opt.output);
  }
  return 0;
}

}  // namespace

void setup_resample(CLI::App& app, int& rc) {
  auto opt = std::make_shared<ResampleOptions>();
  CLI::App* cmd = app.add_subcommand(
      "resample",
      "Cluster resampling with a fake policy column: rejection frequency "
      "and mean d.f. per method");
  cmd->add_option("-i,--input", opt->input, "CSV with y, cluster, regressors…")
      ->required();
  cmd->add_option("-o,--output", opt->output, "output CSV (default: stdout)");
  cmd->add_option("--scheme", opt->scheme, "random or bysize")
      ->check(CLI::IsMember({"random", "bysize"}));
  cmd->add_option("--count", opt->count, "clusters drawn (random scheme)");
  cmd->add_option("--top", opt->top, "largest clusters kept (bysize)");
  cmd->add_option("--bottom", opt->bottom, "smallest clusters kept (bysize)");
  cmd->add_option("--within-fraction", opt->within_fraction,
                  "fraction of observations kept within each cluster");
  cmd->add_option("--treated", opt->treated, "clusters given the fake policy")
      ->required();
  cmd->add_option("-r,--replications", opt->replications, "resample count");
  cmd->add_option("--levels", opt->levels, "test levels")->delimiter(',');
  cmd->add_option("--methods", opt->methods,
                  "stata lzik uv1-rv0 uv1-rv1 uv2-rv0 uv2-rv1 uv3-rv0 uv3-rv1")
      ->delimiter(',');
  cmd->add_option("--seed", opt->seed, "RNG seed");
  cmd->callback([opt, &rc]() {
    try {
      rc = resample_main(*opt);
    } catch (const ucv::Error& err) {
      std::cerr << "resample: " << err.what() << "\n";
      rc = 2;
    }
  });
}

}  // namespace ucvcli
