#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <memory>
#include <optional>

#include "common.hpp"
#include "ucv/dof.hpp"
#include "ucv/estimators.hpp"
#include "ucv/inference.hpp"

namespace ucvcli {

namespace {

using namespace ucv;

struct EstimateOptions {
  std::string input;
  std::string output;  // empty = stdout
  std::vector<std::string> methods = {"uv1",       "uv2",        "uv3",
                                      "lz1",       "lz2",        "plugin-re",
                                      "plugin-cre", "plugin-u"};
  std::string dof_ref = "rv1";
  std::vector<double> levels = {0.05};
  double null_value = 0.0;
  std::string psd_repair = "off";
};

VarianceMethod method_token(const std::string& name) {
  for (auto m : {VarianceMethod::UV1, VarianceMethod::UV2, VarianceMethod::UV3,
                 VarianceMethod::LZ1, VarianceMethod::LZ2,
                 VarianceMethod::PluginRE, VarianceMethod::PluginClusterRE,
                 VarianceMethod::PluginUnrestricted})
    if (name == variance_method_name(m)) return m;
  fail(ErrorCode::ConfigError, "unknown method '" + name + "'");
}

struct MethodOutcome {
  VarianceMethod method;
  std::string error;  // nonempty = failed entirely
  std::optional<VarianceEstimate> v;
  // Per coefficient:
  std::vector<double> dof;
  std::vector<std::string> dof_label;
  std::vector<bool> dof_clamped;
  std::vector<bool> dof_fallback;
};

int estimate_main(const EstimateOptions& opt) {
  RunManifest manifest;
  manifest.subcommand = "estimate";
  manifest.inputs = {opt.input};
  manifest.started_utc = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  if (opt.methods.empty()) {
    std::cerr << "estimate: no methods selected\n";
    return 2;
  }
  for (double level : opt.levels)
    if (!(level > 0.0 && level < 1.0)) {
      std::cerr << "estimate: levels must lie in (0,1)\n";
      return 2;
    }

  std::vector<VarianceMethod> requested;
  for (const auto& name : opt.methods) requested.push_back(method_token(name));

  LoadedData loaded = load_estimation_csv(opt.input);
  const OlsFit fit = fit_ols(std::move(loaded.data));
  const ScalarStats stats = scalar_stats(fit);
  const int k = fit.k();
  const bool want_rv1 = opt.dof_ref == "rv1";

  // Fourth moments are shared by every RV1/Satterthwaite reference.
  std::optional<ReMoments> moments;
  std::string moments_error;
  try {
    moments = estimate_re_moments(fit);
  } catch (const Error& err) {
    moments_error = err.what();
  }
  std::optional<std::pair<ReParams, VarianceEstimate>> replugin;
  try {
    replugin = plugin_re(fit);
  } catch (const Error&) {
  }

  std::vector<MethodOutcome> outcomes;
  for (const auto method : requested) {
    MethodOutcome out;
    out.method = method;
    try {
      std::vector<ABlocks> blocks;
      switch (out.method) {
        case VarianceMethod::UV1:
        case VarianceMethod::UV2:
        case VarianceMethod::UV3:
        case VarianceMethod::LZ2:
          out.v = [&] {
            switch (out.method) {
              case VarianceMethod::UV1: return uv1(fit, stats);
              case VarianceMethod::UV2: return uv2(fit, stats);
              case VarianceMethod::UV3: return uv3(fit);
              default: return lz2_hc2(fit);
            }
          }();
          for (int ell = 0; ell < k; ++ell)
            blocks.push_back(build_a_blocks(fit, out.method, ell));
          break;
        case VarianceMethod::LZ1:
          out.v = lz1_stata(fit);
          break;
        case VarianceMethod::PluginRE:
          out.v = plugin_re(fit).second;
          break;
        case VarianceMethod::PluginClusterRE:
          out.v = plugin_cluster_re(fit).second;
          break;
        case VarianceMethod::PluginUnrestricted:
          out.v = plugin_unrestricted(fit);
          break;
        default:
          fail(ErrorCode::ConfigError, "unsupported method");
      }

      const double t_cm1 = fit.num_clusters() - 1;
      for (int ell = 0; ell < k; ++ell) {
        double d = t_cm1;
        std::string label = "t(C-1)";
        bool clamped = false, fallback = false;
        if (out.method == VarianceMethod::LZ2) {
          const auto traces = build_dof_traces(blocks[ell], fit);
          const double s2 = replugin ? replugin->first.sigma2 : fit.rss / fit.n();
          const double t2 = replugin ? replugin->first.tau2 : 0.0;
          const auto est = dof_satterthwaite_re(traces, fit, s2, t2);
          d = est.d;
          clamped = est.clamped;
          label = "satterthwaite-re";
        } else if (out.method == VarianceMethod::UV1 ||
                   out.method == VarianceMethod::UV2 ||
                   out.method == VarianceMethod::UV3) {
          const auto traces = build_dof_traces(blocks[ell], fit);
          DofEstimate est;
          if (want_rv1) {
            if (!moments)
              fail(ErrorCode::SingularMomentSystem, moments_error);
            est = dof_rv1_or_rv0(traces, fit, *moments);
          } else {
            est = dof_rv0(traces, fit);
          }
          d = est.d;
          clamped = est.clamped;
          fallback = est.fallback_from_rv1;
          label = est.fallback_from_rv1
                      ? "rv0 (rv1 fallback)"
                      : dof_reference_name(est.reference);
        }
        out.dof.push_back(d);
        out.dof_label.push_back(label);
        out.dof_clamped.push_back(clamped);
        out.dof_fallback.push_back(fallback);
      }
      if (opt.psd_repair == "truncate") out.v = psd_truncate(*out.v);
    } catch (const Error& err) {
      out.error = err.what();
    }
    outcomes.push_back(std::move(out));
  }

  // Long CSV: one row per (coefficient, method); failed methods get one
  // row carrying the error.
  std::vector<std::string> header = {"coefficient", "coef_index", "method",
                                     "estimate",    "std_error",  "dof",
                                     "dof_label",   "t_stat",     "p_value"};
  for (double level : opt.levels)
    header.push_back("reject_" + format_double(level));
  for (const char* flag : {"negative_variance", "dof_clamped", "dof_fallback",
                           "psd_repaired", "error"})
    header.push_back(flag);

  std::string csv = csv_line(header) + "\n";
  int succeeded = 0;
  for (const auto& out : outcomes) {
    const std::string mname = variance_method_name(out.method);
    if (!out.error.empty()) {
      std::vector<std::string> row = {"", "", mname, "", "", "", "", "", ""};
      for (size_t li = 0; li < opt.levels.size(); ++li) row.push_back("");
      row.insert(row.end(), {"", "", "", "", out.error});
      csv += csv_line(row) + "\n";
      continue;
    }
    ++succeeded;
    for (int ell = 0; ell < k; ++ell) {
      std::vector<std::string> row = {loaded.regressor_names[ell],
                                      std::to_string(ell), mname};
      const double vll = out.v->v(ell, ell);
      if (vll > 0.0 && out.dof[ell] > 0.0) {
        const auto res = t_test(fit, *out.v, out.dof[ell], out.dof_label[ell],
                                ell, opt.null_value, opt.levels);
        row.insert(row.end(),
                   {format_double(res.estimate), format_double(res.std_error),
                    format_double(res.dof), res.dof_label,
                    format_double(res.t_stat), format_double(res.p_value)});
        for (const auto& [level, reject] : res.reject_at)
          row.push_back(reject ? "1" : "0");
        row.push_back("0");
      } else {
        // No valid test: nonpositive variance entry or degenerate d.f.
        row.insert(row.end(),
                   {format_double(fit.beta_hat[ell]),
                    vll > 0.0 ? format_double(std::sqrt(vll)) : "",
                    format_double(out.dof[ell]), out.dof_label[ell], "", ""});
        for (size_t li = 0; li < opt.levels.size(); ++li) row.push_back("");
        row.push_back(vll > 0.0 ? "0" : "1");
      }
      row.push_back(out.dof_clamped[ell] ? "1" : "0");
      row.push_back(out.dof_fallback[ell] ? "1" : "0");
      row.push_back(out.v->diagnostics.psd_repaired ? "1" : "0");
      row.push_back("");
      csv += csv_line(row) + "\n";
    }
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

  for (const auto& out : outcomes)
    if (!out.error.empty())
      std::cerr << "estimate: method " << variance_method_name(out.method)
                << " failed: " << out.error << "\n";
  return succeeded > 0 ? 0 : 3;
}

}  // namespace

void setup_estimate(CLI::App& app, int& rc) {
  auto opt = std::make_shared<EstimateOptions>();
  CLI::App* cmd = app.add_subcommand(
      "estimate", "Cluster-robust estimates and t-tests on a CSV dataset");
  cmd->add_option("-i,--input", opt->input,
                  "CSV with columns y, cluster, regressors…")
      ->required();
  cmd->add_option("-o,--output", opt->output,
                  "output CSV (default: stdout)");
  cmd->add_option("--methods", opt->methods,
                  "uv1 uv2 uv3 lz1 lz2 plugin-re plugin-cre plugin-u")
      ->delimiter(',');
  cmd->add_option("--dof", opt->dof_ref, "rv0 or rv1 (UV methods)")
      ->check(CLI::IsMember({"rv0", "rv1"}));
  cmd->add_option("--levels", opt->levels, "test levels")->delimiter(',');
  cmd->add_option("--null", opt->null_value, "null value for every coefficient");
  cmd->add_option("--psd-repair", opt->psd_repair,
                  "off or truncate (eigenvalue truncation at zero)")
      ->check(CLI::IsMember({"off", "truncate"}));
  cmd->callback([opt, &rc]() {
    try {
      rc = estimate_main(*opt);
    } catch (const ucv::Error& err) {
      std::cerr << "estimate: " << err.what() << "\n";
      rc = 2;
    }
  });
}

}  // namespace ucvcli
