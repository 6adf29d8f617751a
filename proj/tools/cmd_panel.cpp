#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <memory>

#include "common.hpp"
#include "ucv/panel.hpp"

namespace ucvcli {

namespace {

using namespace ucv;

struct PanelOptions {
  std::string input;
  std::string output;
  std::string lambda_output;
  std::string estimator = "both";
};

// Wide format: columns unit, wave, y, regressors…; every unit must cover
// the same set of waves.
struct LoadedPanel {
  PanelDataset data;
  std::vector<std::string> regressor_names;
};

LoadedPanel load_panel_csv(const std::string& path) {
  const CsvTable table = read_csv_file(path);
  const int unit_col = table.column("unit");
  const int wave_col = table.column("wave");
  const int y_col = table.column("y");
  if (unit_col < 0 || wave_col < 0 || y_col < 0)
    fail(ErrorCode::ParseError,
         path + ": need columns 'unit', 'wave' and 'y'");
  std::vector<int> reg_cols;
  std::vector<std::string> names;
  for (size_t j = 0; j < table.header.size(); ++j)
    if (static_cast<int>(j) != unit_col && static_cast<int>(j) != wave_col &&
        static_cast<int>(j) != y_col) {
      reg_cols.push_back(static_cast<int>(j));
      names.push_back(table.header[j]);
    }
  if (reg_cols.empty())
    fail(ErrorCode::ParseError, path + ": no regressor columns");

  struct Row {
    double wave;
    double y;
    std::vector<double> x;
  };
  std::vector<std::string> unit_order;
  std::map<std::string, std::vector<Row>> units;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto where = "row " + std::to_string(i + 2);
    const std::string unit = table.rows[i][unit_col];
    if (!units.count(unit)) unit_order.push_back(unit);
    Row row;
    row.wave = parse_number(table.rows[i][wave_col], where + " column wave");
    row.y = parse_number(table.rows[i][y_col], where + " column y");
    for (size_t j = 0; j < reg_cols.size(); ++j)
      row.x.push_back(parse_number(table.rows[i][reg_cols[j]],
                                   where + " column " + names[j]));
    units[unit].push_back(std::move(row));
  }
  if (unit_order.empty()) fail(ErrorCode::ParseError, path + ": no data rows");

  std::vector<double> waves;
  for (auto& row : units[unit_order.front()]) waves.push_back(row.wave);
  std::sort(waves.begin(), waves.end());
  const int num_waves = static_cast<int>(waves.size());
  const int num_units = static_cast<int>(unit_order.size());

  Eigen::VectorXd y(num_units * num_waves);
  Eigen::MatrixXd x(num_units * num_waves, reg_cols.size());
  for (int i = 0; i < num_units; ++i) {
    auto& rows = units[unit_order[i]];
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.wave < b.wave; });
    if (static_cast<int>(rows.size()) != num_waves)
      fail(ErrorCode::RaggedPanel,
           "unit '" + unit_order[i] + "' has " + std::to_string(rows.size()) +
               " waves, expected " + std::to_string(num_waves));
    for (int t = 0; t < num_waves; ++t) {
      if (rows[t].wave != waves[t])
        fail(ErrorCode::RaggedPanel,
             "unit '" + unit_order[i] + "' misses wave " +
                 format_double(waves[t]));
      y[i * num_waves + t] = rows[t].y;
      for (size_t j = 0; j < reg_cols.size(); ++j)
        x(i * num_waves + t, j) = rows[t].x[j];
    }
  }
  return LoadedPanel{make_panel(num_units, num_waves, std::move(y), std::move(x)),
                     std::move(names)};
}

double normal_two_sided_p(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

int panel_main(const PanelOptions& opt) {
  RunManifest manifest;
  manifest.subcommand = "panel";
  manifest.inputs = {opt.input};
  manifest.started_utc = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  const LoadedPanel loaded = load_panel_csv(opt.input);
  const PanelFit pf = fit_panel(loaded.data);

  std::vector<std::pair<std::string, PanelEstimate>> estimates;
  if (opt.estimator == "unbiased" || opt.estimator == "both")
    estimates.emplace_back("panel-unbiased", panel_unbiased(pf));
  if (opt.estimator == "plugin" || opt.estimator == "both")
    estimates.emplace_back("panel-plugin", panel_plugin(pf));

  std::string csv =
      "coefficient,coef_index,method,estimate,std_error,z,p_normal,"
      "negative_variance\n";
  for (const auto& [name, est] : estimates) {
    for (int ell = 0; ell < pf.fit.k(); ++ell) {
      const double vll = est.v.v(ell, ell);
      std::vector<std::string> row = {loaded.regressor_names[ell],
                                      std::to_string(ell), name,
                                      format_double(pf.fit.beta_hat[ell])};
      if (vll > 0.0) {
        const double se = std::sqrt(vll);
        const double z = pf.fit.beta_hat[ell] / se;
        row.insert(row.end(), {format_double(se), format_double(z),
                               format_double(normal_two_sided_p(z)), "0"});
      } else {
        row.insert(row.end(), {"", "", "", "1"});
      }
      csv += csv_line(row) + "\n";
    }
  }

  manifest.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (!opt.lambda_output.empty()) {
    const auto& lambda = estimates.front().second.lambda;
    std::string lcsv;
    for (int s = 0; s < lambda.rows(); ++s) {
      for (int t = 0; t < lambda.cols(); ++t)
        lcsv += (t ? "," : "") + format_double(lambda(s, t));
      lcsv += "\n";
    }
    manifest.outputs.push_back(opt.lambda_output);
    write_text_file(opt.lambda_output, lcsv);
    write_manifest_sidecar(manifest, opt.lambda_output);
  }
  if (opt.output.empty()) {
    std::cout << csv;
  } else {
    manifest.outputs.push_back(opt.output);
    write_text_file(opt.output, csv);
    write_manifest_sidecar(manifest, opt.output);
  }
  return 0;
}

}  // namespace

void setup_panel(CLI::App& app, int& rc) {
  auto opt = std::make_shared<PanelOptions>();
  CLI::App* cmd = app.add_subcommand(
      "panel", "Homogeneous panel covariance estimation (wide CSV: unit, "
               "wave, y, x…)");
  cmd->add_option("-i,--input", opt->input, "panel CSV")->required();
  cmd->add_option("-o,--output", opt->output, "output CSV (default: stdout)");
  cmd->add_option("--lambda-output", opt->lambda_output,
                  "write the estimated wave covariance as CSV");
  cmd->add_option("--estimator", opt->estimator, "unbiased, plugin or both")
      ->check(CLI::IsMember({"unbiased", "plugin", "both"}));
  cmd->callback([opt, &rc]() {
    try {
      rc = panel_main(*opt);
    } catch (const ucv::Error& err) {
      std::cerr << "panel: " << err.what() << "\n";
      rc = 2;
    }
  });
}

}  // namespace ucvcli
