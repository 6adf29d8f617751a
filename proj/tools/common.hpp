#pragma once

#include <chrono>
#include <ctime>
#include <json.hpp>
#include <string>
#include <vector>

#include "ucv/csv.hpp"
#include "ucv/dataset.hpp"
#include "ucv/errors.hpp"

namespace ucvcli {

inline constexpr const char* kVersion = "0.1.0";

// Reproducibility record attached to every output file: embedded in JSON
// outputs, written as a `<file>.manifest.json` sidecar next to CSV ones
// (so the CSV bytes stay deterministic).
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string config_path;
  std::vector<std::string> outputs;
  uint64_t seed = 0;
  bool has_seed = false;
  std::string started_utc;
  double elapsed_seconds = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "ucv";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["inputs"] = inputs;
    if (!config_path.empty()) j["config"] = config_path;
    j["outputs"] = outputs;
    if (has_seed) j["seed"] = seed;
    j["started_utc"] = started_utc;
    j["elapsed_seconds"] = elapsed_seconds;
    return j;
  }
};

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline void write_manifest_sidecar(const RunManifest& manifest,
                                   const std::string& csv_path) {
  ucv::write_text_file(csv_path + ".manifest.json",
                       manifest.to_json().dump(2) + "\n");
}

// Loads the `y`,`cluster`,regressors schema. Regressor columns keep their
// file order; cluster labels map to ids by first appearance.
struct LoadedData {
  ucv::ClusteredDataset data;
  std::vector<std::string> regressor_names;
};

inline LoadedData load_estimation_csv(const std::string& path) {
  const ucv::CsvTable table = ucv::read_csv_file(path);
  const int y_col = table.column("y");
  const int cluster_col = table.column("cluster");
  if (y_col < 0 || cluster_col < 0)
    ucv::fail(ucv::ErrorCode::ParseError,
              path + ": need columns 'y' and 'cluster'");
  std::vector<int> reg_cols;
  std::vector<std::string> names;
  for (size_t j = 0; j < table.header.size(); ++j)
    if (static_cast<int>(j) != y_col && static_cast<int>(j) != cluster_col) {
      reg_cols.push_back(static_cast<int>(j));
      names.push_back(table.header[j]);
    }
  if (reg_cols.empty())
    ucv::fail(ucv::ErrorCode::ParseError, path + ": no regressor columns");
  const int n = static_cast<int>(table.rows.size());
  if (n == 0) ucv::fail(ucv::ErrorCode::ParseError, path + ": no data rows");

  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, reg_cols.size());
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) {
    const auto where = "row " + std::to_string(i + 2);
    y[i] = ucv::parse_number(table.rows[i][y_col], where + " column y");
    labels[i] = table.rows[i][cluster_col];
    for (size_t j = 0; j < reg_cols.size(); ++j)
      x(i, j) = ucv::parse_number(table.rows[i][reg_cols[j]],
                                  where + " column " + names[j]);
  }
  return LoadedData{
      ucv::ClusteredDataset::from_labels(std::move(y), std::move(x), labels),
      std::move(names)};
}

}  // namespace ucvcli

namespace CLI {
class App;
}

namespace ucvcli {

// Each subcommand registers itself; the callback stores its exit code in
// `rc` (0 = at least one method succeeded, 2 = input/config error,
// 3 = all methods failed).
void setup_estimate(CLI::App& app, int& rc);
void setup_simulate(CLI::App& app, int& rc);
void setup_generate(CLI::App& app, int& rc);
void setup_resample(CLI::App& app, int& rc);
void setup_panel(CLI::App& app, int& rc);

}  // namespace ucvcli
