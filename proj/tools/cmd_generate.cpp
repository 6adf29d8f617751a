#include <CLI11.hpp>
#include <iostream>
#include <memory>

#include "common.hpp"
#include "ucv/config.hpp"
#include "ucv/simulation.hpp"

namespace ucvcli {

namespace {

using namespace ucv;

struct GenerateOptions {
  std::string config_path;
  std::string output;
  int c1 = -1;  // default: first sweep point of the config
};

int generate_main(const GenerateOptions& opt) {
  RunManifest manifest;
  manifest.subcommand = "generate";
  manifest.config_path = opt.config_path;
  manifest.started_utc = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  const SimulationConfig config = parse_study_config_file(opt.config_path);
  manifest.seed = config.seed;
  manifest.has_seed = true;
  const int c1 = opt.c1 > 0 ? opt.c1 : config.treated_counts.front();
  if (c1 < 1 || c1 > config.num_clusters - 1)
    fail(ErrorCode::ConfigError, "--c1 must lie in 1..C-1");

  const Eigen::VectorXd continuous = draw_continuous(config, 0);
  const DesignMatrix dm = generate_design(config, c1, continuous);
  RngStream rng(config.seed, stream_id(999, static_cast<uint64_t>(c1)));
  const Eigen::VectorXd eps =
      draw_errors(config.design, dm.sizes, continuous, rng);
  const Eigen::VectorXd y =
      dm.x * Eigen::Vector3d(config.alpha, config.beta, config.gamma_coef) +
      eps;

  std::string csv = "y,cluster,const,d,x\n";
  for (int i = 0; i < config.n; ++i)
    csv += csv_line({format_double(y[i]), std::to_string(dm.cluster_of[i]),
                     format_double(dm.x(i, 0)), format_double(dm.x(i, 1)),
                     format_double(dm.x(i, 2))}) +
           "\n";

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

void setup_generate(CLI::App& app, int& rc) {
  auto opt = std::make_shared<GenerateOptions>();
  CLI::App* cmd = app.add_subcommand(
      "generate", "Write one synthetic draw of a study design as CSV");
  cmd->add_option("-c,--config", opt->config_path, "study config file")
      ->required();
  cmd->add_option("-o,--output", opt->output, "output CSV (default: stdout)");
  cmd->add_option("--c1", opt->c1, "treated-cluster count (default: config)");
  cmd->callback([opt, &rc]() {
    try {
      rc = generate_main(*opt);
    } catch (const ucv::Error& err) {
      std::cerr << "generate: " << err.what() << "\n";
      rc = 2;
    }
  });
}

}  // namespace ucvcli
