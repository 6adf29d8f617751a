#include <CLI11.hpp>

#include "common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cluster-robust covariance estimation for OLS: unbiased "
               "estimators, data-driven degrees of freedom, benchmarks, and "
               "a Monte Carlo size-study harness"};
  app.set_version_flag("--version", ucvcli::kVersion);
  app.require_subcommand(1);

  int rc = 0;
  ucvcli::setup_estimate(app, rc);
  ucvcli::setup_simulate(app, rc);
  ucvcli::setup_generate(app, rc);
  ucvcli::setup_resample(app, rc);
  ucvcli::setup_panel(app, rc);

  CLI11_PARSE(app, argc, argv);
  return rc;
}
