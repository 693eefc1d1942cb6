#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lefgpd/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lefschetz fixed-point verifier on flat tori"};
  app.require_subcommand(1);

  std::string config;
  std::string out_path;

  auto* verify = app.add_subcommand("verify", "run a full verification and emit a report");
  verify->add_option("--config", config, "JSON run configuration")->required();
  verify->add_option("--out", out_path, "output file (default: config output.path or stdout)");

  double t_max = 0.2;
  double ratio = 0.5;
  int rungs = 6;
  auto* sweep = app.add_subcommand("sweep", "emit a CSV convergence table over a geometric t-ladder");
  sweep->add_option("--config", config, "JSON run configuration")->required();
  sweep->add_option("--t-max", t_max, "largest t")->required();
  sweep->add_option("--ratio", ratio, "ladder ratio in (0,1)")->required();
  sweep->add_option("--rungs", rungs, "number of rungs (>= 4)")->required();
  sweep->add_option("--out", out_path, "output file (default: stdout)");

  int order = 2;
  int dim = 1;
  std::string coeff;
  auto* model = app.add_subcommand("model-kernel", "tabulate exp(-q(D)) for a constant-coefficient symbol");
  model->add_option("--order", order, "operator order 2s")->required();
  model->add_option("--dim", dim, "dimension (1 or 2)")->required();
  model->add_option("--coeff", coeff, "coefficients as JSON")->required();
  model->add_option("--out", out_path, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lefgpd::cli::kExitError;
  }

  if (*verify) return lefgpd::cli::run_verify(config, out_path, std::cout, std::cerr);
  if (*sweep) return lefgpd::cli::run_sweep(config, t_max, ratio, rungs, out_path, std::cout, std::cerr);
  return lefgpd::cli::run_model_kernel(order, dim, coeff, out_path, std::cout, std::cerr);
}
