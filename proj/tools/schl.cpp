#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "schl/cli.hpp"

int main(int argc, char** argv) {
  schl::cli::RunConfig cfg;
  std::vector<std::string> overrides;

  CLI::App app{"Rational Schlesinger solutions, realization checks and Riemann-Hilbert factorization"};
  app.require_subcommand(1);
  app.add_option("--input", cfg.input, "Input file");
  app.add_option("--output", cfg.output, "Output file (stdout when omitted)");
  app.add_option("--tol-override", overrides, "Override a tolerance, NAME=VALUE");
  app.add_option("--nodes", cfg.nodes, "Quadrature nodes for built-in boundary families");
  app.add_option("--rng-seed", cfg.rng_seed, "Seed for randomized self-checks");
  app.add_option("--parallel", cfg.parallel, "Process grid rows concurrently (true/false)");

  auto* construct = app.add_subcommand("construct", "Build an explicit solution from a seed");
  auto* verify = app.add_subcommand("verify", "Check a solution along a parameter path");
  verify->add_option("--path", cfg.path, "Parameter path JSON");
  verify->add_flag("--monodromy", cfg.monodromy, "Also check monodromy triviality at each sample");
  auto* rh = app.add_subcommand("rh", "Factorize boundary data on a circle");
  auto* sweep = app.add_subcommand("sweep", "Evaluate a family over a grid and write CSV");
  auto* report = app.add_subcommand("report", "Summarize an artifact or run seeded self-checks");
  for (auto* sub : {construct, rh, sweep}) sub->fallthrough();
  verify->fallthrough();
  report->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : schl::cli::kParseError;
  }
  for (const auto& spec : overrides)
    if (auto msg = schl::cli::apply_tolerance_override(cfg, spec)) {
      std::cerr << "configuration error: " << *msg << '\n';
      return schl::cli::kParseError;
    }
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.input.empty() && cfg.command != "report") {
    std::cerr << "configuration error: --input is required for " << cfg.command << '\n';
    return schl::cli::kParseError;
  }
  return schl::cli::run(cfg);
}
