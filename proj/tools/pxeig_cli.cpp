// Command-line front end: parses flags, loads the run configuration and hands off to
// the pipeline. Exit codes: 0 success, 1 verdict failure, 2 input error, 3 computation error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pxeig/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<double> lambda, rho, tol;
  std::optional<int> max_iters;
  std::optional<std::string> start;
  std::optional<std::string> field;
  std::string exponent = "p";
};

void add_lambda_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--lambda", o.lambda, "Eigenvalue parameter (absolute, overrides the config)");
  sub->add_option("--rho", o.rho, "Ball radius in (0, 1)");
}

void add_solver_flags(CLI::App* sub, Overrides& o) {
  add_lambda_flags(sub, o);
  sub->add_option("--tol", o.tol, "Residual tolerance");
  sub->add_option("--max-iters", o.max_iters, "Iteration cap");
  sub->add_option("--start", o.start, "Start mode: bump-ray, random-in-ball or zero");
}

void apply(const Overrides& o, std::optional<std::uint64_t> seed, std::optional<std::string> out, pxeig::RunConfig& c) {
  if (o.lambda) c.lambda = *o.lambda;
  if (o.rho) c.rho = *o.rho;
  if (o.tol) c.tol = *o.tol;
  if (o.max_iters) c.max_iters = *o.max_iters;
  if (o.start) c.start = pxeig::parse_start_mode(*o.start);
  if (o.field) c.field_expr = *o.field;
  if (seed) c.seed = *seed;
  if (out) c.out_dir = *out;
  c.check();
}

}  // namespace

int main(int argc, char** argv) {
  using pxeig::Command;
  CLI::App app{"Variable-exponent eigenvalue toolkit: norms, embedding constants, thresholds and eigenpairs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false, no_timings = false;
  app.add_option("--config", config_path, "Run configuration file")->required();
  app.add_option("--out", out_dir, "Output directory (overrides out_dir)");
  app.add_option("--seed", seed, "Random seed (overrides seed)");
  app.add_flag("--quiet", quiet, "Do not print the report");
  app.add_flag("--no-timings", no_timings, "Leave wall-clock timings out of the report");

  Overrides over;
  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::Validate, "Check the exponent hypotheses"},
      {Command::Norm, "Modular and Luxemburg norm of field_expr"},
      {Command::Embed, "Estimate the discrete embedding constant"},
      {Command::LambdaStar, "Compute the eigenvalue threshold certificate"},
      {Command::GeometryCheck, "Sphere bound sampling and all geometric diagnostics"},
      {Command::NegativeRay, "Energy along the small-t bump ray"},
      {Command::Rayleigh, "Rayleigh quotient sweep along the bump"},
      {Command::Unbounded, "Energy along the unbounded direction"},
      {Command::Solve, "Ball-constrained descent for one lambda"},
      {Command::Sweep, "Ball-constrained descent over the lambda grid"},
      {Command::Run, "Full pipeline"},
  };
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(pxeig::to_string(cmd), help);
    switch (cmd) {
      case Command::Norm:
        sub->add_option("--field", over.field, "Field expression (overrides field_expr)");
        sub->add_option("--exponent", over.exponent, "Exponent: p, q or an expression")->capture_default_str();
        break;
      case Command::LambdaStar:
        sub->add_option("--rho", over.rho, "Ball radius in (0, 1)");
        break;
      case Command::GeometryCheck:
      case Command::NegativeRay:
      case Command::Unbounded:
        add_lambda_flags(sub, over);
        break;
      case Command::Solve:
      case Command::Sweep:
      case Command::Run:
        add_solver_flags(sub, over);
        break;
      default:
        break;
    }
    subs.emplace_back(cmd, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pxeig::kExitOk : pxeig::kExitInput;
  }

  Command command = Command::Run;
  for (const auto& [cmd, sub] : subs) {
    if (sub->parsed()) command = cmd;
  }

  pxeig::RunConfig config;
  try {
    config = pxeig::RunConfig::load(config_path);
    apply(over, seed, out_dir, config);
  } catch (const pxeig::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pxeig::kExitInput;
  }

  pxeig::RunOptions options;
  options.timings = !no_timings;
  options.norm_exponent = over.exponent;
  const pxeig::RunOutcome outcome = pxeig::execute(command, config, options);
  if (!quiet) std::cout << outcome.report;
  if (outcome.exit_code == pxeig::kExitInput || outcome.exit_code == pxeig::kExitComputation) {
    std::cerr << "error: see the \"error\" entry of the report in " << config.out_dir << "\n";
  }
  return outcome.exit_code;
}
