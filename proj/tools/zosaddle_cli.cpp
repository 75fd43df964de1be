#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "zosaddle/harness.hpp"

int main(int argc, char** argv) {
  using namespace zosaddle;
  CLI::App app{"Zeroth-order extra-gradient solvers for constrained black-box problems"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a multi-seed experiment from a config or manifest");
  std::string config_path;
  std::string output_dir;
  int jobs = 0;
  int verbose_count = 0;
  run_cmd->add_option("-c,--config", config_path, "Experiment config (JSON) or manifest.json")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", output_dir, "Override the output directory");
  run_cmd->add_option("-j,--jobs", jobs, "Override the number of concurrent runs")->check(CLI::PositiveNumber);
  run_cmd->add_flag("-v,--verbose", verbose_count, "More log output (repeatable)");
  bool quiet = false;
  run_cmd->add_flag("-q,--quiet", quiet, "No log output");

  auto* accept_cmd = app.add_subcommand("accept", "Run acceptance checks");
  std::string suite = "all";
  bool as_json = false;
  accept_cmd->add_option("-s,--suite", suite, "Suite name")->check(CLI::IsMember(acceptance_suites()));
  accept_cmd->add_flag("--json", as_json, "Print a JSON report instead of text");

  auto* gen_cmd = app.add_subcommand("generate", "Write a random load-tracking instance");
  std::uint64_t gen_seed = 0;
  Index gen_n = 100;
  std::string gen_out;
  gen_cmd->add_option("--seed", gen_seed, "Generator seed");
  gen_cmd->add_option("-n,--size", gen_n, "Number of users")->check(CLI::PositiveNumber);
  gen_cmd->add_option("-o,--out", gen_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const ExperimentConfig cfg = parse_config(config_path);
      ExperimentOptions opts;
      if (!output_dir.empty()) opts.output_dir = output_dir;
      if (jobs > 0) opts.parallelism = jobs;
      opts.verbosity = quiet ? 0 : 1 + verbose_count;
      return run_experiment(cfg, std::cout, opts);
    }
    if (*accept_cmd) {
      const AcceptanceReport report = run_acceptance_suite(suite, as_json ? nullptr : &std::cout);
      if (as_json) std::cout << report.to_json() << "\n";
      return report.all_passed() ? 0 : 1;
    }
    if (*gen_cmd) {
      save_instance(generate_load_tracking(gen_seed, gen_n), gen_out);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
