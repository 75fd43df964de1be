#pragma once

// Experiment configs, multi-seed orchestration, CSV/summary/manifest output
// and the acceptance checks.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zosaddle/algorithms.hpp"
#include "zosaddle/metrics.hpp"
#include "zosaddle/problems.hpp"

namespace zosaddle {

struct ProblemSpec {
  std::string kind = "toy_qp";  // toy_qp | load_tracking | nonconvex_smoke | file
  std::uint64_t seed = 0;       // load_tracking generator seed
  Index size = 100;             // load_tracking dimension
  std::string path;             // kind == file: serialized load-tracking instance
  std::optional<double> dual_max;
};

struct SolverSpec {
  std::string name;
  SolverConfig<double> config;  // seed and initial point are filled per run
};

struct ExperimentConfig {
  ProblemSpec problem;
  CountingPolicy counting = CountingPolicy::kPerLagrangianEval;
  std::vector<SolverSpec> solvers;
  std::vector<std::uint64_t> seeds;
  std::vector<TargetSet> targets;
  std::string output_dir = "out";
  int parallelism = 1;
};

/// Carries every diagnostic found, not only the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Relative paths inside the config resolve against `base_dir`.
ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
/// Accepts a config file or a manifest written by run_experiment.
ExperimentConfig parse_config(const std::string& path);

struct ResolvedProblem {
  Problem problem;
  FeasibleSet set;
  std::optional<LoadTrackingInstance> instance;
  std::string dual_box_source;  // "fixed", "slater", or "config"
};

ResolvedProblem resolve_problem(const ProblemSpec& spec);

/// CSV with header iter,queries,rel_err,violation,gap; absent values are empty.
std::string format_csv(const std::vector<MetricRow>& rows);

struct ExperimentOptions {
  std::optional<std::string> output_dir;
  std::optional<int> parallelism;
  int verbosity = 1;
};

/// Returns 0 when every run succeeded.
int run_experiment(const ExperimentConfig& config, std::ostream& log, const ExperimentOptions& options = {});

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  std::string expected;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_passed() const;
  std::string to_json() const;
};

/// Suite names: all, table2, bounds, estimators, reductions, rates,
/// accounting, determinism, nonconvex, reference.
std::vector<std::string> acceptance_suites();
AcceptanceReport run_acceptance_suite(const std::string& selector, std::ostream* progress = nullptr);

}  // namespace zosaddle
