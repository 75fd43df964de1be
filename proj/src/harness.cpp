#include "zosaddle/harness.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace zosaddle {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error([&] {
        std::string msg = "invalid experiment config:";
        for (const auto& d : diagnostics) msg += "\n  - " + d;
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
  const std::string n = lower(name);
  if (n == "zoeg") return Algorithm::kZoeg;
  if (n == "zoceg") return Algorithm::kZoceg;
  if (n == "zobceg") return Algorithm::kZobceg;
  if (n == "zogda") return Algorithm::kZogda;
  if (n == "fo_eg" || n == "fo-eg" || n == "foeg") return Algorithm::kFoEg;
  return std::nullopt;
}

const char* algorithm_token(Algorithm a) {
  switch (a) {
    case Algorithm::kZoeg: return "zoeg";
    case Algorithm::kZoceg: return "zoceg";
    case Algorithm::kZobceg: return "zobceg";
    case Algorithm::kZogda: return "zogda";
    case Algorithm::kFoEg: return "fo_eg";
  }
  return "?";
}

const char* metric_token(MetricKind k) {
  switch (k) {
    case MetricKind::kError: return "error";
    case MetricKind::kViolation: return "violation";
    case MetricKind::kGap: return "gap";
  }
  return "?";
}

const char* counting_token(CountingPolicy p) {
  return p == CountingPolicy::kPerLagrangianEval ? "per_eval" : "per_component_cached";
}

const char* output_token(OutputMode m) {
  switch (m) {
    case OutputMode::kAveraged: return "averaged";
    case OutputMode::kLast: return "last";
    case OutputMode::kBoth: return "both";
  }
  return "?";
}

const char* error_kind_token(ErrorKind k) {
  switch (k) {
    case ErrorKind::kNone: return "none";
    case ErrorKind::kRelative: return "relative";
    case ErrorKind::kAbsolute: return "absolute";
  }
  return "?";
}

// Collects diagnostics while walking the JSON tree.
class Reader {
 public:
  std::vector<std::string> errors;

  void unknown_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) errors.push_back(where + ": unknown field '" + it.key() + "'");
    }
  }

  template <typename T>
  std::optional<T> get(const json& obj, const std::string& where, const char* key, bool required) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (required) errors.push_back(where + "." + key + ": missing required field");
      return std::nullopt;
    }
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      errors.push_back(where + "." + key + ": wrong type (" + obj.at(key).dump() + ")");
      return std::nullopt;
    }
  }
};

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

StepSchedule<double> read_step(Reader& r, const json& j, const std::string& where) {
  StepSchedule<double> s;
  r.unknown_keys(j, where, {"kind", "eta0"});
  const auto kind = r.get<std::string>(j, where, "kind", true);
  const auto eta = r.get<double>(j, where, "eta0", true);
  if (kind) {
    if (*kind == "constant") s.kind = StepKind::kConstant;
    else if (*kind == "diminishing") s.kind = StepKind::kDiminishing;
    else r.errors.push_back(where + ".kind: expected 'constant' or 'diminishing', got '" + *kind + "'");
  }
  if (eta) {
    if (*eta > 0.0 && std::isfinite(*eta)) s.eta0 = *eta;
    else r.errors.push_back(where + ".eta0: must be positive and finite");
  }
  return s;
}

RadiusSchedule<double> read_radius(Reader& r, const json& j, const std::string& where) {
  RadiusSchedule<double> s;
  r.unknown_keys(j, where, {"c", "p", "cap", "fixed"});
  if (j.is_object() && j.contains("fixed")) {
    const auto v = r.get<double>(j, where, "fixed", true);
    if (v && *v > 0.0) return RadiusSchedule<double>::fixed(*v);
    r.errors.push_back(where + ".fixed: must be positive");
    return s;
  }
  const auto c = r.get<double>(j, where, "c", false);
  const auto p = r.get<double>(j, where, "p", false);
  const auto cap = r.get<double>(j, where, "cap", false);
  if (c) s.c = *c;
  if (p) s.p = *p;
  if (cap) s.cap = *cap;
  if (!(s.c > 0.0)) r.errors.push_back(where + ".c: must be positive");
  if (!(s.p > 1.0)) r.errors.push_back(where + ".p: must exceed 1");
  if (!(s.cap > 0.0)) r.errors.push_back(where + ".cap: must be positive");
  return s;
}

ordered_json radius_json(const RadiusSchedule<double>& r) {
  if (!r.summable()) return ordered_json{{"fixed", r.cap}};
  return ordered_json{{"c", r.c}, {"p", r.p}, {"cap", r.cap}};
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  ordered_json p;
  p["kind"] = c.problem.kind;
  if (c.problem.kind == "load_tracking") {
    p["seed"] = c.problem.seed;
    p["size"] = c.problem.size;
  }
  if (c.problem.kind == "file") p["path"] = c.problem.path;
  if (c.problem.dual_max) p["dual_max"] = *c.problem.dual_max;
  j["problem"] = p;
  j["counting"] = counting_token(c.counting);
  j["seeds"] = c.seeds;
  ordered_json targets = ordered_json::object();
  for (const auto& t : c.targets) targets[metric_token(t.kind)] = t.thresholds;
  j["targets"] = targets;
  ordered_json solvers = ordered_json::array();
  for (const auto& s : c.solvers) {
    ordered_json o;
    o["name"] = s.name;
    o["algorithm"] = algorithm_token(s.config.algorithm);
    o["iterations"] = s.config.iterations;
    o["step"] = {{"kind", s.config.step.kind == StepKind::kConstant ? "constant" : "diminishing"},
                 {"eta0", s.config.step.eta0}};
    o["radius"] = radius_json(s.config.radius);
    if (s.config.algorithm == Algorithm::kZobceg) {
      o["tau_x"] = s.config.tau_x;
      o["tau_y"] = s.config.tau_y;
    }
    o["output"] = output_token(s.config.output);
    o["record_every"] = s.config.record_every;
    solvers.push_back(o);
  }
  j["solvers"] = solvers;
  j["output_dir"] = c.output_dir;
  j["parallelism"] = c.parallelism;
  return j;
}

ExperimentConfig parse_json(const json& j, const std::string& base_dir) {
  Reader r;
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError({"top level: expected a JSON object"});
  r.unknown_keys(j, "config",
                 {"problem", "counting", "seeds", "runs", "targets", "solvers", "output_dir", "parallelism"});

  // problem
  if (!j.contains("problem")) {
    r.errors.push_back("config.problem: missing required field");
  } else {
    const json& p = j.at("problem");
    r.unknown_keys(p, "problem", {"kind", "seed", "size", "path", "dual_max"});
    if (auto kind = r.get<std::string>(p, "problem", "kind", true)) {
      cfg.problem.kind = *kind;
      static const std::set<std::string> kinds{"toy_qp", "load_tracking", "nonconvex_smoke", "file"};
      if (!kinds.count(*kind)) r.errors.push_back("problem.kind: unknown problem kind '" + *kind + "'");
    }
    if (auto seed = r.get<std::uint64_t>(p, "problem", "seed", false)) cfg.problem.seed = *seed;
    if (auto size = r.get<Index>(p, "problem", "size", false)) {
      if (*size < 1) r.errors.push_back("problem.size: must be >= 1");
      cfg.problem.size = *size;
    }
    if (auto dm = r.get<double>(p, "problem", "dual_max", false)) {
      if (!(*dm > 0.0)) r.errors.push_back("problem.dual_max: must be positive");
      cfg.problem.dual_max = *dm;
    }
    if (cfg.problem.kind == "file") {
      if (auto path = r.get<std::string>(p, "problem", "path", true)) {
        fs::path resolved = fs::path(*path).is_absolute() ? fs::path(*path) : fs::path(base_dir) / *path;
        cfg.problem.path = resolved.lexically_normal().string();
        if (!fs::exists(resolved)) r.errors.push_back("problem.path: file does not exist: " + resolved.string());
      }
    }
  }

  if (auto counting = r.get<std::string>(j, "config", "counting", false)) {
    if (*counting == "per_eval") cfg.counting = CountingPolicy::kPerLagrangianEval;
    else if (*counting == "per_component_cached") cfg.counting = CountingPolicy::kPerComponentCached;
    else r.errors.push_back("config.counting: expected 'per_eval' or 'per_component_cached'");
  }

  // seeds
  const bool has_seeds = j.contains("seeds");
  const bool has_runs = j.contains("runs");
  if (has_seeds && has_runs) r.errors.push_back("config: give either 'seeds' or 'runs', not both");
  if (has_seeds) {
    if (auto seeds = r.get<std::vector<std::uint64_t>>(j, "config", "seeds", true)) cfg.seeds = *seeds;
  } else if (has_runs) {
    if (auto runs = r.get<std::int64_t>(j, "config", "runs", true)) {
      for (std::int64_t s = 0; s < *runs; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else {
    r.errors.push_back("config: one of 'seeds' or 'runs' is required");
  }
  if ((has_seeds || has_runs) && cfg.seeds.empty()) r.errors.push_back("config: zero runs requested");
  {
    std::set<std::uint64_t> seen;
    for (auto s : cfg.seeds)
      if (!seen.insert(s).second) r.errors.push_back("config.seeds: duplicate seed " + std::to_string(s));
  }

  // targets
  if (j.contains("targets")) {
    const json& t = j.at("targets");
    r.unknown_keys(t, "targets", {"error", "violation", "gap"});
    for (auto [key, kind] : {std::pair{"error", MetricKind::kError}, std::pair{"violation", MetricKind::kViolation},
                             std::pair{"gap", MetricKind::kGap}}) {
      if (auto list = r.get<std::vector<double>>(t, "targets", key, false)) {
        for (std::size_t i = 1; i < list->size(); ++i) {
          if (!((*list)[i] < (*list)[i - 1])) {
            r.errors.push_back(std::string("targets.") + key + ": thresholds must be strictly decreasing");
            break;
          }
        }
        cfg.targets.push_back({kind, *list});
      }
    }
  }

  // solvers
  if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty()) {
    r.errors.push_back("config.solvers: need a non-empty array of solver configs");
  } else {
    std::set<std::string> names;
    std::size_t i = 0;
    for (const json& s : j.at("solvers")) {
      const std::string where = "solvers[" + std::to_string(i++) + "]";
      r.unknown_keys(s, where,
                     {"name", "algorithm", "iterations", "step", "radius", "tau_x", "tau_y", "output", "record_every"});
      SolverSpec spec;
      spec.config.counting = cfg.counting;
      if (auto alg = r.get<std::string>(s, where, "algorithm", true)) {
        if (auto a = parse_algorithm(*alg)) spec.config.algorithm = *a;
        else r.errors.push_back(where + ".algorithm: unknown algorithm '" + *alg + "'");
      }
      spec.name = r.get<std::string>(s, where, "name", false).value_or(algorithm_token(spec.config.algorithm));
      if (!names.insert(spec.name).second) r.errors.push_back(where + ".name: duplicate solver name '" + spec.name + "'");
      if (auto k = r.get<Index>(s, where, "iterations", true)) {
        if (*k < 1) r.errors.push_back(where + ".iterations: zero iterations");
        spec.config.iterations = *k;
      }
      if (s.is_object() && s.contains("step")) spec.config.step = read_step(r, s.at("step"), where + ".step");
      else r.errors.push_back(where + ".step: missing required field");
      if (s.is_object() && s.contains("radius")) spec.config.radius = read_radius(r, s.at("radius"), where + ".radius");
      if (auto tx = r.get<Index>(s, where, "tau_x", false)) spec.config.tau_x = *tx;
      if (auto ty = r.get<Index>(s, where, "tau_y", false)) spec.config.tau_y = *ty;
      if (spec.config.algorithm == Algorithm::kZobceg && (spec.config.tau_x < 1 || spec.config.tau_y < 1))
        r.errors.push_back(where + ": block sizes must be >= 1");
      if (auto out = r.get<std::string>(s, where, "output", false)) {
        if (*out == "averaged") spec.config.output = OutputMode::kAveraged;
        else if (*out == "last") spec.config.output = OutputMode::kLast;
        else if (*out == "both") spec.config.output = OutputMode::kBoth;
        else r.errors.push_back(where + ".output: expected averaged, last or both");
      }
      if (auto every = r.get<Index>(s, where, "record_every", false)) {
        if (*every < 1) r.errors.push_back(where + ".record_every: must be >= 1");
        spec.config.record_every = *every;
      }
      cfg.solvers.push_back(std::move(spec));
    }
  }
  for (auto& s : cfg.solvers) s.config.counting = cfg.counting;

  if (auto out = r.get<std::string>(j, "config", "output_dir", false)) cfg.output_dir = *out;
  if (auto par = r.get<int>(j, "config", "parallelism", false)) {
    if (*par < 1) r.errors.push_back("config.parallelism: must be >= 1");
    cfg.parallelism = *par;
  }

  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({"malformed config at " + line_context(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what()});
  }
  if (j.is_object() && j.contains("manifest_version") && j.contains("config")) return parse_json(j.at("config"), base_dir);
  return parse_json(j, base_dir);
}

ExperimentConfig parse_config(const std::string& path) {
  const std::string text = read_file(path);
  const fs::path dir = fs::path(path).parent_path();
  return parse_config_text(text, dir.empty() ? "." : dir.string());
}

ResolvedProblem resolve_problem(const ProblemSpec& spec) {
  ResolvedProblem out;
  if (spec.kind == "toy_qp") {
    auto toy = make_toy_qp();
    out.problem = std::move(toy.problem);
    out.set = std::move(toy.set);
    out.dual_box_source = "fixed";
  } else if (spec.kind == "nonconvex_smoke") {
    auto nc = make_nonconvex_smoke();
    out.problem = std::move(nc.problem);
    out.set = std::move(nc.set);
    out.dual_box_source = "slater";
  } else if (spec.kind == "load_tracking" || spec.kind == "file") {
    LoadTrackingInstance inst =
        spec.kind == "file" ? load_instance(spec.path) : generate_load_tracking(spec.seed, spec.size);
    const ReferenceSolution ref = reference_solve_load_tracking(inst);
    out.problem = make_load_tracking_problem(inst, &ref);
    out.set = FeasibleSet(load_tracking_primal_box(inst), build_dual_box(out.problem, inst.u));
    out.dual_box_source = "slater";
    out.instance = std::move(inst);
  } else {
    throw std::invalid_argument("unknown problem kind '" + spec.kind + "'");
  }
  if (spec.dual_max) {
    out.set = FeasibleSet(out.set.primal(), BoxSet<double>::uniform(out.problem.dim_y, 0.0, *spec.dual_max));
    out.dual_box_source = "config";
  }
  return out;
}

std::string format_csv(const std::vector<MetricRow>& rows) {
  std::string out = "iter,queries,rel_err,violation,gap\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", r.iteration, r.queries, r.error ? num(*r.error) : std::string(),
                       num(r.violation), r.gap ? num(*r.gap) : std::string());
  }
  return out;
}

namespace {

struct RunOutcome {
  std::string solver;
  std::uint64_t seed = 0;
  std::optional<RunRecord<double>> record;
  std::string error;
};

ordered_json point_metrics(const JointPoint<double>& z, const Problem& problem) {
  ordered_json j;
  auto e = objective_error(z.x, problem);
  j["error"] = e ? json(*e) : json(nullptr);
  j["violation"] = constraint_violation(z.x, problem);
  auto g = duality_gap(z, problem);
  j["gap"] = g ? json(*g) : json(nullptr);
  return j;
}

ordered_json summary_json(const SolverSpec& spec, const std::vector<const RunRecord<double>*>& records,
                          const std::vector<TargetSet>& targets, ErrorKind kind, std::size_t attempted) {
  ordered_json j;
  j["solver"] = spec.name;
  j["algorithm"] = to_string(spec.config.algorithm);
  j["config_key"] = config_key(spec.config);
  j["runs_attempted"] = attempted;
  j["runs_succeeded"] = records.size();
  j["error_kind"] = error_kind_token(kind);
  ordered_json rows = ordered_json::array();
  for (const auto& set : targets) {
    for (double threshold : set.thresholds) {
      std::vector<std::optional<double>> hits;
      for (const auto* r : records) {
        const double t[1] = {threshold};
        auto q = queries_to_target(*r, t, set.kind).front();
        hits.push_back(q ? std::optional<double>(static_cast<double>(*q)) : std::nullopt);
      }
      const MeanStd ms = mean_std(hits);
      ordered_json row;
      row["metric"] = metric_token(set.kind);
      row["threshold"] = threshold;
      row["mean_queries"] = ms.count ? json(ms.mean) : json(nullptr);
      row["std_queries"] = ms.count ? json(ms.stddev) : json(nullptr);
      row["reached"] = ms.count;
      row["runs"] = records.size();
      rows.push_back(row);
    }
  }
  j["queries_to_target"] = rows;
  return j;
}

std::string aggregate_csv(const AggregateSummary& s) {
  std::string out = "iter,queries,rel_err_mean,rel_err_std,violation_mean,violation_std,gap_mean,gap_std\n";
  for (const auto& it : s.iterations) {
    auto cell = [](const MeanStd& m) { return m.count ? num(m.mean) : std::string(); };
    auto cell_std = [](const MeanStd& m) { return m.count ? num(m.stddev) : std::string(); };
    out += fmt::format("{},{},{},{},{},{},{},{}\n", it.iteration, num(it.queries.mean), cell(it.error),
                       cell_std(it.error), cell(it.violation), cell_std(it.violation), cell(it.gap), cell_std(it.gap));
  }
  return out;
}

}  // namespace

int run_experiment(const ExperimentConfig& config_in, std::ostream& log, const ExperimentOptions& options) {
  ExperimentConfig config = config_in;
  if (options.output_dir) config.output_dir = *options.output_dir;
  if (options.parallelism) config.parallelism = *options.parallelism;
  if (config.seeds.empty()) throw ConfigError({"config: zero runs requested"});
  if (config.solvers.empty()) throw ConfigError({"config.solvers: need at least one solver"});

  const ResolvedProblem resolved = resolve_problem(config.problem);
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);

  // Replayable config: generated instances are written out and referenced by
  // path, and the dual box is pinned.
  ExperimentConfig replay = config;
  if (resolved.instance) {
    save_instance(*resolved.instance, (out_dir / "instance.json").string());
    replay.problem.kind = "file";
    replay.problem.path = "instance.json";
  }
  if (resolved.problem.dim_y > 0) replay.problem.dual_max = resolved.set.dual().upper().maxCoeff();

  std::vector<RunOutcome> outcomes;
  for (const auto& s : config.solvers)
    for (auto seed : config.seeds) outcomes.push_back({s.name, seed, std::nullopt, {}});

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < outcomes.size(); i = next++) {
      RunOutcome& o = outcomes[i];
      const auto& spec = *std::find_if(config.solvers.begin(), config.solvers.end(),
                                       [&](const SolverSpec& s) { return s.name == o.solver; });
      try {
        SolverConfig<double> sc = spec.config;
        sc.seed = o.seed;
        sc.initial = draw_initial_point(resolved.set, o.seed);
        o.record = run_solver(resolved.problem, resolved.set, sc);
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      if (options.verbosity >= 2) {
        std::lock_guard<std::mutex> lock(log_mutex);
        log << fmt::format("[{}] seed {}: {}\n", o.solver, o.seed, o.record ? "ok" : "FAILED: " + o.error);
      }
    }
  };
  const int threads = std::max(1, std::min<int>(config.parallelism, static_cast<int>(outcomes.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  bool all_ok = true;
  ordered_json runs = ordered_json::array();
  for (const auto& spec : config.solvers) {
    const fs::path dir = out_dir / spec.name;
    fs::create_directories(dir);
    std::vector<const RunRecord<double>*> good;
    std::vector<RunRecord<double>> good_copy;
    for (const auto& o : outcomes) {
      if (o.solver != spec.name) continue;
      ordered_json r;
      r["solver"] = o.solver;
      r["seed"] = o.seed;
      if (o.record) {
        const std::string csv_name = fmt::format("seed_{}.csv", o.seed);
        write_file(dir / csv_name, format_csv(o.record->rows));
        r["status"] = o.record->diverged ? "diverged" : "ok";
        r["csv"] = (fs::path(spec.name) / csv_name).generic_string();
        r["iterations"] = o.record->iterations_completed;
        r["queries"] = o.record->queries;
        r["initial_x"] = std::vector<double>(o.record->initial.x.data(),
                                             o.record->initial.x.data() + o.record->initial.x.size());
        if (spec.config.output != OutputMode::kLast) r["averaged"] = point_metrics(o.record->averaged, resolved.problem);
        if (spec.config.output != OutputMode::kAveraged) r["last"] = point_metrics(o.record->last, resolved.problem);
        r["warnings"] = o.record->warnings;
        good.push_back(&*o.record);
        good_copy.push_back(*o.record);
      } else {
        all_ok = false;
        r["status"] = "error";
        r["error"] = o.error;
      }
      runs.push_back(r);
    }
    const ErrorKind kind = error_kind(resolved.problem);
    write_file(dir / "summary.json",
               summary_json(spec, good, config.targets, kind, config.seeds.size()).dump(2) + "\n");
    if (good_copy.size() >= 2) write_file(dir / "aggregate.csv", aggregate_csv(aggregate(good_copy, config.targets)));
  }

  ordered_json manifest;
  manifest["manifest_version"] = 1;
  manifest["config"] = config_to_json(replay);
  manifest["problem"] = {{"name", resolved.problem.name},
                         {"dim_x", resolved.problem.dim_x},
                         {"dim_y", resolved.problem.dim_y},
                         {"dual_box_source", resolved.dual_box_source},
                         {"dual_upper", resolved.problem.dim_y > 0 ? json(resolved.set.dual().upper().maxCoeff())
                                                                   : json(nullptr)},
                         {"reference_objective", resolved.problem.optimum ? json(resolved.problem.optimum->objective)
                                                                          : json(nullptr)},
                         {"error_kind", error_kind_token(error_kind(resolved.problem))}};
  manifest["counting"] = counting_token(config.counting);
  manifest["initial_points"] = "x0 uniform in X from stream 1 of the run seed; y0 = 0";
  manifest["csv_schema"] = "iter,queries,rel_err,violation,gap";
  manifest["runs"] = runs;
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

  if (options.verbosity >= 1) {
    log << fmt::format("problem {} (d_x={}, d_y={}), {} seed(s), output in {}\n", resolved.problem.name,
                       resolved.problem.dim_x, resolved.problem.dim_y, config.seeds.size(), out_dir.string());
    for (const auto& spec : config.solvers) {
      std::vector<const RunRecord<double>*> good;
      for (const auto& o : outcomes)
        if (o.solver == spec.name && o.record) good.push_back(&*o.record);
      log << fmt::format("  {:<16}", spec.name);
      for (const auto& set : config.targets) {
        for (double threshold : set.thresholds) {
          std::vector<std::optional<double>> hits;
          for (const auto* r : good) {
            const double t[1] = {threshold};
            auto q = queries_to_target(*r, t, set.kind).front();
            hits.push_back(q ? std::optional<double>(static_cast<double>(*q)) : std::nullopt);
          }
          const MeanStd ms = mean_std(hits);
          log << fmt::format(" {}<={}: {}", metric_token(set.kind), threshold,
                             ms.count ? fmt::format("{:.1f} ({}/{})", ms.mean, ms.count, good.size()) : "-");
        }
      }
      log << "\n";
    }
  }
  return all_ok ? 0 : 1;
}

bool AcceptanceReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

std::string AcceptanceReport::to_json() const {
  ordered_json j = ordered_json::array();
  for (const auto& r : results) {
    j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"measured", r.measured}, {"expected", r.expected}});
  }
  return j.dump(2);
}

}  // namespace zosaddle
