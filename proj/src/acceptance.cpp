#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "zosaddle/harness.hpp"

namespace zosaddle {

namespace fs = std::filesystem;

namespace {

// Load-tracking instance used for the query-to-target comparison.
constexpr std::uint64_t kTableInstanceSeed = 0;
constexpr int kRuns = 20;

std::string g6(double v) { return fmt::format("{:.6g}", v); }

RunRecord<double> run(const Problem& p, const FeasibleSet& set, Algorithm alg, Index K, double eta,
                      RadiusSchedule<double> radius, std::uint64_t seed, Index tau_x = 1, Index tau_y = 1) {
  SolverConfig<double> c;
  c.algorithm = alg;
  c.iterations = K;
  c.step = StepSchedule<double>::constant(eta);
  c.radius = radius;
  c.tau_x = tau_x;
  c.tau_y = tau_y;
  c.seed = seed;
  return run_solver(p, set, c);
}

double toy_objective_error(const Vec& x, const Problem& p) { return p.objective(x) - p.optimum->objective; }

// ---------------------------------------------------------------------------

CriterionResult load_tracking_table() {
  CriterionResult res{1, "load tracking queries-to-target vs. reference values", false, "", ""};
  const LoadTrackingInstance inst = generate_load_tracking(kTableInstanceSeed, 100);
  const ReferenceSolution ref = reference_solve_load_tracking(inst);
  const Problem p = make_load_tracking_problem(inst, &ref);
  const FeasibleSet set(load_tracking_primal_box(inst), build_dual_box(p, inst.u));
  const auto radius = RadiusSchedule<double>::make(5.0, 1.1, 1e-3);

  struct Row {
    const char* label;
    Algorithm alg;
    Index tau_x;
    double eta;
    Index K;
    double ref_5, ref_1, ref_01;
    bool check_01;
  };
  const Row rows[] = {
      {"BS=100 (ZOCEG)", Algorithm::kZoceg, 100, 0.05, 120, 581.4, 1458.6, 2723.4, true},
      {"BS=5", Algorithm::kZobceg, 5, 0.2, 2500, 905.8, 1479.1, 1786.4, false},
      {"BS=1", Algorithm::kZobceg, 1, 0.2, 5000, 2460.6, 4247.1, 5664.9, false},
  };
  const double thresholds[] = {0.05, 0.01, 0.001};

  bool ok = true;
  std::vector<double> mean5;
  std::string measured, expected;
  for (const Row& row : rows) {
    std::vector<std::optional<double>> hit[3];
    for (int s = 0; s < kRuns; ++s) {
      SolverConfig<double> c;
      c.algorithm = row.alg;
      c.iterations = row.K;
      c.step = StepSchedule<double>::constant(row.eta);
      c.radius = radius;
      c.tau_x = row.tau_x;
      c.tau_y = 1;
      c.seed = static_cast<std::uint64_t>(s);
      const auto rec = run_solver(p, set, c);
      const auto q = queries_to_target(rec, thresholds, MetricKind::kError);
      for (int t = 0; t < 3; ++t) hit[t].push_back(q[t] ? std::optional<double>(static_cast<double>(*q[t])) : std::nullopt);
    }
    MeanStd m[3];
    for (int t = 0; t < 3; ++t) m[t] = mean_std(hit[t]);
    mean5.push_back(m[0].count == kRuns ? m[0].mean : INFINITY);
    const bool ok1 = m[1].count == kRuns && m[1].mean <= 3.0 * row.ref_1;
    const bool ok01 = !row.check_01 || (m[2].count == kRuns && m[2].mean <= 3.0 * row.ref_01);
    ok = ok && ok1 && ok01;
    measured += fmt::format("{}: 5%={} 1%={} 0.1%={} (reached {}/{}/{} of {}); ", row.label, g6(m[0].mean),
                            g6(m[1].mean), g6(m[2].mean), m[0].count, m[1].count, m[2].count, kRuns);
    expected += fmt::format("{}: 1%<={}{}; ", row.label, g6(3.0 * row.ref_1),
                            row.check_01 ? fmt::format(" 0.1%<={}", g6(3.0 * row.ref_01)) : "");
  }
  const bool ordered = mean5[0] < mean5[1] && mean5[1] < mean5[2];
  ok = ok && ordered;
  measured += ordered ? "5% ordering BS100 < BS5 < BS1 holds" : "5% ordering violated";
  expected += "5% ordering BS100 < BS5 < BS1";
  res.passed = ok;
  res.measured = measured;
  res.expected = expected;
  return res;
}

// ---------------------------------------------------------------------------

struct ToySetup {
  ToyQPInstance toy = make_toy_qp();
  double eta = 0.2;
  RadiusSchedule<double> radius = RadiusSchedule<double>::make(1.0, 1.1, 1e-3);
  TheoryConstants<double> tc = compute_theory_constants(toy.problem, toy.set, radius);
};

CriterionResult gap_bound() {
  CriterionResult res{2, "averaged-iterate duality gap bound (toy QP)", true, "", ""};
  ToySetup s;
  const double L = s.tc.smoothness, D = s.tc.diameter, M3 = s.tc.m3;
  if (s.eta * L > 0.5) {
    res.passed = false;
    res.measured = fmt::format("eta*L = {} exceeds 1/2", g6(s.eta * L));
    return res;
  }
  for (Index K : {10, 100, 1000}) {
    const double bound = (D * D / s.eta + 3.0 * L * M3 * D) / (2.0 * static_cast<double>(K));
    double worst = -INFINITY;
    for (int seed = 0; seed < 5; ++seed) {
      const auto rec = run(s.toy.problem, s.toy.set, Algorithm::kZoceg, K, s.eta, s.radius, seed);
      worst = std::max(worst, *duality_gap(rec.averaged, s.toy.problem));
    }
    res.passed = res.passed && worst <= bound;
    res.measured += fmt::format("K={}: max gap {}; ", K, g6(worst));
    res.expected += fmt::format("K={}: <= {}; ", K, g6(bound));
  }
  return res;
}

CriterionResult feasibility_bound() {
  CriterionResult res{3, "averaged-iterate optimality gap and violation bound (toy QP)", true, "", ""};
  ToySetup s;
  const double L = s.tc.smoothness, D = s.tc.diameter, M3 = s.tc.m3;
  for (Index K : {100, 1000}) {
    const double Kd = static_cast<double>(K);
    const double bound = D * D / (2.0 * Kd * s.eta) + 3.0 * L * M3 * D / (2.0 * Kd);
    double worst_gap = -INFINITY, worst_viol = 0.0;
    for (int seed = 0; seed < 5; ++seed) {
      const auto rec = run(s.toy.problem, s.toy.set, Algorithm::kZoceg, K, s.eta, s.radius, seed);
      worst_gap = std::max(worst_gap, toy_objective_error(rec.averaged.x, s.toy.problem));
      worst_viol = std::max(worst_viol, constraint_violation(rec.averaged.x, s.toy.problem));
    }
    res.passed = res.passed && worst_gap <= bound && worst_viol <= bound;
    res.measured += fmt::format("K={}: phi0 gap {}, violation {}; ", K, g6(worst_gap), g6(worst_viol));
    res.expected += fmt::format("K={}: both <= {}; ", K, g6(bound));
  }
  return res;
}

// ---------------------------------------------------------------------------

CriterionResult coordinate_bias() {
  // h(z) = sum A_ii z_i^2, so the forward difference overshoots by r A_ii
  // and L = 2 max |A_ii|. Long double keeps the cancellation error far
  // below the bias even at r = 1e-6.
  using LD = long double;
  CriterionResult res{4, "coordinate estimator bias", true, "", ""};
  Vector<LD> A(4), z(4);
  A << 3.0L, -1.5L, 0.25L, -3.0L;
  z << 0.7L, -1.2L, 2.0L, 0.3L;
  const LD L = 2.0L * A.cwiseAbs().maxCoeff();
  auto h = [&](const Vector<LD>& w) { return (A.array() * w.array().square()).sum(); };
  const LD eps = std::numeric_limits<LD>::epsilon();
  double worst_excess = 0.0;
  bool equality_hit = false;
  for (LD r : {1e-1L, 1e-3L, 1e-6L}) {
    for (Index i = 0; i < 4; ++i) {
      const LD est = coord_partial(h, z, i, r);
      const LD err = std::abs(est - 2.0L * A[i] * z[i]);
      Vector<LD> zr = z;
      zr[i] += r;
      const LD slack = 16.0L * eps * (std::abs(h(z)) + std::abs(h(zr))) / r + 16.0L * eps * std::abs(2.0L * A[i] * z[i]);
      const bool formula = std::abs(err - r * std::abs(A[i])) <= slack;
      const bool within = err <= L * r / 2.0L + slack;
      res.passed = res.passed && formula && within;
      worst_excess = std::max(worst_excess, static_cast<double>((err - L * r / 2.0L) / (L * r / 2.0L)));
      if (std::abs(A[i]) * 2.0L == L && std::abs(err - L * r / 2.0L) <= slack) equality_hit = true;
    }
  }
  res.passed = res.passed && equality_hit;
  res.measured = fmt::format("max relative excess over Lr/2: {}; equality case {}", g6(worst_excess),
                             equality_hit ? "attained" : "missed");
  res.expected = "|error| = r|A_ii| <= Lr/2 for r in {1e-1, 1e-3, 1e-6} (rounding slack only)";
  return res;
}

CriterionResult sphere_moments() {
  CriterionResult res{5, "two-point estimator mean and second moment", true, "", ""};
  constexpr long N = 100000;
  const double r = 0.05;
  for (Index d : {2, 10, 50}) {
    // h(z) = 0.5 sum a_i z_i^2 + b'z with a_i in [0.5, 2]; L = max a_i and
    // G bounds ||grad h|| on the r-ball around z.
    Vec a(d), b(d), z(d);
    for (Index i = 0; i < d; ++i) {
      a[i] = 0.5 + 1.5 * static_cast<double>(i) / static_cast<double>(std::max<Index>(d - 1, 1));
      b[i] = (i % 2 == 0) ? 0.3 : -0.2;
      z[i] = 0.1 * static_cast<double>(i % 5) - 0.2;
    }
    auto h = [&](const Vec& w) { return (0.5 * a.array() * w.array().square()).sum() + b.dot(w); };
    const Vec grad = (a.array() * z.array()).matrix() + b;
    const double L = a.maxCoeff();
    const double G = grad.norm() + L * r;

    SeededSampler sampler(1234 + static_cast<std::uint64_t>(d), 7);
    Vec sum = Vec::Zero(d);
    Vec sumsq = Vec::Zero(d);
    for (long n = 0; n < N; ++n) {
      const Vec v = sample_unit_sphere(d, sampler);
      const Vec g = unige(h, z, r, v);
      sum += g;
      sumsq += g.cwiseProduct(g);
    }
    const double Nd = static_cast<double>(N);
    const Vec mean = sum / Nd;
    const double trace_var = ((sumsq / Nd - mean.cwiseProduct(mean)) * (Nd / (Nd - 1.0))).sum();
    const double mean_err = (mean - grad).norm();
    const double mean_tol = L * r + 4.0 * std::sqrt(trace_var / Nd);
    const double dd = static_cast<double>(d);
    const double var_bound = 9.0 * dd * dd * G * G / (dd + 2.0) + 3.0 * dd * dd * L * L * r * r / 4.0;
    res.passed = res.passed && mean_err <= mean_tol && trace_var < var_bound;
    res.measured += fmt::format("d={}: |mean-grad| {}, variance {}; ", d, g6(mean_err), g6(trace_var));
    res.expected += fmt::format("d={}: <= {}, < {}; ", d, g6(mean_tol), g6(var_bound));
  }
  return res;
}

// ---------------------------------------------------------------------------

double max_abs_diff(const JointPoint<double>& a, const JointPoint<double>& b) {
  return std::max((a.x - b.x).cwiseAbs().maxCoeff(), a.dim_y() ? (a.y - b.y).cwiseAbs().maxCoeff() : 0.0);
}

CriterionResult reductions() {
  CriterionResult res{6, "full-block and small-radius reductions", true, "", ""};
  // Full blocks on a 100-user instance: compare end points after every
  // prefix length checked.
  const LoadTrackingInstance inst = generate_load_tracking(5, 100);
  const ReferenceSolution ref = reference_solve_load_tracking(inst);
  const Problem p = make_load_tracking_problem(inst, &ref);
  const FeasibleSet set(load_tracking_primal_box(inst), build_dual_box(p, inst.u));
  const auto radius = RadiusSchedule<double>::make(5.0, 1.1, 1e-3);
  double block_diff = 0.0;
  for (Index K : {1, 7, 50}) {
    const auto a = run(p, set, Algorithm::kZobceg, K, 0.05, radius, 3, 100, 1);
    const auto b = run(p, set, Algorithm::kZoceg, K, 0.05, radius, 3);
    block_diff = std::max({block_diff, max_abs_diff(a.last, b.last), max_abs_diff(a.averaged, b.averaged)});
  }

  const auto toy = make_toy_qp();
  double fo_diff = 0.0;
  for (Index K = 1; K <= 100; ++K) {
    const auto a = run(toy.problem, toy.set, Algorithm::kZoceg, K, 0.2, RadiusSchedule<double>::fixed(1e-8), 11);
    const auto b = run(toy.problem, toy.set, Algorithm::kFoEg, K, 0.2, RadiusSchedule<double>::fixed(1e-8), 11);
    fo_diff = std::max({fo_diff, max_abs_diff(a.last, b.last), max_abs_diff(a.averaged, b.averaged)});
  }
  res.passed = block_diff <= 1e-12 && fo_diff <= 1e-5;
  res.measured = fmt::format("ZOBCEG(full) vs ZOCEG: {}; ZOCEG(r=1e-8) vs FO-EG: {}", g6(block_diff), g6(fo_diff));
  res.expected = "<= 1e-12; <= 1e-5";
  return res;
}

CriterionResult zoeg_rate() {
  CriterionResult res{7, "two-point EG gap decay on the toy QP", false, "", ""};
  const auto toy = make_toy_qp();
  const auto radius = RadiusSchedule<double>::make(5.0, 1.1, 1e-3);
  const auto tc = compute_theory_constants(toy.problem, toy.set, radius);
  const double d = 2.0;
  double mean_gap[2] = {0.0, 0.0};
  const Index Ks[2] = {10000, 40000};
  for (int i = 0; i < 2; ++i) {
    const double K = static_cast<double>(Ks[i]);
    const double eta = tc.diameter / (6.0 * std::sqrt(6.0 * d * K) * tc.lipschitz);
    for (int seed = 0; seed < kRuns; ++seed) {
      const auto rec = run(toy.problem, toy.set, Algorithm::kZoeg, Ks[i], eta, radius, seed);
      mean_gap[i] += *duality_gap(rec.averaged, toy.problem) / kRuns;
    }
  }
  const double ratio = mean_gap[1] / mean_gap[0];
  res.passed = ratio <= 0.6;
  res.measured = fmt::format("mean gap K=1e4: {}, K=4e4: {}, ratio {}", g6(mean_gap[0]), g6(mean_gap[1]), g6(ratio));
  res.expected = "ratio <= 0.6";
  return res;
}

CriterionResult accounting() {
  CriterionResult res{8, "query counters", true, "", ""};
  const LoadTrackingInstance inst = generate_load_tracking(9, 100);
  const Problem p = make_load_tracking_problem(inst);
  const FeasibleSet set(load_tracking_primal_box(inst), build_dual_box(p, inst.u));
  const auto radius = RadiusSchedule<double>::make(5.0, 1.1, 1e-3);
  const Index K = 37, dx = p.dim_x, dy = p.dim_y, tx = 4, ty = 1;
  struct Case {
    Algorithm alg;
    std::int64_t expect;
  };
  const Case cases[] = {{Algorithm::kZoeg, 4 * K},
                        {Algorithm::kZoceg, 2 * (dx + dy + 1) * K},
                        {Algorithm::kZobceg, 2 * (tx + ty + 1) * K},
                        {Algorithm::kZogda, 2 * K}};
  for (const Case& c : cases) {
    const auto rec = run(p, set, c.alg, K, 1e-4, radius, 2, tx, ty);
    bool rows_ok = true;
    const std::int64_t per = c.expect / K;
    for (const auto& row : rec.rows) rows_ok = rows_ok && row.queries == per * (row.iteration + 1);
    res.passed = res.passed && rec.queries == c.expect && rows_ok;
    res.measured += fmt::format("{}: {}{}; ", to_string(c.alg), rec.queries, rows_ok ? "" : " (row mismatch)");
    res.expected += fmt::format("{}: {}; ", to_string(c.alg), c.expect);
  }
  return res;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).generic_string()] = ss.str();
  }
  return out;
}

CriterionResult determinism() {
  CriterionResult res{9, "byte-identical experiment outputs", false, "", ""};
  const fs::path base = fs::temp_directory_path() / fmt::format("zosaddle_det_{}", std::random_device{}());
  const std::string config = R"({
    "problem": {"kind": "load_tracking", "seed": 3, "size": 100},
    "seeds": [0, 1, 2, 3],
    "targets": {"error": [0.05, 0.01], "violation": [5, 1]},
    "solvers": [
      {"name": "zoeg", "algorithm": "zoeg", "iterations": 200, "step": {"kind": "constant", "eta0": 0.001}},
      {"name": "bs2", "algorithm": "zobceg", "iterations": 200, "tau_x": 2, "tau_y": 1,
       "step": {"kind": "constant", "eta0": 0.2}, "radius": {"c": 5, "p": 1.1, "cap": 0.001}}
    ],
    "parallelism": 2
  })";
  try {
    const ExperimentConfig cfg = parse_config_text(config);
    std::ostringstream log;
    ExperimentOptions o1{(base / "a").string(), 2, 0};
    ExperimentOptions o2{(base / "b").string(), 1, 0};
    const int s1 = run_experiment(cfg, log, o1);
    const int s2 = run_experiment(cfg, log, o2);
    // Replay from the first manifest alone.
    const ExperimentConfig replay = parse_config((base / "a" / "manifest.json").string());
    ExperimentOptions o3{(base / "c").string(), 3, 0};
    const int s3 = run_experiment(replay, log, o3);
    const auto a = read_tree(base / "a"), b = read_tree(base / "b"), c = read_tree(base / "c");
    std::size_t csvs = 0, same = 0, replayed = 0;
    for (const auto& [name, content] : a) {
      if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
      ++csvs;
      if (b.count(name) && b.at(name) == content) ++same;
      if (c.count(name) && c.at(name) == content) ++replayed;
    }
    // Manifests record the output directory and parallelism, which differ here.
    const bool summaries = a.at("zoeg/summary.json") == b.at("zoeg/summary.json") &&
                           a.at("bs2/summary.json") == b.at("bs2/summary.json");
    res.passed = s1 == 0 && s2 == 0 && s3 == 0 && csvs == 10 && same == csvs && replayed == csvs && summaries;
    res.measured = fmt::format("{} CSVs, {} identical across runs, {} identical after manifest replay{}", csvs, same,
                               replayed, summaries ? "" : ", summaries differ");
  } catch (const std::exception& e) {
    res.measured = std::string("error: ") + e.what();
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  res.expected = "all CSVs byte-identical (run twice and replayed from manifest)";
  return res;
}

CriterionResult nonconvex() {
  CriterionResult res{10, "nonconvex smoke run", true, "", ""};
  const auto nc = make_nonconvex_smoke();
  const auto radius = RadiusSchedule<double>::make(5.0, 1.1, 1e-3);
  struct Case {
    Algorithm alg;
    double eta;
    Index tau_x;
  };
  const Case cases[] = {{Algorithm::kZoeg, 2e-3, 1}, {Algorithm::kZobceg, 0.02, 3}};
  for (const Case& c : cases) {
    int improved = 0, tripped = 0;
    for (int seed = 0; seed < kRuns; ++seed) {
      const auto rec = run(nc.problem, nc.set, c.alg, 10000, c.eta, radius, seed, c.tau_x, 1);
      if (rec.diverged || rec.iterations_completed != 10000) ++tripped;
      const double start = constraint_violation(rec.initial.x, nc.problem);
      const double end = constraint_violation(rec.last.x, nc.problem);
      if (end < start) ++improved;
    }
    res.passed = res.passed && tripped == 0 && improved >= 18;
    res.measured += fmt::format("{}: {} guard trips, violation reduced in {}/{}; ", to_string(c.alg), tripped,
                                improved, kRuns);
  }
  res.expected = "0 guard trips and >= 18/20 reduced, for each solver";
  return res;
}

CriterionResult reference_solver() {
  CriterionResult res{11, "load-tracking reference solver", true, "", ""};
  double worst_kkt = 0.0;
  int non_monotone = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto inst = generate_load_tracking(10000 + s, 100);
    const auto ref = reference_solve_load_tracking(inst);
    worst_kkt = std::max(worst_kkt, load_tracking_kkt(inst, ref).max());
    // g(lambda) = p_c(x(lambda)) - D must be nonincreasing.
    double prev = INFINITY;
    for (int i = 0; i <= 200; ++i) {
      const double lambda = 2.0 * ref.lambda * i / 200.0;
      const double g = inst.load(load_tracking_response(inst, lambda)) - inst.D;
      if (g > prev) ++non_monotone;
      prev = g;
    }
  }
  res.passed = worst_kkt <= 1e-8 && non_monotone == 0;
  res.measured = fmt::format("max KKT residual {}, monotonicity violations {}", g6(worst_kkt), non_monotone);
  res.expected = "KKT <= 1e-8, 0 violations";
  return res;
}

using Check = std::function<CriterionResult()>;

const std::vector<std::pair<std::string, std::vector<Check>>>& registry() {
  static const std::vector<std::pair<std::string, std::vector<Check>>> r = {
      {"table2", {load_tracking_table}},
      {"bounds", {gap_bound, feasibility_bound}},
      {"estimators", {coordinate_bias, sphere_moments}},
      {"reductions", {reductions}},
      {"rates", {zoeg_rate}},
      {"accounting", {accounting}},
      {"determinism", {determinism}},
      {"nonconvex", {nonconvex}},
      {"reference", {reference_solver}},
  };
  return r;
}

}  // namespace

std::vector<std::string> acceptance_suites() {
  std::vector<std::string> out{"all"};
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

AcceptanceReport run_acceptance_suite(const std::string& selector, std::ostream* progress) {
  AcceptanceReport report;
  bool matched = false;
  for (const auto& [name, checks] : registry()) {
    if (selector != "all" && selector != name) continue;
    matched = true;
    for (const auto& check : checks) {
      CriterionResult r;
      try {
        r = check();
      } catch (const std::exception& e) {
        r.name = name;
        r.passed = false;
        r.measured = std::string("exception: ") + e.what();
      }
      if (progress) {
        *progress << fmt::format("[{}] {:>2} {}\n       measured: {}\n       expected: {}\n",
                                 r.passed ? "PASS" : "FAIL", r.id, r.name, r.measured, r.expected);
        progress->flush();
      }
      report.results.push_back(std::move(r));
    }
  }
  if (!matched) report.results.push_back({0, "unknown suite '" + selector + "'", false, "", ""});
  return report;
}

}  // namespace zosaddle
