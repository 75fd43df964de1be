#pragma once

// Extra-gradient solvers for min_x max_y f(x, y) over a box product:
// two-point (ZOEG), coordinate (ZOCEG), block-coordinate (ZOBCEG), the
// single-step ZOGDA baseline, and first-order EG as a reference.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "zosaddle/core.hpp"
#include "zosaddle/estimators.hpp"
#include "zosaddle/metrics.hpp"
#include "zosaddle/run_record.hpp"
#include "zosaddle/saddle.hpp"

namespace zosaddle {

enum class Algorithm { kZoeg, kZoceg, kZobceg, kZogda, kFoEg };
enum class OutputMode { kAveraged, kLast, kBoth };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kZoeg: return "ZOEG";
    case Algorithm::kZoceg: return "ZOCEG";
    case Algorithm::kZobceg: return "ZOBCEG";
    case Algorithm::kZogda: return "ZOGDA";
    case Algorithm::kFoEg: return "FO-EG";
  }
  return "?";
}

/// Queries one iteration costs under per-evaluation counting.
inline std::int64_t queries_per_iteration(Algorithm a, Index dim_x, Index dim_y, Index tau_x, Index tau_y) {
  switch (a) {
    case Algorithm::kZoeg: return 4;
    case Algorithm::kZoceg: return 2 * (dim_x + dim_y + 1);
    case Algorithm::kZobceg: return 2 * (tau_x + tau_y + 1);
    case Algorithm::kZogda: return 2;
    case Algorithm::kFoEg: return 0;
  }
  return 0;
}

template <typename Scalar>
struct SolverConfig {
  Algorithm algorithm = Algorithm::kZoceg;
  Index iterations = 100;
  StepSchedule<Scalar> step;
  RadiusSchedule<Scalar> radius;
  Index tau_x = 1;  // ZOBCEG only
  Index tau_y = 1;
  std::uint64_t seed = 0;
  OutputMode output = OutputMode::kBoth;
  CountingPolicy counting = CountingPolicy::kPerLagrangianEval;
  /// Defaults to draw_initial_point(set, seed).
  std::optional<JointPoint<Scalar>> initial;
  /// Store a metric row every this many iterations (the last one always).
  Index record_every = 1;
  /// Enables the eta * L <= 1/2 check for the coordinate methods.
  std::optional<TheoryConstants<Scalar>> theory;
  double divergence_threshold = 1e12;
};

template <typename Scalar>
std::string config_key(const SolverConfig<Scalar>& c) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(c.algorithm) << " K=" << c.iterations << " step="
     << (c.step.kind == StepKind::kConstant ? "const:" : "dimin:") << static_cast<double>(c.step.eta0)
     << " radius=" << static_cast<double>(c.radius.c) << "," << static_cast<double>(c.radius.p) << ","
     << static_cast<double>(c.radius.cap);
  if (c.algorithm == Algorithm::kZobceg) os << " tau=" << c.tau_x << "," << c.tau_y;
  os << " counting=" << (c.counting == CountingPolicy::kPerLagrangianEval ? "per_eval" : "per_component");
  return os.str();
}

class IterationError : public std::runtime_error {
 public:
  IterationError(Index k, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(k) + ": " + what), iteration_(k) {}
  Index iteration() const { return iteration_; }

 private:
  Index iteration_;
};

template <typename Scalar>
const JointPoint<Scalar>& final_point(const RunRecord<Scalar>& record, OutputMode mode) {
  return mode == OutputMode::kLast ? record.last : record.averaged;
}

namespace detail {

template <typename Scalar>
JointPoint<Scalar> operator_step(const JointPoint<Scalar>& z, const Vector<Scalar>& g, Scalar eta,
                                 const ProductFeasibleSet<Scalar>& set) {
  const Index dx = z.dim_x();
  return project_product(JointPoint<Scalar>(z.x - eta * g.head(dx), z.y - eta * g.tail(z.dim_y())), set);
}

// Descent in x, ascent in y, with partial-derivative estimates of f.
template <typename Scalar>
JointPoint<Scalar> coordinate_step(const JointPoint<Scalar>& z, const BlockEstimate<Scalar>& g, Scalar eta,
                                   const ProductFeasibleSet<Scalar>& set) {
  return JointPoint<Scalar>(project_box(z.x - eta * g.grad_x, set.primal()),
                            project_box(z.y + eta * g.grad_y, set.dual()));
}

inline IndexSet all_indices(Index n) {
  IndexSet idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

template <typename Scalar>
void validate(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
              const SolverConfig<Scalar>& config) {
  if (config.iterations <= 0) throw std::invalid_argument("zero iterations");
  if (set.dim_x() != problem.dim_x || set.dim_y() != problem.dim_y)
    throw std::invalid_argument("feasible set dimensions do not match the problem");
  if (config.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (config.algorithm == Algorithm::kZobceg) {
    if (config.tau_x < 1 || config.tau_x > problem.dim_x) throw std::invalid_argument("need 1 <= tau_x <= d_x");
    if (problem.dim_y > 0 && (config.tau_y < 1 || config.tau_y > problem.dim_y))
      throw std::invalid_argument("need 1 <= tau_y <= d_y");
  }
  if (config.algorithm == Algorithm::kFoEg && !problem.has_gradients())
    throw std::invalid_argument("FO-EG requires exact gradients");
}

// Shared driver. `step(k, z, eta, r)` returns (z_k^+, z_{k+1}).
template <typename Scalar, typename Step>
RunRecord<Scalar> run_loop(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
                           const SolverConfig<Scalar>& config, const LagrangianOracle<Scalar>& oracle, Step&& step) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord<Scalar> record;
  record.config_key = config_key(config);
  record.seed = config.seed;
  record.error_kind = error_kind(problem);

  JointPoint<Scalar> z = config.initial ? *config.initial : draw_initial_point(set, config.seed);
  if (z.dim_x() != problem.dim_x || z.dim_y() != problem.dim_y)
    throw std::invalid_argument("initial point has wrong dimensions");
  if (!set.contains(z)) throw std::invalid_argument("initial point lies outside the feasible set");
  record.initial = z;

  if (config.theory && config.step.kind == StepKind::kConstant &&
      (config.algorithm == Algorithm::kZoceg || config.algorithm == Algorithm::kZobceg)) {
    const double product = static_cast<double>(config.step.eta0 * config.theory->smoothness);
    if (product > 0.5) {
      std::ostringstream os;
      os << "eta * L = " << product << " exceeds 1/2; the averaged-iterate bound does not apply";
      record.warnings.push_back(os.str());
    }
  }

  Vector<Scalar> sum_x = Vector<Scalar>::Zero(problem.dim_x);
  Vector<Scalar> sum_y = Vector<Scalar>::Zero(problem.dim_y);
  DiagnosticCounter diagnostics;
  const Index K = config.iterations;
  Index done = 0;
  for (Index k = 0; k < K; ++k) {
    std::pair<JointPoint<Scalar>, JointPoint<Scalar>> next;
    try {
      next = step(k, z, config.step(k), config.radius(k));
    } catch (const IterationError&) {
      throw;
    } catch (const std::exception& e) {
      throw IterationError(k, e.what());
    }
    const JointPoint<Scalar>& plus = next.first;
    if (!plus.all_finite() || !next.second.all_finite()) {
      record.diverged = true;
      record.warnings.push_back("non-finite iterate at iteration " + std::to_string(k));
      break;
    }
    sum_x += plus.x;
    sum_y += plus.y;
    z = std::move(next.second);
    done = k + 1;

    if (k % config.record_every == 0 || k == K - 1) {
      MetricRow row;
      row.iteration = k;
      row.queries = oracle.query_count();
      row.error = [&]() -> std::optional<double> {
        auto e = objective_error(plus.x, problem, &diagnostics);
        return e ? std::optional<double>(static_cast<double>(*e)) : std::nullopt;
      }();
      row.violation = static_cast<double>(constraint_violation(plus.x, problem, &diagnostics));
      if (auto g = duality_gap(plus, problem, &diagnostics)) row.gap = static_cast<double>(*g);
      record.rows.push_back(row);
      const double limit = config.divergence_threshold;
      const auto too_big = [limit](std::optional<double> v) { return v && !(std::abs(*v) <= limit); };
      if (too_big(row.error) || too_big(row.violation) || too_big(row.gap)) {
        record.diverged = true;
        record.warnings.push_back("divergence guard tripped at iteration " + std::to_string(k));
        break;
      }
    }
  }

  record.iterations_completed = done;
  const Scalar count = static_cast<Scalar>(std::max<Index>(done, 1));
  record.averaged = JointPoint<Scalar>(sum_x / count, sum_y / count);
  record.last = z;
  record.queries = oracle.query_count();
  record.diagnostic_queries = diagnostics.queries;
  record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace detail

template <typename Scalar>
RunRecord<Scalar> run_zoeg(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
                           const SolverConfig<Scalar>& config) {
  detail::validate(problem, set, config);
  LagrangianOracle<Scalar> oracle(problem, config.counting);
  SeededSampler sampler(config.seed, 0);
  const Index d = problem.dim_x + problem.dim_y;
  return detail::run_loop(problem, set, config, oracle, [&](Index, const JointPoint<Scalar>& z, Scalar eta, Scalar r) {
    const Vector<Scalar> v = sample_unit_sphere<Scalar>(d, sampler);
    const Vector<Scalar> w = sample_unit_sphere<Scalar>(d, sampler);
    JointPoint<Scalar> plus = detail::operator_step(z, unige_operator(oracle, z, r, v), eta, set);
    JointPoint<Scalar> next = detail::operator_step(z, unige_operator(oracle, plus, r, w), eta, set);
    return std::make_pair(std::move(plus), std::move(next));
  });
}

template <typename Scalar>
RunRecord<Scalar> run_zoceg(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
                            const SolverConfig<Scalar>& config) {
  detail::validate(problem, set, config);
  LagrangianOracle<Scalar> oracle(problem, config.counting);
  const IndexSet ix = detail::all_indices(problem.dim_x);
  const IndexSet iy = detail::all_indices(problem.dim_y);
  return detail::run_loop(problem, set, config, oracle, [&](Index, const JointPoint<Scalar>& z, Scalar eta, Scalar r) {
    JointPoint<Scalar> plus = detail::coordinate_step(z, block_coord(oracle, z, ix, iy, r), eta, set);
    JointPoint<Scalar> next = detail::coordinate_step(z, block_coord(oracle, plus, ix, iy, r), eta, set);
    return std::make_pair(std::move(plus), std::move(next));
  });
}

template <typename Scalar>
RunRecord<Scalar> run_zobceg(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
                             const SolverConfig<Scalar>& config) {
  detail::validate(problem, set, config);
  LagrangianOracle<Scalar> oracle(problem, config.counting);
  SeededSampler sampler(config.seed, 0);
  const Index dx = problem.dim_x;
  const Index dy = problem.dim_y;
  auto draw = [&]() {
    IndexSet ix = sample_coordinate_subset(dx, config.tau_x, sampler);
    IndexSet iy = dy > 0 ? sample_coordinate_subset(dy, config.tau_y, sampler) : IndexSet{};
    return std::make_pair(std::move(ix), std::move(iy));
  };
  // Estimates vanish off the sampled blocks, so the full-vector step only
  // moves the selected coordinates.
  return detail::run_loop(problem, set, config, oracle, [&](Index, const JointPoint<Scalar>& z, Scalar eta, Scalar r) {
    const auto [ix, iy] = draw();
    JointPoint<Scalar> plus = detail::coordinate_step(z, block_coord(oracle, z, ix, iy, r), eta, set);
    const auto [jx, jy] = draw();
    JointPoint<Scalar> next = detail::coordinate_step(z, block_coord(oracle, plus, jx, jy, r), eta, set);
    return std::make_pair(std::move(plus), std::move(next));
  });
}

/// Single projected step per iteration; its iterate plays the role of z_k^+.
template <typename Scalar>
RunRecord<Scalar> run_zogda(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
                            const SolverConfig<Scalar>& config) {
  detail::validate(problem, set, config);
  LagrangianOracle<Scalar> oracle(problem, config.counting);
  SeededSampler sampler(config.seed, 0);
  const Index d = problem.dim_x + problem.dim_y;
  return detail::run_loop(problem, set, config, oracle, [&](Index, const JointPoint<Scalar>& z, Scalar eta, Scalar r) {
    const Vector<Scalar> v = sample_unit_sphere<Scalar>(d, sampler);
    JointPoint<Scalar> next = detail::operator_step(z, unige_operator(oracle, z, r, v), eta, set);
    return std::make_pair(next, next);
  });
}

template <typename Scalar>
RunRecord<Scalar> run_fo_eg(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
                            const SolverConfig<Scalar>& config) {
  detail::validate(problem, set, config);
  if (!problem.has_gradients()) throw std::invalid_argument("FO-EG requires exact gradients");
  LagrangianOracle<Scalar> oracle(problem, config.counting);  // stays at zero
  return detail::run_loop(problem, set, config, oracle, [&](Index, const JointPoint<Scalar>& z, Scalar eta, Scalar) {
    JointPoint<Scalar> plus = detail::operator_step(z, eval_operator_exact(problem, z), eta, set);
    JointPoint<Scalar> next = detail::operator_step(z, eval_operator_exact(problem, plus), eta, set);
    return std::make_pair(std::move(plus), std::move(next));
  });
}

template <typename Scalar>
RunRecord<Scalar> run_solver(const BlackBoxProblem<Scalar>& problem, const ProductFeasibleSet<Scalar>& set,
                             const SolverConfig<Scalar>& config) {
  switch (config.algorithm) {
    case Algorithm::kZoeg: return run_zoeg(problem, set, config);
    case Algorithm::kZoceg: return run_zoceg(problem, set, config);
    case Algorithm::kZobceg: return run_zobceg(problem, set, config);
    case Algorithm::kZogda: return run_zogda(problem, set, config);
    case Algorithm::kFoEg: return run_fo_eg(problem, set, config);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace zosaddle
