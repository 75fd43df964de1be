#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "zosaddle/algorithms.hpp"
#include "zosaddle/metrics.hpp"
#include "zosaddle/problems.hpp"

using namespace zosaddle;

namespace {

JointPoint<double> jp(double x, double y) { return JointPoint<double>(Vec::Constant(1, x), Vec::Constant(1, y)); }

MetricRow row(Index k, std::int64_t q, double err, double viol) {
  MetricRow r;
  r.iteration = k;
  r.queries = q;
  r.error = err;
  r.violation = viol;
  return r;
}

}  // namespace

TEST(DualityGap, HandValues) {
  const auto toy = make_toy_qp();
  EXPECT_NEAR(*duality_gap(jp(1, 2), toy.problem), 0.0, 1e-15);
  EXPECT_NEAR(*duality_gap(jp(2, 0), toy.problem), 1.0, 1e-15);
  // The gap is (x - 1)^2 on this instance.
  EXPECT_NEAR(*duality_gap(jp(-0.5, 3.7), toy.problem), 2.25, 1e-14);
}

TEST(DualityGap, NonnegativeOnRandomPoints) {
  const auto toy = make_toy_qp();
  SeededSampler s(4, 0);
  for (int t = 0; t < 1000; ++t) {
    const auto z = jp(s.uniform(-2, 2), s.uniform(0, 4));
    EXPECT_GE(*duality_gap(z, toy.problem), -1e-9);
  }
}

TEST(DualityGap, AbsentWithoutSaddle) {
  const auto nc = make_nonconvex_smoke();
  EXPECT_FALSE(duality_gap(JointPoint<double>(Vec::Zero(10), Vec::Zero(1)), nc.problem).has_value());
}

TEST(DualityGap, DiagnosticCounterIsSeparate) {
  const auto toy = make_toy_qp();
  LagrangianOracle<double> oracle(toy.problem);
  oracle(jp(0.5, 1.0));
  DiagnosticCounter diag;
  const auto before = oracle.query_count();
  duality_gap(jp(0.5, 1.0), toy.problem, &diag);
  constraint_violation(Vec(Vec::Constant(1, 0.5)), toy.problem, &diag);
  objective_error(Vec(Vec::Constant(1, 0.5)), toy.problem, &diag);
  EXPECT_EQ(oracle.query_count(), before);
  EXPECT_EQ(diag.queries, 4);
}

TEST(ConstraintViolation, LoadTrackingExamples) {
  const auto inst = generate_load_tracking(11, 100);
  const Problem p = make_load_tracking_problem(inst);
  EXPECT_EQ(constraint_violation(inst.u, p), 0.0);
  EXPECT_NEAR(constraint_violation(Vec(Vec::Zero(100)), p), 1500.0, 1e-9);
  EXPECT_EQ(constraint_violation(Vec(inst.u * 0.99), p), 0.0);
}

TEST(ConstraintViolation, EuclideanNormOfPositiveParts) {
  Problem p;
  p.dim_x = 1;
  p.dim_y = 3;
  p.objective = [](const Vec&) { return 0.0; };
  p.constraints = [](const Vec&) {
    Vec c(3);
    c << 3.0, -5.0, 4.0;
    return c;
  };
  EXPECT_DOUBLE_EQ(constraint_violation(Vec(Vec::Zero(1)), p), 5.0);
}

TEST(ObjectiveError, RelativeAndAbsolute) {
  auto toy = make_toy_qp();
  EXPECT_EQ(error_kind(toy.problem), ErrorKind::kRelative);
  EXPECT_NEAR(*objective_error(Vec(Vec::Constant(1, 1.1)), toy.problem), 0.21, 1e-14);
  toy.problem.optimum->objective = -2.0;
  EXPECT_EQ(error_kind(toy.problem), ErrorKind::kRelative);
  EXPECT_NEAR(*objective_error(Vec(Vec::Constant(1, 1.0)), toy.problem), 1.5, 1e-14);
  toy.problem.optimum->objective = 0.0;
  EXPECT_EQ(error_kind(toy.problem), ErrorKind::kAbsolute);
  EXPECT_NEAR(*objective_error(Vec(Vec::Constant(1, 1.0)), toy.problem), 1.0, 1e-14);
  toy.problem.optimum.reset();
  EXPECT_EQ(error_kind(toy.problem), ErrorKind::kNone);
}

TEST(QueriesToTarget, FirstHitAndAbsent) {
  const std::vector<MetricRow> rows = {row(0, 10, 0.5, 3), row(1, 20, 0.04, 2), row(2, 30, 0.02, 0.5),
                                       row(3, 40, 0.009, 0.0)};
  const double t[] = {0.6, 0.05, 0.01, 0.001};
  const auto q = queries_to_target(rows, t, MetricKind::kError);
  EXPECT_EQ(q[0], 10);
  EXPECT_EQ(q[1], 20);
  EXPECT_EQ(q[2], 40);
  EXPECT_FALSE(q[3].has_value());
  const double v[] = {1.0};
  EXPECT_EQ(queries_to_target(rows, v, MetricKind::kViolation)[0], 30);
  EXPECT_FALSE(queries_to_target(rows, v, MetricKind::kGap)[0].has_value());
}

TEST(QueriesToTarget, MonotoneInThreshold) {
  const auto toy = make_toy_qp();
  SolverConfig<double> c;
  c.algorithm = Algorithm::kZoeg;
  c.iterations = 3000;
  c.step = StepSchedule<double>::diminishing(0.1);
  const auto rec = run_solver(toy.problem, toy.set, c);
  std::vector<double> t;
  for (int i = 0; i < 30; ++i) t.push_back(std::pow(10.0, -0.1 * i));
  const auto q = queries_to_target(rec, t, MetricKind::kGap);
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i]) {
      ASSERT_TRUE(q[i - 1].has_value());
      EXPECT_LE(*q[i - 1], *q[i]);
    }
  }
}

TEST(MeanStd, UnbiasedAndAbsentAware) {
  const std::vector<std::optional<double>> s = {1.0, std::nullopt, 3.0, 5.0};
  const auto m = mean_std(s);
  EXPECT_EQ(m.count, 3u);
  EXPECT_DOUBLE_EQ(m.mean, 3.0);
  EXPECT_DOUBLE_EQ(m.stddev, 2.0);
}

TEST(Aggregate, IdenticalRecordsHaveZeroStd) {
  RunRecord<double> r;
  r.config_key = "k";
  r.rows = {row(0, 4, 0.3, 1.0), row(1, 8, 0.2, 0.5)};
  const std::vector<RunRecord<double>> recs = {r, r};
  const std::vector<TargetSet> targets = {{MetricKind::kError, {0.25, 0.1}}};
  const auto s = aggregate(recs, targets);
  ASSERT_EQ(s.iterations.size(), 2u);
  for (const auto& it : s.iterations) {
    EXPECT_EQ(it.error.stddev, 0.0);
    EXPECT_EQ(it.violation.stddev, 0.0);
  }
  ASSERT_EQ(s.targets.size(), 2u);
  EXPECT_EQ(*s.targets[0].mean_queries, 8.0);
  EXPECT_EQ(s.targets[0].reach_rate(), 1.0);
  EXPECT_FALSE(s.targets[1].mean_queries.has_value());
  EXPECT_EQ(s.targets[1].reach_rate(), 0.0);
}

TEST(Aggregate, RejectsMismatchAndTooFew) {
  RunRecord<double> a, b;
  a.config_key = "x";
  b.config_key = "y";
  EXPECT_THROW(aggregate(std::vector<RunRecord<double>>{a, b}, {}), std::invalid_argument);
  EXPECT_THROW(aggregate(std::vector<RunRecord<double>>{a}, {}), std::invalid_argument);
}

TEST(Aggregate, PermutationInvariantMeans) {
  const auto inst = generate_load_tracking(2, 100);
  const auto ref = reference_solve_load_tracking(inst);
  const Problem p = make_load_tracking_problem(inst, &ref);
  const FeasibleSet set(load_tracking_primal_box(inst), build_dual_box(p, inst.u));
  std::vector<RunRecord<double>> recs;
  for (int s = 0; s < 5; ++s) {
    SolverConfig<double> c;
    c.algorithm = Algorithm::kZobceg;
    c.iterations = 200;
    c.tau_x = 5;
    c.step = StepSchedule<double>::constant(0.2);
    c.seed = s;
    recs.push_back(run_solver(p, set, c));
  }
  const std::vector<TargetSet> targets = {{MetricKind::kError, {0.5, 0.2}}};
  const auto a = aggregate(recs, targets);
  std::reverse(recs.begin(), recs.end());
  std::swap(recs[0], recs[3]);
  const auto b = aggregate(recs, targets);
  ASSERT_EQ(a.iterations.size(), 200u);
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    EXPECT_NEAR(a.iterations[i].error.mean, b.iterations[i].error.mean, 1e-12);
    EXPECT_NEAR(a.iterations[i].violation.stddev, b.iterations[i].violation.stddev, 1e-9);
  }
  EXPECT_EQ(a.targets[0].reached, b.targets[0].reached);
}
