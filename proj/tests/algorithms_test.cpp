#include <gtest/gtest.h>

#include <cmath>

#include "zosaddle/algorithms.hpp"
#include "zosaddle/problems.hpp"

using namespace zosaddle;

namespace {

SolverConfig<double> config(Algorithm alg, Index K, StepSchedule<double> step, RadiusSchedule<double> radius,
                            std::uint64_t seed = 0) {
  SolverConfig<double> c;
  c.algorithm = alg;
  c.iterations = K;
  c.step = step;
  c.radius = radius;
  c.seed = seed;
  return c;
}

const auto kDefaultRadius = RadiusSchedule<double>::make(5.0, 1.1, 1e-3);

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

TEST(Solvers, ZeroIterationsRejected) {
  const auto toy = make_toy_qp();
  for (Algorithm a : {Algorithm::kZoeg, Algorithm::kZoceg, Algorithm::kZobceg, Algorithm::kZogda, Algorithm::kFoEg}) {
    auto c = config(a, 0, StepSchedule<double>::constant(0.1), kDefaultRadius);
    try {
      run_solver(toy.problem, toy.set, c);
      FAIL();
    } catch (const std::invalid_argument& e) {
      EXPECT_STREQ(e.what(), "zero iterations");
    }
  }
}

TEST(Zoceg, MatchesHandWrittenToyIteration) {
  // Independent re-derivation of the coordinate EG update on
  // f = x^2 + y (1 - x) over [-2, 2] x [0, 4].
  const auto toy = make_toy_qp();
  const auto radius = RadiusSchedule<double>::make(1.0, 1.1, 1e-3);
  const double eta = 0.2;
  const Index K = 60;
  auto c = config(Algorithm::kZoceg, K, StepSchedule<double>::constant(eta), radius, 4);
  const auto rec = run_solver(toy.problem, toy.set, c);

  auto f = [](double x, double y) { return x * x + y * (1.0 - x); };
  double x = rec.initial.x[0], y = rec.initial.y[0];
  double sx = 0.0, sy = 0.0;
  for (Index k = 0; k < K; ++k) {
    const double r = std::min(1.0 / std::pow(k + 1.0, 1.1), 1e-3);
    auto grads = [&](double a, double b) {
      const double base = f(a, b);
      return std::make_pair((f(a + r, b) - base) / r, (f(a, b + r) - base) / r);
    };
    const auto [gx, gy] = grads(x, y);
    const double xp = clamp(x - eta * gx, -2, 2), yp = clamp(y + eta * gy, 0, 4);
    const auto [hx, hy] = grads(xp, yp);
    sx += xp;
    sy += yp;
    ASSERT_NEAR(*rec.rows[static_cast<std::size_t>(k)].gap, f(xp, 2.0) - f(1.0, yp), 1e-12);
    x = clamp(x - eta * hx, -2, 2);
    y = clamp(y + eta * hy, 0, 4);
  }
  EXPECT_NEAR(rec.last.x[0], x, 1e-12);
  EXPECT_NEAR(rec.last.y[0], y, 1e-12);
  EXPECT_NEAR(rec.averaged.x[0], sx / K, 1e-12);
  EXPECT_NEAR(rec.averaged.y[0], sy / K, 1e-12);
}

TEST(Zoeg, MatchesHandWrittenIterationWithSameDraws) {
  const auto toy = make_toy_qp();
  const double eta = 0.05;
  const Index K = 40;
  auto c = config(Algorithm::kZoeg, K, StepSchedule<double>::constant(eta), kDefaultRadius, 9);
  const auto rec = run_solver(toy.problem, toy.set, c);

  auto f = [](const Vec& z) { return z[0] * z[0] + z[1] * (1.0 - z[0]); };
  auto proj = [](Vec z) {
    z[0] = clamp(z[0], -2, 2);
    z[1] = clamp(z[1], 0, 4);
    return z;
  };
  auto est = [&](const Vec& z, double r, const Vec& v) {
    const double s = (f(z + r * v) - f(z)) * 2.0 / r;
    Vec g(2);
    g << s * v[0], -s * v[1];
    return g;
  };
  SeededSampler sampler(9, 0);
  Vec z = rec.initial.stacked(), sum = Vec::Zero(2);
  for (Index k = 0; k < K; ++k) {
    const double r = kDefaultRadius(k);
    const Vec v = sample_unit_sphere(2, sampler);
    const Vec w = sample_unit_sphere(2, sampler);
    const Vec plus = proj(z - eta * est(z, r, v));
    z = proj(z - eta * est(plus, r, w));
    sum += plus;
  }
  EXPECT_LE((rec.last.stacked() - z).norm(), 1e-12);
  EXPECT_LE((rec.averaged.stacked() - sum / K).norm(), 1e-12);
}

TEST(Zoeg, DiminishingStepsReachFivePercentOnToy) {
  const auto toy = make_toy_qp();
  double mean = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    auto c = config(Algorithm::kZoeg, 20000, StepSchedule<double>::diminishing(0.1), kDefaultRadius, seed);
    c.record_every = 1000;
    const auto rec = run_solver(toy.problem, toy.set, c);
    mean += *objective_error(rec.averaged.x, toy.problem) / 20.0;
  }
  EXPECT_LE(mean, 0.05);
}

TEST(Zogda, DiminishingStepsComparableToZoegAtEqualBudget) {
  const auto toy = make_toy_qp();
  double zoeg = 0.0, zogda = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    auto a = config(Algorithm::kZoeg, 10000, StepSchedule<double>::diminishing(0.1), kDefaultRadius, seed);
    auto b = config(Algorithm::kZogda, 20000, StepSchedule<double>::diminishing(0.1), kDefaultRadius, seed);
    a.record_every = b.record_every = 1000;
    const auto ra = run_solver(toy.problem, toy.set, a);
    const auto rb = run_solver(toy.problem, toy.set, b);
    ASSERT_EQ(ra.queries, rb.queries);
    zoeg += *objective_error(ra.averaged.x, toy.problem) / 20.0;
    zogda += *objective_error(rb.averaged.x, toy.problem) / 20.0;
  }
  EXPECT_LE(zogda, 0.05);
  EXPECT_LE(zoeg, 0.05);
}

TEST(Zogda, OversizedStepStaysFeasible) {
  const auto toy = make_toy_qp();
  for (Index K : {1, 2, 5, 50, 500}) {
    auto c = config(Algorithm::kZogda, K, StepSchedule<double>::constant(10.0), kDefaultRadius, 3);
    const auto rec = run_solver(toy.problem, toy.set, c);
    EXPECT_FALSE(rec.diverged);
    EXPECT_TRUE(toy.set.contains(rec.last));
    EXPECT_TRUE(toy.set.contains(rec.averaged, 1e-12));
    EXPECT_EQ(rec.queries, 2 * K);
  }
}

TEST(FoEg, ConvergesToSaddle) {
  const auto toy = make_toy_qp();
  auto c = config(Algorithm::kFoEg, 5000, StepSchedule<double>::constant(0.2), kDefaultRadius, 1);
  const auto rec = run_solver(toy.problem, toy.set, c);
  Vec star(2);
  star << 1.0, 2.0;
  EXPECT_LE((rec.last.stacked() - star).norm(), 1e-9);
  // The average carries the transient at rate 1/K.
  EXPECT_LE((rec.averaged.stacked() - star).norm(), 20.0 / 5000);
  EXPECT_EQ(rec.queries, 0);
}

TEST(FoEg, SaddleIsFixedPoint) {
  const auto toy = make_toy_qp();
  auto c = config(Algorithm::kFoEg, 20, StepSchedule<double>::constant(0.2), kDefaultRadius);
  c.initial = JointPoint<double>(Vec::Constant(1, 1.0), Vec::Constant(1, 2.0));
  const auto rec = run_solver(toy.problem, toy.set, c);
  EXPECT_NEAR(rec.last.x[0], 1.0, 1e-14);
  EXPECT_NEAR(rec.last.y[0], 2.0, 1e-14);
}

TEST(FoEg, AveragedGapDecaysLikeOneOverK) {
  const auto toy = make_toy_qp();
  auto gap = [&](Index K) {
    auto c = config(Algorithm::kFoEg, K, StepSchedule<double>::constant(0.2), kDefaultRadius, 2);
    c.record_every = K;
    return *duality_gap(run_solver(toy.problem, toy.set, c).averaged, toy.problem);
  };
  for (Index K : {500, 1000, 2000}) EXPECT_LE(gap(2 * K), 0.6 * gap(K)) << "K=" << K;
}

TEST(Zobceg, FullBlocksReduceToZoceg) {
  const auto inst = generate_load_tracking(6, 100);
  const auto ref = reference_solve_load_tracking(inst);
  const Problem p = make_load_tracking_problem(inst, &ref);
  const FeasibleSet set(load_tracking_primal_box(inst), build_dual_box(p, inst.u));
  auto a = config(Algorithm::kZobceg, 30, StepSchedule<double>::constant(0.05), kDefaultRadius, 5);
  a.tau_x = 100;
  a.tau_y = 1;
  auto b = config(Algorithm::kZoceg, 30, StepSchedule<double>::constant(0.05), kDefaultRadius, 5);
  const auto ra = run_solver(p, set, a);
  const auto rb = run_solver(p, set, b);
  EXPECT_EQ(ra.rows, rb.rows);
  EXPECT_EQ(ra.last, rb.last);
  EXPECT_EQ(ra.averaged, rb.averaged);
}

TEST(Zobceg, BlockSizePreconditions) {
  const auto toy = make_toy_qp();
  auto c = config(Algorithm::kZobceg, 5, StepSchedule<double>::constant(0.1), kDefaultRadius);
  c.tau_x = 2;
  EXPECT_THROW(run_solver(toy.problem, toy.set, c), std::invalid_argument);
  c.tau_x = 1;
  c.tau_y = 0;
  EXPECT_THROW(run_solver(toy.problem, toy.set, c), std::invalid_argument);
}

TEST(Zobceg, OnlySelectedCoordinatesMove) {
  const auto inst = generate_load_tracking(6, 100);
  const Problem p = make_load_tracking_problem(inst);
  const FeasibleSet set(load_tracking_primal_box(inst), build_dual_box(p, inst.u));
  auto c = config(Algorithm::kZobceg, 1, StepSchedule<double>::constant(0.05), kDefaultRadius, 8);
  c.tau_x = 3;
  const auto rec = run_solver(p, set, c);
  // One iteration moves at most the 3 coordinates of the second block.
  Index moved = 0;
  for (Index i = 0; i < 100; ++i) moved += rec.last.x[i] != rec.initial.x[i];
  EXPECT_LE(moved, 3);
  EXPECT_GE(moved, 1);
}

TEST(Solvers, QueryCountsExact) {
  const auto inst = generate_load_tracking(6, 100);
  const Problem p = make_load_tracking_problem(inst);
  const FeasibleSet set(load_tracking_primal_box(inst), build_dual_box(p, inst.u));
  const Index K = 13;
  for (Algorithm a : {Algorithm::kZoeg, Algorithm::kZoceg, Algorithm::kZobceg, Algorithm::kZogda}) {
    auto c = config(a, K, StepSchedule<double>::constant(1e-3), kDefaultRadius, 1);
    c.tau_x = 7;
    const auto rec = run_solver(p, set, c);
    EXPECT_EQ(rec.queries, K * queries_per_iteration(a, 100, 1, 7, 1)) << to_string(a);
    for (std::size_t i = 1; i < rec.rows.size(); ++i) EXPECT_GT(rec.rows[i].queries, rec.rows[i - 1].queries);
    EXPECT_GT(rec.diagnostic_queries, 0);
  }
}

TEST(Solvers, DeterministicGivenSeed) {
  const auto toy = make_toy_qp();
  for (Algorithm a : {Algorithm::kZoeg, Algorithm::kZoceg, Algorithm::kZobceg, Algorithm::kZogda}) {
    auto c = config(a, 200, StepSchedule<double>::constant(0.05), kDefaultRadius, 21);
    const auto r1 = run_solver(toy.problem, toy.set, c);
    const auto r2 = run_solver(toy.problem, toy.set, c);
    EXPECT_EQ(r1.rows, r2.rows);
    EXPECT_EQ(r1.averaged, r2.averaged);
  }
}

TEST(Solvers, IterationErrorCarriesIndex) {
  auto toy = make_toy_qp();
  int calls = 0;
  toy.problem.objective = [&calls](const Vec& x) { return ++calls > 9 ? NAN : x[0] * x[0]; };
  auto c = config(Algorithm::kZoeg, 10, StepSchedule<double>::constant(0.05), kDefaultRadius);
  try {
    run_solver(toy.problem, toy.set, c);
    FAIL();
  } catch (const IterationError& e) {
    // 4 evaluations per iteration plus diagnostic evaluations in between.
    EXPECT_GE(e.iteration(), 1);
    EXPECT_LE(e.iteration(), 2);
  }
}

TEST(Solvers, DivergenceGuardFlagsRecord) {
  auto toy = make_toy_qp();
  toy.problem.optimum->objective = 1e-20;  // relative errors explode
  auto c = config(Algorithm::kZoceg, 100, StepSchedule<double>::constant(0.2), kDefaultRadius, 2);
  const auto rec = run_solver(toy.problem, toy.set, c);
  EXPECT_TRUE(rec.diverged);
  EXPECT_LT(rec.iterations_completed, 100);
  EXPECT_FALSE(rec.warnings.empty());
}

TEST(Solvers, StepTooLargeWarnsWithTheory) {
  const auto toy = make_toy_qp();
  auto c = config(Algorithm::kZoceg, 5, StepSchedule<double>::constant(0.3), kDefaultRadius);
  c.theory = compute_theory_constants(toy.problem, toy.set, kDefaultRadius);
  EXPECT_FALSE(run_solver(toy.problem, toy.set, c).warnings.empty());
  c.step = StepSchedule<double>::constant(0.2);
  EXPECT_TRUE(run_solver(toy.problem, toy.set, c).warnings.empty());
}

TEST(Solvers, UnconstrainedProblem) {
  Problem p;
  p.name = "bowl";
  p.dim_x = 3;
  p.dim_y = 0;
  p.objective = [](const Vec& x) { return (x.array() - 0.5).square().sum(); };
  p.constraints = [](const Vec&) { return Vec(); };
  p.optimum = KnownOptimum<double>{Vec::Constant(3, 0.5), Vec(), 0.0};
  const FeasibleSet set(BoxSet<double>::uniform(3, -1, 1), BoxSet<double>(Vec(), Vec()));
  for (Algorithm a : {Algorithm::kZoeg, Algorithm::kZoceg, Algorithm::kZogda}) {
    auto c = config(a, 3000, StepSchedule<double>::constant(0.05), kDefaultRadius, 1);
    const auto rec = run_solver(p, set, c);
    EXPECT_LT((rec.last.x - Vec::Constant(3, 0.5)).norm(), 0.05) << to_string(a);
    EXPECT_EQ(rec.rows.back().violation, 0.0);
  }
}

TEST(Solvers, FloatInstantiation) {
  BlackBoxProblem<float> p;
  p.dim_x = 1;
  p.dim_y = 1;
  p.objective = [](const Vector<float>& x) { return x[0] * x[0]; };
  p.constraints = [](const Vector<float>& x) { return Vector<float>::Constant(1, 1.0f - x[0]); };
  const ProductFeasibleSet<float> set(BoxSet<float>::uniform(1, -2, 2), BoxSet<float>::uniform(1, 0, 4));
  SolverConfig<float> c;
  c.algorithm = Algorithm::kZoceg;
  c.iterations = 500;
  c.step = StepSchedule<float>::constant(0.2f);
  c.radius = RadiusSchedule<float>::make(1.0f, 1.1f, 1e-3f);
  const auto rec = run_solver(p, set, c);
  EXPECT_NEAR(rec.last.x[0], 1.0f, 1e-2f);
  EXPECT_NEAR(rec.last.y[0], 2.0f, 1e-2f);
}
