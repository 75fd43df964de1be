#include <gtest/gtest.h>

#include <cmath>

#include "zosaddle/problems.hpp"
#include "zosaddle/saddle.hpp"

using namespace zosaddle;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

// f(x, y) = x y: phi0 = 0, phi1(x) = x.
Problem bilinear() {
  Problem p;
  p.name = "bilinear";
  p.dim_x = 1;
  p.dim_y = 1;
  p.objective = [](const Vec&) { return 0.0; };
  p.constraints = [](const Vec& x) { return Vec(x); };
  p.objective_gradient = [](const Vec&) { return Vec::Zero(1); };
  p.constraint_jacobian = [](const Vec&) { return Mat::Constant(1, 1, 1.0); };
  return p;
}

}  // namespace

TEST(Lagrangian, ZeroMultipliersGiveObjective) {
  const auto toy = make_toy_qp();
  LagrangianOracle<double> f(toy.problem);
  EXPECT_DOUBLE_EQ(f(scalar(1.5), scalar(0.0)), 2.25);
}

TEST(Lagrangian, HandValueAndCount) {
  const auto toy = make_toy_qp();
  LagrangianOracle<double> f(toy.problem);
  EXPECT_EQ(query_count(f), 0);
  EXPECT_DOUBLE_EQ(eval_lagrangian(f, JointPoint<double>(scalar(2.0), scalar(3.0))), 1.0);
  EXPECT_EQ(query_count(f), 1);
}

TEST(Lagrangian, AffineInY) {
  const auto inst = generate_load_tracking(4, 20);
  // Small instances can have D < 0; affinity does not care.
  const Problem p = make_load_tracking_problem(inst);
  LagrangianOracle<double> f(p);
  SeededSampler s(1, 0);
  for (int t = 0; t < 50; ++t) {
    Vec x(20);
    for (Index i = 0; i < 20; ++i) x[i] = s.uniform(0, inst.u[i]);
    const Vec y = scalar(s.uniform(0, 10));
    const double delta = s.uniform(-3, 3);
    const double lhs = f(x, Vec(y + scalar(delta))) - f(x, y);
    const double rhs = delta * p.constraints(x)[0];
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(f(x, y))));
  }
}

TEST(Lagrangian, ConvexInXConcaveInY) {
  const auto inst = generate_load_tracking(7, 30);
  const Problem p = make_load_tracking_problem(inst);
  LagrangianOracle<double> f(p);
  SeededSampler s(2, 0);
  for (int t = 0; t < 100; ++t) {
    Vec x1(30), x2(30);
    for (Index i = 0; i < 30; ++i) {
      x1[i] = s.uniform(0, inst.u[i]);
      x2[i] = s.uniform(0, inst.u[i]);
    }
    const double lam = s.uniform01();
    const Vec y = scalar(s.uniform(0, 5));
    const Vec xm = lam * x1 + (1 - lam) * x2;
    EXPECT_LE(f(xm, y), lam * f(x1, y) + (1 - lam) * f(x2, y) + 1e-9);
    const Vec y1 = scalar(s.uniform(0, 5)), y2 = scalar(s.uniform(0, 5));
    const Vec ym = lam * y1 + (1 - lam) * y2;
    EXPECT_NEAR(f(x1, ym), lam * f(x1, y1) + (1 - lam) * f(x1, y2), 1e-8);
  }
}

TEST(Lagrangian, NonFiniteValueCarriesPoint) {
  Problem p = bilinear();
  p.objective = [](const Vec& x) { return x[0] > 1.0 ? NAN : 0.0; };
  LagrangianOracle<double> f(p);
  try {
    f(scalar(1.5), scalar(0.0));
    FAIL() << "expected OracleError";
  } catch (const OracleError& e) {
    ASSERT_EQ(e.point().size(), 1u);
    EXPECT_DOUBLE_EQ(e.point()[0], 1.5);
  }
  EXPECT_THROW(f(Vec::Zero(2), scalar(0.0)), std::invalid_argument);
}

TEST(Lagrangian, CachedCountingReusesComponents) {
  const auto inst = generate_load_tracking(1, 10);
  const Problem p = make_load_tracking_problem(inst);
  LagrangianOracle<double> f(p, CountingPolicy::kPerComponentCached);
  const Vec x = inst.u / 2;
  f(x, scalar(0.0));
  EXPECT_EQ(f.query_count(), 2);  // d_y + 1
  f(x, scalar(3.0));
  f(x, scalar(7.0));
  EXPECT_EQ(f.query_count(), 2);
  Vec x2 = x;
  x2[0] += 0.1;
  f(x2, scalar(1.0));
  EXPECT_EQ(f.query_count(), 4);
  // Values agree with the per-eval policy.
  LagrangianOracle<double> g(p);
  EXPECT_DOUBLE_EQ(f(x, scalar(2.0)), g(x, scalar(2.0)));
}

TEST(OperatorExact, Bilinear) {
  const Problem p = bilinear();
  const Vec F = eval_operator_exact(p, JointPoint<double>(scalar(1.0), scalar(1.0)));
  EXPECT_DOUBLE_EQ(F[0], 1.0);
  EXPECT_DOUBLE_EQ(F[1], -1.0);
}

TEST(OperatorExact, ConstantObjectiveZeroDual) {
  Problem p = bilinear();
  const Vec F = eval_operator_exact(p, JointPoint<double>(scalar(0.7), scalar(0.0)));
  EXPECT_DOUBLE_EQ(F[0], 0.0);
  EXPECT_DOUBLE_EQ(F[1], -0.7);
}

TEST(OperatorExact, SaddleIsProjectedFixedPoint) {
  const auto toy = make_toy_qp();
  const JointPoint<double> star(toy.problem.optimum->x, toy.problem.optimum->y);
  for (double eta : {0.01, 0.2, 1.0}) {
    const Vec F = eval_operator_exact(toy.problem, star);
    const auto next = project_product(JointPoint<double>::from_stacked(star.stacked() - eta * F, 1), toy.set);
    EXPECT_NEAR((next.stacked() - star.stacked()).norm(), 0.0, 1e-15);
  }
}

TEST(OperatorExact, MatchesFiniteDifferences) {
  const auto inst = generate_load_tracking(2, 8);
  const Problem p = make_load_tracking_problem(inst);
  const JointPoint<double> z(inst.u * 0.3, scalar(4.0));
  const Vec F = eval_operator_exact(p, z);
  LagrangianOracle<double> f(p);
  const double h = 1e-5;
  for (Index i = 0; i < 8; ++i) {
    Vec xp = z.x, xm = z.x;
    xp[i] += h;
    xm[i] -= h;
    EXPECT_NEAR(F[i], (f(xp, z.y) - f(xm, z.y)) / (2 * h), 1e-6);
  }
  EXPECT_NEAR(F[8], -(f(z.x, scalar(5.0)) - f(z.x, scalar(4.0))), 1e-9);
}

TEST(OperatorExact, RequiresGradients) {
  Problem p = bilinear();
  p.objective_gradient = nullptr;
  EXPECT_THROW(eval_operator_exact(p, JointPoint<double>(scalar(1.0), scalar(1.0))), std::invalid_argument);
}
