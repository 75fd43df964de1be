#include "zosaddle/problems.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace zosaddle {

namespace {

Vec loss_weights(const LoadTrackingInstance& inst) { return (1.0 + inst.gamma.array()).matrix(); }

void check_instance(const LoadTrackingInstance& inst) {
  const Index n = inst.size();
  if (n < 1 || inst.b.size() != n || inst.u.size() != n || inst.gamma.size() != n)
    throw std::invalid_argument("load tracking instance: inconsistent field lengths");
  if ((inst.a.array() <= 0.0).any()) throw std::invalid_argument("load tracking instance: a_i must be positive");
  if ((inst.u.array() < 0.0).any()) throw std::invalid_argument("load tracking instance: u_i must be nonnegative");
}

}  // namespace

double LoadTrackingInstance::load(const Vec& x) const {
  return (1.0 + gamma.array()).matrix().dot(u - x);
}

double LoadTrackingInstance::objective(const Vec& x) const {
  return (a.array() * x.array().square() + b.array() * x.array()).sum();
}

LoadTrackingInstance generate_load_tracking(std::uint64_t seed, Index n) {
  if (n < 1) throw std::invalid_argument("generate_load_tracking: n must be >= 1");
  SeededSampler sampler(seed, 0);
  LoadTrackingInstance inst;
  auto fill = [&](Vec& v, double lo, double hi) {
    v.resize(n);
    for (Index i = 0; i < n; ++i) v[i] = sampler.uniform(lo, hi);
  };
  fill(inst.a, 0.5, 1.5);
  fill(inst.b, 0.0, 5.0);
  fill(inst.u, 0.0, 50.0);
  fill(inst.gamma, 0.03, 0.15);
  inst.D = inst.load(Vec::Zero(n)) - 1500.0;
  return inst;
}

double KktResiduals::max() const { return std::max({stationarity, feasibility, complementarity}); }

Vec load_tracking_response(const LoadTrackingInstance& inst, double lambda) {
  const Vec c = loss_weights(inst);
  Vec x = ((lambda * c - inst.b).array() / (2.0 * inst.a.array())).matrix();
  return x.cwiseMax(0.0).cwiseMin(inst.u);
}

KktResiduals load_tracking_kkt(const LoadTrackingInstance& inst, const ReferenceSolution& sol) {
  const Vec c = loss_weights(inst);
  KktResiduals res;
  for (Index i = 0; i < inst.size(); ++i) {
    const double g = 2.0 * inst.a[i] * sol.x[i] + inst.b[i] - sol.lambda * c[i];
    double r = 0.0;
    if (sol.x[i] <= 0.0) {
      r = std::max(-g, 0.0);  // at the lower bound the gradient may only push down
    } else if (sol.x[i] >= inst.u[i]) {
      r = std::max(g, 0.0);
    } else {
      r = std::abs(g);
    }
    res.stationarity = std::max(res.stationarity, r);
  }
  const double slack = inst.load(sol.x) - inst.D;
  res.feasibility = std::max(slack, 0.0);
  res.complementarity = std::abs(sol.lambda * slack);
  if (sol.lambda < 0.0) res.complementarity = std::numeric_limits<double>::infinity();
  return res;
}

ReferenceSolution reference_solve_load_tracking(const LoadTrackingInstance& inst) {
  check_instance(inst);
  // p_c(u) = 0, so the problem is feasible iff D >= 0.
  if (inst.D < 0.0) throw std::invalid_argument("reference_solve_load_tracking: infeasible instance (D < 0)");
  auto slack = [&](double lambda) { return inst.load(load_tracking_response(inst, lambda)) - inst.D; };

  ReferenceSolution sol;
  if (slack(0.0) <= 0.0) {
    sol.lambda = 0.0;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    while (slack(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e9) throw std::runtime_error("reference_solve_load_tracking: no multiplier bracket in [0, 1e9]");
    }
    // slack is nonincreasing in lambda; keep slack(lo) > 0 >= slack(hi).
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double g = slack(mid);
      if (g == 0.0) {
        hi = mid;
        break;
      }
      if (g > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    sol.lambda = hi;
  }
  sol.x = load_tracking_response(inst, sol.lambda);
  sol.objective = inst.objective(sol.x);
  const KktResiduals res = load_tracking_kkt(inst, sol);
  if (!(res.max() <= 1e-8)) {
    std::ostringstream os;
    os << "reference_solve_load_tracking: KKT residuals too large (stationarity " << res.stationarity
       << ", feasibility " << res.feasibility << ", complementarity " << res.complementarity << ")";
    throw std::runtime_error(os.str());
  }
  return sol;
}

BoxSet<double> load_tracking_primal_box(const LoadTrackingInstance& inst) {
  return BoxSet<double>(Vec::Zero(inst.size()), inst.u);
}

Problem make_load_tracking_problem(const LoadTrackingInstance& inst, const ReferenceSolution* reference) {
  check_instance(inst);
  const Index n = inst.size();
  const Vec c = loss_weights(inst);
  Problem p;
  p.name = "load_tracking";
  p.dim_x = n;
  p.dim_y = 1;
  p.objective = [inst](const Vec& x) { return inst.objective(x); };
  p.constraints = [inst](const Vec& x) { return Vec::Constant(1, inst.load(x) - inst.D); };
  p.objective_gradient = [inst](const Vec& x) {
    return Vec((2.0 * inst.a.array() * x.array() + inst.b.array()).matrix());
  };
  p.constraint_jacobian = [c](const Vec&) { return Mat(-c.transpose()); };

  QuadraticData<double> q;
  q.Q = (2.0 * inst.a).asDiagonal();
  q.q = inst.b;
  q.A = -c.transpose();
  q.c = Vec::Constant(1, c.dot(inst.u) - inst.D);
  p.quadratic = std::move(q);

  // Box minimum of the separable quadratic.
  const Vec x_low = (-inst.b.array() / (2.0 * inst.a.array())).matrix().cwiseMax(0.0).cwiseMin(inst.u);
  p.objective_lower_bound = inst.objective(x_low);

  if (reference) {
    p.optimum = KnownOptimum<double>{reference->x, Vec::Constant(1, reference->lambda), reference->objective};
  }
  return p;
}

BoxSet<double> build_dual_box(const Problem& problem, const Vec& slater_point) {
  if (problem.dim_y == 0) return BoxSet<double>(Vec(0), Vec(0));
  if (!problem.objective_lower_bound)
    throw std::invalid_argument("build_dual_box: problem has no objective lower bound");
  const Vec phi = problem.constraints(slater_point);
  const double margin = (-phi).minCoeff();
  if (!(margin > 0.0)) throw std::invalid_argument("build_dual_box: point is not strictly feasible");
  const double y_max = 2.0 * (problem.objective(slater_point) - *problem.objective_lower_bound) / margin;
  if (!(y_max > 0.0) || !std::isfinite(y_max)) throw std::runtime_error("build_dual_box: degenerate bound");
  if (problem.optimum && (problem.optimum->y.array() > y_max).any())
    throw std::runtime_error("build_dual_box: known multiplier exceeds the computed bound");
  return BoxSet<double>::uniform(problem.dim_y, 0.0, y_max);
}

ToyQPInstance make_toy_qp() {
  Problem p;
  p.name = "toy_qp";
  p.dim_x = 1;
  p.dim_y = 1;
  p.objective = [](const Vec& x) { return x[0] * x[0]; };
  p.constraints = [](const Vec& x) { return Vec::Constant(1, 1.0 - x[0]); };
  p.objective_gradient = [](const Vec& x) { return Vec::Constant(1, 2.0 * x[0]); };
  p.constraint_jacobian = [](const Vec&) { return Mat::Constant(1, 1, -1.0); };
  QuadraticData<double> q;
  q.Q = Mat::Constant(1, 1, 2.0);
  q.q = Vec::Zero(1);
  q.A = Mat::Constant(1, 1, -1.0);
  q.c = Vec::Constant(1, 1.0);
  p.quadratic = std::move(q);
  p.objective_lower_bound = 0.0;
  p.optimum = KnownOptimum<double>{Vec::Constant(1, 1.0), Vec::Constant(1, 2.0), 1.0};
  return {std::move(p), FeasibleSet(BoxSet<double>::uniform(1, -2.0, 2.0), BoxSet<double>::uniform(1, 0.0, 4.0))};
}

NonconvexSmokeInstance make_nonconvex_smoke() {
  constexpr Index n = 10;
  Problem p;
  p.name = "nonconvex_smoke";
  p.dim_x = n;
  p.dim_y = 1;
  p.objective = [](const Vec& x) { return (x.array().square() + 0.5 * (3.0 * x.array()).sin()).sum(); };
  p.constraints = [](const Vec& x) { return Vec::Constant(1, 15.0 - x.sum()); };
  p.objective_gradient = [](const Vec& x) {
    return Vec((2.0 * x.array() + 1.5 * (3.0 * x.array()).cos()).matrix());
  };
  p.constraint_jacobian = [](const Vec&) { return Mat::Constant(1, n, -1.0); };
  // x^2 + 0.5 sin(3x) >= -0.5 per coordinate.
  p.objective_lower_bound = -0.5 * static_cast<double>(n);
  const BoxSet<double> primal = BoxSet<double>::uniform(n, 0.0, 2.0);
  BoxSet<double> dual = build_dual_box(p, primal.upper());
  return {std::move(p), FeasibleSet(primal, std::move(dual))};
}

TheoryConstants<double> compute_theory_constants(const Problem& problem, const FeasibleSet& set,
                                                 const RadiusSchedule<double>& radius) {
  if (!problem.quadratic) throw std::invalid_argument("compute_theory_constants: constants unavailable");
  const auto& qd = *problem.quadratic;
  const Index dx = problem.dim_x;
  const Index dy = problem.dim_y;
  const Index d = dx + dy;

  // grad f(z) = H z + h with H = [Q A'; A 0], h = [q; c].
  Mat H = Mat::Zero(d, d);
  H.topLeftCorner(dx, dx) = qd.Q;
  if (dy > 0) {
    H.topRightCorner(dx, dy) = qd.A.transpose();
    H.bottomLeftCorner(dy, dx) = qd.A;
  }
  Vec h(d);
  if (dy > 0) {
    h << qd.q, qd.c;
  } else {
    h = qd.q;
  }

  Vec lo(d), hi(d);
  lo << set.primal().lower(), set.dual().lower();
  hi << set.primal().upper(), set.dual().upper();
  // Each gradient component is affine in z, so its extreme values over the
  // box sit at corners chosen per sign of the row.
  double sq = 0.0;
  for (Index i = 0; i < d; ++i) {
    double top = h[i];
    double bottom = h[i];
    for (Index j = 0; j < d; ++j) {
      const double a = H(i, j) * lo[j];
      const double b = H(i, j) * hi[j];
      top += std::max(a, b);
      bottom += std::min(a, b);
    }
    const double m = std::max(std::abs(top), std::abs(bottom));
    sq += m * m;
  }

  Eigen::SelfAdjointEigenSolver<Mat> eig(H, Eigen::EigenvaluesOnly);
  const double L = eig.eigenvalues().cwiseAbs().maxCoeff();

  TheoryConstants<double> tc;
  tc.lipschitz = std::sqrt(sq);
  tc.smoothness = L;
  tc.diameter = set.diameter();
  tc.m1 = radius.total_sum(1);
  tc.m2 = radius.total_sum(2);
  tc.m3 = (std::sqrt(static_cast<double>(dx)) + std::sqrt(static_cast<double>(dy))) * tc.m1;
  return tc;
}

namespace {

nlohmann::json to_array(const Vec& v) { return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size())); }

Vec from_array(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array())
    throw std::invalid_argument(std::string("instance: missing numeric array '") + field + "'");
  const auto values = j.at(field).get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

std::string serialize_instance(const LoadTrackingInstance& inst) {
  nlohmann::ordered_json j;
  j["kind"] = "load_tracking";
  j["n"] = inst.size();
  j["a"] = to_array(inst.a);
  j["b"] = to_array(inst.b);
  j["u"] = to_array(inst.u);
  j["gamma"] = to_array(inst.gamma);
  j["D"] = inst.D;
  return j.dump(1) + "\n";
}

LoadTrackingInstance deserialize_instance(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("kind", std::string()) != "load_tracking")
    throw std::invalid_argument("instance: expected kind 'load_tracking'");
  LoadTrackingInstance inst;
  inst.a = from_array(j, "a");
  inst.b = from_array(j, "b");
  inst.u = from_array(j, "u");
  inst.gamma = from_array(j, "gamma");
  if (!j.contains("D") || !j.at("D").is_number()) throw std::invalid_argument("instance: missing number 'D'");
  inst.D = j.at("D").get<double>();
  if (j.contains("n") && j.at("n").get<Index>() != inst.size())
    throw std::invalid_argument("instance: 'n' does not match the array lengths");
  check_instance(inst);
  return inst;
}

void save_instance(const LoadTrackingInstance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file " + path);
  out << serialize_instance(inst);
}

LoadTrackingInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read instance file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_instance(ss.str());
}

}  // namespace zosaddle
