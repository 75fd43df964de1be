#pragma once

// Benchmark instances, their reference solutions, dual-box sizing and closed
// form theory constants.

#include <cstdint>
#include <string>

#include "zosaddle/core.hpp"
#include "zosaddle/saddle.hpp"

namespace zosaddle {

using Vec = Vector<double>;
using Mat = Matrix<double>;
using Problem = BlackBoxProblem<double>;
using FeasibleSet = ProductFeasibleSet<double>;

/// Curtail user loads x (kW) at cost sum a_i x_i^2 + b_i x_i so that the
/// loss-weighted remaining load p_c(x) = sum (1 + gamma_i)(u_i - x_i) is at
/// most D; 0 <= x_i <= u_i.
struct LoadTrackingInstance {
  Vec a;
  Vec b;
  Vec u;
  Vec gamma;
  double D = 0.0;

  Index size() const { return a.size(); }
  double load(const Vec& x) const;       // p_c(x)
  double objective(const Vec& x) const;  // phi0(x)
};

/// a ~ U(0.5, 1.5), b ~ U(0, 5), u ~ U(0, 50), gamma ~ U(0.03, 0.15), D = p_c(0) - 1500.
LoadTrackingInstance generate_load_tracking(std::uint64_t seed, Index n = 100);

struct ReferenceSolution {
  Vec x;
  double lambda = 0.0;
  double objective = 0.0;
};

struct KktResiduals {
  double stationarity = 0.0;     // worst violated sign condition of clipped coordinates
  double feasibility = 0.0;      // max(p_c(x) - D, 0)
  double complementarity = 0.0;  // |lambda * (p_c(x) - D)|
  double max() const;
};

/// The curtailment x(lambda) minimizing the Lagrangian coordinatewise.
Vec load_tracking_response(const LoadTrackingInstance& inst, double lambda);
KktResiduals load_tracking_kkt(const LoadTrackingInstance& inst, const ReferenceSolution& sol);

/// Bisection on the multiplier of the single load constraint.
ReferenceSolution reference_solve_load_tracking(const LoadTrackingInstance& inst);

/// Black-box view: d_y = 1 with phi_1(x) = p_c(x) - D. Attaches exact
/// gradients, closed-form data and (when given) the reference optimum.
Problem make_load_tracking_problem(const LoadTrackingInstance& inst, const ReferenceSolution* reference = nullptr);

BoxSet<double> load_tracking_primal_box(const LoadTrackingInstance& inst);

/// [0, y_max]^{d_y} with y_max = 2 (phi0(slater) - lb) / min_j(-phi_j(slater)).
BoxSet<double> build_dual_box(const Problem& problem, const Vec& slater_point);

struct ToyQPInstance {
  Problem problem;
  FeasibleSet set;
};

/// min x^2 s.t. 1 - x <= 0 on X = [-2, 2], Y = [0, 4]; saddle (1, 2), phi0* = 1.
ToyQPInstance make_toy_qp();

struct NonconvexSmokeInstance {
  Problem problem;
  FeasibleSet set;
};

/// phi0(x) = sum x_i^2 + 0.5 sin(3 x_i) on [0, 2]^10 with 15 - sum x_i <= 0.
NonconvexSmokeInstance make_nonconvex_smoke();

/// Closed-form constants for quadratic objectives with affine constraints.
TheoryConstants<double> compute_theory_constants(const Problem& problem, const FeasibleSet& set,
                                                 const RadiusSchedule<double>& radius);

/// One JSON object with a numeric array per field.
std::string serialize_instance(const LoadTrackingInstance& inst);
LoadTrackingInstance deserialize_instance(const std::string& text);
void save_instance(const LoadTrackingInstance& inst, const std::string& path);
LoadTrackingInstance load_instance(const std::string& path);

}  // namespace zosaddle
