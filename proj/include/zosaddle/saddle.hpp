#pragma once

// Black-box problems, the Lagrangian f(x, y) = phi0(x) + <y, phi(x)>, and
// query accounting.

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "zosaddle/core.hpp"

namespace zosaddle {

/// Closed-form data for phi0(x) = 1/2 x'Qx + q'x and phi(x) = A x + c.
/// Present only for benchmark problems; algorithms never read it.
template <typename Scalar>
struct QuadraticData {
  Matrix<Scalar> Q;
  Vector<Scalar> q;
  Matrix<Scalar> A;  // d_y x d_x
  Vector<Scalar> c;
};

template <typename Scalar>
struct KnownOptimum {
  Vector<Scalar> x;
  Vector<Scalar> y;
  Scalar objective;
};

template <typename Scalar>
struct BlackBoxProblem {
  using Point = Vector<Scalar>;

  std::string name;
  Index dim_x = 0;
  Index dim_y = 0;
  std::function<Scalar(const Point&)> objective;
  std::function<Point(const Point&)> constraints;

  // Reference/test only.
  std::function<Point(const Point&)> objective_gradient;
  std::function<Matrix<Scalar>(const Point&)> constraint_jacobian;

  std::optional<KnownOptimum<Scalar>> optimum;
  std::optional<QuadraticData<Scalar>> quadratic;
  /// Any valid lower bound of phi0 on X (used to size the dual box).
  std::optional<Scalar> objective_lower_bound;

  bool has_gradients() const { return static_cast<bool>(objective_gradient) && static_cast<bool>(constraint_jacobian); }
};

/// Raised when an oracle returns a non-finite value.
class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, std::vector<double> x) : std::runtime_error(what), x_(std::move(x)) {}
  const std::vector<double>& point() const { return x_; }

 private:
  std::vector<double> x_;
};

namespace detail {

template <typename Scalar>
[[noreturn]] void throw_oracle_error(const char* which, const Vector<Scalar>& x) {
  std::vector<double> copy(static_cast<std::size_t>(x.size()));
  std::ostringstream msg;
  msg << which << " oracle returned a non-finite value at x = [";
  for (Index i = 0; i < x.size(); ++i) {
    copy[static_cast<std::size_t>(i)] = static_cast<double>(x[i]);
    if (i < 6) msg << (i ? ", " : "") << static_cast<double>(x[i]);
  }
  msg << (x.size() > 6 ? ", ...]" : "]");
  throw OracleError(msg.str(), std::move(copy));
}

}  // namespace detail

enum class CountingPolicy {
  kPerLagrangianEval,   // one query per evaluation of f
  kPerComponentCached,  // d_y + 1 per fresh x, 0 when x repeats the last one
};

/// Counting wrapper around a problem. Owned by a single run.
template <typename Scalar>
class LagrangianOracle {
 public:
  using Point = Vector<Scalar>;

  explicit LagrangianOracle(const BlackBoxProblem<Scalar>& problem,
                            CountingPolicy policy = CountingPolicy::kPerLagrangianEval)
      : problem_(&problem), policy_(policy) {}

  const BlackBoxProblem<Scalar>& problem() const { return *problem_; }
  CountingPolicy policy() const { return policy_; }
  std::int64_t query_count() const { return queries_; }

  template <typename DX, typename DY>
  Scalar operator()(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
    if (x.size() != problem_->dim_x || y.size() != problem_->dim_y)
      throw std::invalid_argument("LagrangianOracle: dimension mismatch");
    if (policy_ == CountingPolicy::kPerLagrangianEval) {
      ++queries_;
      const Point xe = x;
      const Scalar obj = problem_->objective(xe);
      const Point cons = problem_->dim_y > 0 ? problem_->constraints(xe) : Point();
      check(obj, cons, xe);
      return obj + (problem_->dim_y > 0 ? y.dot(cons) : Scalar(0));
    }
    if (!cached_ || cached_x_.size() != x.size() || cached_x_ != x) {
      cached_x_ = x;
      cached_objective_ = problem_->objective(cached_x_);
      cached_constraints_ = problem_->dim_y > 0 ? problem_->constraints(cached_x_) : Point();
      check(cached_objective_, cached_constraints_, cached_x_);
      cached_ = true;
      queries_ += problem_->dim_y + 1;
    }
    return cached_objective_ + (problem_->dim_y > 0 ? y.dot(cached_constraints_) : Scalar(0));
  }

  Scalar operator()(const JointPoint<Scalar>& z) { return (*this)(z.x, z.y); }

 private:
  void check(Scalar obj, const Point& cons, const Point& x) const {
    if (!std::isfinite(static_cast<double>(obj))) detail::throw_oracle_error("objective", x);
    if (cons.size() != problem_->dim_y) throw std::invalid_argument("constraint oracle returned wrong length");
    if (!cons.allFinite()) detail::throw_oracle_error("constraint", x);
  }

  const BlackBoxProblem<Scalar>* problem_;
  CountingPolicy policy_;
  std::int64_t queries_ = 0;
  bool cached_ = false;
  Point cached_x_;
  Scalar cached_objective_{};
  Point cached_constraints_;
};

template <typename Scalar>
Scalar eval_lagrangian(LagrangianOracle<Scalar>& oracle, const JointPoint<Scalar>& z) {
  return oracle(z);
}

template <typename Scalar>
std::int64_t query_count(const LagrangianOracle<Scalar>& oracle) {
  return oracle.query_count();
}

/// F(z) = [grad_x f; -grad_y f] from exact gradients. Never touches the counter.
template <typename Scalar>
Vector<Scalar> eval_operator_exact(const BlackBoxProblem<Scalar>& problem, const JointPoint<Scalar>& z) {
  if (!problem.has_gradients()) throw std::invalid_argument("eval_operator_exact: exact gradients unavailable");
  if (z.dim_x() != problem.dim_x || z.dim_y() != problem.dim_y)
    throw std::invalid_argument("eval_operator_exact: dimension mismatch");
  Vector<Scalar> out(z.dim());
  Vector<Scalar> gx = problem.objective_gradient(z.x);
  if (problem.dim_y > 0) {
    const Matrix<Scalar> jac = problem.constraint_jacobian(z.x);
    gx.noalias() += jac.transpose() * z.y;
    out << gx, -problem.constraints(z.x);
  } else {
    out = gx;
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> eval_operator_exact(const LagrangianOracle<Scalar>& oracle, const JointPoint<Scalar>& z) {
  return eval_operator_exact(oracle.problem(), z);
}

/// Constants entering the convergence bounds.
template <typename Scalar>
struct TheoryConstants {
  Scalar lipschitz;   // G
  Scalar smoothness;  // L
  Scalar diameter;    // D~
  Scalar m1;          // sum r_k
  Scalar m2;          // sum r_k^2
  Scalar m3;          // (sqrt(d_x) + sqrt(d_y)) * m1
};

}  // namespace zosaddle
