#pragma once

// Vectors, box sets, projections, schedules and deterministic sampling.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zosaddle {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Primal/dual iterate z = (x, y).
template <typename Scalar>
struct JointPoint {
  Vector<Scalar> x;
  Vector<Scalar> y;

  JointPoint() = default;
  JointPoint(Vector<Scalar> primal, Vector<Scalar> dual) : x(std::move(primal)), y(std::move(dual)) {}

  Index dim_x() const { return x.size(); }
  Index dim_y() const { return y.size(); }
  Index dim() const { return x.size() + y.size(); }

  bool all_finite() const { return x.allFinite() && y.allFinite(); }

  /// Concatenation (x; y).
  Vector<Scalar> stacked() const {
    Vector<Scalar> z(dim());
    z << x, y;
    return z;
  }

  template <typename Derived>
  static JointPoint from_stacked(const Eigen::MatrixBase<Derived>& z, Index dim_x) {
    if (dim_x < 0 || dim_x > z.size()) throw std::invalid_argument("from_stacked: bad primal dimension");
    return JointPoint(z.head(dim_x), z.tail(z.size() - dim_x));
  }

  friend bool operator==(const JointPoint& a, const JointPoint& b) {
    return a.x.size() == b.x.size() && a.y.size() == b.y.size() && a.x == b.x && a.y == b.y;
  }
};

template <typename Scalar>
class BoxSet {
 public:
  BoxSet() = default;
  BoxSet(Vector<Scalar> lower, Vector<Scalar> upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw std::invalid_argument("BoxSet: bound lengths differ");
    if (!lower_.allFinite() || !upper_.allFinite()) throw std::invalid_argument("BoxSet: bounds must be finite");
    if ((lower_.array() > upper_.array()).any()) throw std::invalid_argument("BoxSet: lower > upper");
  }

  static BoxSet uniform(Index n, Scalar lo, Scalar hi) {
    return BoxSet(Vector<Scalar>::Constant(n, lo), Vector<Scalar>::Constant(n, hi));
  }

  Index size() const { return lower_.size(); }
  const Vector<Scalar>& lower() const { return lower_; }
  const Vector<Scalar>& upper() const { return upper_; }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& p, Scalar tol = Scalar(0)) const {
    return p.size() == size() && (p.array() >= lower_.array() - tol).all() &&
           (p.array() <= upper_.array() + tol).all();
  }

  /// Length of the box diagonal.
  Scalar diameter() const { return (upper_ - lower_).norm(); }

 private:
  Vector<Scalar> lower_;
  Vector<Scalar> upper_;
};

/// Componentwise clamp onto the box.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> project_box(const Eigen::MatrixBase<Derived>& point, const BoxSet<Scalar>& set) {
  if (point.size() != set.size()) throw std::invalid_argument("project_box: dimension mismatch");
  if (point.hasNaN()) throw std::invalid_argument("project_box: NaN in input");
  return point.cwiseMax(set.lower()).cwiseMin(set.upper());
}

/// Z = X x Y, with Y a box anchored at zero.
template <typename Scalar>
class ProductFeasibleSet {
 public:
  ProductFeasibleSet() = default;
  ProductFeasibleSet(BoxSet<Scalar> primal, BoxSet<Scalar> dual)
      : primal_(std::move(primal)), dual_(std::move(dual)) {
    if (!(dual_.lower().array() == Scalar(0)).all())
      throw std::invalid_argument("ProductFeasibleSet: dual lower bound must be zero");
  }

  const BoxSet<Scalar>& primal() const { return primal_; }
  const BoxSet<Scalar>& dual() const { return dual_; }
  Index dim_x() const { return primal_.size(); }
  Index dim_y() const { return dual_.size(); }

  Scalar diameter() const { return std::hypot(primal_.diameter(), dual_.diameter()); }

  bool contains(const JointPoint<Scalar>& z, Scalar tol = Scalar(0)) const {
    return primal_.contains(z.x, tol) && dual_.contains(z.y, tol);
  }

 private:
  BoxSet<Scalar> primal_;
  BoxSet<Scalar> dual_;
};

template <typename Scalar>
JointPoint<Scalar> project_product(const JointPoint<Scalar>& z, const ProductFeasibleSet<Scalar>& set) {
  return JointPoint<Scalar>(project_box(z.x, set.primal()), project_box(z.y, set.dual()));
}

enum class StepKind { kConstant, kDiminishing };

/// eta0, or eta0 / sqrt(k + 1).
template <typename Scalar>
struct StepSchedule {
  StepKind kind = StepKind::kConstant;
  Scalar eta0 = Scalar(0.1);

  static StepSchedule constant(Scalar eta) { return validated({StepKind::kConstant, eta}); }
  static StepSchedule diminishing(Scalar eta) { return validated({StepKind::kDiminishing, eta}); }

  static StepSchedule validated(StepSchedule s) {
    if (!(s.eta0 > Scalar(0)) || !std::isfinite(static_cast<double>(s.eta0)))
      throw std::invalid_argument("StepSchedule: eta0 must be positive and finite");
    return s;
  }

  Scalar operator()(Index k) const {
    if (kind == StepKind::kConstant) return eta0;
    return eta0 / std::sqrt(static_cast<Scalar>(k + 1));
  }
};

namespace detail {

// Sum_{n >= a} c * n^{-q} by Euler-Maclaurin; a >= 1e6 makes the remainder negligible.
template <typename Scalar>
Scalar power_tail(Scalar c, Scalar q, Scalar a) {
  const Scalar one(1);
  const Scalar integral = c * std::pow(a, one - q) / (q - one);
  const Scalar half = c * std::pow(a, -q) / Scalar(2);
  const Scalar d1 = c * q * std::pow(a, -q - one) / Scalar(12);
  const Scalar d3 = c * q * (q + one) * (q + Scalar(2)) * std::pow(a, -q - Scalar(3)) / Scalar(720);
  return integral + half + d1 - d3;
}

}  // namespace detail

/// r_k = min{c / (k+1)^p, cap}.
template <typename Scalar>
struct RadiusSchedule {
  Scalar c = Scalar(5);
  Scalar p = Scalar(1.1);
  Scalar cap = Scalar(1e-3);

  static RadiusSchedule make(Scalar c, Scalar p, Scalar cap) {
    if (!(c > Scalar(0)) || !(p > Scalar(1)) || !(cap > Scalar(0)))
      throw std::invalid_argument("RadiusSchedule: need c > 0, p > 1, cap > 0");
    return {c, p, cap};
  }

  /// r_k == r for every k. Not summable; only for limit comparisons.
  static RadiusSchedule fixed(Scalar r) {
    if (!(r > Scalar(0))) throw std::invalid_argument("RadiusSchedule: radius must be positive");
    return {std::numeric_limits<Scalar>::infinity(), Scalar(2), r};
  }

  bool summable() const { return std::isfinite(static_cast<double>(c)); }

  Scalar operator()(Index k) const {
    return std::min(c / std::pow(static_cast<Scalar>(k + 1), p), cap);
  }

  /// Sum_{k < n} r_k.
  Scalar partial_sum(Index n) const {
    Scalar s(0);
    for (Index k = 0; k < n; ++k) s += (*this)(k);
    return s;
  }

  /// Sum_{k >= 0} r_k^power for power in {1, 2}.
  Scalar total_sum(int power = 1) const {
    if (!summable()) return std::numeric_limits<Scalar>::infinity();
    // First index at which the power law drops under the cap.
    const Scalar crossover = std::pow(c / cap, Scalar(1) / p);
    const Index explicit_terms =
        std::max<Index>(1000000, static_cast<Index>(std::ceil(static_cast<double>(crossover))) + 1);
    Scalar s(0);
    for (Index k = 0; k < explicit_terms; ++k) s += std::pow((*this)(k), power);
    const Scalar q = p * static_cast<Scalar>(power);
    const Scalar coeff = std::pow(c, static_cast<Scalar>(power));
    return s + detail::power_tail(coeff, q, static_cast<Scalar>(explicit_terms + 1));
  }
};

/// Deterministic draws from (seed, stream). Distributions are implemented here
/// on top of raw mt19937_64 output so sequences do not depend on the standard
/// library's distribution implementations.
class SeededSampler {
 public:
  SeededSampler(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    engine_.seed(mix(mix(seed) ^ (stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL)));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  /// Number of raw 64-bit words consumed so far.
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("SeededSampler::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t u = 0;
    do {
      u = next_u64();
    } while (u >= limit);
    return u % n;
  }

  /// Marsaglia polar method.
  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Uniform direction on S_{d-1} as a normalized Gaussian vector.
template <typename Scalar = double>
Vector<Scalar> sample_unit_sphere(Index d, SeededSampler& sampler) {
  if (d < 1) throw std::invalid_argument("sample_unit_sphere: dimension must be >= 1");
  Vector<Scalar> v(d);
  Scalar norm(0);
  do {
    for (Index i = 0; i < d; ++i) v[i] = static_cast<Scalar>(sampler.standard_normal());
    norm = v.norm();
  } while (!(norm > Scalar(0)));
  return v / norm;
}

/// tau distinct indices of [0, d), ascending. tau == d consumes no draws.
inline IndexSet sample_coordinate_subset(Index d, Index tau, SeededSampler& sampler) {
  if (tau < 1 || tau > d) throw std::invalid_argument("sample_coordinate_subset: need 1 <= tau <= d");
  IndexSet pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), Index{0});
  if (tau == d) return pool;
  // Partial Fisher-Yates.
  for (Index i = 0; i < tau; ++i) {
    const auto j = i + static_cast<Index>(sampler.below(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(tau));
  std::sort(pool.begin(), pool.end());
  return pool;
}

template <typename Scalar>
Vector<Scalar> sample_in_box(const BoxSet<Scalar>& box, SeededSampler& sampler) {
  Vector<Scalar> p(box.size());
  for (Index i = 0; i < box.size(); ++i) {
    p[i] = box.lower()[i] + (box.upper()[i] - box.lower()[i]) * static_cast<Scalar>(sampler.uniform01());
  }
  return p;
}

/// x0 uniform in X, y0 = 0. Drawn from stream 1 of the run seed so the
/// algorithm's own stream 0 is untouched.
template <typename Scalar>
JointPoint<Scalar> draw_initial_point(const ProductFeasibleSet<Scalar>& set, std::uint64_t seed) {
  SeededSampler sampler(seed, 1);
  return JointPoint<Scalar>(sample_in_box(set.primal(), sampler), Vector<Scalar>::Zero(set.dim_y()));
}

}  // namespace zosaddle
