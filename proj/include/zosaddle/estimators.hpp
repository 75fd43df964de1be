#pragma once

// Zeroth-order gradient estimators: forward-difference coordinate estimates
// and the two-point unit-sphere estimate, plus their operator forms for
// f(x, y).

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "zosaddle/core.hpp"
#include "zosaddle/saddle.hpp"

namespace zosaddle {

template <typename Scalar>
struct EstimateReport {
  Vector<Scalar> estimate;
  Scalar radius{};
  std::int64_t queries = 0;
  Vector<Scalar> direction;  // two-point estimators
  IndexSet indices;          // coordinate estimators
};

namespace detail {

template <typename Scalar>
void require_radius(Scalar r) {
  if (!(r > Scalar(0)) || !std::isfinite(static_cast<double>(r)))
    throw std::invalid_argument("smoothing radius must be positive and finite");
}

template <typename Scalar>
void require_unit(const Vector<Scalar>& v) {
  using std::abs;
  if (abs(v.norm() - Scalar(1)) > Scalar(1e-9)) throw std::invalid_argument("perturbation must have unit norm");
}

}  // namespace detail

/// (h(z + r e_i) - h(z)) / r.
template <typename Func, typename Scalar>
Scalar coord_partial(Func&& h, const Vector<Scalar>& z, Index i, Scalar r) {
  detail::require_radius(r);
  if (i < 0 || i >= z.size()) throw std::invalid_argument("coord_partial: index out of range");
  Vector<Scalar> shifted = z;
  shifted[i] += r;
  return (h(shifted) - h(z)) / r;
}

/// All coordinates with one shared base evaluation: d + 1 queries.
template <typename Func, typename Scalar>
EstimateReport<Scalar> coord_full(Func&& h, const Vector<Scalar>& z, Scalar r) {
  detail::require_radius(r);
  EstimateReport<Scalar> out;
  out.radius = r;
  out.estimate.resize(z.size());
  out.indices.resize(static_cast<std::size_t>(z.size()));
  const Scalar base = h(z);
  Vector<Scalar> shifted = z;
  for (Index i = 0; i < z.size(); ++i) {
    shifted[i] = z[i] + r;
    out.estimate[i] = (h(shifted) - base) / r;
    shifted[i] = z[i];
    out.indices[static_cast<std::size_t>(i)] = i;
  }
  out.queries = z.size() + 1;
  return out;
}

/// (h(z + r v) - h(z)) / (r / d) * v.
template <typename Func, typename Scalar>
Vector<Scalar> unige(Func&& h, const Vector<Scalar>& z, Scalar r, const Vector<Scalar>& v) {
  detail::require_radius(r);
  if (v.size() != z.size()) throw std::invalid_argument("unige: direction length mismatch");
  detail::require_unit(v);
  const Vector<Scalar> shifted = z + r * v;
  const Scalar scale = (h(shifted) - h(z)) * static_cast<Scalar>(z.size()) / r;
  return scale * v;
}

/// Two-point estimate of F(z) with the dual block of v sign-flipped.
template <typename Scalar>
Vector<Scalar> unige_operator(LagrangianOracle<Scalar>& oracle, const JointPoint<Scalar>& z, Scalar r,
                              const Vector<Scalar>& v) {
  detail::require_radius(r);
  if (v.size() != z.dim() || z.dim_x() != oracle.problem().dim_x || z.dim_y() != oracle.problem().dim_y)
    throw std::invalid_argument("unige_operator: dimension mismatch");
  detail::require_unit(v);
  const Index dx = z.dim_x();
  const Index dy = z.dim_y();
  const Scalar base = oracle(z.x, z.y);
  const Scalar moved = oracle(z.x + r * v.head(dx), z.y + r * v.tail(dy));
  const Scalar scale = (moved - base) * static_cast<Scalar>(z.dim()) / r;
  Vector<Scalar> g(z.dim());
  g << scale * v.head(dx), -scale * v.tail(dy);
  return g;
}

/// Forward-difference partials of f on the selected coordinates. Entries
/// outside the index sets are zero.
template <typename Scalar>
struct BlockEstimate {
  Vector<Scalar> grad_x;
  Vector<Scalar> grad_y;
  IndexSet idx_x;
  IndexSet idx_y;
  std::int64_t queries = 0;
};

template <typename Scalar>
BlockEstimate<Scalar> block_coord(LagrangianOracle<Scalar>& oracle, const JointPoint<Scalar>& z,
                                  const IndexSet& idx_x, const IndexSet& idx_y, Scalar r) {
  detail::require_radius(r);
  const Index dx = z.dim_x();
  const Index dy = z.dim_y();
  if (dx != oracle.problem().dim_x || dy != oracle.problem().dim_y)
    throw std::invalid_argument("block_coord: dimension mismatch");
  if (idx_x.empty() && dx > 0) throw std::invalid_argument("block_coord: primal block must be non-empty");
  if (idx_y.empty() && dy > 0) throw std::invalid_argument("block_coord: dual block must be non-empty");
  for (Index i : idx_x)
    if (i < 0 || i >= dx) throw std::invalid_argument("block_coord: primal index out of range");
  for (Index j : idx_y)
    if (j < 0 || j >= dy) throw std::invalid_argument("block_coord: dual index out of range");

  BlockEstimate<Scalar> out;
  out.grad_x = Vector<Scalar>::Zero(dx);
  out.grad_y = Vector<Scalar>::Zero(dy);
  out.idx_x = idx_x;
  out.idx_y = idx_y;

  const std::int64_t before = oracle.query_count();
  const Scalar base = oracle(z.x, z.y);
  // Dual perturbations first: they keep x fixed, so a caching oracle reuses
  // phi(x) from the base evaluation.
  Vector<Scalar> y = z.y;
  for (Index j : idx_y) {
    y[j] = z.y[j] + r;
    out.grad_y[j] = (oracle(z.x, y) - base) / r;
    y[j] = z.y[j];
  }
  Vector<Scalar> x = z.x;
  for (Index i : idx_x) {
    x[i] = z.x[i] + r;
    out.grad_x[i] = (oracle(x, z.y) - base) / r;
    x[i] = z.x[i];
  }
  out.queries = oracle.query_count() - before;
  return out;
}

}  // namespace zosaddle
