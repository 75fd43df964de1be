#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zosaddle/core.hpp"

namespace zosaddle {

/// How the error column of a MetricRow is defined.
enum class ErrorKind {
  kNone,      // no reference optimum
  kRelative,  // |phi0(x) - phi0*| / |phi0*|
  kAbsolute,  // |phi0(x) - phi0*|, used when phi0* == 0
};

struct MetricRow {
  Index iteration = 0;
  std::int64_t queries = 0;  // cumulative at the end of the iteration
  std::optional<double> error;
  double violation = 0.0;  // ||[phi(x)]_+||
  std::optional<double> gap;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

template <typename Scalar>
struct RunRecord {
  /// Everything about the config except the seed; aggregation requires equality.
  std::string config_key;
  std::uint64_t seed = 0;
  ErrorKind error_kind = ErrorKind::kNone;
  std::vector<MetricRow> rows;  // metrics at z_k^+
  JointPoint<Scalar> initial;
  JointPoint<Scalar> averaged;  // running mean of z_k^+
  JointPoint<Scalar> last;      // z_K
  Index iterations_completed = 0;
  std::int64_t queries = 0;
  std::int64_t diagnostic_queries = 0;
  bool diverged = false;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

}  // namespace zosaddle
