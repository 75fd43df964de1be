#pragma once

// Solution-quality measures, evals-to-target extraction and multi-seed
// aggregation. Diagnostic evaluations go to their own counter and never touch
// an algorithm's LagrangianOracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "zosaddle/run_record.hpp"
#include "zosaddle/saddle.hpp"

namespace zosaddle {

struct DiagnosticCounter {
  std::int64_t queries = 0;
};

namespace detail {

template <typename Scalar>
Scalar diagnostic_lagrangian(const BlackBoxProblem<Scalar>& problem, const Vector<Scalar>& x,
                             const Vector<Scalar>& y, DiagnosticCounter* counter) {
  if (counter) ++counter->queries;
  Scalar value = problem.objective(x);
  if (problem.dim_y > 0) value += y.dot(problem.constraints(x));
  return value;
}

}  // namespace detail

/// f(x, y*) - f(x*, y); absent when the saddle point is unknown.
template <typename Scalar>
std::optional<Scalar> duality_gap(const JointPoint<Scalar>& z, const BlackBoxProblem<Scalar>& problem,
                                  DiagnosticCounter* counter = nullptr) {
  if (!problem.optimum) return std::nullopt;
  const auto& opt = *problem.optimum;
  return detail::diagnostic_lagrangian(problem, z.x, opt.y, counter) -
         detail::diagnostic_lagrangian(problem, opt.x, z.y, counter);
}

/// ||max(phi(x), 0)||_2.
template <typename Scalar>
Scalar constraint_violation(const Vector<Scalar>& x, const BlackBoxProblem<Scalar>& problem,
                            DiagnosticCounter* counter = nullptr) {
  if (problem.dim_y == 0) return Scalar(0);
  if (counter) ++counter->queries;
  return problem.constraints(x).cwiseMax(Scalar(0)).norm();
}

template <typename Scalar>
ErrorKind error_kind(const BlackBoxProblem<Scalar>& problem) {
  if (!problem.optimum) return ErrorKind::kNone;
  return problem.optimum->objective != Scalar(0) ? ErrorKind::kRelative : ErrorKind::kAbsolute;
}

/// |phi0(x) - phi0*| scaled by |phi0*| when that is nonzero.
template <typename Scalar>
std::optional<Scalar> objective_error(const Vector<Scalar>& x, const BlackBoxProblem<Scalar>& problem,
                                      DiagnosticCounter* counter = nullptr) {
  if (!problem.optimum) return std::nullopt;
  if (counter) ++counter->queries;
  using std::abs;
  const Scalar star = problem.optimum->objective;
  const Scalar diff = abs(problem.objective(x) - star);
  return star != Scalar(0) ? diff / abs(star) : diff;
}

enum class MetricKind { kError, kViolation, kGap };

inline std::optional<double> metric_value(const MetricRow& row, MetricKind kind) {
  switch (kind) {
    case MetricKind::kError:
      return row.error;
    case MetricKind::kViolation:
      return row.violation;
    case MetricKind::kGap:
      return row.gap;
  }
  return std::nullopt;
}

/// Cumulative queries at the first row whose metric is <= each threshold.
inline std::vector<std::optional<std::int64_t>> queries_to_target(std::span<const MetricRow> rows,
                                                                  std::span<const double> thresholds,
                                                                  MetricKind kind) {
  std::vector<std::optional<std::int64_t>> out(thresholds.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (const auto& row : rows) {
      const auto value = metric_value(row, kind);
      if (value && *value <= thresholds[t]) {
        out[t] = row.queries;
        break;
      }
    }
  }
  return out;
}

template <typename Scalar>
std::vector<std::optional<std::int64_t>> queries_to_target(const RunRecord<Scalar>& record,
                                                           std::span<const double> thresholds, MetricKind kind) {
  return queries_to_target(std::span<const MetricRow>(record.rows), thresholds, kind);
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // unbiased; 0 with fewer than two samples
  std::size_t count = 0;
};

/// Mean/std of the samples that are present.
inline MeanStd mean_std(std::span<const std::optional<double>> samples) {
  MeanStd out;
  double sum = 0.0;
  for (const auto& s : samples) {
    if (s) {
      sum += *s;
      ++out.count;
    }
  }
  if (out.count == 0) return out;
  out.mean = sum / static_cast<double>(out.count);
  if (out.count > 1) {
    double ss = 0.0;
    for (const auto& s : samples)
      if (s) ss += (*s - out.mean) * (*s - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(out.count - 1));
  }
  return out;
}

struct TargetSet {
  MetricKind kind = MetricKind::kError;
  std::vector<double> thresholds;
};

struct TargetSummary {
  MetricKind kind = MetricKind::kError;
  double threshold = 0.0;
  std::optional<double> mean_queries;  // over runs that reached it
  std::size_t reached = 0;
  std::size_t runs = 0;
  double reach_rate() const { return runs ? static_cast<double>(reached) / static_cast<double>(runs) : 0.0; }
};

struct IterationSummary {
  Index iteration = 0;
  MeanStd queries;
  MeanStd error;
  MeanStd violation;
  MeanStd gap;
};

struct AggregateSummary {
  std::string config_key;
  std::size_t runs = 0;
  std::vector<IterationSummary> iterations;
  std::vector<TargetSummary> targets;
};

template <typename Scalar>
AggregateSummary aggregate(std::span<const RunRecord<Scalar>> records, std::span<const TargetSet> targets) {
  if (records.size() < 2) throw std::invalid_argument("aggregate: need at least two records");
  AggregateSummary out;
  out.config_key = records.front().config_key;
  out.runs = records.size();
  std::size_t length = 0;
  for (const auto& r : records) {
    if (r.config_key != out.config_key) throw std::invalid_argument("aggregate: records come from different configs");
    length = std::max(length, r.rows.size());
  }

  // Runs halted by the divergence guard contribute only the rows they have.
  std::vector<std::optional<double>> buf(records.size());
  auto column = [&](std::size_t i, auto&& get) {
    for (std::size_t r = 0; r < records.size(); ++r) {
      buf[r] = i < records[r].rows.size() ? get(records[r].rows[i]) : std::nullopt;
    }
    return mean_std(buf);
  };
  out.iterations.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    IterationSummary s;
    for (const auto& r : records)
      if (i < r.rows.size()) s.iteration = r.rows[i].iteration;
    s.queries = column(i, [](const MetricRow& m) { return std::optional<double>(static_cast<double>(m.queries)); });
    s.error = column(i, [](const MetricRow& m) { return m.error; });
    s.violation = column(i, [](const MetricRow& m) { return std::optional<double>(m.violation); });
    s.gap = column(i, [](const MetricRow& m) { return m.gap; });
    out.iterations.push_back(s);
  }

  for (const auto& set : targets) {
    std::vector<std::vector<std::optional<std::int64_t>>> hits;
    hits.reserve(records.size());
    for (const auto& r : records) hits.push_back(queries_to_target(r, set.thresholds, set.kind));
    for (std::size_t t = 0; t < set.thresholds.size(); ++t) {
      TargetSummary ts;
      ts.kind = set.kind;
      ts.threshold = set.thresholds[t];
      ts.runs = records.size();
      double sum = 0.0;
      for (const auto& h : hits) {
        if (h[t]) {
          sum += static_cast<double>(*h[t]);
          ++ts.reached;
        }
      }
      if (ts.reached) ts.mean_queries = sum / static_cast<double>(ts.reached);
      out.targets.push_back(ts);
    }
  }
  return out;
}

template <typename Scalar>
AggregateSummary aggregate(const std::vector<RunRecord<Scalar>>& records, std::span<const TargetSet> targets) {
  return aggregate(std::span<const RunRecord<Scalar>>(records), targets);
}

}  // namespace zosaddle
