#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlim/model.hpp"

namespace qlim {

// Right-continuous step function on [0, horizon] with finitely many jumps.
// Value on [b_i, b_{i+1}) is values[i]; the last value holds up to horizon.
class StepPath {
 public:
  StepPath(std::vector<double> breakpoints, std::vector<double> values,
           double horizon);

  static StepPath constant(double value, double horizon);

  double eval(double t) const;
  // x(t-) for t in (0, horizon]; equals x(0) at t = 0.
  double left_limit(double t) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return values_.size(); }

  StepPath scaled(double c) const;

  bool operator==(const StepPath&) const = default;

 private:
  std::size_t index_at(double t) const;

  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double horizon_;
};

// Continuous piecewise-linear path through strictly increasing knots.
class LinearPath {
 public:
  LinearPath(std::vector<double> knots, std::vector<double> values);

  double eval(double t) const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  double horizon() const { return knots_.back(); }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

// sup over [0, T] of |x - y|. Exact for step functions: evaluated at the
// breakpoints of both arguments.
double sup_norm(const StepPath& x, const StepPath& y);

// Exact sup over [0, horizon] of |x - y| for a linear path against a step
// path, using both one-sided limits at every breakpoint.
double sup_norm(const LinearPath& x, const StepPath& y);

// Largest |x(t) - x(t-)| over breakpoints t <= T.
double max_jump(const StepPath& x, double T);

enum class EventKind : std::uint8_t { initial, arrival, service, abandonment };
enum class Component { A, D, L, X };

// Coupled counting paths of one simulation replication. Row 0 is the state at
// time 0; every later row is the state right after one event.
struct PathBundle {
  std::vector<double> times;
  std::vector<std::int64_t> A, D, L, X;
  std::vector<EventKind> kinds;
  std::vector<std::uint64_t> customers;

  ModelParams params;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::optional<double> stop_time;

  std::size_t rows() const { return times.size(); }
  // Index of the last row with time <= t.
  std::size_t row_at(double t) const;
  std::int64_t value_at(Component c, double t) const;
  const std::vector<std::int64_t>& column(Component c) const;
  StepPath path(Component c) const;
};

struct FlowBalanceReport {
  std::int64_t max_violation = 0;
  std::size_t worst_row = 0;
  double worst_time = 0.0;
};

// Max over rows of |X - (X(0) + A - D - L)|.
FlowBalanceReport check_flow_balance(const PathBundle& b);
// Throws SimulatorBugError when check_flow_balance reports a violation.
void require_flow_balance(const PathBundle& b);

// CSV with header `t,A,D,L,X`, one row per event time, values post-event.
void write_bundle_csv(std::ostream& out, const PathBundle& b);
nlohmann::json bundle_sidecar(const PathBundle& b);
PathBundle read_bundle(std::istream& csv, const nlohmann::json& sidecar);

// Shortest round-trip decimal form used by every CSV writer.
std::string format_double(double v);

}  // namespace qlim
