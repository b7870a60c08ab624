#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlim/exec.hpp"
#include "qlim/fluid.hpp"
#include "qlim/model.hpp"
#include "qlim/paths.hpp"
#include "qlim/stats.hpp"

namespace qlim {

std::string git_describe();

// Sequence of systems indexed by n.
//   QED: lambda_n = n mu (1 - beta / sqrt(n)), warm start X(0) = n.
//   ED:  lambda_n = n lambda,                 warm start X(0) = round(n (q + 1)).
struct RegimeSeq {
  enum class Kind { qed, ed };
  Kind kind = Kind::ed;
  double beta = 0.0;    // QED only
  double lambda = 2.0;  // ED only, per server
  double mu = 1.0;
  double theta = 1.0;
  std::vector<std::int64_t> n_list;

  void validate() const;
  ModelParams params(std::int64_t n) const;
  std::int64_t warm_start(std::int64_t n) const;
  // Fluid virtual wait: 0 (QED) or w (ED).
  double fluid_wait() const;
  nlohmann::json to_json() const;
};

struct Tolerances {
  double se_mult = 3.0;         // moment gaps
  double ks_slack = 0.02;       // KS monotonicity in n
  double ks_max = 0.08;         // KS at the largest n (transient waits)
  double steady_ks_max = 0.03;
  double steady_mean = 0.03;
  double steady_var = 0.08;
  double slope_lo = -0.65;
  double slope_hi = -0.35;
  double bound_se_mult = 2.0;
  double identity_dt_mult = 5.0;
  double mesh_floor_mult = 10.0;
  double exact_tol = 1e-12;

  nlohmann::json to_json() const;
};

struct Verdict {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<=", ">=", "in", "=="
  bool pass = false;

  nlohmann::json to_json() const;
};

Verdict verdict_le(std::string name, double value, double tol);
Verdict verdict_ge(std::string name, double value, double tol);
Verdict verdict_flag(std::string name, bool ok);

// Fluid reference for scaling: per-server components as functions of time.
struct FluidRef {
  std::function<FluidPoint(double)> at;
  double horizon = 0.0;
};

struct ScaledPaths {
  StepPath A, D, L, X;
};

// sqrt(n) (Y / n - ybar(t)) for each component, sampled at the event times.
ScaledPaths scale_paths(const PathBundle& b, const FluidRef& ref);

// sqrt(n) (v - vbar).
inline double scale_wait(double v, std::int64_t n, double vbar) {
  return std::sqrt(static_cast<double>(n)) * (v - vbar);
}

// sup_{t <= horizon} |Y(t) / n - fbar(t)| for a continuous fbar that is
// monotone between consecutive event times; exact at both ends of every
// constant piece of the step path.
double fluid_sup_error(const PathBundle& b, Component c,
                       const std::function<double(double)>& fbar);

struct ScalingPlan {
  std::vector<double> checkpoints;
  std::size_t reps = 1000;
  std::size_t ref_reps = 1000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  Tolerances tol;
  Exec exec = Exec::parallel;

  nlohmann::json to_json() const;
};

struct CheckpointStats {
  double t = 0.0;
  Moments sample;
  Moments reference;
  KsResult ks;
  double gap = 0.0;
  double gap_tol = 0.0;
  bool verdict = false;
};

struct PerN {
  std::int64_t n = 0;
  std::vector<CheckpointStats> checkpoints;
};

struct ScalingReport {
  nlohmann::json config;
  std::vector<PerN> per_n;
  std::vector<Verdict> verdicts;
  nlohmann::json details = nlohmann::json::object();
  std::optional<double> runtime_s;

  bool pass() const;
  nlohmann::json to_json() const;
};

// Scaled virtual waits sqrt(n) (V_n(t) - vbar) at every checkpoint, one
// simulated replication per sample, state-conditional exact draws. Row-major
// [rep][checkpoint].
std::vector<double> scaled_wait_samples(const RegimeSeq& seq, std::int64_t n,
                                        const ScalingPlan& plan);

// Limit-law samples at every checkpoint: X(t)+ / mu (QED) or X^t(t + w) / mu
// (ED) from the limit diffusions. Row-major [rep][checkpoint].
std::vector<double> limit_wait_samples(const RegimeSeq& seq, const ScalingPlan& plan);

// Waiting-time scaling experiment: per n and checkpoint, moments and KS
// distance of the scaled waits against the limit samples; verdicts on KS
// monotonicity in n, KS and moment gap at the largest n.
ScalingReport run_experiment(const RegimeSeq& seq, const ScalingPlan& plan);

}  // namespace qlim
