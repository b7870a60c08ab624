#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qlim/model.hpp"
#include "qlim/paths.hpp"
#include "qlim/rng.hpp"

namespace qlim {

struct Stationary {};

struct SimConfig {
  double horizon = 1.0;
  std::variant<std::int64_t, Stationary> init = std::int64_t{0};
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::optional<double> stop_time;

  void validate() const;
};

// Exact CTMC path of the M/M/n+M queue. Events are drawn from the aggregate
// clocks; abandonments remove a uniformly chosen waiting customer. The
// `customers` column of the bundle holds the id of the customer involved.
// With equal seeds a stopped run and the unstopped run agree on [0, tau).
PathBundle simulate(const ModelParams& p, const SimConfig& cfg);

// Time for the queue (x_now - n)+ to clear with arrivals off:
// sum_{i=1}^{Q} E_i, E_i ~ Exp(n mu + i theta). Zero when x_now <= n.
double sample_virtual_wait(const ModelParams& p, std::int64_t x_now, Stream& rng);
// Same law, obtained by stepping the arrival-free chain event by event.
double sample_virtual_wait_drain(const ModelParams& p, std::int64_t x_now,
                                 Stream& rng);

struct WaitBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_truncated = false;
  bool upper_truncated = false;
};

// lower: first s with D(t+s) + L(t+s) >= X(t) + D(t) + L(t) - (n - 1).
// upper: first s with D(t+s) >= X(t) + D(t) - (n - 1).
// A passage that does not happen by the horizon is reported as
// horizon - t with the truncation flag set.
WaitBounds vwait_bounds(const PathBundle& b, double t);

struct CustomerWait {
  double arrival_time = 0.0;
  std::int64_t queue_ahead = 0;
  double potential_wait = 0.0;
};

// One record per arrival, with a virtual-wait draw from the state the
// arrival found.
std::vector<CustomerWait> per_customer_waits(const PathBundle& b);

}  // namespace qlim
