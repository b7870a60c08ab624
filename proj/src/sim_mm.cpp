#include "qlim/sim_mm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "qlim/errors.hpp"
#include "qlim/steady.hpp"

namespace qlim {

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be > 0");
  if (const auto* x0 = std::get_if<std::int64_t>(&init); x0 && *x0 < 0) {
    throw ConfigError("initial state must be >= 0");
  }
  if (stop_time && (!(*stop_time >= 0.0) || *stop_time > horizon)) {
    throw ConfigError("stop_time must lie in [0, horizon]");
  }
}

namespace {

std::size_t pick(Stream& rng, std::size_t size) {
  const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(size));
  return std::min(i, size - 1);
}

}  // namespace

PathBundle simulate(const ModelParams& p, const SimConfig& cfg) {
  p.validate();
  cfg.validate();

  std::int64_t x0 = 0;
  if (const auto* v = std::get_if<std::int64_t>(&cfg.init)) {
    x0 = *v;
  } else {
    Stream init(cfg.seed, cfg.replication, purpose_tag(Purpose::init, static_cast<std::uint64_t>(p.n)));
    x0 = stationary_dist(p).sample(init);
  }

  PathBundle b;
  b.params = p;
  b.horizon = cfg.horizon;
  b.seed = cfg.seed;
  b.replication = cfg.replication;
  b.stop_time = cfg.stop_time;

  std::vector<std::uint64_t> busy;
  std::deque<std::uint64_t> queue;
  std::uint64_t next_id = 1;
  for (std::int64_t i = 0; i < x0; ++i) {
    if (static_cast<std::int64_t>(busy.size()) < p.n) busy.push_back(next_id++);
    else queue.push_back(next_id++);
  }

  std::int64_t A = 0, D = 0, L = 0, X = x0;
  auto record = [&](double t, EventKind k, std::uint64_t id) {
    b.times.push_back(t);
    b.A.push_back(A);
    b.D.push_back(D);
    b.L.push_back(L);
    b.X.push_back(X);
    b.kinds.push_back(k);
    b.customers.push_back(id);
  };
  record(0.0, EventKind::initial, 0);

  Stream rng(cfg.seed, cfg.replication, purpose_tag(Purpose::events, static_cast<std::uint64_t>(p.n)));
  double t = 0.0;
  for (;;) {
    const bool stopped = cfg.stop_time && t >= *cfg.stop_time;
    const double birth = stopped ? 0.0 : p.lambda;
    const double service = static_cast<double>(busy.size()) * p.mu;
    const double abandon = static_cast<double>(queue.size()) * p.theta;
    const double total = birth + service + abandon;
    if (total <= 0.0) break;

    const double next = t + rng.exponential(total);
    if (!stopped && cfg.stop_time && next >= *cfg.stop_time) {
      // Arrivals switch off at tau; the clocks are memoryless, so restart there.
      t = *cfg.stop_time;
      continue;
    }
    if (next > cfg.horizon) break;
    t = next;

    double u = rng.uniform() * total;
    if (u < birth) {
      const auto id = next_id++;
      ++A;
      ++X;
      if (static_cast<std::int64_t>(busy.size()) < p.n) busy.push_back(id);
      else queue.push_back(id);
      record(t, EventKind::arrival, id);
      continue;
    }
    u -= birth;
    if (u < service || queue.empty()) {
      const auto i = pick(rng, busy.size());
      const auto id = busy[i];
      busy[i] = busy.back();
      busy.pop_back();
      if (!queue.empty()) {
        busy.push_back(queue.front());
        queue.pop_front();
      }
      ++D;
      --X;
      record(t, EventKind::service, id);
    } else {
      const auto i = pick(rng, queue.size());
      const auto id = queue[i];
      queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(i));
      ++L;
      --X;
      record(t, EventKind::abandonment, id);
    }
  }
  require_flow_balance(b);
  return b;
}

double sample_virtual_wait(const ModelParams& p, std::int64_t x_now, Stream& rng) {
  if (x_now < 0) throw DomainError("sample_virtual_wait: negative state");
  const auto q = x_now - p.n;
  const double base = static_cast<double>(p.n) * p.mu;
  double v = 0.0;
  for (std::int64_t i = 1; i <= q; ++i) {
    v += rng.exponential(base + static_cast<double>(i) * p.theta);
  }
  return v;
}

double sample_virtual_wait_drain(const ModelParams& p, std::int64_t x_now, Stream& rng) {
  if (x_now < 0) throw DomainError("sample_virtual_wait_drain: negative state");
  double t = 0.0;
  for (auto k = x_now; k > p.n; --k) t += rng.exponential(p.death_rate(k));
  return t;
}

namespace {

// First row index >= from whose value reaches level, or rows() if none.
template <class F>
std::size_t first_reaching(const PathBundle& b, std::size_t from, std::int64_t level, F value) {
  std::size_t lo = from;
  std::size_t hi = b.rows();
  while (lo < hi) {
    const auto mid = lo + (hi - lo) / 2;
    if (value(mid) >= level) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

}  // namespace

WaitBounds vwait_bounds(const PathBundle& b, double t) {
  const auto r = b.row_at(t);
  const auto n1 = b.params.n - 1;
  const auto level_l = b.X[r] + b.D[r] + b.L[r] - n1;
  const auto level_u = b.X[r] + b.D[r] - n1;

  WaitBounds out;
  const auto il = first_reaching(b, r, level_l,
                                 [&](std::size_t i) { return b.D[i] + b.L[i]; });
  const auto iu = first_reaching(b, r, level_u, [&](std::size_t i) { return b.D[i]; });
  if (il == b.rows()) {
    out.lower = b.horizon - t;
    out.lower_truncated = true;
  } else {
    out.lower = il == r ? 0.0 : b.times[il] - t;
  }
  if (iu == b.rows()) {
    out.upper = b.horizon - t;
    out.upper_truncated = true;
  } else {
    out.upper = iu == r ? 0.0 : b.times[iu] - t;
  }
  return out;
}

std::vector<CustomerWait> per_customer_waits(const PathBundle& b) {
  Stream rng(b.seed, b.replication, purpose_tag(Purpose::vwait, 1));
  std::vector<CustomerWait> out;
  for (std::size_t i = 1; i < b.rows(); ++i) {
    if (b.kinds[i] != EventKind::arrival) continue;
    const auto before = b.X[i - 1];
    out.push_back({b.times[i], std::max<std::int64_t>(before - b.params.n, 0),
                   sample_virtual_wait(b.params, before, rng)});
  }
  return out;
}

}  // namespace qlim
