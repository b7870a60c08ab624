#include "qlim/paths.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "qlim/errors.hpp"

namespace qlim {

void ModelParams::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (!(mu > 0.0) || !(theta > 0.0) || !std::isfinite(mu) || !std::isfinite(theta)) {
    throw ConfigError("mu and theta must be > 0");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

// ---------------------------------------------------------------- StepPath

StepPath::StepPath(std::vector<double> breakpoints, std::vector<double> values,
                   double horizon)
    : breakpoints_(std::move(breakpoints)),
      values_(std::move(values)),
      horizon_(horizon) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
    throw ShapeError("StepPath needs one value per breakpoint");
  }
  if (breakpoints_.front() != 0.0) {
    throw DomainError("StepPath first breakpoint must be 0");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw DomainError("StepPath breakpoints must be strictly increasing");
    }
  }
  if (breakpoints_.back() > horizon_) {
    throw DomainError("StepPath breakpoint beyond horizon");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("StepPath value not finite");
  }
}

StepPath StepPath::constant(double value, double horizon) {
  return StepPath({0.0}, {value}, horizon);
}

std::size_t StepPath::index_at(double t) const {
  if (!(t >= 0.0) || t > horizon_) {
    throw DomainError("StepPath eval at t=" + format_double(t) +
                      " outside [0, " + format_double(horizon_) + "]");
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double StepPath::eval(double t) const { return values_[index_at(t)]; }

double StepPath::left_limit(double t) const {
  const auto i = index_at(t);
  if (breakpoints_[i] == t && i > 0) return values_[i - 1];
  return values_[i];
}

StepPath StepPath::scaled(double c) const {
  auto v = values_;
  for (auto& x : v) x *= c;
  return StepPath(breakpoints_, std::move(v), horizon_);
}

// -------------------------------------------------------------- LinearPath

LinearPath::LinearPath(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.empty() || knots_.size() != values_.size()) {
    throw ShapeError("LinearPath needs one value per knot");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw DomainError("LinearPath knots must be strictly increasing");
    }
  }
}

double LinearPath::eval(double t) const {
  if (t < knots_.front() || t > knots_.back()) {
    throw DomainError("LinearPath eval outside knot range");
  }
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.end()) return values_.back();
  const auto j = static_cast<std::size_t>(it - knots_.begin());
  const auto i = j - 1;
  const double f = (t - knots_[i]) / (knots_[j] - knots_[i]);
  return values_[i] + f * (values_[j] - values_[i]);
}

// ------------------------------------------------------------------- norms

double sup_norm(const StepPath& x, const StepPath& y) {
  if (x.horizon() != y.horizon()) {
    throw ShapeError("sup_norm: horizons differ");
  }
  double best = 0.0;
  for (const auto* p : {&x, &y}) {
    for (double t : p->breakpoints()) {
      best = std::max(best, std::abs(x.eval(t) - y.eval(t)));
    }
  }
  return best;
}

double sup_norm(const LinearPath& x, const StepPath& y) {
  if (x.knots().front() != 0.0 || x.horizon() != y.horizon()) {
    throw ShapeError("sup_norm: domains differ");
  }
  std::vector<double> pts = x.knots();
  pts.insert(pts.end(), y.breakpoints().begin(), y.breakpoints().end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double best = 0.0;
  for (double t : pts) {
    const double xv = x.eval(t);
    best = std::max({best, std::abs(xv - y.eval(t)),
                     std::abs(xv - y.left_limit(t))});
  }
  return best;
}

double max_jump(const StepPath& x, double T) {
  if (T < 0.0 || T > x.horizon()) throw DomainError("max_jump: T outside domain");
  double best = 0.0;
  const auto& b = x.breakpoints();
  const auto& v = x.values();
  for (std::size_t i = 1; i < b.size() && b[i] <= T; ++i) {
    best = std::max(best, std::abs(v[i] - v[i - 1]));
  }
  return best;
}

// -------------------------------------------------------------- PathBundle

std::size_t PathBundle::row_at(double t) const {
  if (!(t >= 0.0) || t > horizon) {
    throw DomainError("PathBundle: t=" + format_double(t) + " outside [0, horizon]");
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

const std::vector<std::int64_t>& PathBundle::column(Component c) const {
  switch (c) {
    case Component::A: return A;
    case Component::D: return D;
    case Component::L: return L;
    case Component::X: return X;
  }
  throw std::logic_error("bad component");
}

std::int64_t PathBundle::value_at(Component c, double t) const {
  return column(c)[row_at(t)];
}

StepPath PathBundle::path(Component c) const {
  const auto& col = column(c);
  std::vector<double> b;
  std::vector<double> v;
  b.reserve(times.size());
  v.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto value = static_cast<double>(col[i]);
    if (!b.empty() && times[i] == b.back()) {
      v.back() = value;  // simultaneous events: keep the post-event value
    } else if (!v.empty() && value == v.back()) {
      continue;
    } else {
      b.push_back(times[i]);
      v.push_back(value);
    }
  }
  return StepPath(std::move(b), std::move(v), horizon);
}

FlowBalanceReport check_flow_balance(const PathBundle& b) {
  FlowBalanceReport r;
  if (b.rows() == 0) return r;
  const auto x0 = b.X[0];
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const auto v = b.X[i] - (x0 + b.A[i] - b.D[i] - b.L[i]);
    const auto a = v < 0 ? -v : v;
    if (a > r.max_violation) {
      r.max_violation = a;
      r.worst_row = i;
      r.worst_time = b.times[i];
    }
  }
  return r;
}

void require_flow_balance(const PathBundle& b) {
  const auto r = check_flow_balance(b);
  if (r.max_violation != 0) {
    throw SimulatorBugError("flow balance violated by " +
                            std::to_string(r.max_violation) + " at t=" +
                            format_double(r.worst_time));
  }
}

// --------------------------------------------------------------------- I/O

void write_bundle_csv(std::ostream& out, const PathBundle& b) {
  out << "t,A,D,L,X\n";
  for (std::size_t i = 0; i < b.rows(); ++i) {
    out << format_double(b.times[i]) << ',' << b.A[i] << ',' << b.D[i] << ','
        << b.L[i] << ',' << b.X[i] << '\n';
  }
}

nlohmann::json bundle_sidecar(const PathBundle& b) {
  nlohmann::json j;
  j["n"] = b.params.n;
  j["lambda"] = b.params.lambda;
  j["mu"] = b.params.mu;
  j["theta"] = b.params.theta;
  j["seed"] = b.seed;
  j["replication"] = b.replication;
  j["stop_time"] = b.stop_time ? nlohmann::json(*b.stop_time) : nlohmann::json();
  j["horizon"] = b.horizon;
  return j;
}

PathBundle read_bundle(std::istream& csv, const nlohmann::json& sidecar) {
  PathBundle b;
  b.params.n = sidecar.at("n").get<std::int64_t>();
  b.params.lambda = sidecar.at("lambda").get<double>();
  b.params.mu = sidecar.at("mu").get<double>();
  b.params.theta = sidecar.at("theta").get<double>();
  b.seed = sidecar.at("seed").get<std::uint64_t>();
  b.replication = sidecar.value("replication", std::uint64_t{0});
  b.horizon = sidecar.at("horizon").get<double>();
  if (!sidecar.at("stop_time").is_null()) {
    b.stop_time = sidecar.at("stop_time").get<double>();
  }

  std::string line;
  if (!std::getline(csv, line) || line != "t,A,D,L,X") {
    throw ShapeError("bundle CSV: bad header");
  }
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ShapeError("bundle CSV: expected 5 columns");
    b.times.push_back(std::stod(cells[0]));
    b.A.push_back(std::stoll(cells[1]));
    b.D.push_back(std::stoll(cells[2]));
    b.L.push_back(std::stoll(cells[3]));
    b.X.push_back(std::stoll(cells[4]));
  }
  b.kinds.resize(b.rows(), EventKind::initial);
  b.customers.resize(b.rows(), 0);
  for (std::size_t i = 1; i < b.rows(); ++i) {
    if (b.A[i] != b.A[i - 1]) b.kinds[i] = EventKind::arrival;
    else if (b.D[i] != b.D[i - 1]) b.kinds[i] = EventKind::service;
    else if (b.L[i] != b.L[i - 1]) b.kinds[i] = EventKind::abandonment;
  }
  return b;
}

}  // namespace qlim
