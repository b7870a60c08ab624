#include "qlim/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "qlim/errors.hpp"
#include "qlim/fluid.hpp"
#include "qlim/func2p.hpp"
#include "qlim/rng.hpp"

namespace qlim {

namespace {

constexpr std::uint64_t kQedSalt = 1;
constexpr std::uint64_t kEdSalt = 2;
constexpr std::uint64_t kStoppedSalt = 3;

void check_finite(double x, double t) {
  if (!std::isfinite(x)) {
    throw DivergenceError("SDE state not finite at t=" + format_double(t) +
                          "; reduce dt");
  }
}

DiffusionPath make_path(std::size_t steps) {
  DiffusionPath p;
  for (auto* v : {&p.t, &p.X, &p.A, &p.D, &p.L}) v->resize(steps + 1, 0.0);
  return p;
}

}  // namespace

void SdeConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("dt and horizon must be > 0");
  if (dt > horizon / 100.0 * (1.0 + 1e-12)) throw ConfigError("dt must be <= horizon / 100");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (!std::isfinite(x0)) throw ConfigError("x0 must be finite");
}

std::size_t SdeConfig::steps() const {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

DiffusionPath sde_qed_path(double beta, double mu, double theta, const SdeConfig& cfg,
                           std::size_t rep) {
  cfg.validate();
  if (cfg.stationary_start) throw ConfigError("no closed-form stationary start for QED");
  const auto n = cfg.steps();
  Stream rng(cfg.seed, rep, purpose_tag(Purpose::diffusion, kQedSalt));
  const double sd = cfg.noise ? std::sqrt(mu * cfg.dt) : 0.0;

  auto p = make_path(n);
  double x = cfg.x0;
  p.X[0] = x;
  for (std::size_t k = 0; k < n; ++k) {
    const double b1 = sd * rng.normal();
    const double b2 = sd * rng.normal();
    const double neg = std::min(x, 0.0);
    const double pos = std::max(x, 0.0);
    p.A[k + 1] = p.A[k] + b1;
    p.D[k + 1] = p.D[k] + b2 + mu * neg * cfg.dt;
    p.L[k + 1] = p.L[k] + theta * pos * cfg.dt;
    x += (-mu * beta - mu * neg - theta * pos) * cfg.dt + b1 - b2;
    p.t[k + 1] = static_cast<double>(k + 1) * cfg.dt;
    check_finite(x, p.t[k + 1]);
    p.X[k + 1] = x;
  }
  return p;
}

DiffusionPath sde_ed_path(double lambda, double mu, double theta, const SdeConfig& cfg,
                          std::size_t rep) {
  cfg.validate();
  ed_constants(lambda, mu, theta);
  const auto n = cfg.steps();
  Stream rng(cfg.seed, rep, purpose_tag(Purpose::diffusion, kEdSalt));
  const double root_dt = cfg.noise ? std::sqrt(cfg.dt) : 0.0;
  const double s1 = std::sqrt(lambda) * root_dt;
  const double s2 = std::sqrt(mu) * root_dt;
  const double s3 = std::sqrt(lambda - mu) * root_dt;

  auto p = make_path(n);
  double x = cfg.stationary_start ? std::sqrt(lambda / theta) * rng.normal() : cfg.x0;
  p.X[0] = x;
  for (std::size_t k = 0; k < n; ++k) {
    const double b1 = s1 * rng.normal();
    const double b2 = s2 * rng.normal();
    const double b3 = s3 * rng.normal();
    p.A[k + 1] = p.A[k] + b1;
    p.D[k + 1] = p.D[k] + b2;
    p.L[k + 1] = p.L[k] + b3 + theta * x * cfg.dt;
    x += -theta * x * cfg.dt + b1 - b2 - b3;
    p.t[k + 1] = static_cast<double>(k + 1) * cfg.dt;
    check_finite(x, p.t[k + 1]);
    p.X[k + 1] = x;
  }
  return p;
}

namespace {

template <class PathFn>
std::vector<double> samples_at(const SdeConfig& cfg, double t, Exec exec, PathFn fn) {
  cfg.validate();
  if (t < 0.0 || t > cfg.horizon) throw DomainError("sample time outside [0, horizon]");
  const auto k = static_cast<std::size_t>(std::floor(t / cfg.dt + 1e-9));
  std::vector<double> out(cfg.reps);
  for_each_index(cfg.reps, exec, [&](std::size_t r) {
    const auto p = fn(cfg, r);
    out[r] = p.X[std::min(k, p.X.size() - 1)];
  });
  return out;
}

}  // namespace

std::vector<double> sde_qed_samples(double beta, double mu, double theta,
                                    const SdeConfig& cfg, double t, Exec exec) {
  return samples_at(cfg, t, exec, [&](const SdeConfig& c, std::size_t r) {
    return sde_qed_path(beta, mu, theta, c, r);
  });
}

std::vector<double> sde_ed_samples(double lambda, double mu, double theta,
                                   const SdeConfig& cfg, double t, Exec exec) {
  return samples_at(cfg, t, exec, [&](const SdeConfig& c, std::size_t r) {
    return sde_ed_path(lambda, mu, theta, c, r);
  });
}

StoppedSample sde_stopped(double lambda, double mu, double theta,
                          const std::vector<double>& tau_grid, const SdeConfig& cfg,
                          std::size_t rep, StoppedSdeOptions opt) {
  cfg.validate();
  const auto ed = ed_constants(lambda, mu, theta);
  const auto n = cfg.steps();
  const auto t_grid = Grid2::uniform_axis(cfg.dt, n + 1);
  for (double tau : tau_grid) {
    const double k = std::round(tau / cfg.dt);
    if (std::abs(k * cfg.dt - tau) > 1e-9 * std::max(1.0, tau)) {
      throw ShapeError("sde_stopped: tau=" + format_double(tau) + " is not an inner grid node");
    }
  }

  // Shared drivers: standard increments reused by every tau row.
  Stream rng(cfg.seed, rep, purpose_tag(Purpose::diffusion, kStoppedSalt));
  const double x0 = cfg.stationary_start ? std::sqrt(lambda / theta) * rng.normal() : cfg.x0;
  const double root_dt = cfg.noise ? std::sqrt(cfg.dt) : 0.0;
  std::vector<double> z1(n), z2(n), z3(n);
  for (std::size_t k = 0; k < n; ++k) {
    z1[k] = root_dt * rng.normal();
    z2[k] = root_dt * rng.normal();
    z3[k] = root_dt * rng.normal();
  }

  const auto rows = tau_grid.size();
  const auto cols = n + 1;
  std::vector<double> X(rows * cols), A(rows * cols), D(rows * cols), L(rows * cols);
  const double sl = std::sqrt(lambda);
  const double sm = std::sqrt(mu);
  const double st = std::sqrt(theta);
  const double pre_sign = opt.expanding_pre_switch_drift ? 1.0 : -1.0;

  for (std::size_t j = 0; j < rows; ++j) {
    const double tau = tau_grid[j];
    const double switch_at = tau + ed.w;
    const auto base = j * cols;
    double x = x0;
    X[base] = x;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = t_grid[k];
      const double xbar = fluid_stopped(tau, t, lambda, mu, theta).X;
      const double b1 = t < tau ? sl * z1[k] : 0.0;
      const double b2 = sm * std::sqrt(std::min(xbar, 1.0)) * z2[k];
      const double b3 = st * std::sqrt(std::max(xbar - 1.0, 0.0)) * z3[k];
      const bool late = t >= switch_at;
      const double served = late ? mu * x * cfg.dt : 0.0;
      const double lost = late ? 0.0 : theta * x * cfg.dt;
      const double drift = late ? -mu * x : pre_sign * theta * x;
      A[base + k + 1] = A[base + k] + b1;
      D[base + k + 1] = D[base + k] + served + b2;
      L[base + k + 1] = L[base + k] + lost + b3;
      x += drift * cfg.dt + b1 - b2 - b3;
      check_finite(x, t_grid[k + 1]);
      X[base + k + 1] = x;
    }
  }
  return {Grid2(tau_grid, t_grid, std::move(X)), Grid2(tau_grid, t_grid, std::move(A)),
          Grid2(tau_grid, t_grid, std::move(D)), Grid2(tau_grid, t_grid, std::move(L))};
}

double uhat(const StoppedSample& s, std::size_t row, double t, double lambda, double mu,
            double theta) {
  const double tau = s.X.tau_grid().at(row);
  const double z = zbar_stopped(tau, t, lambda, mu, theta);
  if (z > s.X.t_max() + 1e-9) {
    throw RangeError("uhat: passage time " + format_double(z) + " beyond horizon");
  }
  const double denom = stopped_outflow_rate(tau, z, lambda, mu, theta);
  if (!(denom > 0.0)) throw DomainError("uhat: degenerate fluid outflow rate");
  const auto kz = s.X.node_at(z);
  const auto kt = s.X.node_at(t);
  return (s.X.at(row, 0) + s.A.at(row, kt) - s.D.at(row, kz) - s.L.at(row, kz)) / denom;
}

StepPath vwait_limit_qed(const DiffusionPath& p, double mu) {
  std::vector<double> v(p.X.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::max(p.X[k], 0.0) / mu;
  return StepPath(p.t, std::move(v), p.t.back());
}

StepPath vwait_limit_ed(const StoppedSample& s, double w, double mu) {
  const double need = s.X.tau_grid().back() + w;
  if (need > s.X.t_max() + 1e-9) {
    throw RangeError("vwait_limit_ed: path horizon " + format_double(s.X.t_max()) +
                     " shorter than tau + w = " + format_double(need));
  }
  return project_diag(s.X, w).scaled(1.0 / mu);
}

StepPath customer_time(const StepPath& v, double rate) {
  if (!(rate > 0.0)) throw DomainError("customer_time: rate must be > 0");
  auto b = v.breakpoints();
  for (auto& x : b) x *= rate;
  return StepPath(std::move(b), v.values(), v.horizon() * rate);
}

}  // namespace qlim
