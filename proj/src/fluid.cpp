#include "qlim/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "qlim/errors.hpp"

namespace qlim {

EDConstants ed_constants(double lambda, double mu, double theta) {
  if (!(mu > 0.0) || !(theta > 0.0)) throw ConfigError("mu and theta must be > 0");
  if (!(lambda > mu)) throw RegimeError("ED fluid needs lambda > mu");
  const double q = (lambda - mu) / theta;
  return {q, std::log(lambda / mu) / theta, q + 1.0};
}

FluidPoint fluid_qed(double t, double mu) {
  if (!(mu > 0.0)) throw ConfigError("mu must be > 0");
  return {mu * t, mu * t, 0.0, 1.0, 0.0};
}

FluidPoint fluid_ed(double t, double lambda, double mu, double theta) {
  const auto c = ed_constants(lambda, mu, theta);
  return {lambda * t, mu * t, (lambda - mu) * t, c.xbar_level, c.w};
}

StoppedPoint fluid_stopped(double tau, double t, double lambda, double mu, double theta,
                           StoppedOptions opt) {
  const auto c = ed_constants(lambda, mu, theta);
  if (tau < 0.0 || t < 0.0) throw DomainError("fluid_stopped: negative time");
  const double switch_at = tau + c.w;
  const double after = std::max(t - switch_at, 0.0);
  const double mid = std::clamp(t - tau, 0.0, c.w);

  StoppedPoint p;
  if (t < switch_at) {
    p.X = (lambda * std::exp(-theta * std::max(t - tau, 0.0)) - mu) / theta + 1.0;
  } else {
    p.X = std::exp(-mu * after);
  }
  p.A = lambda * std::min(t, tau);
  const double coef = opt.inverse_mu_coefficient ? 1.0 / mu : 1.0;
  p.D = mu * std::min(t, switch_at) - coef * std::expm1(-mu * after);
  p.L = (lambda - mu) * std::min(t, tau) - (lambda / theta) * std::expm1(-theta * mid) -
        mu * mid;
  return p;
}

double stopped_outflow_rate(double tau, double t, double lambda, double mu, double theta) {
  const auto c = ed_constants(lambda, mu, theta);
  if (t < tau) return lambda;
  if (t < tau + c.w) return lambda * std::exp(-theta * (t - tau));
  return mu * std::exp(-mu * (t - tau - c.w));
}

double zbar_stopped(double tau, double t, double lambda, double mu, double theta) {
  const auto c = ed_constants(lambda, mu, theta);
  if (t < 0.0) throw DomainError("zbar_stopped: negative time");
  if (t > tau) throw DomainError("zbar_stopped: t > tau, arrival fluid is frozen");
  const double level = c.q + lambda * t;
  if (level <= lambda * tau) return level / lambda;
  if (t == tau) return tau + c.w;
  return tau - std::log1p(-theta * (level - lambda * tau) / lambda) / theta;
}

}  // namespace qlim
