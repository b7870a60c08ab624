#include <doctest.h>

#include <cmath>

#include "qlim/errors.hpp"
#include "qlim/fluid.hpp"

using namespace qlim;

namespace {

// Stopped fluid by RK4 on x' = -mu (x ^ 1) - theta (x - 1)+ for t >= tau,
// x = q + 1 before tau.
double stopped_x_rk4(double tau, double t, double mu, double theta, double q) {
  if (t <= tau) return q + 1.0;
  auto f = [&](double x) { return -mu * std::min(x, 1.0) - theta * std::max(x - 1.0, 0.0); };
  const int steps = 20000;
  const double h = (t - tau) / steps;
  double x = q + 1.0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(x), k2 = f(x + h * k1 / 2), k3 = f(x + h * k2 / 2), k4 = f(x + h * k3);
    x += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  return x;
}

}  // namespace

TEST_SUITE("fluid") {
  TEST_CASE("QED fluid") {
    const auto f0 = fluid_qed(0.0, 1.0);
    CHECK(f0.A == 0.0);
    CHECK(f0.D == 0.0);
    CHECK(f0.L == 0.0);
    CHECK(f0.X == 1.0);
    CHECK(f0.V == 0.0);
    const auto f3 = fluid_qed(3.0, 1.0);
    CHECK(f3.A == 3.0);
    CHECK(f3.D == 3.0);
    for (double t : {0.1, 1.7, 12.0}) {
      const auto f = fluid_qed(t, 2.5);
      CHECK(f.X == 1.0 + f.A - f.D - f.L);
    }
  }

  TEST_CASE("ED constants and fluid") {
    const auto c = ed_constants(2.0, 1.0, 1.0);
    CHECK(c.q == doctest::Approx(1.0));
    CHECK(c.w == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(c.xbar_level == doctest::Approx(2.0));
    const auto d = ed_constants(1.5, 1.0, 0.5);
    CHECK(d.q == doctest::Approx(1.0));
    CHECK(d.w == doctest::Approx(0.810930).epsilon(1e-6));
    const auto e = ed_constants(1.0 + 1e-9, 1.0, 1.0);
    CHECK(e.w < 1e-8);
    CHECK(e.q < 1e-8);
    CHECK_THROWS_AS(ed_constants(1.0, 1.0, 1.0), RegimeError);
    CHECK_THROWS_AS(ed_constants(0.5, 1.0, 1.0), RegimeError);

    const auto f = fluid_ed(2.0, 2.0, 1.0, 1.0);
    CHECK(f.X == doctest::Approx(2.0));
    CHECK(f.V == doctest::Approx(std::log(2.0)));
    CHECK(f.X == doctest::Approx(2.0 + f.A - f.D - f.L));
  }

  TEST_CASE("stopped fluid") {
    const double lambda = 2.0, mu = 1.0, theta = 1.0, tau = 1.5;
    const auto c = ed_constants(lambda, mu, theta);
    CHECK(fluid_stopped(tau, tau, lambda, mu, theta).X == doctest::Approx(2.0));
    CHECK(fluid_stopped(tau, tau + c.w, lambda, mu, theta).X == doctest::Approx(1.0));
    const auto far = fluid_stopped(tau, 60.0, lambda, mu, theta);
    CHECK(far.X == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(far.D == doctest::Approx(mu * (tau + c.w) + 1.0));
    CHECK(far.L == doctest::Approx(fluid_stopped(tau, tau + c.w, lambda, mu, theta).L));

    for (double t : {0.0, 0.7, 1.5, 1.9, 2.2, 3.0, 6.0}) {
      const auto p = fluid_stopped(tau, t, lambda, mu, theta);
      CHECK(p.X == doctest::Approx(stopped_x_rk4(tau, t, mu, theta, c.q)).epsilon(1e-9));
      CHECK(std::abs(p.X - (c.xbar_level + p.A - p.D - p.L)) <= 1e-12);
    }

    // Other parameters, including mu != 1.
    const auto c2 = ed_constants(3.0, 2.0, 0.5);
    for (double t : {0.4, 1.0, 2.5, 5.0}) {
      const auto p = fluid_stopped(0.4, t, 3.0, 2.0, 0.5);
      CHECK(p.X == doctest::Approx(stopped_x_rk4(0.4, t, 2.0, 0.5, c2.q)).epsilon(1e-9));
      CHECK(std::abs(p.X - (c2.xbar_level + p.A - p.D - p.L)) <= 1e-12);
      const auto alt = fluid_stopped(0.4, t, 3.0, 2.0, 0.5, {true});
      if (t > 0.4 + c2.w) CHECK(std::abs(alt.X - (c2.xbar_level + alt.A - alt.D - alt.L)) > 1e-6);
    }
    CHECK_THROWS_AS(fluid_stopped(-1.0, 1.0, lambda, mu, theta), DomainError);
  }

  TEST_CASE("outflow rate is the derivative of D + L") {
    const double lambda = 2.0, mu = 1.0, theta = 1.0, tau = 1.0, h = 1e-6;
    for (double t : {0.5, 1.3, 1.6, 2.5, 4.0}) {
      const auto a = fluid_stopped(tau, t - h, lambda, mu, theta);
      const auto b = fluid_stopped(tau, t + h, lambda, mu, theta);
      const double fd = (b.D + b.L - a.D - a.L) / (2.0 * h);
      CHECK(stopped_outflow_rate(tau, t, lambda, mu, theta) == doctest::Approx(fd).epsilon(1e-6));
    }
    const auto c = ed_constants(3.0, 1.0, 1.0);
    const auto c2 = ed_constants(3.0, 2.0, 1.0);
    CHECK(stopped_outflow_rate(0.0, c.w, 3.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(stopped_outflow_rate(0.0, c2.w, 3.0, 2.0, 1.0) == doctest::Approx(2.0));
  }

  TEST_CASE("fluid first passage") {
    const double lambda = 2.0, mu = 1.0, theta = 1.0;
    const auto c = ed_constants(lambda, mu, theta);
    CHECK(zbar_stopped(1.0, 1.0, lambda, mu, theta) == doctest::Approx(1.0 + c.w));
    CHECK(zbar_stopped(0.0, 0.0, lambda, mu, theta) == doctest::Approx(c.w));
    CHECK_THROWS_AS(zbar_stopped(1.0, 1.5, lambda, mu, theta), DomainError);

    // Bisection on D + L >= X(0) + A(t) - 1.
    const double tau = 2.0;
    for (double t : {0.0, 0.5, 1.2, 2.0}) {
      const double target = c.xbar_level + fluid_stopped(tau, t, lambda, mu, theta).A - 1.0;
      double lo = 0.0, hi = 20.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const auto p = fluid_stopped(tau, mid, lambda, mu, theta);
        (p.D + p.L >= target ? hi : lo) = mid;
      }
      CHECK(zbar_stopped(tau, t, lambda, mu, theta) == doctest::Approx(hi).epsilon(1e-9));
    }

    // Large theta with q fixed: w -> 0.
    const double big = 1e6;
    CHECK(zbar_stopped(1.0, 1.0, 1.0 + big, 1.0, big) == doctest::Approx(1.0).epsilon(1e-4));
  }
}
