#include <doctest.h>

#include <cmath>

#include "qlim/diffusion.hpp"
#include "qlim/errors.hpp"
#include "qlim/fluid.hpp"
#include "qlim/stats.hpp"

using namespace qlim;

namespace {

SdeConfig quiet(double dt, double horizon, double x0) {
  SdeConfig c;
  c.dt = dt;
  c.horizon = horizon;
  c.x0 = x0;
  c.noise = false;
  return c;
}

}  // namespace

TEST_SUITE("diffusion") {
  TEST_CASE("config validation") {
    SdeConfig c;
    c.dt = 0.1;
    c.horizon = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.dt = 0.01;
    CHECK_NOTHROW(c.validate());
    CHECK(c.steps() == 100);
    c.stationary_start = true;
    CHECK_THROWS_AS(sde_qed_path(1.0, 1.0, 1.0, c, 0), ConfigError);
  }

  TEST_CASE("QED noise off decays like exp(-t)") {
    const auto p = sde_qed_path(0.0, 1.0, 1.0, quiet(1e-3, 3.0, 1.0), 0);
    double e = 0.0;
    for (std::size_t k = 0; k < p.t.size(); ++k) e = std::max(e, std::abs(p.X[k] - std::exp(-p.t[k])));
    CHECK(e <= 5e-3);
  }

  TEST_CASE("component balance on every step") {
    SdeConfig c;
    c.dt = 1e-3;
    c.horizon = 2.0;
    c.seed = 8;
    c.x0 = 0.3;
    const auto q = sde_qed_path(0.5, 1.0, 0.5, c, 1);
    const auto e = sde_ed_path(2.0, 1.0, 1.0, c, 1);
    for (std::size_t k = 0; k < q.t.size(); ++k) {
      // The QED drift -mu beta is not part of any counting component.
      CHECK(std::abs(q.X[k] - (q.X[0] + q.A[k] - q.D[k] - q.L[k] - 0.5 * q.t[k])) <= 5e-3);
      CHECK(std::abs(e.X[k] - (e.X[0] + e.A[k] - e.D[k] - e.L[k])) <= 5e-3);
    }
  }

  TEST_CASE("ED stationary variance") {
    SdeConfig c;
    c.dt = 1e-2;
    c.horizon = 2.0;
    c.reps = 4000;
    c.seed = 3;
    c.stationary_start = true;
    const auto s = sde_ed_samples(2.0, 1.0, 1.0, c, 2.0);
    const auto m = moments(s);
    // OU stationary variance 2 lambda / (2 theta) = 2.
    CHECK(std::abs(m.var - 2.0) <= 4.0 * m.var_se);
    CHECK(std::abs(m.mean) <= 4.0 * m.mean_se);
  }

  TEST_CASE("stopped diffusion") {
    const double lambda = 2.0, mu = 1.0, theta = 1.0, dt = 1e-3;
    const double w = ed_constants(lambda, mu, theta).w;
    const std::vector<double> taus{0.0, 0.5, 1.0};
    const auto s = sde_stopped(lambda, mu, theta, taus, quiet(dt, 3.0, 1.0), 0);
    double e = 0.0;
    for (std::size_t j = 0; j < taus.size(); ++j) {
      for (std::size_t k = 0; k < s.X.cols(); ++k) {
        const double t = s.X.t_grid()[k];
        const double sw = taus[j] + w;
        const double ref = std::exp(-theta * std::min(t, sw)) * std::exp(-mu * std::max(t - sw, 0.0));
        e = std::max(e, std::abs(s.X.at(j, k) - ref));
      }
    }
    CHECK(e <= 5.0 * dt);

    SdeConfig noisy;
    noisy.dt = dt;
    noisy.horizon = 3.0;
    noisy.seed = 5;
    const auto n = sde_stopped(lambda, mu, theta, taus, noisy, 2);
    for (std::size_t j = 0; j < taus.size(); ++j) {
      for (std::size_t k = 0; k < n.X.cols(); ++k) {
        CHECK(std::abs(n.X.at(j, k) - (n.X.at(j, 0) + n.A.at(j, k) - n.D.at(j, k) - n.L.at(j, k))) <=
              5.0 * dt);
      }
      const double u = uhat(n, j, taus[j], lambda, mu, theta);
      CHECK(std::abs(u - n.X.at(j, n.X.node_at(taus[j] + w)) / mu) <= 5.0 * dt);
    }
    // Rows share drivers: they agree before the smallest stop time among them.
    for (std::size_t k = 0; k <= n.X.node_at(0.5); ++k) CHECK(n.X.at(1, k) == n.X.at(2, k));

    CHECK_THROWS_AS(sde_stopped(lambda, mu, theta, {0.0, 0.0005}, noisy, 0), ShapeError);
  }

  TEST_CASE("waiting-time limits") {
    SdeConfig c;
    c.dt = 1e-2;
    c.horizon = 2.0;
    c.x0 = -5.0;
    c.noise = false;
    const auto p = sde_qed_path(1.0, 1.0, 1.0, c, 0);
    const auto v = vwait_limit_qed(p, 1.0);
    for (double x : v.values()) CHECK(x == 0.0);

    const double w = ed_constants(2.0, 1.0, 1.0).w;
    const auto s = sde_stopped(2.0, 1.0, 1.0, {0.0, 0.5, 1.0}, quiet(1e-3, 2.0, 1.0), 0);
    const auto ve = vwait_limit_ed(s, w, 1.0);
    const double taus[] = {0.0, 0.5, 1.0};
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(ve.values()[j] == doctest::Approx(std::exp(-(taus[j] + w))).epsilon(1e-2));
    }
    const auto shortp = sde_stopped(2.0, 1.0, 1.0, {0.0, 1.0}, quiet(1e-2, 1.5, 1.0), 0);
    CHECK_THROWS_AS(vwait_limit_ed(shortp, w, 1.0), RangeError);

    const auto ct = customer_time(ve, 2.0);
    CHECK(ct.breakpoints()[1] == doctest::Approx(1.0));
    CHECK(ct.eval(1.0) == ve.eval(0.5));
  }

  TEST_CASE("noise-off uhat is deterministic") {
    const auto a = sde_stopped(2.0, 1.0, 1.0, {0.0, 1.0}, quiet(1e-3, 3.0, 1.0), 0);
    const auto b = sde_stopped(2.0, 1.0, 1.0, {0.0, 1.0}, quiet(1e-3, 3.0, 1.0), 7);
    CHECK(uhat(a, 1, 0.5, 2.0, 1.0, 1.0) == uhat(b, 1, 0.5, 2.0, 1.0, 1.0));
  }
}
