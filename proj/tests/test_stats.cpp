#include <doctest.h>

#include <cmath>

#include "qlim/errors.hpp"
#include "qlim/rng.hpp"
#include "qlim/stats.hpp"

using namespace qlim;

TEST_SUITE("stats") {
  TEST_CASE("KS statistic") {
    const std::vector<double> a{0.1, 0.4, 0.4, 2.0};
    CHECK(ks_two_sample(a, a).statistic == 0.0);
    CHECK_THROWS_AS(ks_two_sample({}, a), DomainError);

    // Disjoint supports.
    CHECK(ks_two_sample({1.0, 2.0}, {3.0, 4.0, 5.0}).statistic == 1.0);
    // Hand count: F_a - F_b peaks at 2/3 after 0.2.
    CHECK(ks_two_sample({0.1, 0.2, 0.9}, {0.5, 0.6, 0.7}).statistic == doctest::Approx(2.0 / 3.0));

    Stream r1(1, 0, 0), r2(2, 0, 0);
    std::vector<double> x, y, z;
    for (int i = 0; i < 10000; ++i) {
      x.push_back(r1.normal());
      y.push_back(r2.normal());
      z.push_back(r2.normal() + 1.0);
    }
    CHECK(ks_two_sample(x, y).statistic < 0.03);
    // Largest CDF gap of N(0,1) and N(1,1) sits at 0.5: 2 Phi(0.5) - 1.
    const double gap = std::erf(0.5 / std::sqrt(2.0));
    const auto k = ks_two_sample(x, z);
    CHECK(k.statistic == doctest::Approx(gap).epsilon(0.05));
    CHECK(k.p_value < 1e-10);
  }

  TEST_CASE("moments") {
    const auto m = moments({1.0, 2.0, 3.0, 4.0});
    CHECK(m.count == 4);
    CHECK(m.mean == doctest::Approx(2.5));
    CHECK(m.var == doctest::Approx(5.0 / 3.0));
    CHECK(m.mean_se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK_THROWS_AS(moments({1.0}), DomainError);
  }

  TEST_CASE("rate fit") {
    const std::vector<double> n{25, 100, 400, 1600};
    std::vector<double> e;
    for (double x : n) e.push_back(3.0 / std::sqrt(x));
    const auto f = rate_fit(n, e);
    CHECK(f.slope == doctest::Approx(-0.5));
    CHECK(f.used == 4);
    CHECK(rate_fit(n, {0.1, 0.1, 0.1, 0.1}).slope == doctest::Approx(0.0));
    const auto g = rate_fit(n, {0.0, 0.2, 0.1, 0.05});
    CHECK(g.used == 3);
    CHECK(g.slope == doctest::Approx(-0.5));
    CHECK_THROWS_AS(rate_fit(n, {0.0, 0.0, 0.1, 0.1}), DomainError);
    CHECK_THROWS_AS(rate_fit({1, 2}, {0.1}), ShapeError);
  }

  TEST_CASE("monotone with slack") {
    CHECK(nonincreasing_with_slack({0.1, 0.05, 0.06}, 0.02));
    CHECK_FALSE(nonincreasing_with_slack({0.1, 0.05, 0.08}, 0.02));
  }

  TEST_CASE("streams are counter based") {
    Stream a(5, 3, purpose_tag(Purpose::events, 100));
    Stream b(5, 3, purpose_tag(Purpose::events, 100));
    Stream c(5, 3, purpose_tag(Purpose::events, 101));
    for (int i = 0; i < 10; ++i) {
      const auto x = a();
      CHECK(x == b());
      CHECK(x != c());
    }
    CHECK(a.draws() == 10);
    for (int i = 0; i < 1000; ++i) {
      const double u = a.uniform();
      CHECK(u > 0.0);
      CHECK(u < 1.0);
    }
  }
}
