#include <doctest.h>

#include <cmath>
#include <limits>

#include "qlim/errors.hpp"
#include "qlim/fluid.hpp"
#include "qlim/harness.hpp"
#include "qlim/sim_mm.hpp"
#include "qlim/suites.hpp"

using namespace qlim;

TEST_SUITE("harness") {
  TEST_CASE("regime sequences") {
    RegimeSeq q;
    q.kind = RegimeSeq::Kind::qed;
    q.beta = 1.0;
    q.mu = 2.0;
    q.theta = 0.5;
    q.n_list = {25, 100};
    CHECK(q.params(100).lambda == doctest::Approx(100 * 2.0 * (1.0 - 0.1)));
    CHECK(q.warm_start(100) == 100);
    CHECK(q.fluid_wait() == 0.0);

    RegimeSeq e;
    e.n_list = {25, 100, 400};
    CHECK(e.params(400).lambda == doctest::Approx(800.0));
    CHECK(e.fluid_wait() == doctest::Approx(std::log(2.0)));
    for (std::int64_t n : {25, 100, 400, 1001}) {
      const double xhat0 = std::sqrt(static_cast<double>(n)) *
                           (static_cast<double>(e.warm_start(n)) / n - 2.0);
      CHECK(std::abs(xhat0) <= 1.0 / std::sqrt(static_cast<double>(n)));
    }

    e.n_list = {100, 25};
    CHECK_THROWS_AS(e.validate(), ConfigError);
    q.n_list = {1};
    q.beta = 2.0;
    CHECK_THROWS_AS(q.validate(), ConfigError);
  }

  TEST_CASE("scaling a bundle on its fluid gives zero") {
    PathBundle b;
    b.params = {16, 0.0, 1.0, 1.0};
    b.horizon = 2.0;
    b.times = {0.0};
    b.A = b.D = b.L = {0};
    b.X = {16};
    b.kinds = {EventKind::initial};
    b.customers = {0};
    const FluidRef ref{[](double) { return FluidPoint{0.0, 0.0, 0.0, 1.0, 0.0}; }, 2.0};
    const auto s = scale_paths(b, ref);
    for (const auto* p : {&s.A, &s.D, &s.L, &s.X}) {
      for (double v : p->values()) CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(scale_paths(b, FluidRef{ref.at, 3.0}), ShapeError);
    CHECK(scale_wait(0.75, 16, 0.5) == doctest::Approx(1.0));
  }

  TEST_CASE("fluid sup error checks both ends of each piece") {
    PathBundle b;
    b.params = {2, 1.0, 1.0, 1.0};
    b.horizon = 2.0;
    b.times = {0.0, 1.0};
    b.A = {0, 1};
    b.D = b.L = {0, 0};
    b.X = {0, 1};
    b.kinds = {EventKind::initial, EventKind::arrival};
    b.customers = {0, 0};
    // Y / n is 0 then 0.5; fbar(t) = t / 2 reaches 0.5 at the jump from
    // below and 1 at the horizon.
    const double e = fluid_sup_error(b, Component::A, [](double t) { return t / 2.0; });
    CHECK(e == doctest::Approx(0.5));
  }

  TEST_CASE("verdicts") {
    CHECK(verdict_le("a", 1.0, 1.0).pass);
    CHECK_FALSE(verdict_le("a", 1.1, 1.0).pass);
    CHECK(verdict_ge("b", 2.0, 1.0).pass);
    CHECK_FALSE(verdict_le("nan", std::nan(""), 1.0).pass);
    CHECK(verdict_flag("c", true).pass);
    CHECK(verdict_flag("c", true).relation == "==");
  }

  TEST_CASE("report json") {
    ScalingReport r;
    r.config = {{"suite", "x"}};
    CheckpointStats c;
    c.t = std::numeric_limits<double>::infinity();
    c.sample = moments({1.0, 2.0});
    c.reference = moments({1.0, 3.0});
    r.per_n.push_back({5, {c}});
    r.verdicts.push_back(verdict_le("v", 0.0, 1.0));
    const auto j = nlohmann::json::parse(r.to_json().dump());
    CHECK(j.at("runtime_s").is_null());
    CHECK(j.at("per_n")[0].at("checkpoints")[0].at("t").is_null());
    CHECK(j.at("verdicts")[0].at("pass") == true);
    CHECK(j.contains("git_describe"));
    CHECK(r.pass());
    r.verdicts.push_back(verdict_le("w", 2.0, 1.0));
    CHECK_FALSE(r.pass());
  }

  TEST_CASE("suites") {
    CHECK(suite_names().size() == 9);
    CHECK_THROWS_AS(run_suite("nope"), ConfigError);
    const auto r = run_suite("erlang-a");
    CHECK(r.pass());
  }

  TEST_CASE("scaled waits are reproducible") {
    RegimeSeq e;
    e.n_list = {25};
    ScalingPlan plan;
    plan.checkpoints = {1.0, 2.0};
    plan.reps = 50;
    plan.seed = 4;
    const auto a = scaled_wait_samples(e, 25, plan);
    const auto b = scaled_wait_samples(e, 25, plan);
    CHECK(a.size() == 100);
    CHECK(a == b);
    plan.seed = 5;
    CHECK(scaled_wait_samples(e, 25, plan) != a);
  }
}
