// The OpenMP kernels against their serial reference. Every kernel writes
// only its own slot, so results must match bit for bit.

#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <stdexcept>

#include "qlim/diffusion.hpp"
#include "qlim/exec.hpp"
#include "qlim/func2p.hpp"
#include "qlim/harness.hpp"
#include "qlim/steady.hpp"
#include "qlim/suites.hpp"

using namespace qlim;

namespace {

struct Threads {
  int saved = omp_get_max_threads();
  Threads() { omp_set_num_threads(4); }
  ~Threads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_SUITE("parallel") {
  TEST_CASE("for_each_index rethrows the lowest failing index") {
    Threads t;
    for (Exec e : {Exec::serial, Exec::parallel}) {
      try {
        for_each_index(100, e, [](std::size_t i) {
          if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
        });
        FAIL("expected a throw");
      } catch (const std::runtime_error& err) {
        CHECK(std::string(err.what()) == "17");
      }
    }
  }

  TEST_CASE("grid operators") {
    Threads t;
    const auto axis = Grid2::uniform_axis(1e-3, 2001);
    std::vector<double> tau;
    for (int j = 0; j < 16; ++j) tau.push_back(j * 0.05);
    const auto x = Grid2::tabulate(tau, axis, [](double s, double u) { return u + 0.1 * std::sin(u + s); });
    const auto y = Grid2::tabulate(tau, axis, [](double s, double u) { return 0.5 * u + 0.1 * s; });
    const auto lv = Grid2::uniform_axis(1e-3, 1001);
    CHECK(compose2(x, y, nullptr, Exec::serial).values() == compose2(x, y, nullptr, Exec::parallel).values());
    CHECK(inverse2(x, lv, Sampling::step, Exec::serial).values() ==
          inverse2(x, lv, Sampling::step, Exec::parallel).values());
    CHECK(inverse2(x, lv, Sampling::linear, Exec::serial).values() ==
          inverse2(x, lv, Sampling::linear, Exec::parallel).values());
    CHECK(inverse2_ge(x, y, Exec::serial).values() == inverse2_ge(x, y, Exec::parallel).values());
    const auto g = [](double v) { return std::min(v, 1.0); };
    CHECK(integral_map(x, g, Exec::serial).values() == integral_map(x, g, Exec::parallel).values());
    const auto k = linear_decay_kernel(0.7);
    CHECK(regulator_solve(x, k, Exec::serial).values() == regulator_solve(x, k, Exec::parallel).values());
  }

  TEST_CASE("Monte Carlo kernels") {
    Threads t;
    SdeConfig c;
    c.dt = 1e-2;
    c.horizon = 2.0;
    c.reps = 64;
    c.seed = 12;
    CHECK(sde_ed_samples(2.0, 1.0, 1.0, c, 1.5, Exec::serial) ==
          sde_ed_samples(2.0, 1.0, 1.0, c, 1.5, Exec::parallel));
    CHECK(sde_qed_samples(1.0, 1.0, 0.5, c, 1.5, Exec::serial) ==
          sde_qed_samples(1.0, 1.0, 0.5, c, 1.5, Exec::parallel));

    const auto a = partial_sum_clt_check(200, 1.0, 1.0, {0.5, 1.0}, 200, 3, Exec::serial);
    const auto b = partial_sum_clt_check(200, 1.0, 1.0, {0.5, 1.0}, 200, 3, Exec::parallel);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].mean == b.rows[i].mean);
      CHECK(a.rows[i].var == b.rows[i].var);
    }

    RegimeSeq e;
    e.n_list = {25, 100};
    ScalingPlan plan;
    plan.checkpoints = {1.0};
    plan.reps = 40;
    plan.ref_reps = 40;
    plan.dt = 1e-2;
    plan.seed = 2;
    plan.exec = Exec::serial;
    const auto ss = scaled_wait_samples(e, 25, plan);
    const auto sl = limit_wait_samples(e, plan);
    plan.exec = Exec::parallel;
    CHECK(ss == scaled_wait_samples(e, 25, plan));
    CHECK(sl == limit_wait_samples(e, plan));
  }

  TEST_CASE("suite reports") {
    Threads t;
    SuiteOptions o;
    o.reps = 100;
    o.ref_reps = 100;
    for (const char* name : {"bounds", "ed-fluid", "diffusion"}) {
      o.exec = Exec::serial;
      const auto a = run_suite(name, o).to_json().dump();
      o.exec = Exec::parallel;
      const auto b = run_suite(name, o).to_json().dump();
      CHECK_MESSAGE(a == b, name);
    }
  }
}
