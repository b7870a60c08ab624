// Wall-clock comparison of the serial reference against the OpenMP kernels.
// Usage: bench_kernels [repeats]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "qlim/diffusion.hpp"
#include "qlim/func2p.hpp"
#include "qlim/harness.hpp"
#include "qlim/steady.hpp"

using namespace qlim;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, int repeats, const std::function<void(Exec)>& fn) {
  const double s = best_of(repeats, [&] { fn(Exec::serial); });
  const double p = best_of(repeats, [&] { fn(Exec::parallel); });
  std::printf("%-28s %10.4f %10.4f %8.2fx\n", name, s, p, s / p);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");

  const auto axis = Grid2::uniform_axis(1e-4, 20001);
  std::vector<double> tau;
  for (int j = 0; j < 64; ++j) tau.push_back(0.01 * j);
  const auto x = Grid2::tabulate(tau, axis, [](double s, double u) { return u + 0.01 * std::sin(u + s); });
  const auto levels = Grid2::uniform_axis(1e-4, 19001);
  row("inverse2 (64 x 20001)", repeats, [&](Exec e) { inverse2(x, levels, Sampling::linear, e); });
  row("regulator_solve (64 x 20001)", repeats,
      [&](Exec e) { regulator_solve(x, linear_decay_kernel(1.0), e); });

  SdeConfig c;
  c.dt = 1e-3;
  c.horizon = 3.0;
  c.reps = 2000;
  c.seed = 1;
  row("sde_ed_samples (2000 reps)", repeats, [&](Exec e) { sde_ed_samples(2.0, 1.0, 1.0, c, 3.0, e); });
  row("partial_sum_clt (n=2000)", repeats,
      [&](Exec e) { partial_sum_clt_check(2000, 1.0, 1.0, {0.5, 1.0}, 5000, 1, e); });

  RegimeSeq seq;
  seq.n_list = {400};
  ScalingPlan plan;
  plan.checkpoints = {3.0};
  plan.reps = 500;
  row("scaled_wait_samples (n=400)", repeats, [&](Exec e) {
    plan.exec = e;
    scaled_wait_samples(seq, 400, plan);
  });
  return 0;
}
