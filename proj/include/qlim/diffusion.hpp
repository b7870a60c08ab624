#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qlim/exec.hpp"
#include "qlim/grid2.hpp"
#include "qlim/paths.hpp"

namespace qlim {

struct SdeConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  double x0 = 0.0;
  // Draw X(0) from the stationary law (ED only: Normal(0, lambda / theta)).
  bool stationary_start = false;
  // Test hook: zero every Brownian increment.
  bool noise = true;

  void validate() const;
  std::size_t steps() const;
};

// One Euler-Maruyama replication on the grid k dt, k = 0..steps.
struct DiffusionPath {
  std::vector<double> t, X, A, D, L;
};

// dX = (-mu beta - mu (X ^ 0) - theta (X v 0)) dt + sqrt(mu) dB1 - sqrt(mu) dB2
// A = sqrt(mu) B1, D = sqrt(mu) B2 + mu int (X ^ 0), L = theta int (X v 0).
DiffusionPath sde_qed_path(double beta, double mu, double theta, const SdeConfig& cfg,
                           std::size_t rep);

// dX = -theta X dt + sqrt(lambda) dB1 - sqrt(mu) dB2 - sqrt(lambda - mu) dB3
// A = sqrt(lambda) B1, D = sqrt(mu) B2, L = sqrt(lambda - mu) B3 + theta int X.
// lambda is the per-server arrival rate.
DiffusionPath sde_ed_path(double lambda, double mu, double theta, const SdeConfig& cfg,
                          std::size_t rep);

// X(t) across cfg.reps replications, replication r in slot r.
std::vector<double> sde_qed_samples(double beta, double mu, double theta,
                                    const SdeConfig& cfg, double t,
                                    Exec exec = Exec::parallel);
std::vector<double> sde_ed_samples(double lambda, double mu, double theta,
                                   const SdeConfig& cfg, double t,
                                   Exec exec = Exec::parallel);

struct StoppedSdeOptions {
  // Drift +theta X (instead of -theta X) before tau + w. Breaks the
  // component balance; kept for comparison runs.
  bool expanding_pre_switch_drift = false;
};

// Two-parameter stopped-arrival diffusion of one replication. Row j holds the
// process stopped at tau_grid[j]; every row is driven by the same Brownian
// increments. Time-changed terms B(int phi) use increments of variance
// phi(t_k) dt with phi from the stopped fluid.
struct StoppedSample {
  Grid2 X, A, D, L;
};

StoppedSample sde_stopped(double lambda, double mu, double theta,
                          const std::vector<double>& tau_grid, const SdeConfig& cfg,
                          std::size_t rep, StoppedSdeOptions opt = {});

// U(tau, t) = (X(0) + A(t) - D(Z(t)) - L(Z(t))) / (D + L)'(Z(t)) for row j,
// t <= tau, with Z the fluid first passage. Grid lookups are right-continuous.
double uhat(const StoppedSample& s, std::size_t row, double t, double lambda, double mu,
            double theta);

// QED: X+ / mu along one path.
StepPath vwait_limit_qed(const DiffusionPath& p, double mu);
// ED: X(tau, tau + w) / mu across the tau grid.
StepPath vwait_limit_ed(const StoppedSample& s, double w, double mu);
// Customer-indexed version: W(a) = V(a / rate).
StepPath customer_time(const StepPath& v, double rate);

}  // namespace qlim
