#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qlim/exec.hpp"
#include "qlim/model.hpp"
#include "qlim/rng.hpp"

namespace qlim {

// Stationary law of the Erlang-A birth-death chain, truncated at K.
struct StationaryDist {
  std::vector<double> probabilities;  // pi_0 .. pi_K
  std::vector<double> cdf;
  std::size_t truncation = 0;
  double tail_mass_bound = 0.0;
  ModelParams params;

  double mass() const;
  // max_k |lambda pi_k - rate(k+1) pi_{k+1}| / max(both), skipping pairs that
  // have underflowed.
  double detailed_balance_residual() const;
  std::int64_t sample(Stream& rng) const;
  double mean() const;
};

StationaryDist stationary_dist(const ModelParams& p, double tail_tol = 1e-12);

void write_stationary_csv(std::ostream& out, const StationaryDist& d);

// X ~ pi, then a virtual-wait draw from that state.
double stationary_vwait_sample(const StationaryDist& d, Stream& rng);
// E[V] = sum_x pi_x sum_{i=1}^{(x-n)+} 1 / (n mu + i theta).
double stationary_vwait_mean(const StationaryDist& d);

struct CAndD {
  double c = 0.0;
  double d = 0.0;
};
// c(t) = ln(1 + theta t / mu) / theta, d(t) = t / (mu (mu + theta t)).
CAndD c_and_d(double t, double mu, double theta);

struct CltRow {
  double t = 0.0;
  double c = 0.0;
  double d = 0.0;
  double mean = 0.0;
  double mean_se = 0.0;
  double var = 0.0;
  double var_se = 0.0;
};

struct CltCov {
  double s = 0.0;
  double t = 0.0;
  double cov = 0.0;
  double se = 0.0;
  double expected = 0.0;  // d(min(s, t))
};

struct CltTable {
  std::vector<CltRow> rows;
  std::vector<CltCov> covariances;  // every pair s < t of the grid
};

// Monte Carlo of sqrt(n) (sum_{i=0}^{floor(n t)} E_i - c(t)) with E_i
// exponential of rate n mu + i theta.
CltTable partial_sum_clt_check(std::int64_t n, double mu, double theta,
                               const std::vector<double>& t_grid, std::size_t reps,
                               std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace qlim
