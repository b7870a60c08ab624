#pragma once

#include "qlim/model.hpp"

namespace qlim {

// Fluid quantities are per server: the n-th system scaled by 1/n. For ED
// fluids `lambda` is the per-server arrival rate (system rate / n).

struct FluidPoint {
  double A = 0.0;
  double D = 0.0;
  double L = 0.0;
  double X = 0.0;
  double V = 0.0;
};

struct EDConstants {
  double q = 0.0;           // (lambda - mu) / theta
  double w = 0.0;           // ln(lambda / mu) / theta
  double xbar_level = 0.0;  // q + 1
};

EDConstants ed_constants(double lambda, double mu, double theta);

// (mu t, mu t, 0, 1, 0).
FluidPoint fluid_qed(double t, double mu);
// (lambda t, mu t, (lambda - mu) t, q + 1, w).
FluidPoint fluid_ed(double t, double lambda, double mu, double theta);

struct StoppedPoint {
  double X = 0.0;
  double A = 0.0;
  double D = 0.0;
  double L = 0.0;
};

struct StoppedOptions {
  // Coefficient 1/mu instead of 1 on the post-(tau + w) service increment.
  // Flow balance then fails unless mu = 1; kept for comparison runs.
  bool inverse_mu_coefficient = false;
};

// Fluid of the ED system started at q + 1 with arrivals stopped at tau.
StoppedPoint fluid_stopped(double tau, double t, double lambda, double mu, double theta,
                           StoppedOptions opt = {});

// (D + L)'(t) of the stopped fluid: lambda before tau, lambda e^{-theta (t -
// tau)} until tau + w, mu e^{-mu (t - tau - w)} afterwards.
double stopped_outflow_rate(double tau, double t, double lambda, double mu, double theta);

// inf{s >= 0 : D(s) + L(s) >= X(0) + A(t) - 1} for the stopped fluid, t <= tau.
double zbar_stopped(double tau, double t, double lambda, double mu, double theta);

}  // namespace qlim
