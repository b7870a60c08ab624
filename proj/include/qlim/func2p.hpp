#pragma once

// Two-parameter path operators on Grid2: composition in the inner variable,
// first-passage inverses, integral and regulator maps, diagonal projection,
// plus the step-function upper interpolation used by the critically loaded
// bounding argument.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qlim/exec.hpp"
#include "qlim/grid2.hpp"
#include "qlim/paths.hpp"
#include "qlim/rng.hpp"

namespace qlim {

// Drift h(x, s, t) of a regulator equation x = y + int_0^t h(x(s,u), s, u) du.
// Requirements: h(0, s, t) = 0 and Lipschitz in x with `lipschitz_bound`.
struct Kernel {
  std::function<double(double, double, double)> h;
  std::string description;
  double lipschitz_bound = 0.0;
};

Kernel zero_kernel();
// h(x, s, t) = -rate x.
Kernel linear_decay_kernel(double rate);
// h_a(x, s, t) = -1{t >= s + w} mu x - 1{t < s + w} theta (x - a).
// h_a(0, s, t) != 0 unless a = 0; the a = 1 instance is the fluid drift of
// the stopped system and is used with a forcing term that absorbs theta a.
Kernel stopped_drift_kernel(double a, double mu, double theta, double w);

struct KernelCheck {
  double max_abs_at_zero = 0.0;
  double max_lipschitz_ratio = 0.0;
};
// Random-sampling probe of the Kernel requirements.
KernelCheck probe_kernel(const Kernel& k, Stream& rng, std::size_t samples,
                         double x_range, double s_range, double t_range);

struct CompositionReport {
  std::size_t clamped = 0;      // y values beyond x's inner range
  double max_requested = 0.0;   // largest y value seen
};

// (x o2 y)(tau, t) = x(tau, y(tau, t)), with x looked up right-continuously at
// the largest inner node <= y. Output lives on y's grid. y values beyond the
// inner range of x are clamped to its last node and counted in `report`.
Grid2 compose2(const Grid2& x, const Grid2& y, CompositionReport* report = nullptr,
               Exec exec = Exec::parallel);

// How grid values are read between nodes by the inverse.
enum class Sampling {
  step,    // right-continuous step function: result is a grid node
  linear,  // continuous piecewise-linear interpolant: exact crossing point
};

// x^{-1}(tau, t) = inf{u >= 0 : x(tau, u) > t} evaluated at each level in
// `levels` (a uniform axis starting at 0). Throws RangeError naming (tau, t)
// when a level is never exceeded on x's inner range.
Grid2 inverse2(const Grid2& x, const std::vector<double>& levels,
               Sampling sampling = Sampling::step, Exec exec = Exec::parallel);
Grid2 inverse2(const Grid2& x);

// inf{u >= 0 : x(tau, u) >= y(tau, t)}, the weak-inequality first passage of
// x through y. Output lives on y's grid.
Grid2 inverse2_ge(const Grid2& x, const Grid2& y, Exec exec = Exec::parallel);

// Continuous piecewise-linear upper bound of a step function: stepping up,
// linear from the midpoint of the previous step to the left endpoint of the
// next; stepping down, linear from the right endpoint of the previous step to
// the midpoint of the next. sup |result - x| equals max_jump(x).
LinearPath upper_interpolate(const StepPath& x);

// f(x)(tau, t) = int_0^t g(x(tau, u)) du by the trapezoidal rule.
Grid2 integral_map(const Grid2& x, const std::function<double(double)>& g,
                   Exec exec = Exec::parallel);

// Solves x(tau, t) = y(tau, t) + int_0^t h(x(tau, u), tau, u) du row by row
// with explicit first-order stepping on y's inner mesh.
Grid2 regulator_solve(const Grid2& y, const Kernel& k, Exec exec = Exec::parallel);

// y(tau) = x(tau, tau + shift) at every tau node. With shift = 0 every tau must
// be an inner node; otherwise the inner lookup is right-continuous. Throws
// ShapeError when tau + shift leaves the inner range.
StepPath project_diag(const Grid2& x, double shift = 0.0);

struct CenteringRow {
  double c = 0.0;
  double error = 0.0;
};

struct CenteringCheck {
  std::vector<CenteringRow> rows;
  double mesh_floor = 0.0;
  bool monotone_to_floor = false;
};

// For each c builds x_c = e2 + x_smooth / c on [0, S] x [0, T'] with inner mesh
// dt, inverts it (linear sampling) at levels in [0, T] and reports
// ||c (x_c^{-1} - e2) + x_smooth||. Errors must be nonincreasing in c until
// they reach the floor 10 dt.
CenteringCheck check_inverse_centering(
    const std::function<double(double, double)>& x_smooth,
    const std::vector<double>& c_list, double dt, double S = 1.0, double T = 1.0,
    std::size_t tau_points = 5, Exec exec = Exec::parallel);

}  // namespace qlim
