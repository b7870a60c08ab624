#include "qlim/func2p.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlim/errors.hpp"

namespace qlim {

namespace {

constexpr double kNodeTol = 1e-9;

void require_same_tau(const Grid2& x, const Grid2& y, const char* op) {
  if (x.tau_grid() != y.tau_grid()) {
    throw ShapeError(std::string(op) + ": tau grids differ");
  }
}

// Running maximum of a row; nondecreasing, so first-passage queries become
// binary searches.
std::vector<double> prefix_max(std::span<const double> row) {
  std::vector<double> pm(row.begin(), row.end());
  for (std::size_t k = 1; k < pm.size(); ++k) pm[k] = std::max(pm[k], pm[k - 1]);
  return pm;
}

[[noreturn]] void level_not_reached(double tau, double t) {
  throw RangeError("inverse: level " + format_double(t) + " never exceeded at tau=" +
                   format_double(tau));
}

}  // namespace

// ----------------------------------------------------------------- kernels

Kernel zero_kernel() {
  return {[](double, double, double) { return 0.0; }, "zero", 0.0};
}

Kernel linear_decay_kernel(double rate) {
  return {[rate](double x, double, double) { return -rate * x; },
          "linear decay rate " + format_double(rate), std::abs(rate)};
}

Kernel stopped_drift_kernel(double a, double mu, double theta, double w) {
  return {[=](double x, double s, double t) {
            return t >= s + w ? -mu * x : -theta * (x - a);
          },
          "stopped drift a=" + format_double(a), std::max(mu, theta)};
}

KernelCheck probe_kernel(const Kernel& k, Stream& rng, std::size_t samples,
                         double x_range, double s_range, double t_range) {
  KernelCheck out;
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = rng.uniform() * s_range;
    const double t = rng.uniform() * t_range;
    const double x1 = (2.0 * rng.uniform() - 1.0) * x_range;
    const double x2 = (2.0 * rng.uniform() - 1.0) * x_range;
    out.max_abs_at_zero = std::max(out.max_abs_at_zero, std::abs(k.h(0.0, s, t)));
    if (x1 != x2) {
      const double r = std::abs(k.h(x1, s, t) - k.h(x2, s, t)) / std::abs(x1 - x2);
      out.max_lipschitz_ratio = std::max(out.max_lipschitz_ratio, r);
    }
  }
  return out;
}

// ------------------------------------------------------------- composition

Grid2 compose2(const Grid2& x, const Grid2& y, CompositionReport* report, Exec exec) {
  require_same_tau(x, y, "compose2");
  const std::size_t rows = y.rows();
  const std::size_t cols = y.cols();
  std::vector<double> out(rows * cols);
  std::vector<std::size_t> clamped(rows, 0);
  std::vector<double> max_req(rows, 0.0);
  const double limit = x.t_max() * (1.0 + kNodeTol) + kNodeTol;

  for_each_index(rows, exec, [&](std::size_t j) {
    for (std::size_t k = 0; k < cols; ++k) {
      const double v = y.at(j, k);
      if (v < 0.0) {
        throw DomainError("compose2: inner function negative at tau=" +
                          format_double(y.tau_grid()[j]));
      }
      max_req[j] = std::max(max_req[j], v);
      if (v > limit) ++clamped[j];
      out[j * cols + k] = x.at(j, x.node_at(v));
    }
  });

  if (report) {
    report->clamped = 0;
    report->max_requested = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
      report->clamped += clamped[j];
      report->max_requested = std::max(report->max_requested, max_req[j]);
    }
  }
  return Grid2(y.tau_grid(), y.t_grid(), std::move(out));
}

// ----------------------------------------------------------------- inverse

Grid2 inverse2(const Grid2& x, const std::vector<double>& levels, Sampling sampling,
               Exec exec) {
  const std::size_t rows = x.rows();
  const std::size_t cols = levels.size();
  const auto& u = x.t_grid();
  std::vector<double> out(rows * cols);

  for_each_index(rows, exec, [&](std::size_t j) {
    const auto row = x.row(j);
    const auto pm = prefix_max(row);
    for (std::size_t k = 0; k < cols; ++k) {
      const double t = levels[k];
      const auto it = std::upper_bound(pm.begin(), pm.end(), t);
      if (it == pm.end()) level_not_reached(x.tau_grid()[j], t);
      const auto idx = static_cast<std::size_t>(it - pm.begin());
      double r = u[idx];
      if (sampling == Sampling::linear && idx > 0) {
        const double lo = row[idx - 1];
        const double hi = row[idx];
        r = u[idx - 1] + (t - lo) / (hi - lo) * (u[idx] - u[idx - 1]);
      }
      out[j * cols + k] = r;
    }
  });
  return Grid2(x.tau_grid(), levels, std::move(out));
}

Grid2 inverse2(const Grid2& x) { return inverse2(x, x.t_grid()); }

Grid2 inverse2_ge(const Grid2& x, const Grid2& y, Exec exec) {
  require_same_tau(x, y, "inverse2_ge");
  const std::size_t rows = y.rows();
  const std::size_t cols = y.cols();
  const auto& u = x.t_grid();
  std::vector<double> out(rows * cols);

  for_each_index(rows, exec, [&](std::size_t j) {
    const auto pm = prefix_max(x.row(j));
    for (std::size_t k = 0; k < cols; ++k) {
      const double level = y.at(j, k);
      const auto it = std::lower_bound(pm.begin(), pm.end(), level);
      if (it == pm.end()) level_not_reached(y.tau_grid()[j], level);
      out[j * cols + k] = u[static_cast<std::size_t>(it - pm.begin())];
    }
  });
  return Grid2(y.tau_grid(), y.t_grid(), std::move(out));
}

// ----------------------------------------------------- upper interpolation

LinearPath upper_interpolate(const StepPath& x) {
  const auto& b = x.breakpoints();
  const auto& v = x.values();
  const std::size_t m = b.size();
  const double H = x.horizon();

  std::vector<double> knots;
  std::vector<double> vals;
  auto push = [&](double t, double y) {
    if (!knots.empty() && t == knots.back()) {
      vals.back() = std::max(vals.back(), y);
      return;
    }
    knots.push_back(t);
    vals.push_back(y);
  };

  for (std::size_t i = 0; i < m; ++i) {
    const double left = b[i];
    const double right = i + 1 < m ? b[i + 1] : H;
    const double mid = 0.5 * (left + right);
    const bool entered_down = i > 0 && v[i] < v[i - 1];
    const bool leaves_up = i + 1 < m && v[i + 1] > v[i];
    if (entered_down) {
      push(left, v[i - 1]);
      push(mid, v[i]);
    } else {
      push(left, v[i]);
    }
    if (leaves_up) push(mid, v[i]);
  }
  if (knots.back() < H) push(H, v.back());
  return LinearPath(std::move(knots), std::move(vals));
}

// ---------------------------------------------------- integral / regulator

Grid2 integral_map(const Grid2& x, const std::function<double(double)>& g, Exec exec) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  const double h = x.t_step();
  std::vector<double> out(rows * cols, 0.0);

  for_each_index(rows, exec, [&](std::size_t j) {
    const auto row = x.row(j);
    double acc = 0.0;
    double prev = g(row[0]);
    for (std::size_t k = 1; k < cols; ++k) {
      const double cur = g(row[k]);
      acc += 0.5 * h * (prev + cur);
      out[j * cols + k] = acc;
      prev = cur;
    }
  });
  return Grid2(x.tau_grid(), x.t_grid(), std::move(out));
}

Grid2 regulator_solve(const Grid2& y, const Kernel& k, Exec exec) {
  const std::size_t rows = y.rows();
  const std::size_t cols = y.cols();
  const auto& t = y.t_grid();
  std::vector<double> out(rows * cols);

  for_each_index(rows, exec, [&](std::size_t j) {
    const double s = y.tau_grid()[j];
    const auto forcing = y.row(j);
    double drift = 0.0;
    double x = forcing[0];
    out[j * cols] = x;
    for (std::size_t i = 1; i < cols; ++i) {
      drift += (t[i] - t[i - 1]) * k.h(x, s, t[i - 1]);
      x = forcing[i] + drift;
      if (!std::isfinite(x)) {
        throw DivergenceError("regulator_solve: non-finite state at tau=" +
                              format_double(s) + ", t=" + format_double(t[i]) +
                              "; refine the mesh");
      }
      out[j * cols + i] = x;
    }
  });
  return Grid2(y.tau_grid(), y.t_grid(), std::move(out));
}

// -------------------------------------------------------------- projection

StepPath project_diag(const Grid2& x, double shift) {
  const auto& tau = x.tau_grid();
  const double h = x.t_step();
  std::vector<double> vals(tau.size());
  for (std::size_t j = 0; j < tau.size(); ++j) {
    const double s = tau[j] + shift;
    if (s > x.t_max() * (1.0 + kNodeTol) + kNodeTol) {
      throw ShapeError("project_diag: tau + shift = " + format_double(s) +
                       " beyond inner horizon " + format_double(x.t_max()));
    }
    std::size_t k = 0;
    if (shift == 0.0) {
      const double kk = h > 0.0 ? std::round(s / h) : 0.0;
      if (std::abs(kk * h - s) > kNodeTol * std::max(1.0, s)) {
        throw ShapeError("project_diag: tau=" + format_double(s) +
                         " is not an inner grid node");
      }
      k = static_cast<std::size_t>(kk);
    } else {
      k = x.node_at(s);
    }
    vals[j] = x.at(j, k);
  }
  return StepPath(tau, std::move(vals), tau.back());
}

// ------------------------------------------------------ centering checks

CenteringCheck check_inverse_centering(
    const std::function<double(double, double)>& x_smooth,
    const std::vector<double>& c_list, double dt, double S, double T,
    std::size_t tau_points, Exec exec) {
  if (c_list.empty()) throw ConfigError("check_inverse_centering: empty c_list");
  if (tau_points < 1) throw ConfigError("check_inverse_centering: tau_points < 1");

  std::vector<double> tau(tau_points, 0.0);
  for (std::size_t j = 1; j < tau_points; ++j) {
    tau[j] = S * static_cast<double>(j) / static_cast<double>(tau_points - 1);
  }
  const auto levels = Grid2::uniform_axis(
      dt, static_cast<std::size_t>(std::floor(T / dt + kNodeTol)) + 1);

  // Bound on |x_smooth| to size the inner window so every level is exceeded.
  double bound = 0.0;
  for (double s : tau) {
    for (std::size_t k = 0; k <= 1000; ++k) {
      bound = std::max(bound, std::abs(x_smooth(s, (T + 1.0) * k / 1000.0)));
    }
  }

  CenteringCheck out;
  out.mesh_floor = 10.0 * dt;
  for (double c : c_list) {
    const double window = T + 2.0 * bound / c + 10.0 * dt;
    const auto inner = Grid2::uniform_axis(
        dt, static_cast<std::size_t>(std::ceil(window / dt)) + 1);
    auto xc = Grid2::tabulate(tau, inner, [&](double s, double u) {
      return u + x_smooth(s, u) / c;
    });
    for (std::size_t j = 0; j < xc.rows(); ++j) {
      const auto row = xc.row(j);
      for (std::size_t k = 1; k < row.size(); ++k) {
        if (!(row[k] > row[k - 1])) {
          throw DomainError("check_inverse_centering: e2 + x/c not increasing for c=" +
                            format_double(c) + "; increase c");
        }
      }
    }
    const auto inv = inverse2(xc, levels, Sampling::linear, exec);
    double err = 0.0;
    for (std::size_t j = 0; j < inv.rows(); ++j) {
      for (std::size_t k = 0; k < inv.cols(); ++k) {
        const double t = levels[k];
        err = std::max(err, std::abs(c * (inv.at(j, k) - t) + x_smooth(tau[j], t)));
      }
    }
    out.rows.push_back({c, err});
  }

  bool ok = out.rows.back().error <= out.mesh_floor;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const double e = out.rows[i].error;
    if (!(e <= out.rows[i - 1].error || e <= out.mesh_floor)) ok = false;
  }
  out.monotone_to_floor = ok;
  return out;
}

}  // namespace qlim
