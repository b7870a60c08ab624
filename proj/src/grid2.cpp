#include "qlim/grid2.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qlim/errors.hpp"
#include "qlim/paths.hpp"

namespace qlim {

namespace {

constexpr double kUniformTol = 1e-9;

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw ShapeError(std::string(name) + " is empty");
  if (axis.front() != 0.0) throw DomainError(std::string(name) + " must start at 0");
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw DomainError(std::string(name) + " must be strictly increasing");
    }
  }
}

}  // namespace

Grid2::Grid2(std::vector<double> tau_grid, std::vector<double> t_grid,
             std::vector<double> values)
    : tau_(std::move(tau_grid)), t_(std::move(t_grid)), values_(std::move(values)) {
  check_axis(tau_, "tau_grid");
  check_axis(t_, "t_grid");
  if (t_.size() > 2) {
    const double h = t_[1] - t_[0];
    for (std::size_t k = 2; k < t_.size(); ++k) {
      if (std::abs((t_[k] - t_[k - 1]) - h) > kUniformTol * std::max(1.0, t_[k])) {
        throw ShapeError("t_grid mesh must be uniform");
      }
    }
  }
  if (values_.size() != tau_.size() * t_.size()) {
    throw ShapeError("Grid2 values size does not match grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("Grid2 value not finite");
  }
}

Grid2 Grid2::tabulate(std::vector<double> tau_grid, std::vector<double> t_grid,
                      const std::function<double(double, double)>& f) {
  std::vector<double> v;
  v.reserve(tau_grid.size() * t_grid.size());
  for (double s : tau_grid) {
    for (double t : t_grid) v.push_back(f(s, t));
  }
  return Grid2(std::move(tau_grid), std::move(t_grid), std::move(v));
}

std::vector<double> Grid2::uniform_axis(double step, std::size_t count) {
  if (!(step > 0.0) && count > 1) throw DomainError("uniform_axis: step must be > 0");
  std::vector<double> a(count);
  for (std::size_t k = 0; k < count; ++k) a[k] = static_cast<double>(k) * step;
  return a;
}

std::size_t Grid2::node_at(double s) const {
  if (s < 0.0) throw DomainError("Grid2 lookup at negative time");
  if (t_.size() == 1) return 0;
  const double h = t_step();
  const double k = std::floor(s / h + kUniformTol);
  if (k >= static_cast<double>(t_.size() - 1)) return t_.size() - 1;
  return static_cast<std::size_t>(k);
}

double sup_norm(const Grid2& x, const Grid2& y) {
  if (x.tau_grid() != y.tau_grid() || x.t_grid() != y.t_grid()) {
    throw ShapeError("sup_norm: grids differ");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    best = std::max(best, std::abs(x.values()[i] - y.values()[i]));
  }
  return best;
}

void write_grid2_csv(std::ostream& out, const Grid2& g) {
  out << "tau\\t";
  for (double t : g.t_grid()) out << ',' << format_double(t);
  out << '\n';
  for (std::size_t j = 0; j < g.rows(); ++j) {
    out << format_double(g.tau_grid()[j]);
    for (double v : g.row(j)) out << ',' << format_double(v);
    out << '\n';
  }
}

Grid2 read_grid2_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream s(line);
    std::string c;
    while (std::getline(s, c, ',')) cells.push_back(c);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw ShapeError("Grid2 CSV: missing header");
  auto header = split(line);
  if (header.size() < 2) throw ShapeError("Grid2 CSV: header has no t values");
  std::vector<double> t;
  for (std::size_t i = 1; i < header.size(); ++i) t.push_back(std::stod(header[i]));
  std::vector<double> tau;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size()) throw ShapeError("Grid2 CSV: ragged row");
    tau.push_back(std::stod(cells[0]));
    for (std::size_t i = 1; i < cells.size(); ++i) values.push_back(std::stod(cells[i]));
  }
  return Grid2(std::move(tau), std::move(t), std::move(values));
}

}  // namespace qlim
