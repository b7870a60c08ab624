#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace qlim {

// Two-parameter function sampled on tau_grid x t_grid (stop-time x inner
// time). Rows are indexed by tau, columns by t. The inner axis is uniform.
class Grid2 {
 public:
  Grid2(std::vector<double> tau_grid, std::vector<double> t_grid,
        std::vector<double> values);

  static Grid2 tabulate(std::vector<double> tau_grid, std::vector<double> t_grid,
                        const std::function<double(double, double)>& f);

  // {0, step, 2 step, ..., (count - 1) step}
  static std::vector<double> uniform_axis(double step, std::size_t count);

  std::size_t rows() const { return tau_.size(); }
  std::size_t cols() const { return t_.size(); }
  const std::vector<double>& tau_grid() const { return tau_; }
  const std::vector<double>& t_grid() const { return t_; }
  double t_step() const { return t_.size() > 1 ? t_[1] - t_[0] : 0.0; }
  double t_max() const { return t_.back(); }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t j, std::size_t k) const { return values_[j * t_.size() + k]; }
  std::span<const double> row(std::size_t j) const {
    return {values_.data() + j * t_.size(), t_.size()};
  }

  // Largest inner-grid index whose node is <= s (right-continuous lookup).
  // Values of s past the last node map to the last index.
  std::size_t node_at(double s) const;

 private:
  std::vector<double> tau_;
  std::vector<double> t_;
  std::vector<double> values_;
};

// Max |x - y| over the shared grid nodes.
double sup_norm(const Grid2& x, const Grid2& y);

// Header row: a corner cell followed by t_grid; each body row starts with
// its tau value.
void write_grid2_csv(std::ostream& out, const Grid2& g);
Grid2 read_grid2_csv(std::istream& in);

}  // namespace qlim
