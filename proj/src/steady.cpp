#include "qlim/steady.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <ostream>

#include "qlim/errors.hpp"
#include "qlim/paths.hpp"
#include "qlim/sim_mm.hpp"

namespace qlim {

StationaryDist stationary_dist(const ModelParams& p, double tail_tol) {
  p.validate();
  if (!(tail_tol > 0.0)) throw ConfigError("tail_tol must be > 0");

  // Birth-death ratios r_k = lambda / rate(k) are nonincreasing, so once
  // r_{K+1} < 1 the tail past K is bounded by pi_K r_{K+1} / (1 - r_{K+1}).
  const double log_tol = std::log(tail_tol);
  std::vector<double> logw{0.0};
  double log_sum = 0.0;
  double tail_bound_log = -INFINITY;
  for (std::int64_t k = 1;; ++k) {
    const double r = p.lambda / p.death_rate(k);
    if (r < 1.0) {
      const double lb = logw.back() + std::log(r) - std::log1p(-r);
      if (lb - log_sum < log_tol || r == 0.0) {
        tail_bound_log = lb - log_sum;
        break;
      }
    }
    logw.push_back(logw.back() + std::log(r));
    const double hi = std::max(log_sum, logw.back());
    log_sum = hi + std::log(std::exp(log_sum - hi) + std::exp(logw.back() - hi));
    if (logw.size() > 50'000'000) throw DomainError("stationary_dist: truncation too large");
  }

  // Values are propagated multiplicatively from the mode so that detailed
  // balance holds to rounding in every ratio.
  const std::size_t K = logw.size() - 1;
  const auto mode = static_cast<std::size_t>(
      std::max_element(logw.begin(), logw.end()) - logw.begin());
  std::vector<double> w(K + 1, 0.0);
  w[mode] = 1.0;
  for (std::size_t k = mode; k < K; ++k) {
    w[k + 1] = w[k] * (p.lambda / p.death_rate(static_cast<std::int64_t>(k + 1)));
  }
  for (std::size_t k = mode; k > 0; --k) {
    w[k - 1] = w[k] * (p.death_rate(static_cast<std::int64_t>(k)) / p.lambda);
  }
  double total = 0.0;
  for (double v : w) total += v;

  StationaryDist d;
  d.params = p;
  d.truncation = K;
  d.tail_mass_bound = std::exp(tail_bound_log);
  d.probabilities.resize(K + 1);
  d.cdf.resize(K + 1);
  double acc = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    d.probabilities[k] = w[k] / total;
    acc += d.probabilities[k];
    d.cdf[k] = acc;
  }
  return d;
}

double StationaryDist::mass() const {
  double s = 0.0;
  for (double v : probabilities) s += v;
  return s;
}

double StationaryDist::detailed_balance_residual() const {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
    const double a = params.lambda * probabilities[k];
    const double b = params.death_rate(static_cast<std::int64_t>(k + 1)) * probabilities[k + 1];
    const double m = std::max(a, b);
    if (m < DBL_MIN || std::min(a, b) < DBL_MIN) continue;
    worst = std::max(worst, std::abs(a - b) / m);
  }
  return worst;
}

std::int64_t StationaryDist::sample(Stream& rng) const {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto k = static_cast<std::int64_t>(it - cdf.begin());
  return std::min<std::int64_t>(k, static_cast<std::int64_t>(truncation));
}

double StationaryDist::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    m += static_cast<double>(k) * probabilities[k];
  }
  return m;
}

void write_stationary_csv(std::ostream& out, const StationaryDist& d) {
  out << "k,pi\n";
  for (std::size_t k = 0; k < d.probabilities.size(); ++k) {
    out << k << ',' << format_double(d.probabilities[k]) << '\n';
  }
}

double stationary_vwait_sample(const StationaryDist& d, Stream& rng) {
  return sample_virtual_wait(d.params, d.sample(rng), rng);
}

double stationary_vwait_mean(const StationaryDist& d) {
  const auto& p = d.params;
  const auto n = static_cast<double>(p.n);
  double total = 0.0;
  double inner = 0.0;  // sum_{i=1}^{Q} 1 / (n mu + i theta)
  for (std::size_t k = 0; k < d.probabilities.size(); ++k) {
    const auto q = static_cast<std::int64_t>(k) - p.n;
    if (q > 0) inner += 1.0 / (n * p.mu + static_cast<double>(q) * p.theta);
    total += d.probabilities[k] * inner;
  }
  return total;
}

CAndD c_and_d(double t, double mu, double theta) {
  if (t < 0.0) throw DomainError("c_and_d: t must be >= 0");
  return {std::log1p(theta * t / mu) / theta, t / (mu * (mu + theta * t))};
}

CltTable partial_sum_clt_check(std::int64_t n, double mu, double theta,
                               const std::vector<double>& t_grid, std::size_t reps,
                               std::uint64_t seed, Exec exec) {
  if (n < 1 || reps < 2) throw ConfigError("partial_sum_clt_check: need n >= 1, reps >= 2");
  if (t_grid.empty()) throw ConfigError("partial_sum_clt_check: empty t grid");
  const auto m = t_grid.size();
  std::vector<std::int64_t> last(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (t_grid[j] < 0.0) throw DomainError("partial_sum_clt_check: negative t");
    last[j] = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * t_grid[j]));
  }
  const auto top = *std::max_element(last.begin(), last.end());
  const double root_n = std::sqrt(static_cast<double>(n));
  const auto nd = static_cast<double>(n);

  std::vector<double> z(reps * m);
  for_each_index(reps, exec, [&](std::size_t r) {
    Stream rng(seed, r, purpose_tag(Purpose::property, static_cast<std::uint64_t>(n)));
    std::vector<double> partial(static_cast<std::size_t>(top) + 1);
    double s = 0.0;
    for (std::int64_t i = 0; i <= top; ++i) {
      s += rng.exponential(nd * mu + static_cast<double>(i) * theta);
      partial[static_cast<std::size_t>(i)] = s;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double c = c_and_d(t_grid[j], mu, theta).c;
      z[r * m + j] = root_n * (partial[static_cast<std::size_t>(last[j])] - c);
    }
  });

  const auto R = static_cast<double>(reps);
  CltTable out;
  std::vector<double> means(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double s1 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) s1 += z[r * m + j];
    means[j] = s1 / R;
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double d = z[r * m + j] - means[j];
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double var = m2 / (R - 1.0);
    const double cd = m4 / R;
    const auto cdv = c_and_d(t_grid[j], mu, theta);
    out.rows.push_back({t_grid[j], cdv.c, cdv.d, means[j], std::sqrt(var / R), var,
                        std::sqrt(std::max(0.0, cd - var * var) / R)});
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double v = (z[r * m + a] - means[a]) * (z[r * m + b] - means[b]);
        s1 += v;
        s2 += v * v;
      }
      const double cov = s1 / (R - 1.0);
      const double var_prod = std::max(0.0, s2 / R - (s1 / R) * (s1 / R));
      const double lo = std::min(t_grid[a], t_grid[b]);
      out.covariances.push_back({t_grid[a], t_grid[b], cov, std::sqrt(var_prod / R),
                                 c_and_d(lo, mu, theta).d});
    }
  }
  return out;
}

}  // namespace qlim
