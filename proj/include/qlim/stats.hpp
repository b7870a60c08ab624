#pragma once

#include <cstddef>
#include <vector>

namespace qlim {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;  // asymptotic, Stephens-corrected
};

// Two-sample Kolmogorov-Smirnov test. Inputs need not be sorted.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double var = 0.0;      // unbiased
  double mean_se = 0.0;
  double var_se = 0.0;   // from the fourth central moment
};

Moments moments(const std::vector<double>& x);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t used = 0;
};

// Least-squares fit of log(error) against log(n); nonpositive errors are
// dropped, and at least three points must remain.
RateFit rate_fit(const std::vector<double>& n, const std::vector<double>& errors);

// True when every value is <= the previous one plus `slack`.
bool nonincreasing_with_slack(const std::vector<double>& v, double slack);

}  // namespace qlim
