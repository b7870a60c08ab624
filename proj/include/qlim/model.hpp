#pragma once

#include <cstdint>

namespace qlim {

// Erlang-A (M/M/n+M) parameters for a single system. `lambda` is the arrival
// rate of this system, i.e. already the n-th element of a regime sequence.
struct ModelParams {
  std::int64_t n = 1;
  double lambda = 1.0;
  double mu = 1.0;
  double theta = 1.0;

  void validate() const;

  // Total departure rate (service + abandonment) in state k.
  double death_rate(std::int64_t k) const {
    const auto busy = k < n ? k : n;
    const auto queued = k > n ? k - n : 0;
    return static_cast<double>(busy) * mu + static_cast<double>(queued) * theta;
  }
};

}  // namespace qlim
