#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qlim/exec.hpp"
#include "qlim/harness.hpp"

namespace qlim {

// Overrides for a verification suite; zero / empty fields take the suite's
// own defaults.
struct SuiteOptions {
  std::vector<std::int64_t> n_list;
  std::size_t reps = 0;
  std::size_t ref_reps = 0;
  double dt = 0.0;
  std::uint64_t seed = 20261015;
  Tolerances tol;
  Exec exec = Exec::parallel;
  bool timings = false;
};

// erlang-a, ed-steady, partial-sums, ed-fluid, ed-vwait, qed-vwait, diffusion,
// func2p, bounds
const std::vector<std::string>& suite_names();

// Throws ConfigError for an unknown name.
ScalingReport run_suite(const std::string& name, const SuiteOptions& opt = {});

}  // namespace qlim
