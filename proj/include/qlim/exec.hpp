#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace qlim {

// Execution policy for data-parallel kernels. `serial` is the reference
// implementation; `parallel` fans out with OpenMP and must produce identical
// results because every index writes only its own output slot.
enum class Exec { serial, parallel };

// Calls fn(i) for i in [0, count). Under Exec::parallel an exception thrown
// by any index is captured and the one from the lowest index is rethrown
// after the loop, so both policies report the same error.
template <class Fn>
void for_each_index(std::size_t count, Exec exec, Fn&& fn) {
  if (exec == Exec::serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace qlim
