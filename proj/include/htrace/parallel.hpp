#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace htrace {

enum class Execution { serial, parallel };

// Runs body(i) for i in [0, n). Under Execution::parallel the iterations are
// spread over OpenMP threads; an exception from any iteration is rethrown
// after the loop, lowest index first, so both modes fail identically.
template <typename Body>
void for_each_index(std::size_t n, Execution mode, Body&& body) {
  std::vector<std::exception_ptr> failures(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (mode == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace htrace
