#pragma once

#include <cstdint>

#include "jacobi/bench.hpp"
#include "jacobi/serial.hpp"

namespace jacobi::testing {

/// Dominant random instance run for exactly `iters` steps.
inline SystemInstance fixed_instance(std::size_t n, std::uint64_t seed, std::size_t iters = 50) {
  return bench::generate_system(n, seed, true, 1e-8, iters);
}

inline SolveOptions fixed_recorded() {
  SolveOptions o;
  o.fixed_iterations = true;
  o.record_iterates = true;
  return o;
}

}  // namespace jacobi::testing
