#pragma once

#include "jacobi/linalg.hpp"
#include "jacobi/runtime.hpp"

namespace jacobi {

/// Result of a distributed solve: the outcome assembled on the deciding rank
/// plus the traffic every rank generated.
struct ParallelResult {
  SolveOutcome outcome;
  mp::CommStats stats;
};

}  // namespace jacobi
