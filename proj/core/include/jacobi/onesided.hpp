#pragma once

// One-sided Jacobi: p worker ranks plus a target rank (rank p) that owns two
// windows holding x^(k) and x^(k+1). Workers fetch x^(k) with get, put their
// block of x^(k+1), and the target measures the step distance, copies
// new -> old locally and broadcasts the verdict.

#include <span>
#include <vector>

#include "jacobi/parallel.hpp"

namespace jacobi {

struct WindowLayout {
  mp::Window old_x;  // x^(k)
  mp::Window new_x;  // x^(k+1)
  int target = 0;
};

struct GroupPair {
  mp::ProcessGroup origins;
  mp::ProcessGroup target;

  static GroupPair for_workers(int workers);
};

/// Returns ||new - old|| and then copies new into old.
double target_distance_and_swap(std::span<double> old_x, std::span<const double> new_x);

/// Window form; throws mp::NotOwner unless called on the target.
double target_distance_and_swap(mp::RankContext& ctx, const WindowLayout& layout);

struct OnesidedResult : ParallelResult {
  /// Put/get logs of both windows; filled when run.record_window_access.
  std::vector<mp::WindowAccess> old_window_log;
  std::vector<mp::WindowAccess> new_window_log;
};

/// `p` is the worker count; the job runs on p + 1 ranks.
OnesidedResult solve_onesided(const SystemInstance& sys, std::size_t p,
                              const SolveOptions& opts = {},
                              const mp::RunOptions& run = {});

}  // namespace jacobi
