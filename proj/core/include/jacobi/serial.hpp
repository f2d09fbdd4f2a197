#pragma once

#include <span>

#include "jacobi/linalg.hpp"

namespace jacobi {

/// One Jacobi sweep: x_i = (b_i + sum_{j != i} (L + U)_ij x_prev_j) / a_ii,
/// summing j in ascending order.
DenseVector jacobi_step(const Splitting& splitting, const DenseVector& b,
                        const DenseVector& x_prev);

/// Allocation-free form of jacobi_step; `out` must not alias `x_prev`.
void jacobi_step_into(const Splitting& splitting, std::span<const double> b,
                      std::span<const double> x_prev, std::span<double> out);

/// Single-worker reference solver. The distance ||x^(k+1) - x^(k)|| is
/// checked after every step, including the first.
SolveOutcome solve_serial(const SystemInstance& sys, const SolveOptions& opts = {});

}  // namespace jacobi
