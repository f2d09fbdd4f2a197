#pragma once

// Column-wise distributed Jacobi: rank R starts each iteration with columns
// [R*m, (R+1)*m) of A and x-block R. Over p steps the n x m column slab is
// shifted to rank R - 1 along with its x-block, so every rank accumulates a
// full-length partial product.

#include <span>
#include <vector>

#include "jacobi/parallel.hpp"

namespace jacobi {

/// Columns held by rank R at step s: [((R+s)*m) mod n, ... + m - 1].
IndexRange column_block_indices(std::size_t rank, std::size_t step,
                                const Partition& part);

struct ColumnBlock {
  std::size_t owner = 0;
  std::size_t start = 0;  // first held column
  std::size_t block_size = 0;
  std::size_t n = 0;
  std::vector<double> slab;       // n x m, row-major: slab[i*m + jj] = a(i, start+jj)
  std::vector<double> x_part;     // length m
  std::vector<double> accumulator;  // length n

  /// Home slab of `rank` (step 0).
  static ColumnBlock from_system(const SystemInstance& sys, const Partition& part,
                                 std::size_t rank);
};

/// accumulator[i] += sum_{j in held columns, j != i} a_ij * x_part[j - start]
/// for every row i.
void partial_product(ColumnBlock& block);

ParallelResult solve_columnwise(const SystemInstance& sys, std::size_t p,
                                const SolveOptions& opts = {},
                                const mp::RunOptions& run = {});

}  // namespace jacobi
