#pragma once

// Row-wise distributed Jacobi: rank R owns rows [R*m, (R+1)*m) of A and the
// matching blocks of b and x. Each iteration takes p steps; at step s the
// rank holds x-block (R + s) mod p, adds its contribution, then passes the
// block to rank R - 1 while receiving the next from rank R + 1.

#include <span>
#include <vector>

#include "jacobi/parallel.hpp"

namespace jacobi {

enum class ShiftMode { blocking, nonblocking };

/// Rank-local slice of the row-wise layout.
struct RowBlock {
  std::size_t owner = 0;
  std::size_t block_size = 0;  // m
  std::size_t n = 0;
  std::span<const double> rows;  // m x n, row-major view into A
  std::span<const double> b_part;
  std::span<const double> inverse_diagonal;  // 1 / a_ii for owned rows
  std::vector<double> accumulator;            // length m

  static RowBlock from_system(const SystemInstance& sys, const Partition& part,
                              std::size_t rank);
};

/// accumulator[i] += sum over columns j of block `block_id`, j != global i,
/// of a_ij * x_block[j - block_id*m].
void partial_accumulate(RowBlock& block, std::span<const double> x_block,
                        std::size_t block_id);

ParallelResult solve_rowwise(const SystemInstance& sys, std::size_t p, ShiftMode mode,
                             const SolveOptions& opts = {},
                             const mp::RunOptions& run = {});

}  // namespace jacobi
