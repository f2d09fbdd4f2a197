#include "jacobi/rowwise.hpp"

#include <algorithm>
#include <cassert>
#include <optional>

namespace jacobi {

RowBlock RowBlock::from_system(const SystemInstance& sys, const Partition& part,
                               std::size_t rank) {
  const auto rows = part.rows(rank);
  const std::size_t n = sys.n();
  RowBlock block;
  block.owner = rank;
  block.block_size = part.block();
  block.n = n;
  block.rows = sys.a().entries().subspan(rows.begin * n, rows.size() * n);
  block.b_part = sys.b().span().subspan(rows.begin, rows.size());
  block.accumulator.assign(rows.size(), 0.0);
  return block;
}

void partial_accumulate(RowBlock& block, std::span<const double> x_block,
                        std::size_t block_id) {
  const std::size_t m = block.block_size;
  const std::size_t n = block.n;
  const std::size_t offset = block_id * m;
  assert(x_block.size() == m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = block.rows.subspan(i * n + offset, m);
    double acc = block.accumulator[i];
    if (block_id == block.owner) {
      // Diagonal entry a_ii sits at local column i of the own block.
      for (std::size_t jj = 0; jj < i; ++jj) acc += row[jj] * x_block[jj];
      for (std::size_t jj = i + 1; jj < m; ++jj) acc += row[jj] * x_block[jj];
    } else {
      for (std::size_t jj = 0; jj < m; ++jj) acc += row[jj] * x_block[jj];
    }
    block.accumulator[i] = acc;
  }
}

ParallelResult solve_rowwise(const SystemInstance& sys, std::size_t p, ShiftMode mode,
                             const SolveOptions& opts, const mp::RunOptions& run) {
  const auto part = make_partition(sys.n(), p);
  const auto splitting_inverse = [&] {
    std::vector<double> inv(sys.n());
    for (std::size_t i = 0; i < sys.n(); ++i) inv[i] = 1.0 / sys.a()(i, i);
    return inv;
  }();

  auto body = [&](mp::RankContext& ctx) -> std::optional<SolveOutcome> {
    const auto rank = static_cast<std::size_t>(ctx.rank());
    const std::size_t m = part.block();
    const int up = static_cast<int>((rank + p - 1) % p);
    const int down = static_cast<int>((rank + 1) % p);
    const auto own = part.vector_block(rank);

    auto block = RowBlock::from_system(sys, part, rank);
    block.inverse_diagonal = std::span<const double>(splitting_inverse).subspan(own.begin, m);

    std::vector<double> x_own(sys.x0().begin() + own.begin, sys.x0().begin() + own.end);
    std::vector<double> x_new(m);

    std::optional<SolveOutcome> outcome;
    if (rank == 0) outcome.emplace(SolveOutcome{sys.x0(), 0, false, {}, {}});

    for (std::size_t k = 1;; ++k) {
      std::fill(block.accumulator.begin(), block.accumulator.end(), 0.0);
      std::vector<double> held = x_own;
#ifndef NDEBUG
      std::vector<bool> visited(p, false);
#endif
      for (std::size_t s = 0; s < p; ++s) {
        const std::size_t block_id = (rank + s) % p;
#ifndef NDEBUG
        assert(!visited[block_id]);
        visited[block_id] = true;
#endif
        const bool shift = s + 1 < p;
        if (shift && mode == ShiftMode::nonblocking) {
          auto sent = ctx.isend(up, mp::tags::shift, held);
          auto incoming = ctx.irecv(down, mp::tags::shift);
          partial_accumulate(block, held, block_id);
          sent.wait();
          held = incoming.wait();
          continue;
        }
        partial_accumulate(block, held, block_id);
        if (shift) {
          ctx.send(up, mp::tags::shift, held);
          held = ctx.recv(down, mp::tags::shift);
        }
      }

      for (std::size_t i = 0; i < m; ++i) {
        x_new[i] = (block.b_part[i] - block.accumulator[i]) * block.inverse_diagonal[i];
      }

      auto full_new = ctx.gather(0, x_new);
      auto full_old = ctx.gather(0, x_own);
      double verdict = 0.0;
      if (rank == 0) {
        const double d = euclidean_distance(full_new, full_old);
        outcome->distance_history.push_back(d);
        if (opts.record_iterates) outcome->iterates.push_back(full_new);
        verdict = mp::encode_verdict(d, should_stop(d, k, sys, opts));
      }
      verdict = ctx.broadcast(0, verdict);
      x_own.swap(x_new);

      if (mp::verdict_stops(verdict)) {
        if (rank == 0) {
          outcome->iterations = k;
          outcome->converged = mp::verdict_distance(verdict) < sys.tol();
          outcome->x = DenseVector(std::move(full_new), kUnchecked);
        }
        break;
      }
    }
    return outcome;
  };

  auto spmd = mp::run_spmd(static_cast<int>(p), body, run);
  return {std::move(*spmd.results[0]), std::move(spmd.stats)};
}

}  // namespace jacobi
