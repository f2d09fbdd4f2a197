#include "jacobi/columnwise.hpp"

#include <algorithm>
#include <cassert>
#include <optional>

namespace jacobi {

IndexRange column_block_indices(std::size_t rank, std::size_t step,
                                const Partition& part) {
  const std::size_t m = part.block();
  const std::size_t start = ((rank + step) * m) % part.n();
  return {start, start + m};
}

ColumnBlock ColumnBlock::from_system(const SystemInstance& sys, const Partition& part,
                                     std::size_t rank) {
  const std::size_t n = sys.n();
  const std::size_t m = part.block();
  const auto cols = part.columns(rank);
  ColumnBlock block;
  block.owner = rank;
  block.start = cols.begin;
  block.block_size = m;
  block.n = n;
  block.slab.resize(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = sys.a().row(i);
    std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(cols.begin), m,
                block.slab.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  block.x_part.assign(sys.x0().begin() + cols.begin, sys.x0().begin() + cols.end);
  block.accumulator.assign(n, 0.0);
  return block;
}

void partial_product(ColumnBlock& block) {
  const std::size_t m = block.block_size;
  const std::size_t start = block.start;
  assert(block.slab.size() == block.n * m);
  assert(block.x_part.size() == m);
  for (std::size_t i = 0; i < block.n; ++i) {
    const double* row = block.slab.data() + i * m;
    double acc = block.accumulator[i];
    if (i >= start && i < start + m) {
      const std::size_t diag = i - start;
      for (std::size_t jj = 0; jj < diag; ++jj) acc += row[jj] * block.x_part[jj];
      for (std::size_t jj = diag + 1; jj < m; ++jj) acc += row[jj] * block.x_part[jj];
    } else {
      for (std::size_t jj = 0; jj < m; ++jj) acc += row[jj] * block.x_part[jj];
    }
    block.accumulator[i] = acc;
  }
}

ParallelResult solve_columnwise(const SystemInstance& sys, std::size_t p,
                                const SolveOptions& opts, const mp::RunOptions& run) {
  const auto part = make_partition(sys.n(), p);

  auto body = [&](mp::RankContext& ctx) -> std::optional<SolveOutcome> {
    const auto rank = static_cast<std::size_t>(ctx.rank());
    const std::size_t n = sys.n();
    const std::size_t m = part.block();
    const int up = static_cast<int>((rank + p - 1) % p);
    const int down = static_cast<int>((rank + 1) % p);
    const auto own = part.vector_block(rank);

    // Shifted slabs are discarded after use; each iteration restarts from home.
    const auto home = ColumnBlock::from_system(sys, part, rank);
    std::vector<double> x_own = home.x_part;
    std::vector<double> x_new(m);
    std::vector<double> inverse(m);
    for (std::size_t i = 0; i < m; ++i) inverse[i] = 1.0 / sys.a()(own.begin + i, own.begin + i);

    std::optional<SolveOutcome> outcome;
    std::vector<double> full_old;
    if (rank == 0) {
      outcome.emplace(SolveOutcome{sys.x0(), 0, false, {}, {}});
      full_old = sys.x0().values();
    }

    ColumnBlock held = home;
    std::vector<double> message(n * m + m);
    for (std::size_t k = 1;; ++k) {
      held.slab = home.slab;
      held.x_part = x_own;
      std::fill(held.accumulator.begin(), held.accumulator.end(), 0.0);

      for (std::size_t s = 0; s < p; ++s) {
        held.start = column_block_indices(rank, s, part).begin;
        partial_product(held);
        if (s + 1 < p) {
          // Slab and its x-block travel together: n*m + m values.
          std::copy(held.slab.begin(), held.slab.end(), message.begin());
          std::copy(held.x_part.begin(), held.x_part.end(),
                    message.begin() + static_cast<std::ptrdiff_t>(n * m));
          ctx.send(up, mp::tags::shift, message);
          auto incoming = ctx.recv(down, mp::tags::shift);
          std::copy_n(incoming.begin(), n * m, held.slab.begin());
          std::copy_n(incoming.begin() + static_cast<std::ptrdiff_t>(n * m), m,
                      held.x_part.begin());
        }
      }

      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t gi = own.begin + i;
        x_new[i] = (sys.b()[gi] - held.accumulator[gi]) * inverse[i];
      }

      auto full_new = ctx.gather(0, x_new);
      double verdict = 0.0;
      if (rank == 0) {
        const double d = euclidean_distance(full_new, full_old);
        outcome->distance_history.push_back(d);
        if (opts.record_iterates) outcome->iterates.push_back(full_new);
        verdict = mp::encode_verdict(d, should_stop(d, k, sys, opts));
        full_old = full_new;
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
