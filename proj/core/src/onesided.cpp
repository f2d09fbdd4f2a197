#include "jacobi/onesided.hpp"

#include <algorithm>
#include <optional>

namespace jacobi {

GroupPair GroupPair::for_workers(int workers) {
  return {mp::ProcessGroup::range(0, workers - 1), mp::ProcessGroup({workers})};
}

double target_distance_and_swap(std::span<double> old_x, std::span<const double> new_x) {
  const double d = euclidean_distance(new_x, old_x);
  std::copy(new_x.begin(), new_x.end(), old_x.begin());
  return d;
}

double target_distance_and_swap(mp::RankContext& ctx, const WindowLayout& layout) {
  if (ctx.rank() != layout.target) throw mp::NotOwner(ctx.rank(), layout.target);
  auto old_x = ctx.local_window(layout.old_x);
  auto new_x = ctx.local_window(layout.new_x);
  return target_distance_and_swap(old_x, new_x);
}

namespace {

struct WorkerData {
  std::vector<double> rows;  // m x n
  std::vector<double> b_part;
  std::vector<double> x_part;
};

// Step (1): rank 0 hands every other worker its rows of A and blocks of b, x0.
WorkerData distribute(mp::RankContext& ctx, const SystemInstance& sys,
                      const Partition& part, int workers) {
  const std::size_t n = sys.n();
  const std::size_t m = part.block();
  auto slice = [&](std::size_t r) {
    const auto range = part.rows(r);
    const auto b = sys.b().span().subspan(range.begin, m);
    const auto x = sys.x0().span().subspan(range.begin, m);
    const auto a = sys.a().entries().subspan(range.begin * n, m * n);
    return WorkerData{{a.begin(), a.end()}, {b.begin(), b.end()}, {x.begin(), x.end()}};
  };
  if (ctx.rank() == 0) {
    for (int r = 1; r < workers; ++r) {
      auto d = slice(static_cast<std::size_t>(r));
      ctx.send(r, mp::tags::control, d.rows);
      ctx.send(r, mp::tags::control, d.b_part);
      ctx.send(r, mp::tags::control, d.x_part);
    }
    return slice(0);
  }
  WorkerData d;
  d.rows = ctx.recv(0, mp::tags::control);
  d.b_part = ctx.recv(0, mp::tags::control);
  d.x_part = ctx.recv(0, mp::tags::control);
  return d;
}

}  // namespace

OnesidedResult solve_onesided(const SystemInstance& sys, std::size_t p,
                              const SolveOptions& opts, const mp::RunOptions& run) {
  const auto part = make_partition(sys.n(), p);
  const int workers = static_cast<int>(p);
  const int target = workers;
  const auto groups = GroupPair::for_workers(workers);

  std::vector<mp::WindowAccess> old_log;
  std::vector<mp::WindowAccess> new_log;

  auto body = [&](mp::RankContext& ctx) -> std::optional<SolveOutcome> {
    const std::size_t n = sys.n();
    const std::size_t m = part.block();
    const bool is_target = ctx.rank() == target;

    WorkerData data;
    if (!is_target) data = distribute(ctx, sys, part, workers);

    // Step (2): both windows live on the target only.
    WindowLayout layout{ctx.window_create(target, n), ctx.window_create(target, n), target};

    if (is_target) {
      // Step (3): collect the initial x0 blocks.
      ctx.window_post(layout.old_x, groups.origins);
      ctx.window_wait(layout.old_x);

      SolveOutcome outcome{sys.x0(), 0, false, {}, {}};
      for (std::size_t k = 1;; ++k) {
        ctx.window_post(layout.old_x, groups.origins);
        ctx.window_post(layout.new_x, groups.origins);
        ctx.window_wait(layout.old_x);
        ctx.window_wait(layout.new_x);

        if (opts.record_iterates) {
          auto fresh = ctx.local_window(layout.new_x);
          outcome.iterates.emplace_back(fresh.begin(), fresh.end());
        }
        const double d = target_distance_and_swap(ctx, layout);
        outcome.distance_history.push_back(d);
        const bool stop = should_stop(d, k, sys, opts);
        ctx.broadcast(target, mp::encode_verdict(d, stop));
        if (stop) {
          auto final_x = ctx.local_window(layout.old_x);
          outcome.x = DenseVector({final_x.begin(), final_x.end()}, kUnchecked);
          outcome.iterations = k;
          outcome.converged = d < sys.tol();
          break;
        }
      }
      if (run.record_window_access) {
        old_log = layout.old_x.access_log();
        new_log = layout.new_x.access_log();
      }
      return outcome;
    }

    const auto rank = static_cast<std::size_t>(ctx.rank());
    const std::size_t offset = rank * m;
    std::vector<double> inverse(m);
    for (std::size_t i = 0; i < m; ++i) {
      inverse[i] = 1.0 / data.rows[i * n + offset + i];
    }

    ctx.window_start(layout.old_x, groups.target);
    ctx.put(layout.old_x, offset, data.x_part);
    ctx.window_complete(layout.old_x);

    std::vector<double> x_block(m);
    for (;;) {
      ctx.window_start(layout.old_x, groups.target);
      ctx.window_start(layout.new_x, groups.target);
      const auto x = ctx.get(layout.old_x, 0, n);
      for (std::size_t i = 0; i < m; ++i) {
        const double* row = data.rows.data() + i * n;
        const std::size_t gi = offset + i;
        double acc = 0.0;
        for (std::size_t j = 0; j < gi; ++j) acc += row[j] * x[j];
        for (std::size_t j = gi + 1; j < n; ++j) acc += row[j] * x[j];
        x_block[i] = (data.b_part[i] - acc) * inverse[i];
      }
      ctx.put(layout.new_x, offset, x_block);
      ctx.window_complete(layout.old_x);
      ctx.window_complete(layout.new_x);

      const double verdict = ctx.broadcast(target, 0.0);
      if (mp::verdict_stops(verdict)) break;
    }
    return std::nullopt;
  };

  auto spmd = mp::run_spmd(workers + 1, body, run);
  return OnesidedResult{
      ParallelResult{std::move(*spmd.results[target]), std::move(spmd.stats)},
      std::move(old_log), std::move(new_log)};
}

}  // namespace jacobi
