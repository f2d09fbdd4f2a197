#include <gtest/gtest.h>

#include <random>

#include "jacobi/onesided.hpp"
#include "oracles.hpp"
#include "solver_fixtures.hpp"

using namespace jacobi;
using jacobi::testing::fixed_instance;
using jacobi::testing::fixed_recorded;

TEST(TargetDistanceAndSwap, EqualVectorsGiveZero) {
  std::vector<double> old_x{1.0, 2.0};
  const std::vector<double> new_x{1.0, 2.0};
  EXPECT_EQ(target_distance_and_swap(old_x, new_x), 0.0);
  EXPECT_EQ(old_x, new_x);
}

TEST(TargetDistanceAndSwap, ThreeFourFive) {
  std::vector<double> old_x{0.0, 0.0};
  const std::vector<double> new_x{3.0, 4.0};
  EXPECT_EQ(target_distance_and_swap(old_x, new_x), 5.0);
  EXPECT_EQ(old_x, new_x);
}

TEST(TargetDistanceAndSwap, MatchesEuclideanDistance) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(17), b(17);
    for (auto& v : a) v = dist(gen);
    for (auto& v : b) v = dist(gen);
    const double expected = euclidean_distance(b, a);
    EXPECT_EQ(target_distance_and_swap(a, b), expected);
  }
}

TEST(TargetDistanceAndSwap, RejectsNonTarget) {
  EXPECT_THROW(mp::run_spmd(2, [](mp::RankContext& ctx) {
                 WindowLayout layout{ctx.window_create(1, 2), ctx.window_create(1, 2), 1};
                 if (ctx.rank() == 0) target_distance_and_swap(ctx, layout);
               }),
               mp::NotOwner);
}

TEST(GroupPair, WorkersAndTargetPartitionTheWorld) {
  const auto g = GroupPair::for_workers(3);
  EXPECT_EQ(g.origins.members(), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(g.target.members(), std::vector<int>{3});
}

TEST(SolveOnesided, SingleWorkerIsBitwiseSerial) {
  const auto sys = fixed_instance(16, 42);
  const auto serial = solve_serial(sys, fixed_recorded());
  const auto par = solve_onesided(sys, 1, fixed_recorded());
  EXPECT_EQ(par.outcome.iterates, serial.iterates);
  EXPECT_EQ(par.outcome.distance_history, serial.distance_history);
  EXPECT_EQ(par.outcome.x, serial.x);
}

TEST(SolveOnesided, WithinOneUlpOfSerial) {
  const auto sys = fixed_instance(8, 42);
  const auto serial = solve_serial(sys, fixed_recorded());
  for (std::size_t p : {2u, 4u}) {
    const auto par = solve_onesided(sys, p, fixed_recorded());
    ASSERT_EQ(par.outcome.iterates.size(), serial.iterates.size());
    for (std::size_t k = 0; k < serial.iterates.size(); ++k) {
      for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_LE(jacobi::testing::ulp_distance(par.outcome.iterates[k][i], serial.iterates[k][i]),
                  1u);
      }
    }
    for (std::size_t k = 0; k < serial.distance_history.size(); ++k) {
      EXPECT_TRUE(jacobi::testing::close_relative(par.outcome.distance_history[k],
                                                  serial.distance_history[k], 1e-12));
    }
  }
}

TEST(SolveOnesided, StopsOnToleranceLikeSerial) {
  const auto sys = bench::generate_system(16, 9, true, 1e-10, 10000);
  const auto serial = solve_serial(sys);
  const auto par = solve_onesided(sys, 4);
  EXPECT_TRUE(par.outcome.converged);
  EXPECT_EQ(par.outcome.iterations, serial.iterations);
}

TEST(SolveOnesided, HandTracedEpochTraffic) {
  // p = 2, n = 4: per iteration a worker gets 4 values and puts 2.
  const auto sys = fixed_instance(4, 42, 1);
  const auto par = solve_onesided(sys, 2, fixed_recorded());
  for (int r = 0; r < 2; ++r) {
    EXPECT_EQ(par.stats.rank(r).window_get_bytes, 32u);
    EXPECT_EQ(par.stats.rank(r).window_put_bytes, 16u + 16u);  // initial block + one iteration
  }
  EXPECT_EQ(par.stats.rank(2).window_put_bytes, 0u);
  EXPECT_EQ(par.stats.rank(2).window_get_bytes, 0u);
  EXPECT_EQ(par.stats.rank(2).p2p_bytes, 0u);
}

TEST(SolveOnesided, TrafficMatchesClosedForms) {
  const std::size_t n = 16;
  const std::size_t iters = 6;
  const auto sys = fixed_instance(n, 43, iters);
  for (std::size_t p : {1u, 2u, 4u, 8u}) {
    const std::size_t m = n / p;
    const auto par = solve_onesided(sys, p, fixed_recorded());
    for (std::size_t r = 0; r < p; ++r) {
      EXPECT_EQ(par.stats.rank(r).window_get_bytes, iters * n * 8);
      EXPECT_EQ(par.stats.rank(r).window_put_bytes, (iters + 1) * m * 8);
    }
    EXPECT_EQ(par.stats.rank(p).collective_bytes, iters * p * 8);
    // Initial distribution: rows, b block and x0 block to every other worker.
    EXPECT_EQ(par.stats.rank(0).p2p_bytes, (p - 1) * (m * n + 2 * m) * 8);
  }
}

TEST(SolveOnesided, WindowAccessSetsAreDisjoint) {
  const auto sys = fixed_instance(16, 44, 5);
  mp::RunOptions run;
  run.record_window_access = true;
  const auto par = solve_onesided(sys, 4, fixed_recorded(), run);
  ASSERT_FALSE(par.old_window_log.empty());
  ASSERT_FALSE(par.new_window_log.empty());
  // Exposure epoch 1 of the old window is the initial fill; from then on
  // workers only read x^(k) and only write x^(k+1).
  for (const auto& a : par.old_window_log) {
    if (a.epoch > 1) EXPECT_EQ(a.op, mp::WindowOp::get);
  }
  for (const auto& a : par.new_window_log) EXPECT_EQ(a.op, mp::WindowOp::put);
  // Within an epoch, puts into new_x from different workers never overlap.
  for (const auto& a : par.new_window_log) {
    for (const auto& b : par.new_window_log) {
      if (&a == &b || a.epoch != b.epoch) continue;
      EXPECT_TRUE(a.offset + a.length <= b.offset || b.offset + b.length <= a.offset);
    }
  }
}
