#include <gtest/gtest.h>

#include "jacobi/rowwise.hpp"
#include "oracles.hpp"
#include "solver_fixtures.hpp"

using namespace jacobi;
using jacobi::testing::fixed_instance;
using jacobi::testing::fixed_recorded;

namespace {

SystemInstance small_system(DenseMatrix a) {
  const std::size_t n = a.rows();
  return SystemInstance(std::move(a), DenseVector::zeros(n), DenseVector::zeros(n), 1e-8, 10);
}

}  // namespace

TEST(PartialAccumulate, OffDiagonalBlockAddsSingleTerm) {
  const auto sys = small_system(DenseMatrix{{2, 1}, {1, 3}});
  const auto part = make_partition(2, 2);
  auto block = RowBlock::from_system(sys, part, 0);
  partial_accumulate(block, std::vector<double>{5.0}, 1);
  EXPECT_EQ(block.accumulator, std::vector<double>{5.0});
}

TEST(PartialAccumulate, OwnBlockOfDiagonalMatrixIsSkipped) {
  const auto sys = small_system(DenseMatrix{{2, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 4, 0}, {0, 0, 0, 5}});
  const auto part = make_partition(4, 2);
  for (std::size_t r = 0; r < 2; ++r) {
    auto block = RowBlock::from_system(sys, part, r);
    partial_accumulate(block, std::vector<double>{7.0, 9.0}, r);
    EXPECT_EQ(block.accumulator, (std::vector<double>{0.0, 0.0}));
  }
}

TEST(PartialAccumulate, StepsSumToOffDiagonalProduct) {
  const DenseMatrix a{{4, 1, 2, 0.5}, {1, 5, 1, 1}, {0.25, 2, 6, 1}, {1, 1, 1, 7}};
  const auto sys = small_system(a);
  const std::vector<double> x{1.5, -2.0, 0.75, 3.0};
  const auto part = make_partition(4, 2);
  const auto oracle = jacobi::testing::off_diagonal_product(a, x);
  for (std::size_t r = 0; r < 2; ++r) {
    auto block = RowBlock::from_system(sys, part, r);
    for (std::size_t s = 0; s < 2; ++s) {
      const std::size_t id = (r + s) % 2;
      partial_accumulate(block, std::span<const double>(x).subspan(id * 2, 2), id);
    }
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_TRUE(jacobi::testing::close_relative(block.accumulator[i], oracle[r * 2 + i], 1e-15));
    }
  }
}

TEST(SolveRowwise, SingleRankIsBitwiseSerial) {
  const auto sys = fixed_instance(16, 42);
  const auto serial = solve_serial(sys, fixed_recorded());
  for (auto mode : {ShiftMode::blocking, ShiftMode::nonblocking}) {
    const auto par = solve_rowwise(sys, 1, mode, fixed_recorded());
    EXPECT_EQ(par.outcome.iterates, serial.iterates);
    EXPECT_EQ(par.outcome.distance_history, serial.distance_history);
    EXPECT_EQ(par.outcome.x, serial.x);
    EXPECT_EQ(par.stats.total().p2p_bytes, 0u);
  }
}

TEST(SolveRowwise, MatchesSerialAcrossRankCounts) {
  const auto sys = fixed_instance(8, 42);
  const auto serial = solve_serial(sys, fixed_recorded());
  for (std::size_t p : {2u, 4u, 8u}) {
    const auto par = solve_rowwise(sys, p, ShiftMode::blocking, fixed_recorded());
    ASSERT_EQ(par.outcome.iterates.size(), 50u);
    EXPECT_LE(jacobi::testing::worst_relative(par.outcome.iterates, serial.iterates), 1e-12)
        << "p=" << p;
    EXPECT_EQ(par.outcome.iterations, serial.iterations);
  }
}

TEST(SolveRowwise, ModesAreBitwiseIdentical) {
  const auto sys = fixed_instance(32, 43);
  for (std::size_t p : {2u, 4u, 8u}) {
    const auto a = solve_rowwise(sys, p, ShiftMode::blocking, fixed_recorded());
    const auto b = solve_rowwise(sys, p, ShiftMode::nonblocking, fixed_recorded());
    EXPECT_EQ(a.outcome.iterates, b.outcome.iterates);
    EXPECT_EQ(a.stats, b.stats);
  }
}

TEST(SolveRowwise, ConvergesLikeSerial) {
  const auto sys = bench::generate_system(32, 7, true, 1e-10, 10000);
  const auto serial = solve_serial(sys);
  const auto par = solve_rowwise(sys, 4, ShiftMode::nonblocking);
  EXPECT_TRUE(par.outcome.converged);
  EXPECT_EQ(par.outcome.iterations, serial.iterations);
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_TRUE(jacobi::testing::close_relative(par.outcome.x[i], serial.x[i], 1e-10));
  }
}

TEST(SolveRowwise, HandTracedShiftBytes) {
  // p = 2, m = 2: one send of two doubles per rank per iteration.
  const auto sys = fixed_instance(4, 42, 1);
  const auto par = solve_rowwise(sys, 2, ShiftMode::blocking, fixed_recorded());
  EXPECT_EQ(par.stats.rank(0).p2p_bytes, 16u);
  EXPECT_EQ(par.stats.rank(1).p2p_bytes, 16u);
}

TEST(SolveRowwise, TrafficMatchesClosedForms) {
  const std::size_t n = 32;
  const std::size_t iters = 7;
  const auto sys = fixed_instance(n, 44, iters);
  for (std::size_t p : {1u, 2u, 4u, 8u}) {
    const std::size_t m = n / p;
    const auto par = solve_rowwise(sys, p, ShiftMode::nonblocking, fixed_recorded());
    for (std::size_t r = 0; r < p; ++r) {
      EXPECT_EQ(par.stats.rank(r).p2p_bytes, iters * (p - 1) * m * 8);
      EXPECT_EQ(par.stats.rank(r).p2p_messages, iters * (p - 1));
    }
    const auto total = par.stats.total();
    EXPECT_EQ(total.p2p_bytes, iters * p * (p - 1) * m * 8);
    EXPECT_EQ(total.collective_bytes, iters * (2 * (p - 1) * m * 8 + (p - 1) * 8));
  }
}

TEST(SolveRowwise, RejectsIndivisibleDimension) {
  const auto sys = fixed_instance(10, 42);
  EXPECT_THROW(solve_rowwise(sys, 4, ShiftMode::blocking), IndivisibleDimension);
}
