#pragma once

// Benchmark harness: random system generation, the Gaussian-elimination
// reference solver, strategy sweeps with timing and traffic counters, CSV
// output and per-strategy speedup series.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jacobi/linalg.hpp"
#include "jacobi/rowwise.hpp"

namespace jacobi::bench {

enum class Strategy { serial, row, col, onesided };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view text) noexcept;
std::string_view to_string(ShiftMode m) noexcept;
std::optional<ShiftMode> parse_mode(std::string_view text) noexcept;

/// A and b uniform on [0, 1) from a seeded generator, x0 = 0. With
/// `dominant`, each a_ii becomes (sum of |off-diagonal| in row i) + 1.
SystemInstance generate_system(std::size_t n, std::uint64_t seed, bool dominant,
                               double tol = 1e-8, std::size_t max_iters = 10000);

class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(std::size_t column);
};

struct DirectSolution {
  DenseVector x;
  /// ||A x - b||_inf
  double residual = 0.0;
};

/// Gaussian elimination with partial pivoting. Pivots with |value| <= 1e-30
/// raise SingularMatrix.
DirectSolution solve_direct(const DenseMatrix& a, const DenseVector& b);
inline DirectSolution solve_direct(const SystemInstance& sys) {
  return solve_direct(sys.a(), sys.b());
}

struct BenchConfig {
  std::vector<std::size_t> dimensions{8, 16, 32, 64, 128, 256, 512};
  std::vector<std::size_t> process_counts{1, 2, 4, 8};
  std::vector<Strategy> strategies{Strategy::serial, Strategy::row};
  ShiftMode mode = ShiftMode::blocking;
  double tol = 1e-8;
  std::size_t max_iters = 10000;
  std::optional<std::size_t> fixed_iters;
  std::uint64_t seed = 42;
  std::size_t repetitions = 3;
  bool dominant = true;
  /// Load this system instead of generating one; dimensions are ignored.
  std::optional<std::filesystem::path> system_file;
  std::filesystem::path output_dir = ".";
};

struct BenchRecord {
  Strategy strategy = Strategy::serial;
  ShiftMode mode = ShiftMode::blocking;
  std::size_t n = 0;
  std::size_t p = 1;
  std::size_t repetition = 0;
  double wall_seconds = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::uint64_t p2p_bytes = 0;
  std::uint64_t collective_bytes = 0;
  std::uint64_t put_bytes = 0;
  std::uint64_t get_bytes = 0;
  std::optional<double> speedup;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// Seconds elapsed around one solve call.
using Stopwatch = std::function<double(const std::function<void()>&)>;
double monotonic_stopwatch(const std::function<void()>& work);

/// Runs every (strategy, n, p, repetition) cell sequentially. Cells with
/// p not dividing n are skipped with a notice on `log`. Serial runs once per
/// (n, repetition) with p = 1. Speedups are filled in before returning.
std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg, std::ostream* log = nullptr,
                                       const Stopwatch& stopwatch = monotonic_stopwatch);

/// speedup = serial wall_seconds / wall_seconds for the serial record with
/// the same n and repetition; left empty when there is none.
void assign_speedups(std::vector<BenchRecord>& records);

inline constexpr std::string_view kCsvHeader =
    "strategy,mode,n,p,rep,wall_seconds,iterations,converged,p2p_bytes,"
    "collective_bytes,put_bytes,get_bytes,speedup";

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_csv(std::istream& in);

class MissingBaseline : public Error {
 public:
  explicit MissingBaseline(std::size_t n);
};

struct SeriesPoint {
  std::size_t p = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct Series {
  Strategy strategy;
  std::size_t n;
  std::vector<SeriesPoint> points;  // ascending p
};

/// Speedup aggregates over repetitions for every non-serial (strategy, n).
std::vector<Series> speedup_series(const std::vector<BenchRecord>& records);

/// Writes <strategy>_<n>.dat ("p mean min max" per line) into `dir`;
/// returns the written paths.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<BenchRecord>& records,
                                                  const std::filesystem::path& dir);

/// Fixed-width table of the records for terminals.
void print_summary(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace jacobi::bench
