#include "jacobi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "jacobi/columnwise.hpp"
#include "jacobi/onesided.hpp"
#include "jacobi/serial.hpp"
#include "jacobi/system_io.hpp"

namespace jacobi::bench {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::serial: return "serial";
    case Strategy::row: return "row";
    case Strategy::col: return "col";
    case Strategy::onesided: return "onesided";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) noexcept {
  for (auto s : {Strategy::serial, Strategy::row, Strategy::col, Strategy::onesided}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::string_view to_string(ShiftMode m) noexcept {
  return m == ShiftMode::blocking ? "blocking" : "nonblocking";
}

std::optional<ShiftMode> parse_mode(std::string_view text) noexcept {
  if (text == "blocking") return ShiftMode::blocking;
  if (text == "nonblocking") return ShiftMode::nonblocking;
  return std::nullopt;
}

SystemInstance generate_system(std::size_t n, std::uint64_t seed, bool dominant,
                               double tol, std::size_t max_iters) {
  if (n == 0) throw InvalidArgument("system dimension must be >= 1");
  std::mt19937_64 gen(seed);
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementation.
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

  std::vector<double> a(n * n);
  for (auto& v : a) v = uniform();
  std::vector<double> b(n);
  for (auto& v : b) v = uniform();

  if (dominant) {
    for (std::size_t i = 0; i < n; ++i) {
      double off = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) off += std::abs(a[i * n + j]);
      }
      a[i * n + i] = off + 1.0;
    }
  }
  return SystemInstance(DenseMatrix(n, n, std::move(a)), DenseVector(std::move(b)),
                        DenseVector::zeros(n), tol, max_iters);
}

double monotonic_stopwatch(const std::function<void()>& work) {
  const auto start = std::chrono::steady_clock::now();
  work();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

namespace {

BenchRecord run_cell(Strategy strategy, ShiftMode mode, const SystemInstance& sys,
                     std::size_t p, std::size_t rep, const SolveOptions& opts,
                     const Stopwatch& stopwatch) {
  BenchRecord rec;
  rec.strategy = strategy;
  rec.mode = strategy == Strategy::row ? mode : ShiftMode::blocking;
  rec.n = sys.n();
  rec.p = strategy == Strategy::serial ? 1 : p;
  rec.repetition = rep;

  std::optional<SolveOutcome> outcome;
  mp::RankCounters traffic;
  rec.wall_seconds = stopwatch([&] {
    switch (strategy) {
      case Strategy::serial:
        outcome = solve_serial(sys, opts);
        break;
      case Strategy::row: {
        auto r = solve_rowwise(sys, p, mode, opts);
        outcome = std::move(r.outcome);
        traffic = r.stats.total();
        break;
      }
      case Strategy::col: {
        auto r = solve_columnwise(sys, p, opts);
        outcome = std::move(r.outcome);
        traffic = r.stats.total();
        break;
      }
      case Strategy::onesided: {
        auto r = solve_onesided(sys, p, opts);
        outcome = std::move(r.outcome);
        traffic = r.stats.total();
        break;
      }
    }
  });
  rec.iterations = outcome->iterations;
  rec.converged = outcome->converged;
  rec.p2p_bytes = traffic.p2p_bytes;
  rec.collective_bytes = traffic.collective_bytes;
  rec.put_bytes = traffic.window_put_bytes;
  rec.get_bytes = traffic.window_get_bytes;
  return rec;
}

}  // namespace

std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg, std::ostream* log,
                                       const Stopwatch& stopwatch) {
  if (cfg.repetitions == 0) throw InvalidArgument("repetitions must be >= 1");
  const std::size_t iters = cfg.fixed_iters.value_or(cfg.max_iters);

  std::vector<SystemInstance> systems;
  if (cfg.system_file) {
    auto data = load_system(*cfg.system_file);
    systems.emplace_back(std::move(data.a), std::move(data.b), std::move(data.x0), cfg.tol,
                         iters);
  } else {
    for (auto n : cfg.dimensions) {
      systems.push_back(generate_system(n, cfg.seed, cfg.dominant, cfg.tol, iters));
    }
  }

  SolveOptions opts;
  opts.fixed_iterations = cfg.fixed_iters.has_value();

  std::vector<BenchRecord> records;
  for (const auto& sys : systems) {
    const std::size_t n = sys.n();
    if (log) {
      for (auto p : cfg.process_counts) {
        if (p == 0 || n % p != 0) {
          *log << "skipping n=" << n << " p=" << p << ": p does not divide n\n";
        }
      }
    }
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      for (auto strategy : cfg.strategies) {
        if (strategy == Strategy::serial) {
          records.push_back(run_cell(strategy, cfg.mode, sys, 1, rep, opts, stopwatch));
          continue;
        }
        for (auto p : cfg.process_counts) {
          if (p == 0 || n % p != 0) continue;
          records.push_back(run_cell(strategy, cfg.mode, sys, p, rep, opts, stopwatch));
        }
      }
    }
  }
  assign_speedups(records);
  return records;
}

void assign_speedups(std::vector<BenchRecord>& records) {
  std::map<std::pair<std::size_t, std::size_t>, double> baseline;
  for (const auto& r : records) {
    if (r.strategy == Strategy::serial) baseline[{r.n, r.repetition}] = r.wall_seconds;
  }
  for (auto& r : records) {
    auto it = baseline.find({r.n, r.repetition});
    if (it == baseline.end() || !(r.wall_seconds > 0.0)) {
      r.speedup.reset();
    } else {
      r.speedup = it->second / r.wall_seconds;
    }
  }
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kCsvHeader << '\n';
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : records) {
    out << to_string(r.strategy) << ',' << to_string(r.mode) << ',' << r.n << ',' << r.p
        << ',' << r.repetition << ',' << r.wall_seconds << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << r.p2p_bytes << ',' << r.collective_bytes << ','
        << r.put_bytes << ',' << r.get_bytes << ',';
    if (r.speedup) out << *r.speedup;
    out << '\n';
  }
  out.precision(old_precision);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <class T>
T parse_number(const std::string& text, std::size_t line_no) {
  std::istringstream ss(text);
  T value{};
  if (!(ss >> value) || !ss.eof()) {
    throw FormatError("results.csv line " + std::to_string(line_no) + ": bad number '" +
                      text + "'");
  }
  return value;
}

}  // namespace

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("results.csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw FormatError("results.csv: unexpected header '" + line + "'");

  std::vector<BenchRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 13) {
      throw FormatError("results.csv line " + std::to_string(line_no) + ": expected 13 fields");
    }
    BenchRecord r;
    auto strategy = parse_strategy(f[0]);
    auto mode = parse_mode(f[1]);
    if (!strategy || !mode) {
      throw FormatError("results.csv line " + std::to_string(line_no) +
                        ": unknown strategy or mode");
    }
    r.strategy = *strategy;
    r.mode = *mode;
    r.n = parse_number<std::size_t>(f[2], line_no);
    r.p = parse_number<std::size_t>(f[3], line_no);
    r.repetition = parse_number<std::size_t>(f[4], line_no);
    r.wall_seconds = parse_number<double>(f[5], line_no);
    r.iterations = parse_number<std::size_t>(f[6], line_no);
    r.converged = parse_number<int>(f[7], line_no) != 0;
    r.p2p_bytes = parse_number<std::uint64_t>(f[8], line_no);
    r.collective_bytes = parse_number<std::uint64_t>(f[9], line_no);
    r.put_bytes = parse_number<std::uint64_t>(f[10], line_no);
    r.get_bytes = parse_number<std::uint64_t>(f[11], line_no);
    if (!f[12].empty()) r.speedup = parse_number<double>(f[12], line_no);
    records.push_back(r);
  }
  return records;
}

MissingBaseline::MissingBaseline(std::size_t n)
    : Error("no serial baseline for n = " + std::to_string(n)) {}

std::vector<Series> speedup_series(const std::vector<BenchRecord>& records) {
  std::map<std::tuple<Strategy, std::size_t, std::size_t>, std::vector<double>> cells;
  for (const auto& r : records) {
    if (r.strategy == Strategy::serial) continue;
    if (!r.speedup) throw MissingBaseline(r.n);
    cells[{r.strategy, r.n, r.p}].push_back(*r.speedup);
  }
  std::vector<Series> out;
  for (const auto& [key, values] : cells) {
    const auto& [strategy, n, p] = key;
    if (out.empty() || out.back().strategy != strategy || out.back().n != n) {
      out.push_back({strategy, n, {}});
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    out.back().points.push_back({p, sum / static_cast<double>(values.size()),
                                 *std::min_element(values.begin(), values.end()),
                                 *std::max_element(values.begin(), values.end())});
  }
  return out;
}

std::vector<std::filesystem::path> emit_plot_data(const std::vector<BenchRecord>& records,
                                                  const std::filesystem::path& dir) {
  const auto series = speedup_series(records);
  std::vector<std::filesystem::path> written;
  for (const auto& s : series) {
    auto path = dir / (std::string(to_string(s.strategy)) + "_" + std::to_string(s.n) + ".dat");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# p mean_speedup min_speedup max_speedup\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& pt : s.points) {
      out << pt.p << ' ' << pt.mean << ' ' << pt.min << ' ' << pt.max << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
    written.push_back(std::move(path));
  }
  return written;
}

void print_summary(std::ostream& out, const std::vector<BenchRecord>& records) {
  struct Agg {
    std::size_t reps = 0;
    double wall = 0.0;
    double speedup = 0.0;
    std::size_t speedups = 0;
    const BenchRecord* last = nullptr;
  };
  std::map<std::tuple<std::size_t, int, std::size_t>, Agg> rows;
  for (const auto& r : records) {
    auto& a = rows[{r.n, static_cast<int>(r.strategy), r.p}];
    ++a.reps;
    a.wall += r.wall_seconds;
    if (r.speedup) {
      a.speedup += *r.speedup;
      ++a.speedups;
    }
    a.last = &r;
  }

  const auto flags = out.flags();
  out << std::left << std::setw(9) << "strategy" << std::setw(12) << "mode" << std::right
      << std::setw(6) << "n" << std::setw(4) << "p" << std::setw(14) << "mean_wall_s"
      << std::setw(8) << "iters" << std::setw(6) << "conv" << std::setw(14) << "p2p_bytes"
      << std::setw(12) << "coll_bytes" << std::setw(12) << "put_bytes" << std::setw(12)
      << "get_bytes" << std::setw(10) << "speedup" << '\n';
  for (const auto& [key, a] : rows) {
    const auto& r = *a.last;
    out << std::left << std::setw(9) << to_string(r.strategy) << std::setw(12)
        << to_string(r.mode) << std::right << std::setw(6) << r.n << std::setw(4) << r.p
        << std::setw(14) << std::fixed << std::setprecision(6)
        << a.wall / static_cast<double>(a.reps) << std::setw(8) << r.iterations
        << std::setw(6) << (r.converged ? "yes" : "no") << std::setw(14) << r.p2p_bytes
        << std::setw(12) << r.collective_bytes << std::setw(12) << r.put_bytes
        << std::setw(12) << r.get_bytes << std::setw(10);
    if (a.speedups) {
      out << std::setprecision(3) << a.speedup / static_cast<double>(a.speedups);
    } else {
      out << "-";
    }
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace jacobi::bench
