// jacobi_bench: strategy sweeps over generated or loaded systems.
//
//   jacobi_bench --n 128 --n 256 --p 2 --p 4 --strategy serial --strategy row \
//                --fixed-iters 200 --out results/

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <system_error>
#include <vector>

#include "jacobi/bench.hpp"
#include "jacobi/system_io.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverError = 3, kIoError = 4 };

}  // namespace

int main(int argc, char** argv) {
  using namespace jacobi;

  CLI::App app{"Jacobi solver strategy benchmark"};
  bench::BenchConfig cfg;

  std::vector<std::size_t> dims;
  std::vector<std::size_t> procs;
  std::vector<std::string> strategy_names;
  std::string mode_name = "blocking";
  std::size_t fixed_iters = 0;
  std::string system_path;
  std::string out_dir = ".";

  app.add_option("--n", dims, "System dimension (repeatable)");
  app.add_option("--p", procs, "Process count (repeatable)");
  app.add_option("--strategy", strategy_names,
                 "serial|row|col|onesided (repeatable; default serial,row)");
  app.add_option("--mode", mode_name, "Row-wise shift mode: blocking|nonblocking")
      ->check(CLI::IsMember({"blocking", "nonblocking"}));
  app.add_option("--tol", cfg.tol, "Distance tolerance")->capture_default_str();
  app.add_option("--max-iters", cfg.max_iters, "Iteration limit")->capture_default_str();
  auto* fixed = app.add_option("--fixed-iters", fixed_iters,
                               "Run exactly this many iterations (timing runs)");
  app.add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();
  app.add_option("--reps", cfg.repetitions, "Repetitions per cell")->capture_default_str();
  auto* dominant = app.add_flag("--dominant", "Force strict diagonal dominance (default)");
  auto* raw = app.add_flag("--raw-uniform", "Leave A uniform on [0,1] (timing only)");
  dominant->excludes(raw);
  app.add_option("--system", system_path, "Load a system file instead of generating");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (!dims.empty()) cfg.dimensions = dims;
  if (!procs.empty()) cfg.process_counts = procs;
  if (!strategy_names.empty()) {
    cfg.strategies.clear();
    for (const auto& name : strategy_names) {
      auto s = bench::parse_strategy(name);
      if (!s) {
        std::cerr << "unknown strategy '" << name << "'\n";
        return kConfigError;
      }
      cfg.strategies.push_back(*s);
    }
  }
  cfg.mode = *bench::parse_mode(mode_name);
  if (*fixed) cfg.fixed_iters = fixed_iters;
  cfg.dominant = !*raw;
  if (!system_path.empty()) cfg.system_file = system_path;
  cfg.output_dir = out_dir;

  for (auto n : cfg.dimensions) {
    if (n == 0) {
      std::cerr << "--n must be >= 1\n";
      return kConfigError;
    }
  }
  for (auto p : cfg.process_counts) {
    if (p == 0) {
      std::cerr << "--p must be >= 1\n";
      return kConfigError;
    }
  }
  if (cfg.repetitions == 0 || cfg.max_iters == 0 || !(cfg.tol > 0.0) ||
      (cfg.fixed_iters && *cfg.fixed_iters == 0)) {
    std::cerr << "--reps, --max-iters and --fixed-iters must be >= 1 and --tol > 0\n";
    return kConfigError;
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << cfg.output_dir << ": " << ec.message()
              << '\n';
    return kIoError;
  }

  std::vector<bench::BenchRecord> records;
  try {
    records = bench::run_benchmark(cfg, &std::cerr);
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  }

  try {
    const auto csv_path = cfg.output_dir / "results.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path.string());
    bench::write_csv(csv, records);
    csv.close();
    if (!csv) throw IoError("failed writing " + csv_path.string());

    const bool has_baseline =
        std::any_of(records.begin(), records.end(),
                    [](const auto& r) { return r.strategy == bench::Strategy::serial; });
    if (!has_baseline) {
      std::cerr << "no serial baseline requested; speedup series not written\n";
    } else {
      const auto files = bench::emit_plot_data(records, cfg.output_dir);
      if (files.empty()) std::cerr << "only serial records; no speedup series written\n";
    }
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kIoError;
  }

  bench::print_summary(std::cout, records);
  return kOk;
}
