#include "jacobi/system_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace jacobi {

namespace {

// Next non-blank line, or false at end of input.
bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::vector<double> parse_reals(const std::string& line, std::size_t expected,
                                const std::string& what) {
  std::istringstream ss(line);
  std::vector<double> values;
  values.reserve(expected);
  std::string token;
  while (ss >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw FormatError(what + ": cannot parse '" + token + "'");
    }
    if (used != token.size()) throw FormatError(what + ": cannot parse '" + token + "'");
    values.push_back(v);
  }
  if (values.size() != expected) {
    throw FormatError(what + ": expected " + std::to_string(expected) +
                      " values, found " + std::to_string(values.size()));
  }
  return values;
}

}  // namespace

SystemData read_system(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw FormatError("empty system file");

  std::istringstream header(line);
  long long n_signed = 0;
  std::string extra;
  if (!(header >> n_signed) || (header >> extra) || n_signed < 1) {
    throw FormatError("first line must be a positive dimension, got '" + line + "'");
  }
  const auto n = static_cast<std::size_t>(n_signed);

  std::vector<double> entries;
  entries.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_line(in, line)) {
      throw FormatError("missing matrix row " + std::to_string(i));
    }
    auto row = parse_reals(line, n, "matrix row " + std::to_string(i));
    entries.insert(entries.end(), row.begin(), row.end());
  }
  if (!next_line(in, line)) throw FormatError("missing constant vector");
  auto b = parse_reals(line, n, "constant vector");

  std::vector<double> x0(n, 0.0);
  if (next_line(in, line)) {
    x0 = parse_reals(line, n, "initial guess");
    if (next_line(in, line)) throw FormatError("trailing content after initial guess");
  }

  try {
    return SystemData{DenseMatrix(n, n, std::move(entries)),
                      DenseVector(std::move(b)), DenseVector(std::move(x0))};
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

SystemData load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open system file " + path.string());
  return read_system(in);
}

void write_system(std::ostream& out, const DenseMatrix& a, const DenseVector& b,
                  const DenseVector* x0) {
  const auto n = a.rows();
  out << n << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto write_row = [&](std::span<const double> row) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
    out << '\n';
  };
  for (std::size_t i = 0; i < n; ++i) write_row(a.row(i));
  write_row(b.span());
  if (x0) write_row(x0->span());
}

}  // namespace jacobi
