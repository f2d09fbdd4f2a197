#pragma once

// Plain-text system files:
//   line 1        n
//   next n lines  row i of A (n whitespace-separated reals)
//   next line     B (n reals)
//   optional line X0 (n reals, zeros when absent)

#include <filesystem>
#include <iosfwd>

#include "jacobi/linalg.hpp"

namespace jacobi {

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

struct SystemData {
  DenseMatrix a;
  DenseVector b;
  DenseVector x0;
};

SystemData read_system(std::istream& in);
SystemData load_system(const std::filesystem::path& path);

void write_system(std::ostream& out, const DenseMatrix& a, const DenseVector& b,
                  const DenseVector* x0 = nullptr);

}  // namespace jacobi
