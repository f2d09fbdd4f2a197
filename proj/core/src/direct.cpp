#include <algorithm>
#include <cmath>
#include <numeric>

#include "jacobi/bench.hpp"

namespace jacobi::bench {

namespace {
constexpr double kPivotFloor = 1e-30;
}

SingularMatrix::SingularMatrix(std::size_t column)
    : Error("matrix is numerically singular at pivot column " + std::to_string(column)) {}

DirectSolution solve_direct(const DenseMatrix& a, const DenseVector& b) {
  if (!a.is_square()) throw InvalidArgument("direct solve needs a square matrix");
  const std::size_t n = a.rows();
  if (b.size() != n) throw LengthMismatch(b.size(), n);

  std::vector<double> lu(a.entries().begin(), a.entries().end());
  std::vector<double> rhs = b.values();
  auto at = [&](std::size_t r, std::size_t c) -> double& { return lu[r * n + c]; };

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
    }
    if (std::abs(at(pivot, col)) <= kPivotFloor) throw SingularMatrix(col);
    if (pivot != col) {
      std::swap_ranges(lu.begin() + col * n, lu.begin() + (col + 1) * n,
                       lu.begin() + pivot * n);
      std::swap(rhs[col], rhs[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = at(r, col) / at(col, col);
      if (f == 0.0) continue;
      at(r, col) = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) at(r, c) -= f * at(col, c);
      rhs[r] -= f * rhs[col];
    }
  }

  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= at(i, c) * x[c];
    x[i] = s / at(i, i);
  }

  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = a.row(i);
    const double ax = std::inner_product(row.begin(), row.end(), x.begin(), 0.0);
    residual = std::max(residual, std::abs(ax - b[i]));
  }
  return {DenseVector(std::move(x), kUnchecked), residual};
}

}  // namespace jacobi::bench
