#pragma once

// Test-only reference computations. Deliberately naive and independent of
// the solver code paths they are used to check.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "jacobi/linalg.hpp"

namespace jacobi::testing {

/// y_i = sum_{j != i} a_ij x_j as a plain full-row loop.
inline std::vector<double> off_diagonal_product(const DenseMatrix& a,
                                                std::span<const double> x) {
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) y[i] += a(i, j) * x[j];
    }
  }
  return y;
}

/// |a - b| <= rel * max(|a|, |b|); exact zeros compare equal.
inline bool close_relative(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

/// Distance in representable doubles between two finite values.
inline std::uint64_t ulp_distance(double a, double b) {
  auto key = [](double v) {
    auto bits = std::bit_cast<std::int64_t>(v);
    return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
  };
  const auto ka = key(a);
  const auto kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka - kb) : static_cast<std::uint64_t>(kb - ka);
}

/// Largest relative componentwise deviation between two iterate histories.
inline double worst_relative(const std::vector<std::vector<double>>& lhs,
                             const std::vector<std::vector<double>>& rhs) {
  double worst = 0.0;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    for (std::size_t i = 0; i < lhs[k].size(); ++i) {
      const double a = lhs[k][i];
      const double b = rhs[k][i];
      if (a == b) continue;
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
  }
  return worst;
}

}  // namespace jacobi::testing
