#include "jacobi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace jacobi {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InvalidArgument(std::string(what) + ": non-finite entry at index " +
                            std::to_string(i));
    }
  }
}

void require_square(const DenseMatrix& a) {
  if (!a.is_square()) {
    throw InvalidArgument("matrix is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", expected square");
  }
}

}  // namespace

ZeroDiagonal::ZeroDiagonal(std::size_t row)
    : Error("zero diagonal entry in row " + std::to_string(row) +
            "; equations must be reordered"),
      row_(row) {}

LengthMismatch::LengthMismatch(std::size_t lhs, std::size_t rhs)
    : Error("length mismatch: " + std::to_string(lhs) + " vs " +
            std::to_string(rhs)) {}

IndivisibleDimension::IndivisibleDimension(std::size_t n, std::size_t p)
    : Error("dimension " + std::to_string(n) + " is not divisible by " +
            std::to_string(p) + " ranks"),
      n_(n),
      p_(p) {}

DenseVector::DenseVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("vector length must be >= 1");
  require_finite(values_, "vector");
}

DenseVector::DenseVector(std::initializer_list<double> values)
    : DenseVector(std::vector<double>(values)) {}

DenseVector::DenseVector(std::vector<double> values, Unchecked) noexcept
    : values_(std::move(values)) {}

DenseVector DenseVector::zeros(std::size_t len) {
  if (len == 0) throw InvalidArgument("vector length must be >= 1");
  return DenseVector(std::vector<double>(len, 0.0), kUnchecked);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ == 0 || cols_ == 0) {
    throw InvalidArgument("matrix dimensions must be >= 1");
  }
  if (entries_.size() != rows_ * cols_) {
    throw LengthMismatch(entries_.size(), rows_ * cols_);
  }
  require_finite(entries_, "matrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw LengthMismatch(r.size(), cols_);
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
  if (rows_ == 0 || cols_ == 0) {
    throw InvalidArgument("matrix dimensions must be >= 1");
  }
  require_finite(entries_, "matrix");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> entries, Unchecked)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {}

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols) {
  return DenseMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  auto m = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Splitting split(const DenseMatrix& a) {
  require_square(a);
  const std::size_t n = a.rows();
  Splitting s{std::vector<double>(n), std::vector<double>(n),
              DenseMatrix::zeros(n, n), DenseMatrix::zeros(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a(i, i);
    if (d == 0.0) throw ZeroDiagonal(i);
    s.diagonal[i] = d;
    s.inverse_diagonal[i] = 1.0 / d;
    for (std::size_t j = 0; j < i; ++j) s.strictly_lower(i, j) = -a(i, j);
    for (std::size_t j = i + 1; j < n; ++j) s.strictly_upper(i, j) = -a(i, j);
  }
  return s;
}

DenseMatrix reconstruct(const Splitting& s) {
  const std::size_t n = s.diagonal.size();
  auto a = DenseMatrix::zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = i == j ? s.diagonal[i] : 0.0;
      a(i, j) = d - s.strictly_lower(i, j) - s.strictly_upper(i, j);
    }
  }
  return a;
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double max_abs_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    best = std::max(best, std::abs(x[i] - y[i]));
  }
  return best;
}

bool is_strictly_diagonally_dominant(const DenseMatrix& a) {
  require_square(a);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j != i) off += std::abs(a(i, j));
    }
    if (!(std::abs(a(i, i)) > off)) return false;
  }
  return true;
}

double iteration_matrix_infinity_norm(const DenseMatrix& a) {
  require_square(a);
  double norm = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double d = a(i, i);
    if (d == 0.0) throw ZeroDiagonal(i);
    double off = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j != i) off += std::abs(a(i, j));
    }
    norm = std::max(norm, off / std::abs(d));
  }
  return norm;
}

IndexRange Partition::range(std::size_t rank) const {
  if (rank >= p_) {
    throw InvalidArgument("rank " + std::to_string(rank) + " outside partition of " +
                          std::to_string(p_));
  }
  return {rank * m_, (rank + 1) * m_};
}

Partition make_partition(std::size_t n, std::size_t p) {
  if (n == 0 || p == 0) throw InvalidArgument("partition needs n >= 1 and p >= 1");
  if (n % p != 0) throw IndivisibleDimension(n, p);
  return Partition(n, p);
}

SystemInstance::SystemInstance(DenseMatrix a, DenseVector b, DenseVector x0,
                               double tol, std::size_t max_iters)
    : a_(std::move(a)),
      b_(std::move(b)),
      x0_(std::move(x0)),
      tol_(tol),
      max_iters_(max_iters) {
  require_square(a_);
  if (b_.size() != n()) throw LengthMismatch(b_.size(), n());
  if (x0_.size() != n()) throw LengthMismatch(x0_.size(), n());
  if (!(tol_ > 0.0) || !std::isfinite(tol_)) {
    throw InvalidArgument("tolerance must be a positive finite number");
  }
  if (max_iters_ == 0) throw InvalidArgument("iteration limit must be >= 1");
  for (std::size_t i = 0; i < n(); ++i) {
    if (a_(i, i) == 0.0) throw ZeroDiagonal(i);
  }
}

SystemInstance SystemInstance::with_limits(double tol, std::size_t max_iters) const {
  return SystemInstance(a_, b_, x0_, tol, max_iters);
}

}  // namespace jacobi
