#pragma once

// Dense matrix/vector types, the D - L - U splitting and the block partition
// shared by every Jacobi strategy.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jacobi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ZeroDiagonal : public Error {
 public:
  explicit ZeroDiagonal(std::size_t row);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t lhs, std::size_t rhs);
};

class IndivisibleDimension : public Error {
 public:
  IndivisibleDimension(std::size_t n, std::size_t p);
  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }

 private:
  std::size_t n_;
  std::size_t p_;
};

/// Tag for constructing vectors/matrices from computed (not user supplied)
/// data; skips the finiteness scan so diverging iterates stay representable.
struct Unchecked {
  explicit Unchecked() = default;
};
inline constexpr Unchecked kUnchecked{};

class DenseVector {
 public:
  explicit DenseVector(std::vector<double> values);
  DenseVector(std::initializer_list<double> values);
  DenseVector(std::vector<double> values, Unchecked) noexcept;

  static DenseVector zeros(std::size_t len);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> span() const noexcept { return values_; }
  std::span<double> span() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

/// Row-major dense matrix; entry (r, c) lives at r * cols + c.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries,
              Unchecked);

  static DenseMatrix zeros(std::size_t rows, std::size_t cols);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return entries_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(entries_).subspan(r * cols_, cols_);
  }
  std::span<const double> entries() const noexcept { return entries_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

/// A = D - L - U. L and U carry the negated off-diagonal entries, so
/// T = D^-1 (L + U) can be formed from them directly.
struct Splitting {
  std::vector<double> diagonal;
  std::vector<double> inverse_diagonal;
  DenseMatrix strictly_lower;
  DenseMatrix strictly_upper;
};

Splitting split(const DenseMatrix& a);

/// D - L - U, entrywise.
DenseMatrix reconstruct(const Splitting& s);

double euclidean_distance(std::span<const double> x, std::span<const double> y);
inline double euclidean_distance(const DenseVector& x, const DenseVector& y) {
  return euclidean_distance(x.span(), y.span());
}

/// max_i |x_i - y_i|
double max_abs_distance(std::span<const double> x, std::span<const double> y);

/// |a_ii| > sum_{j != i} |a_ij| for every row.
bool is_strictly_diagonally_dominant(const DenseMatrix& a);

/// ||D^-1 (L + U)||_inf = max_i sum_{j != i} |a_ij| / |a_ii|.
double iteration_matrix_infinity_norm(const DenseMatrix& a);

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  std::size_t first() const noexcept { return begin; }
  std::size_t last() const noexcept { return end - 1; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Block distribution of an n-dimensional system over p ranks, m = n / p.
/// Rank r owns rows, columns and vector entries [r*m, (r+1)*m).
class Partition {
 public:
  std::size_t n() const noexcept { return n_; }
  std::size_t ranks() const noexcept { return p_; }
  std::size_t block() const noexcept { return m_; }

  IndexRange rows(std::size_t rank) const { return range(rank); }
  IndexRange columns(std::size_t rank) const { return range(rank); }
  IndexRange vector_block(std::size_t rank) const { return range(rank); }
  std::size_t owner_of(std::size_t index) const { return index / m_; }

 private:
  friend Partition make_partition(std::size_t n, std::size_t p);
  Partition(std::size_t n, std::size_t p) : n_(n), p_(p), m_(n / p) {}
  IndexRange range(std::size_t rank) const;

  std::size_t n_;
  std::size_t p_;
  std::size_t m_;
};

Partition make_partition(std::size_t n, std::size_t p);

/// A validated Jacobi problem: A x = b from x0, stopping at distance < tol or
/// after max_iters steps.
class SystemInstance {
 public:
  SystemInstance(DenseMatrix a, DenseVector b, DenseVector x0, double tol,
                 std::size_t max_iters);

  std::size_t n() const noexcept { return a_.rows(); }
  const DenseMatrix& a() const noexcept { return a_; }
  const DenseVector& b() const noexcept { return b_; }
  const DenseVector& x0() const noexcept { return x0_; }
  double tol() const noexcept { return tol_; }
  std::size_t max_iters() const noexcept { return max_iters_; }

  SystemInstance with_limits(double tol, std::size_t max_iters) const;

  friend bool operator==(const SystemInstance&, const SystemInstance&) = default;

 private:
  DenseMatrix a_;
  DenseVector b_;
  DenseVector x0_;
  double tol_;
  std::size_t max_iters_;
};

struct SolveOutcome {
  DenseVector x;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> distance_history;
  /// Every iterate x^(1) .. x^(k); filled only when SolveOptions::record_iterates.
  std::vector<std::vector<double>> iterates;
};

struct SolveOptions {
  /// Run exactly max_iters steps, ignoring the tolerance (timing runs).
  bool fixed_iterations = false;
  bool record_iterates = false;
};

/// Shared stopping rule, evaluated after step k (1-based) with distance d.
inline bool should_stop(double distance, std::size_t k, const SystemInstance& sys,
                        const SolveOptions& opts) {
  if (!opts.fixed_iterations && distance < sys.tol()) return true;
  return k >= sys.max_iters();
}

}  // namespace jacobi
