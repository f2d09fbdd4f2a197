#include "jacobi/serial.hpp"

#include <algorithm>
#include <utility>

namespace jacobi {

void jacobi_step_into(const Splitting& splitting, std::span<const double> b,
                      std::span<const double> x_prev, std::span<double> out) {
  const std::size_t n = splitting.diagonal.size();
  if (b.size() != n) throw LengthMismatch(b.size(), n);
  if (x_prev.size() != n) throw LengthMismatch(x_prev.size(), n);
  if (out.size() != n) throw LengthMismatch(out.size(), n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto lower = splitting.strictly_lower.row(i);
    const auto upper = splitting.strictly_upper.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < i; ++j) sum += lower[j] * x_prev[j];
    for (std::size_t j = i + 1; j < n; ++j) sum += upper[j] * x_prev[j];
    out[i] = (b[i] + sum) * splitting.inverse_diagonal[i];
  }
}

DenseVector jacobi_step(const Splitting& splitting, const DenseVector& b,
                        const DenseVector& x_prev) {
  std::vector<double> out(x_prev.size());
  jacobi_step_into(splitting, b.span(), x_prev.span(), out);
  return DenseVector(std::move(out), kUnchecked);
}

SolveOutcome solve_serial(const SystemInstance& sys, const SolveOptions& opts) {
  const auto splitting = split(sys.a());
  std::vector<double> x_old = sys.x0().values();
  std::vector<double> x_new(sys.n());

  SolveOutcome outcome{DenseVector(x_old, kUnchecked), 0, false, {}, {}};
  outcome.distance_history.reserve(std::min<std::size_t>(sys.max_iters(), 1 << 16));

  for (std::size_t k = 1;; ++k) {
    jacobi_step_into(splitting, sys.b().span(), x_old, x_new);
    const double d = euclidean_distance(x_new, x_old);
    outcome.distance_history.push_back(d);
    if (opts.record_iterates) outcome.iterates.push_back(x_new);
    std::swap(x_old, x_new);
    if (should_stop(d, k, sys, opts)) {
      outcome.iterations = k;
      outcome.converged = d < sys.tol();
      break;
    }
  }
  outcome.x = DenseVector(std::move(x_old), kUnchecked);
  return outcome;
}

}  // namespace jacobi
