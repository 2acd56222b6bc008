#include "mcst/dense_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mcst/core_model.hpp"

namespace mcst {

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, double singular_tol) {
  const std::size_t k = b.size();
  if (a.size() != k * k) throw PreconditionError("solve_dense: dimension mismatch");
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (k == 0) return b;
  if (scale == 0.0) throw NumericError("solve_dense: zero matrix");
  const double threshold = singular_tol * scale;

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
    if (std::abs(a[piv * k + col]) <= threshold) throw NumericError("solve_dense: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(a[piv * k + c], a[col * k + c]);
      std::swap(b[piv], b[col]);
    }
    const double inv = 1.0 / a[col * k + col];
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(k);
  for (std::size_t i = k; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < k; ++c) s -= a[i * k + c] * x[c];
    x[i] = s / a[i * k + i];
  }
  return x;
}

}  // namespace mcst
