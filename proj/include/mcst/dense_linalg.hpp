#pragma once

#include <vector>

namespace mcst {

/// Solves A x = b for a k x k row-major A by Gaussian elimination with
/// partial pivoting. Throws NumericError when a pivot falls below
/// `singular_tol` times the largest entry of A.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, double singular_tol = 1e-12);

}  // namespace mcst
