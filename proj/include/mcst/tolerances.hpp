#pragma once

namespace mcst::tol {

/// Probability/feasibility checks (row sums, arrival sums, conservation).
inline constexpr double kFeasibility = 1e-9;

/// Comparisons between objective values produced by different routes.
inline constexpr double kValue = 1e-8;

/// Stand-in for a zero no-purchase weight when the MIP needs v_{j0} > 0.
inline constexpr double kNoPurchaseEps = 1e-9;

/// An LP value is treated as integral if within this distance of 0 or 1.
inline constexpr double kIntegrality = 1e-6;

/// Absolute optimality gap at which branch-and-bound declares a proof.
inline constexpr double kGapAbs = 1e-9;

}  // namespace mcst::tol
