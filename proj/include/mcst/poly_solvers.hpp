#pragma once

#include <vector>

#include "mcst/core_model.hpp"

namespace mcst {

/// Homogeneous transitions stored once: weights[0] is v_0, weights[i+1] is
/// v_i. Needed for sizes where an n x (n+1) matrix does not fit.
struct HomogeneousInstance {
  std::vector<double> revenues;
  std::vector<double> arrivals;
  std::vector<double> weights;

  int size() const { return static_cast<int>(revenues.size()); }
};

/// Throws PreconditionError unless every transition row is identical.
HomogeneousInstance as_homogeneous(const Instance& inst);

/// Number t of leading products in the optimal revenue-ordered assortment
/// {1..t}; revenues must be non-increasing. O(n).
int homogeneous_prefix_length(const HomogeneousInstance& h);

/// r_i - RV_{i-1} / V_{i-1} for every i >= 2 (0-based entry i-1), i.e. the
/// adjusted revenue of product i after products 1..i-1 have been added.
std::vector<double> homogeneous_adjusted_revenues(const HomogeneousInstance& h);

/// Revenue of offering S = {1..t} and recommending S everywhere. O(n).
double homogeneous_prefix_revenue(const HomogeneousInstance& h, int t);

SolveResult solve_homogeneous(const Instance& inst);

/// Each product links to at most one other product. parent[j] = -1 when j
/// has no link.
struct TransitToOneInstance {
  std::vector<double> revenues;
  std::vector<double> arrivals;
  std::vector<int> parent;
  std::vector<double> link_weight;
  std::vector<double> nopurchase;

  int size() const { return static_cast<int>(revenues.size()); }
};

/// Throws PreconditionError unless the instance is transit-to-one.
TransitToOneInstance as_transit_to_one(const Instance& inst);

/// V(i,1) and V(i,0) for every product, after dropping links that do not
/// point to a strictly higher revenue.
struct TreeDpTable {
  std::vector<int> parent;
  std::vector<double> with;
  std::vector<double> without;
  double optimum = 0.0;
};

/// Requires non-increasing revenues.
TreeDpTable tree_dp_table(const TransitToOneInstance& t);

SolveResult solve_tree_dp(const TransitToOneInstance& t);
SolveResult solve_tree_dp(const Instance& inst);

struct RoCertificate {
  int best_t = 0;
  double ro_revenue = 0.0;
  int distinct_revenues = 0;
  double r_max = 0.0;
  double r_min = 0.0;
  double bound_factor = 1.0;
  /// ro_revenue / bound_factor, an upper bound on the optimum.
  double guarantee = 0.0;
};

struct RevenueOrderedResult {
  SolveResult result;
  RoCertificate certificate;
  std::vector<double> prefix_revenues;  // entry t is the revenue of {1..t}
};

/// Best of the assortments {1..t}, t = 0..n, on an instance with
/// non-increasing revenues. Ties go to the smallest t >= 1; the empty set is
/// returned only if it is strictly better than every nonempty prefix.
RevenueOrderedResult best_revenue_ordered(const Instance& inst);

}  // namespace mcst
