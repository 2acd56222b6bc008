#pragma once

#include <span>
#include <vector>

#include "mcst/branch_and_bound.hpp"
#include "mcst/core_model.hpp"
#include "mcst/lp.hpp"

namespace mcst {

/// The compact mixed integer program for MCST, with variables ordered
/// x_1..x_n, then z_{ji} (j-major, i = 1..n), then z_{j0}.
struct MipModel {
  lp::LinearProgram program;
  int n = 0;
  double eps_nopurchase = 0.0;

  int num_binaries() const { return n; }
  int num_continuous() const { return n * n + n; }
  int x_var(int i) const { return i; }
  int z_var(int j, int i) const { return n + j * n + i; }
  int z0_var(int j) const { return n + n * n + j; }
};

/// Rows: z_ji <= x_i (n^2), sum_i z_ji + z_j0 = 1 - x_j (n), and
/// v'_j0 z_ji - v_ji z_j0 <= 0 (n^2, scaled to unit max coefficient) with
/// v'_j0 = max(v_j0, eps).
MipModel build_mip(const Instance& inst, double eps_nopurchase = 1e-9);

/// Relaxation of the compact program with x fixed to the indicator of s.
lp::LpSolution solve_mip_at(const MipModel& mip, const Assortment& s);

/// Cut model of the MCST relaxation: block j is the per-customer LP of the
/// compact program, separated through its dual. Rows with v_j0 = 0 use the
/// exact limit of the ratio constraint instead of an eps substitute.
class McstCutModel final : public CutModel {
 public:
  explicit McstCutModel(const Instance& inst);
  int num_products() const override { return inst_.size(); }
  int num_blocks() const override { return inst_.size(); }
  double linear_cost(int i) const override;
  double block_lower(int) const override { return 0.0; }
  double block_upper(int b) const override;
  double separate(int b, std::span<const double> x, Cut& cut) const override;
  double lower_estimate(int b, std::span<const double> x) const override;
  double evaluate(const Assortment& s) const override;

 private:
  double ratio_limit(int j, int i) const;
  double threshold_value(int j, std::span<const double> x, int k) const;

  const Instance& inst_;
  std::vector<double> reach_max_;
  std::vector<int> by_revenue_;
  // Revenue threshold of the last separation per block; a single-threaded
  // search cache used by lower_estimate.
  mutable std::vector<int> last_threshold_;
};

/// Choosy objective sum_j lambda_j r_j x_j + sum_i sum_j c_ij (1 - x_i) x_j,
/// c_ij = lambda_i r_j v_ij; block i is the McCormick envelope of row i.
class ChoosyCutModel final : public CutModel {
 public:
  explicit ChoosyCutModel(const Instance& inst);
  int num_products() const override { return inst_.size(); }
  int num_blocks() const override { return inst_.size(); }
  double linear_cost(int i) const override;
  double block_lower(int b) const override { return lower_[b]; }
  double block_upper(int b) const override { return upper_[b]; }
  double separate(int b, std::span<const double> x, Cut& cut) const override;
  double evaluate(const Assortment& s) const override;

 private:
  double c(int i, int j) const;

  const Instance& inst_;
  std::vector<double> lower_, upper_;
};

struct ExactLimits {
  long node_limit = 0;      // 0: unlimited
  double time_limit = 0.0;  // seconds, 0: unlimited
};

/// Optimal MCST assortment. The revenue and plan come from the evaluator.
/// When a limit stops the search, stats.optimal is false and stats.gap holds
/// the remaining bound gap.
SolveResult solve_mcst_exact(const Instance& inst, const ExactLimits& limits = {});

SolveResult solve_choosy_exact(const Instance& inst, const ExactLimits& limits = {});

/// Optimal assortment under the Markov chain model through the optimal
/// stopping fixed point g_i = max(r_i, sum_j v_ij g_j). Rows with v_j0 = 0 are
/// shifted to v_j0 = eps before iterating.
SolveResult solve_markov_optimal(const Instance& inst, double tol = 1e-12, long max_iters = 10'000'000);

/// Exhaustive optimum; throws PreconditionError when n exceeds cap.
SolveResult brute_force_mcst(const Instance& inst, int cap = 16);
SolveResult brute_force_markov(const Instance& inst, int cap = 16);
SolveResult brute_force_choosy(const Instance& inst, int cap = 16);

/// Relaxation bound at the root of the MCST search (all x free).
double mcst_root_bound(const Instance& inst);

}  // namespace mcst
