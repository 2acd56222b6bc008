#pragma once

#include <limits>
#include <span>
#include <vector>

#include "mcst/core_model.hpp"

namespace mcst {

/// Affine upper bound  theta_b <= constant + coef . x  on one block.
struct Cut {
  double constant = 0.0;
  std::vector<double> coef;
};

/// Binary program  max sum_i c_i x_i + sum_b phi_b(x)  where every phi_b is
/// concave on [0,1]^n and is accessed only through its value and a
/// supergradient cut. The relaxation replaces phi_b by theta_b bounded by the
/// accumulated cuts.
class CutModel {
 public:
  virtual ~CutModel() = default;
  virtual int num_products() const = 0;
  virtual int num_blocks() const = 0;
  virtual double linear_cost(int i) const = 0;
  /// Bounds on phi_b over the unit box.
  virtual double block_lower(int b) const = 0;
  virtual double block_upper(int b) const = 0;
  /// Value of phi_b at x, with a cut that is valid everywhere on the box and
  /// tight at x (up to rounding).
  virtual double separate(int b, std::span<const double> x, Cut& cut) const = 0;
  /// Cheap lower bound on phi_b(x); blocks whose theta does not exceed it
  /// need no separation.
  virtual double lower_estimate(int /*b*/, std::span<const double> /*x*/) const {
    return -std::numeric_limits<double>::infinity();
  }
  /// Objective of the binary program at an integral point; authoritative.
  virtual double evaluate(const Assortment& s) const = 0;
};

struct BnbLimits {
  long node_limit = 0;      // 0: unlimited
  double time_limit = 0.0;  // seconds, 0: unlimited
};

struct BnbOutcome {
  Assortment best;
  double value = 0.0;
  double bound = 0.0;
  SolveStats stats;
};

/// Best-bound search with depth-first plunging; branches on the most
/// fractional x (ties to the lowest index). `warm_start` seeds the incumbent.
BnbOutcome branch_and_bound(const CutModel& model, const Assortment& warm_start, const BnbLimits& limits = {});

/// Optimal value of the relaxation with some variables fixed
/// (fix[i] = -1 free, 0 or 1 fixed), solved to convergence.
double relaxation_bound(const CutModel& model, const std::vector<int>& fix);

}  // namespace mcst
