#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace mcst::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status s);

/// max cost.x  s.t.  rows (dense) with senses/rhs,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> matrix;  // row-major, num_rows() x num_vars()
  std::vector<RowSense> senses;
  std::vector<double> rhs;

  LinearProgram() = default;
  /// n variables with zero cost and bounds [0, +inf).
  explicit LinearProgram(int n);

  int num_vars() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
  void add_row(std::span<const double> coeffs, RowSense sense, double b);
  /// Row given as (variable, coefficient) pairs.
  void add_row(std::initializer_list<std::pair<int, double>> terms, RowSense sense, double b);
  double coeff(int row, int var) const {
    return matrix[static_cast<std::size_t>(row) * cost.size() + static_cast<std::size_t>(var)];
  }
};

struct LpSolution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  long iterations = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-10;
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  int refactor_interval = 100;
  /// Consecutive degenerate pivots before switching to lowest-index rules.
  int bland_after = 50;
  long max_iterations = 2'000'000;
};

/// Bounded-variable simplex on a dense condensed tableau. Every row r has an
/// activity variable s_r = a_r . x bounded by the row bounds; basic variables
/// are kept as explicit linear combinations of the nonbasic ones. Rows can be
/// appended and bounds changed between solves; the next solve() starts from
/// the current basis (dual simplex when the basis is still dual feasible).
class Simplex {
 public:
  Simplex(std::vector<double> cost, std::vector<double> lower, std::vector<double> upper,
          SimplexOptions options = {});

  int num_structural() const { return num_struct_; }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  void add_row(std::span<const double> coeffs, double row_lower, double row_upper);
  void set_bounds(int var, double lower, double upper);
  void set_cost(int var, double c);

  /// Drops rows whose activity variable is basic and for which keep(row)
  /// returns false. Rows with a nonbasic activity are always kept.
  void remove_rows(const std::function<bool(int)>& keep);

  Status solve();

  double objective() const;
  std::span<const double> values() const { return {x_.data(), static_cast<std::size_t>(num_struct_)}; }
  double row_activity(int r) const { return x_[static_cast<std::size_t>(num_struct_ + r)]; }
  double row_lower(int r) const { return lo_[static_cast<std::size_t>(num_struct_ + r)]; }
  double row_upper(int r) const { return up_[static_cast<std::size_t>(num_struct_ + r)]; }
  bool row_is_basic(int r) const { return where_[static_cast<std::size_t>(num_struct_ + r)] >= 0; }
  /// Objective change per unit increase of nonbasic structural `var` (0 if basic).
  double reduced_cost(int var) const;
  long iterations() const { return iterations_; }

 private:
  enum class At : unsigned char { Lower, Upper, Zero };

  double& tab(int r, int k) { return tab_[static_cast<std::size_t>(r) * static_cast<std::size_t>(num_struct_) + static_cast<std::size_t>(k)]; }
  double tab(int r, int k) const { return tab_[static_cast<std::size_t>(r) * static_cast<std::size_t>(num_struct_) + static_cast<std::size_t>(k)]; }
  int num_vars() const { return num_struct_ + num_rows(); }
  double cost_of(int var) const { return phase_one_ || var >= num_struct_ ? 0.0 : cost_[static_cast<std::size_t>(var)]; }
  double nonbasic_value(int var) const;
  bool can_increase(int var) const;
  bool can_decrease(int var) const;

  void refactor();
  void recompute_basic_values();
  void compute_reduced_costs(std::vector<double>& d) const;
  bool make_dual_feasible(const std::vector<double>& d);
  bool primal_feasible() const;
  double row_residual() const;
  void pivot(int r, int k);

  enum class Outcome { Done, Infeasible, Unbounded };
  Outcome run_primal();
  Outcome run_dual();
  void count_iteration(bool degenerate);

  int num_struct_;
  SimplexOptions opt_;
  std::vector<double> cost_;
  std::vector<std::vector<double>> rows_;  // original coefficients
  std::vector<double> lo_, up_, x_;         // per variable (structural, then rows)
  std::vector<At> at_;                      // for nonbasic variables
  std::vector<int> basis_;                  // tableau row -> variable
  std::vector<int> nonbasic_;               // tableau column -> variable
  std::vector<int> where_;                  // variable -> row (>= 0) or -1 - column
  std::vector<double> tab_;
  bool phase_one_ = false;
  bool bland_ = false;
  int degenerate_run_ = 0;
  int since_refactor_ = 0;
  long iterations_ = 0;
};

/// One-shot solve of a LinearProgram.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace mcst::lp
