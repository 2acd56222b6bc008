#include "mcst/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcst/core_model.hpp"

namespace mcst::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

LinearProgram::LinearProgram(int n)
    : cost(static_cast<std::size_t>(n), 0.0),
      lower(static_cast<std::size_t>(n), 0.0),
      upper(static_cast<std::size_t>(n), kInf) {}

void LinearProgram::add_row(std::span<const double> coeffs, RowSense sense, double b) {
  if (static_cast<int>(coeffs.size()) != num_vars()) throw PreconditionError("LinearProgram::add_row: wrong length");
  matrix.insert(matrix.end(), coeffs.begin(), coeffs.end());
  senses.push_back(sense);
  rhs.push_back(b);
}

void LinearProgram::add_row(std::initializer_list<std::pair<int, double>> terms, RowSense sense, double b) {
  std::vector<double> row(static_cast<std::size_t>(num_vars()), 0.0);
  for (auto [var, c] : terms) {
    if (var < 0 || var >= num_vars()) throw PreconditionError("LinearProgram::add_row: variable out of range");
    row[static_cast<std::size_t>(var)] += c;
  }
  add_row(row, sense, b);
}

// ---------------------------------------------------------------------------

Simplex::Simplex(std::vector<double> cost, std::vector<double> lower, std::vector<double> upper,
                 SimplexOptions options)
    : num_struct_(static_cast<int>(cost.size())), opt_(options), cost_(std::move(cost)) {
  if (lower.size() != cost_.size() || upper.size() != cost_.size())
    throw PreconditionError("Simplex: bound vectors have the wrong length");
  lo_ = std::move(lower);
  up_ = std::move(upper);
  x_.assign(cost_.size(), 0.0);
  at_.assign(cost_.size(), At::Lower);
  where_.resize(cost_.size());
  nonbasic_.resize(cost_.size());
  for (int k = 0; k < num_struct_; ++k) {
    if (lo_[k] > up_[k]) throw PreconditionError("Simplex: lower bound above upper bound");
    nonbasic_[k] = k;
    where_[k] = -1 - k;
    if (std::isfinite(lo_[k])) {
      at_[k] = At::Lower;
    } else if (std::isfinite(up_[k])) {
      at_[k] = At::Upper;
    } else {
      at_[k] = At::Zero;
    }
    x_[k] = nonbasic_value(k);
  }
}

double Simplex::nonbasic_value(int var) const {
  switch (at_[var]) {
    case At::Lower: return lo_[var];
    case At::Upper: return up_[var];
    case At::Zero: return 0.0;
  }
  return 0.0;
}

bool Simplex::can_increase(int var) const {
  return at_[var] == At::Zero || (at_[var] == At::Lower && up_[var] > lo_[var]);
}

bool Simplex::can_decrease(int var) const {
  return at_[var] == At::Zero || (at_[var] == At::Upper && up_[var] > lo_[var]);
}

void Simplex::add_row(std::span<const double> coeffs, double row_lower, double row_upper) {
  if (static_cast<int>(coeffs.size()) != num_struct_) throw PreconditionError("Simplex::add_row: wrong length");
  if (row_lower > row_upper) throw PreconditionError("Simplex::add_row: empty row range");
  const int var = num_vars();
  rows_.emplace_back(coeffs.begin(), coeffs.end());
  lo_.push_back(row_lower);
  up_.push_back(row_upper);
  at_.push_back(At::Lower);

  // s = a.x; substitute the basic structurals by their tableau rows.
  std::vector<double> newrow(static_cast<std::size_t>(num_struct_), 0.0);
  for (int k = 0; k < num_struct_; ++k)
    if (nonbasic_[k] < num_struct_) newrow[k] = coeffs[nonbasic_[k]];
  for (int r = 0; r < static_cast<int>(basis_.size()); ++r) {
    const int b = basis_[r];
    if (b >= num_struct_ || coeffs[b] == 0.0) continue;
    const double a = coeffs[b];
    for (int k = 0; k < num_struct_; ++k) newrow[k] += a * tab(r, k);
  }
  double value = 0.0;
  for (int k = 0; k < num_struct_; ++k) value += coeffs[k] * x_[k];

  tab_.insert(tab_.end(), newrow.begin(), newrow.end());
  where_.push_back(static_cast<int>(basis_.size()));
  basis_.push_back(var);
  x_.push_back(value);
}

void Simplex::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= num_struct_) throw PreconditionError("Simplex::set_bounds: variable out of range");
  if (lower > upper) throw PreconditionError("Simplex::set_bounds: lower bound above upper bound");
  lo_[var] = lower;
  up_[var] = upper;
  if (where_[var] >= 0) return;
  if (at_[var] == At::Lower && !std::isfinite(lower)) at_[var] = std::isfinite(upper) ? At::Upper : At::Zero;
  if (at_[var] == At::Upper && !std::isfinite(upper)) at_[var] = std::isfinite(lower) ? At::Lower : At::Zero;
  if (at_[var] == At::Zero && std::isfinite(lower)) at_[var] = At::Lower;
  const double old = x_[var];
  x_[var] = nonbasic_value(var);
  const double delta = x_[var] - old;
  if (delta != 0.0) {
    const int k = -1 - where_[var];
    for (int r = 0; r < static_cast<int>(basis_.size()); ++r) x_[basis_[r]] += tab(r, k) * delta;
  }
}

void Simplex::set_cost(int var, double c) {
  if (var < 0 || var >= num_struct_) throw PreconditionError("Simplex::set_cost: variable out of range");
  cost_[var] = c;
}

void Simplex::remove_rows(const std::function<bool(int)>& keep) {
  const int m = num_rows();
  std::vector<int> new_index(static_cast<std::size_t>(m), -1);
  int kept = 0;
  for (int r = 0; r < m; ++r) {
    const bool basic = where_[num_struct_ + r] >= 0;
    if (!basic || keep(r)) new_index[r] = kept++;
  }
  if (kept == m) return;

  // Drop the tableau rows of removed activity variables (swap with the last).
  for (int r = 0; r < m; ++r) {
    if (new_index[r] >= 0) continue;
    const int t = where_[num_struct_ + r];
    const int last = static_cast<int>(basis_.size()) - 1;
    if (t != last) {
      std::copy_n(tab_.begin() + static_cast<std::ptrdiff_t>(last) * num_struct_, num_struct_,
                  tab_.begin() + static_cast<std::ptrdiff_t>(t) * num_struct_);
      basis_[t] = basis_[last];
      where_[basis_[t]] = t;
    }
    basis_.pop_back();
    tab_.resize(basis_.size() * static_cast<std::size_t>(num_struct_));
  }

  auto remap = [&](int var) { return var < num_struct_ ? var : num_struct_ + new_index[var - num_struct_]; };
  for (int& b : basis_) b = remap(b);
  for (int& v : nonbasic_) v = remap(v);

  std::vector<std::vector<double>> rows;
  std::vector<double> lo(lo_.begin(), lo_.begin() + num_struct_), up(up_.begin(), up_.begin() + num_struct_),
      x(x_.begin(), x_.begin() + num_struct_);
  std::vector<At> at(at_.begin(), at_.begin() + num_struct_);
  for (int r = 0; r < m; ++r) {
    if (new_index[r] < 0) continue;
    rows.push_back(std::move(rows_[r]));
    const int v = num_struct_ + r;
    lo.push_back(lo_[v]);
    up.push_back(up_[v]);
    x.push_back(x_[v]);
    at.push_back(at_[v]);
  }
  rows_ = std::move(rows);
  lo_ = std::move(lo);
  up_ = std::move(up);
  x_ = std::move(x);
  at_ = std::move(at);
  where_.assign(static_cast<std::size_t>(num_vars()), 0);
  for (int r = 0; r < static_cast<int>(basis_.size()); ++r) where_[basis_[r]] = r;
  for (int k = 0; k < num_struct_; ++k) where_[nonbasic_[k]] = -1 - k;
}

// Rebuilds the tableau from the original rows. Rows whose activity is
// nonbasic determine the basic structurals through a q x q system; basic
// activities are then plain substitutions.
void Simplex::refactor() {
  since_refactor_ = 0;
  const int m = num_rows();
  if (m == 0) return;
  std::vector<int> tight_rows, basic_struct;
  for (int r = 0; r < m; ++r)
    if (where_[num_struct_ + r] < 0) tight_rows.push_back(r);
  for (int b : basis_)
    if (b < num_struct_) basic_struct.push_back(b);
  const int q = static_cast<int>(basic_struct.size());
  if (static_cast<int>(tight_rows.size()) != q) throw NumericError("simplex: inconsistent basis");

  std::vector<double> lu(static_cast<std::size_t>(q) * q);
  auto K = [&](int i, int j) -> double& { return lu[static_cast<std::size_t>(i) * q + j]; };
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) K(i, j) = rows_[tight_rows[i]][basic_struct[j]];
  std::vector<int> perm(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) perm[i] = i;
  for (int c = 0; c < q; ++c) {
    int piv = c;
    for (int i = c + 1; i < q; ++i)
      if (std::abs(K(i, c)) > std::abs(K(piv, c))) piv = i;
    if (std::abs(K(piv, c)) < 1e-13) throw NumericError("simplex: singular basis during refactorization");
    if (piv != c) {
      for (int j = 0; j < q; ++j) std::swap(K(c, j), K(piv, j));
      std::swap(perm[c], perm[piv]);
    }
    for (int i = c + 1; i < q; ++i) {
      const double f = K(i, c) / K(c, c);
      K(i, c) = f;
      if (f == 0.0) continue;
      for (int j = c + 1; j < q; ++j) K(i, j) -= f * K(c, j);
    }
  }
  std::vector<int> tight_pos(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < q; ++i) tight_pos[tight_rows[i]] = i;

  // sol[j] = d x_{basic_struct[j]} / d x_v for the nonbasic variable v.
  std::vector<double> rhs(static_cast<std::size_t>(q)), sol(static_cast<std::size_t>(q));
  std::vector<double> coef(static_cast<std::size_t>(num_struct_), 0.0);
  for (int k = 0; k < num_struct_; ++k) {
    const int v = nonbasic_[k];
    for (int i = 0; i < q; ++i) {
      const int r = tight_rows[perm[i]];
      if (v < num_struct_)
        rhs[i] = -rows_[r][v];
      else
        rhs[i] = v - num_struct_ == r ? 1.0 : 0.0;
    }
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < i; ++j) rhs[i] -= K(i, j) * rhs[j];
    for (int i = q - 1; i >= 0; --i) {
      for (int j = i + 1; j < q; ++j) rhs[i] -= K(i, j) * rhs[j];
      rhs[i] /= K(i, i);
    }
    std::fill(coef.begin(), coef.end(), 0.0);
    if (v < num_struct_) coef[v] = 1.0;
    for (int j = 0; j < q; ++j) coef[basic_struct[j]] = rhs[j];
    for (int t = 0; t < m; ++t) {
      const int b = basis_[t];
      if (b < num_struct_) {
        tab(t, k) = coef[b];
        continue;
      }
      const auto& a = rows_[b - num_struct_];
      double s = v < num_struct_ ? a[v] : 0.0;
      for (int j = 0; j < q; ++j) s += a[basic_struct[j]] * rhs[j];
      tab(t, k) = s;
    }
  }
}

void Simplex::recompute_basic_values() {
  for (int k = 0; k < num_struct_; ++k) x_[nonbasic_[k]] = nonbasic_value(nonbasic_[k]);
  for (int r = 0; r < num_rows(); ++r) {
    double v = 0.0;
    for (int k = 0; k < num_struct_; ++k) v += tab(r, k) * x_[nonbasic_[k]];
    x_[basis_[r]] = v;
  }
}

void Simplex::compute_reduced_costs(std::vector<double>& d) const {
  d.assign(static_cast<std::size_t>(num_struct_), 0.0);
  for (int k = 0; k < num_struct_; ++k) d[k] = cost_of(nonbasic_[k]);
  for (int r = 0; r < num_rows(); ++r) {
    const double c = cost_of(basis_[r]);
    if (c == 0.0) continue;
    for (int k = 0; k < num_struct_; ++k) d[k] += c * tab(r, k);
  }
}

double Simplex::reduced_cost(int var) const {
  if (where_[var] >= 0) return 0.0;
  std::vector<double> d;
  compute_reduced_costs(d);
  return d[-1 - where_[var]];
}

// Moves boxed nonbasic variables to the bound their reduced cost prefers.
// Returns false if some variable cannot be placed dual feasibly.
bool Simplex::make_dual_feasible(const std::vector<double>& d) {
  bool ok = true;
  bool moved = false;
  for (int k = 0; k < num_struct_; ++k) {
    const int v = nonbasic_[k];
    const bool has_lo = std::isfinite(lo_[v]), has_up = std::isfinite(up_[v]);
    if (d[k] > opt_.dual_tol) {
      if (has_up) {
        if (at_[v] != At::Upper) moved = true, at_[v] = At::Upper;
      } else {
        ok = false;
      }
    } else if (d[k] < -opt_.dual_tol) {
      if (has_lo) {
        if (at_[v] != At::Lower) moved = true, at_[v] = At::Lower;
      } else {
        ok = false;
      }
    }
  }
  if (moved) recompute_basic_values();
  return ok;
}

bool Simplex::primal_feasible() const {
  for (int b : basis_)
    if (x_[b] < lo_[b] - opt_.primal_tol || x_[b] > up_[b] + opt_.primal_tol) return false;
  return true;
}

void Simplex::pivot(int r, int k) {
  const int n = num_struct_;
  const double p = tab(r, k);
  double* prow = &tab_[static_cast<std::size_t>(r) * n];
  for (int j = 0; j < n; ++j) prow[j] = -prow[j] / p;
  prow[k] = 1.0 / p;
  for (int i = 0; i < num_rows(); ++i) {
    if (i == r) continue;
    double* row = &tab_[static_cast<std::size_t>(i) * n];
    const double f = row[k];
    if (f == 0.0) continue;
    for (int j = 0; j < n; ++j) row[j] += f * prow[j];
    row[k] = f * prow[k];
  }
  const int entering = nonbasic_[k], leaving = basis_[r];
  basis_[r] = entering;
  nonbasic_[k] = leaving;
  where_[entering] = r;
  where_[leaving] = -1 - k;
  if (++since_refactor_ >= opt_.refactor_interval) {
    refactor();
    recompute_basic_values();
  }
}

void Simplex::count_iteration(bool degenerate) {
  if (++iterations_ > opt_.max_iterations) throw NumericError("simplex: iteration limit reached");
  degenerate_run_ = degenerate ? degenerate_run_ + 1 : 0;
  if (degenerate_run_ >= opt_.bland_after) bland_ = true;
}

Simplex::Outcome Simplex::run_primal() {
  std::vector<double> d;
  bland_ = false;
  degenerate_run_ = 0;
  for (;;) {
    compute_reduced_costs(d);
    int k_in = -1;
    double best = 0.0;
    for (int k = 0; k < num_struct_; ++k) {
      const int v = nonbasic_[k];
      double score = 0.0;
      if (d[k] > opt_.dual_tol && can_increase(v))
        score = d[k];
      else if (d[k] < -opt_.dual_tol && can_decrease(v))
        score = -d[k];
      else
        continue;
      if (bland_) {
        if (k_in < 0 || v < nonbasic_[k_in]) k_in = k;
      } else if (score > best) {
        best = score;
        k_in = k;
      }
    }
    if (k_in < 0) return Outcome::Done;

    const int e = nonbasic_[k_in];
    const double dir = d[k_in] > 0.0 ? 1.0 : -1.0;
    double step = up_[e] - lo_[e];  // bound flip
    int r_out = -1;
    double r_pivot = 0.0;
    for (int r = 0; r < num_rows(); ++r) {
      const double g = tab(r, k_in) * dir;
      if (std::abs(g) <= opt_.pivot_tol) continue;
      const int b = basis_[r];
      double lim;
      if (g > 0.0) {
        if (!std::isfinite(up_[b])) continue;
        lim = (up_[b] - x_[b]) / g;
      } else {
        if (!std::isfinite(lo_[b])) continue;
        lim = (lo_[b] - x_[b]) / g;
      }
      lim = std::max(lim, 0.0);
      bool take = lim < step - 1e-12;
      if (!take && r_out >= 0 && lim <= step + 1e-12)
        take = bland_ ? b < basis_[r_out] : std::abs(g) > std::abs(r_pivot);
      if (take) {
        step = lim;
        r_out = r;
        r_pivot = g;
      }
    }
    if (!std::isfinite(step)) return Outcome::Unbounded;
    count_iteration(step <= opt_.primal_tol);

    const double delta = dir * step;
    for (int r = 0; r < num_rows(); ++r) x_[basis_[r]] += tab(r, k_in) * delta;
    if (r_out < 0) {
      at_[e] = at_[e] == At::Upper ? At::Lower : At::Upper;
      x_[e] = nonbasic_value(e);
      continue;
    }
    const int l = basis_[r_out];
    x_[e] += delta;
    at_[l] = r_pivot > 0.0 ? At::Upper : At::Lower;
    const double newval = x_[e];
    pivot(r_out, k_in);
    x_[l] = nonbasic_value(l);
    if (since_refactor_ != 0) x_[e] = newval;
  }
}

Simplex::Outcome Simplex::run_dual() {
  std::vector<double> d;
  bland_ = false;
  degenerate_run_ = 0;
  for (;;) {
    int r_out = -1;
    double worst = 0.0;
    for (int r = 0; r < num_rows(); ++r) {
      const int b = basis_[r];
      double viol = 0.0;
      if (x_[b] < lo_[b] - opt_.primal_tol)
        viol = lo_[b] - x_[b];
      else if (x_[b] > up_[b] + opt_.primal_tol)
        viol = x_[b] - up_[b];
      else
        continue;
      if (bland_) {
        if (r_out < 0 || b < basis_[r_out]) r_out = r;
      } else if (viol > worst) {
        worst = viol;
        r_out = r;
      }
    }
    if (r_out < 0) return Outcome::Done;

    compute_reduced_costs(d);
    const int l = basis_[r_out];
    const bool to_lower = x_[l] < lo_[l];
    const double target = to_lower ? lo_[l] : up_[l];
    // x_l must move by `need`; entering variable k moves by need / T[r][k].
    const double need = target - x_[l];
    int k_in = -1;
    double best_ratio = kInf, best_abs = 0.0;
    for (int k = 0; k < num_struct_; ++k) {
      const double a = tab(r_out, k);
      if (std::abs(a) <= opt_.pivot_tol) continue;
      const int v = nonbasic_[k];
      const double move = need / a;  // sign of the change of v
      if (move > 0.0 && !can_increase(v)) continue;
      if (move < 0.0 && !can_decrease(v)) continue;
      const double ratio = std::max(0.0, std::abs(d[k])) / std::abs(a);
      bool take;
      if (k_in < 0)
        take = true;
      else if (ratio < best_ratio - 1e-12)
        take = true;
      else if (ratio <= best_ratio + 1e-12)
        take = bland_ ? v < nonbasic_[k_in] : std::abs(a) > best_abs;
      else
        take = false;
      if (take) {
        k_in = k;
        best_ratio = ratio;
        best_abs = std::abs(a);
      }
    }
    if (k_in < 0) return Outcome::Infeasible;
    count_iteration(best_ratio <= opt_.dual_tol);

    const int e = nonbasic_[k_in];
    const double theta = need / tab(r_out, k_in);
    for (int r = 0; r < num_rows(); ++r) x_[basis_[r]] += tab(r, k_in) * theta;
    const double newval = x_[e] + theta;
    at_[l] = to_lower ? At::Lower : At::Upper;
    pivot(r_out, k_in);
    x_[l] = nonbasic_value(l);
    if (since_refactor_ != 0) x_[e] = newval;
  }
}

// Largest |a_r . x - s_r| over all rows.
double Simplex::row_residual() const {
  double worst = 0.0;
  for (int r = 0; r < num_rows(); ++r) {
    double a = 0.0;
    for (int k = 0; k < num_struct_; ++k) a += rows_[r][k] * x_[k];
    const double s = x_[num_struct_ + r];
    worst = std::max(worst, std::abs(a - s) / (1.0 + std::abs(s)));
  }
  return worst;
}

Status Simplex::solve() {
  std::vector<double> d;
  for (int attempt = 0; attempt < 4; ++attempt) {
    // The tableau is kept exact under row additions; refactor on schedule,
    // after pivoting-heavy solves, or when a retry is needed.
    if (attempt > 0 || since_refactor_ >= opt_.refactor_interval) refactor();
    recompute_basic_values();
    phase_one_ = false;
    compute_reduced_costs(d);
    if (make_dual_feasible(d)) {
      if (run_dual() == Outcome::Infeasible) {
        if (since_refactor_ == 0 || attempt > 0) return Status::Infeasible;
        continue;
      }
    } else if (!primal_feasible()) {
      phase_one_ = true;
      const auto out = run_dual();
      phase_one_ = false;
      if (out == Outcome::Infeasible) {
        if (since_refactor_ == 0 || attempt > 0) return Status::Infeasible;
        continue;
      }
    }
    if (run_primal() == Outcome::Unbounded) return Status::Unbounded;

    if (since_refactor_ > 0) {
      recompute_basic_values();
      if (row_residual() > 1e-10) continue;
    }
    compute_reduced_costs(d);
    bool dual_ok = true;
    for (int k = 0; k < num_struct_; ++k) {
      const int v = nonbasic_[k];
      if ((d[k] > 10 * opt_.dual_tol && can_increase(v)) || (d[k] < -10 * opt_.dual_tol && can_decrease(v)))
        dual_ok = false;
    }
    if (dual_ok && primal_feasible()) return Status::Optimal;
  }
  throw NumericError("simplex: could not reach a verified optimal basis");
}

double Simplex::objective() const {
  double z = 0.0;
  for (int k = 0; k < num_struct_; ++k) z += cost_[k] * x_[k];
  return z;
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  const int n = lp.num_vars();
  if (lp.lower.size() != lp.cost.size() || lp.upper.size() != lp.cost.size() ||
      lp.matrix.size() != static_cast<std::size_t>(n) * lp.rhs.size() || lp.senses.size() != lp.rhs.size())
    throw PreconditionError("solve_lp: inconsistent dimensions");
  Simplex sx(lp.cost, lp.lower, lp.upper, options);
  for (int r = 0; r < lp.num_rows(); ++r) {
    std::span<const double> row(lp.matrix.data() + static_cast<std::size_t>(r) * n, static_cast<std::size_t>(n));
    const double b = lp.rhs[r];
    switch (lp.senses[r]) {
      case RowSense::LessEqual: sx.add_row(row, -kInf, b); break;
      case RowSense::GreaterEqual: sx.add_row(row, b, kInf); break;
      case RowSense::Equal: sx.add_row(row, b, b); break;
    }
  }
  LpSolution sol;
  sol.status = sx.solve();
  sol.iterations = sx.iterations();
  if (sol.status == Status::Optimal) {
    sol.x.assign(sx.values().begin(), sx.values().end());
    sol.objective = sx.objective();
  }
  return sol;
}

}  // namespace mcst::lp
