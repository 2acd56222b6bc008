#include "mcst/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcst/dense_linalg.hpp"
#include "mcst/poly_solvers.hpp"
#include "mcst/tolerances.hpp"

namespace mcst {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_valid(const Instance& inst, const char* who) {
  const auto rep = validate_instance(inst);
  if (!rep.ok()) throw PreconditionError(std::string(who) + ": invalid instance: " + rep.violations.front());
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

// ---------------------------------------------------------------------------
// Compact program

MipModel build_mip(const Instance& inst, double eps_nopurchase) {
  const int n = inst.size();
  MipModel mip;
  mip.n = n;
  mip.eps_nopurchase = eps_nopurchase;
  auto& lp = mip.program;
  lp = lp::LinearProgram(n + n * n + n);
  for (int j = 0; j < n; ++j) {
    lp.upper[mip.x_var(j)] = 1.0;
    lp.cost[mip.x_var(j)] = inst.arrivals[j] * inst.revenues[j];
    for (int i = 0; i < n; ++i) lp.cost[mip.z_var(j, i)] = inst.arrivals[j] * inst.revenues[i];
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      lp.add_row({{mip.z_var(j, i), 1.0}, {mip.x_var(i), -1.0}}, lp::RowSense::LessEqual, 0.0);
  std::vector<double> row(static_cast<std::size_t>(lp.num_vars()));
  for (int j = 0; j < n; ++j) {
    std::fill(row.begin(), row.end(), 0.0);
    for (int i = 0; i < n; ++i) row[mip.z_var(j, i)] = 1.0;
    row[mip.z0_var(j)] = 1.0;
    row[mip.x_var(j)] = 1.0;
    lp.add_row(row, lp::RowSense::Equal, 1.0);
  }
  for (int j = 0; j < n; ++j) {
    const double v0 = std::max(inst.nopurchase(j), eps_nopurchase);
    for (int i = 0; i < n; ++i) {
      // Scaled so the larger coefficient is 1; with a tiny v0 the unscaled row
      // would sit inside the solver's feasibility tolerance.
      const double v = inst.weight(j, i);
      const double scale = std::max(v0, v);
      if (scale == 0.0)
        lp.add_row({{mip.z_var(j, i), 1.0}}, lp::RowSense::LessEqual, 0.0);
      else
        lp.add_row({{mip.z_var(j, i), v0 / scale}, {mip.z0_var(j), -v / scale}}, lp::RowSense::LessEqual, 0.0);
    }
  }
  return mip;
}

lp::LpSolution solve_mip_at(const MipModel& mip, const Assortment& s) {
  auto lp = mip.program;
  for (int i = 0; i < mip.n; ++i) {
    const double v = s.contains(i) ? 1.0 : 0.0;
    lp.lower[mip.x_var(i)] = lp.upper[mip.x_var(i)] = v;
  }
  return lp::solve_lp(lp);
}

// ---------------------------------------------------------------------------
// MCST cut model
//
// For fixed x the block of customer j is
//   max sum_i r_i z_i  s.t.  z_i <= x_i,  z_i <= a_i z_0,  sum_i z_i + z_0 = 1 - x_j,
// with a_i = v_ji / v_j0. Dualizing the balance row with multiplier gamma >= 0
// gives the bound g(gamma) = gamma (1 - x_j) + sum_i x_i p_i - K(gamma), where
// p_i = (r_i - gamma)^+ and K is the fractional knapsack
//   max sum_i x_i beta_i  s.t.  0 <= beta_i <= p_i,  sum_i a_i beta_i <= gamma.
// Every (gamma, beta) yields the cut theta_j <= gamma (1 - x_j) + sum_i (p_i - beta_i) x_i.

McstCutModel::McstCutModel(const Instance& inst) : inst_(inst) {
  // Largest positive revenue that customer j can be moved to; the dual
  // multiplier never needs to exceed it.
  const int n = inst.size();
  reach_max_.assign(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (inst.weight(j, i) > 0.0) reach_max_[j] = std::max(reach_max_[j], inst.revenues[i]);
  by_revenue_.resize(static_cast<std::size_t>(inst.size()));
  std::iota(by_revenue_.begin(), by_revenue_.end(), 0);
  std::stable_sort(by_revenue_.begin(), by_revenue_.end(),
                   [&](int a, int b) { return inst.revenues[a] > inst.revenues[b]; });
  last_threshold_.assign(static_cast<std::size_t>(inst.size()), 0);
}

// a_i = v_ji / v_j0; +inf when v_j0 = 0 < v_ji, 0 when both vanish.
double McstCutModel::ratio_limit(int j, int i) const {
  const double v0 = inst_.nopurchase(j), w = inst_.weight(j, i);
  if (v0 > 0.0) return w / v0;
  return w > 0.0 ? kInf : 0.0;
}

// Feasible point of the block: the k highest-revenue products are filled to
// min(x_i, a_i z_0), the others are left out, and z_0 closes the balance
// z_0 + sum_i z_i = 1 - x_j.
double McstCutModel::threshold_value(int j, std::span<const double> x, int k) const {
  const double b = std::clamp(1.0 - x[j], 0.0, 1.0);
  // phi(t) = t + sum min(x_i, a_i t) is increasing; find phi(t) = b.
  double fixed = 0.0, slope = 1.0;
  std::vector<std::pair<double, int>> kinks;
  for (int q = 0; q < k; ++q) {
    const int i = by_revenue_[q];
    const double a = ratio_limit(j, i);
    if (x[i] <= 0.0 || a == 0.0) continue;
    if (std::isinf(a)) {
      fixed += x[i];
    } else {
      slope += a;
      kinks.push_back({x[i] / a, i});
    }
  }
  if (fixed > b) return -kInf;
  std::sort(kinks.begin(), kinks.end());
  double t = 0.0;
  std::size_t q = 0;
  for (;; ++q) {
    // On the current piece phi(t) = fixed + slope * t.
    const double cand = (b - fixed) / slope;
    if (q == kinks.size() || cand <= kinks[q].first) {
      t = cand;
      break;
    }
    const int i = kinks[q].second;
    const double a = ratio_limit(j, i);
    slope -= a;
    fixed += x[i];
  }
  double value = 0.0;
  for (int p = 0; p < k; ++p) {
    const int i = by_revenue_[p];
    const double a = ratio_limit(j, i);
    if (x[i] <= 0.0 || a == 0.0) continue;
    value += inst_.revenues[i] * (std::isinf(a) ? x[i] : std::min(x[i], a * t));
  }
  return inst_.arrivals[j] * value;
}

double McstCutModel::lower_estimate(int j, std::span<const double> x) const {
  const int n = inst_.size();
  const int k = last_threshold_[j];
  double best = inst_.arrivals[j] * 0.0;
  for (int c = std::max(0, k - 1); c <= std::min(n, k + 1); ++c) best = std::max(best, threshold_value(j, x, c));
  return best;
}

double McstCutModel::linear_cost(int i) const { return inst_.arrivals[i] * inst_.revenues[i]; }

double McstCutModel::block_upper(int b) const { return inst_.arrivals[b] * reach_max_[b]; }

double McstCutModel::evaluate(const Assortment& s) const { return mcst_revenue_value(inst_, s); }

namespace {

struct KnapsackItem {
  int i;
  double a;  // capacity use per unit of beta
  double x;
};

// g(gamma) and, optionally, the knapsack solution beta.
double dual_bound(const std::vector<KnapsackItem>& items, std::span<const double> r, std::span<const double> x,
                  double b, double gamma, std::vector<double>* beta) {
  double value = gamma * b;
  for (std::size_t i = 0; i < r.size(); ++i) value += x[i] * std::max(r[i] - gamma, 0.0);
  double cap = gamma;
  for (const auto& it : items) {
    const double p = std::max(r[it.i] - gamma, 0.0);
    if (p <= 0.0) continue;
    double take = p;
    if (it.a > 0.0) {
      if (cap <= 0.0) break;
      take = std::min(p, cap / it.a);
      cap -= take * it.a;
    }
    value -= it.x * take;
    if (beta) (*beta)[it.i] = take;
  }
  return value;
}

}  // namespace

double McstCutModel::separate(int j, std::span<const double> x, Cut& cut) const {
  const int n = inst_.size();
  const double lam = inst_.arrivals[j];
  const double b = std::clamp(1.0 - x[j], 0.0, 1.0);

  // Knapsack order: decreasing x_i / a_i; items with a_i = +inf never enter.
  std::vector<KnapsackItem> items;
  items.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = ratio_limit(j, i);
    if (!std::isinf(a)) items.push_back({i, a, x[i]});
  }
  // a = 0 sorts first; the key must be a strict weak order even for x = 0.
  auto key = [](const KnapsackItem& it) { return it.a == 0.0 ? kInf : it.x / it.a; };
  std::stable_sort(items.begin(), items.end(),
                   [&](const KnapsackItem& p, const KnapsackItem& q) { return key(p) > key(q); });

  const std::span<const double> r(inst_.revenues);
  auto g = [&](double gamma) { return dual_bound(items, r, x, b, gamma, nullptr); };

  // g is convex and piecewise linear, and increasing beyond reach_max_[j].
  const double top = reach_max_[j];
  double lo = 0.0, hi = top;
  double best_gamma = 0.0, best = g(0.0);
  if (hi > 0.0) {
    const double ghi = g(hi);
    if (ghi < best) best = ghi, best_gamma = hi;
    constexpr double kPhi = 0.6180339887498949;
    double m1 = hi - kPhi * (hi - lo), m2 = lo + kPhi * (hi - lo);
    double g1 = g(m1), g2 = g(m2);
    for (int it = 0; it < 90 && hi - lo > 1e-15 * top; ++it) {
      if (g1 <= g2) {
        hi = m2;
        m2 = m1;
        g2 = g1;
        m1 = hi - kPhi * (hi - lo);
        g1 = g(m1);
      } else {
        lo = m1;
        m1 = m2;
        g1 = g2;
        m2 = lo + kPhi * (hi - lo);
        g2 = g(m2);
      }
    }
    if (g1 < best) best = g1, best_gamma = m1;
    if (g2 < best) best = g2, best_gamma = m2;
    // Breakpoints of the revenue terms are natural minimizers.
    for (double ri : inst_.revenues) {
      if (ri <= 0.0 || std::abs(ri - best_gamma) > 1e-6 * top) continue;
      const double gi = g(ri);
      if (gi < best) best = gi, best_gamma = ri;
    }
  }

  std::vector<double> beta(static_cast<std::size_t>(n), 0.0);
  const double value = dual_bound(items, r, x, b, best_gamma, &beta);
  int k = 0;
  while (k < n && inst_.revenues[by_revenue_[k]] > best_gamma) ++k;
  last_threshold_[j] = k;
  cut.coef.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) cut.coef[i] = lam * (std::max(r[i] - best_gamma, 0.0) - beta[i]);
  cut.coef[j] -= lam * best_gamma;
  cut.constant = lam * best_gamma;
  return lam * value;
}

double mcst_root_bound(const Instance& inst) {
  require_valid(inst, "mcst_root_bound");
  McstCutModel model(inst);
  return relaxation_bound(model, std::vector<int>(static_cast<std::size_t>(inst.size()), -1));
}

// ---------------------------------------------------------------------------
// Choosy cut model

ChoosyCutModel::ChoosyCutModel(const Instance& inst) : inst_(inst) {
  const int n = inst.size();
  lower_.assign(static_cast<std::size_t>(n), 0.0);
  upper_.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double cij = c(i, j);
      (cij < 0.0 ? lower_[i] : upper_[i]) += cij;
    }
}

double ChoosyCutModel::c(int i, int j) const { return inst_.arrivals[i] * inst_.revenues[j] * inst_.weight(i, j); }

double ChoosyCutModel::linear_cost(int i) const { return inst_.arrivals[i] * inst_.revenues[i]; }

double ChoosyCutModel::evaluate(const Assortment& s) const { return choosy_revenue(inst_, s); }

// (1 - x_i) x_j is bounded above by min(x_j, 1 - x_i) and below by
// max(0, x_j - x_i); each term takes the envelope its coefficient sign needs.
double ChoosyCutModel::separate(int i, std::span<const double> x, Cut& cut) const {
  const int n = inst_.size();
  cut.constant = 0.0;
  cut.coef.assign(static_cast<std::size_t>(n), 0.0);
  double value = 0.0;
  for (int j = 0; j < n; ++j) {
    const double cij = c(i, j);
    if (cij == 0.0) continue;
    if (cij > 0.0) {
      if (x[j] <= 1.0 - x[i]) {
        cut.coef[j] += cij;
        value += cij * x[j];
      } else {
        cut.constant += cij;
        cut.coef[i] -= cij;
        value += cij * (1.0 - x[i]);
      }
    } else if (x[j] >= x[i]) {
      cut.coef[j] += cij;
      cut.coef[i] -= cij;
      value += cij * (x[j] - x[i]);
    }
  }
  return value;
}

// ---------------------------------------------------------------------------
// Exact solvers

namespace {

// Best revenue-ordered assortment of the instance in original numbering.
Assortment revenue_ordered_start(const Instance& inst) {
  const auto cf = canonicalize(inst);
  const auto ro = best_revenue_ordered(cf.instance);
  return cf.assortment_to_original(ro.result.assortment);
}

}  // namespace

SolveResult solve_mcst_exact(const Instance& inst, const ExactLimits& limits) {
  const auto t0 = Clock::now();
  require_valid(inst, "solve_mcst_exact");
  McstCutModel model(inst);
  const auto warm = revenue_ordered_start(inst);
  const double build = seconds_since(t0);
  const auto out = branch_and_bound(model, warm, {limits.node_limit, limits.time_limit});
  SolveResult res;
  res.assortment = out.best;
  auto pr = mcst_revenue(inst, out.best);
  res.revenue = pr.revenue;
  res.plan = std::move(pr.plan);
  res.stats = out.stats;
  res.stats.build_seconds = build;
  res.stats.wall_seconds = seconds_since(t0);
  return res;
}

SolveResult solve_choosy_exact(const Instance& inst, const ExactLimits& limits) {
  const auto t0 = Clock::now();
  require_valid(inst, "solve_choosy_exact");
  ChoosyCutModel model(inst);
  // Warm start: best revenue-ordered prefix under the choosy objective.
  const auto cf = canonicalize(inst);
  Assortment warm;
  double warm_value = -kInf;
  for (int t = 0; t <= inst.size(); ++t) {
    const auto s = cf.assortment_to_original(Assortment::prefix(t));
    const double v = choosy_revenue(inst, s);
    if (v > warm_value) warm_value = v, warm = s;
  }
  const double build = seconds_since(t0);
  const auto out = branch_and_bound(model, warm, {limits.node_limit, limits.time_limit});
  SolveResult res;
  res.assortment = out.best;
  res.revenue = choosy_revenue(inst, out.best);
  for (int j : out.best.complement(inst.size())) res.plan.sets[j] = {};
  res.stats = out.stats;
  res.stats.build_seconds = build;
  res.stats.wall_seconds = seconds_since(t0);
  return res;
}

namespace {

Instance shift_zero_nopurchase(const Instance& inst, double eps) {
  Instance out = inst;
  for (int j = 0; j < out.size(); ++j) {
    if (out.nopurchase(j) > 0.0) continue;
    for (int i = 0; i < out.size(); ++i) out.weight(j, i) *= 1.0 - eps;
    out.nopurchase(j) = eps;
  }
  return out;
}

// Values of the stopping rule "buy inside s": V_i = r_i on s, V = P V elsewhere.
std::vector<double> stopping_values(const Instance& inst, const std::vector<char>& in) {
  const int n = inst.size();
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    if (in[i]) v[i] = inst.revenues[i];
  const int m = static_cast<int>(out.size());
  if (m == 0) return v;
  std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0), rhs(static_cast<std::size_t>(m), 0.0);
  for (int p = 0; p < m; ++p) {
    const int i = out[p];
    a[static_cast<std::size_t>(p) * m + p] = 1.0;
    for (int q = 0; q < m; ++q) a[static_cast<std::size_t>(p) * m + q] -= inst.weight(i, out[q]);
    for (int k = 0; k < n; ++k)
      if (in[k]) rhs[p] += inst.weight(i, k) * inst.revenues[k];
  }
  const auto sol = solve_dense(std::move(a), std::move(rhs));
  for (int p = 0; p < m; ++p) v[out[p]] = sol[p];
  return v;
}

}  // namespace

SolveResult solve_markov_optimal(const Instance& inst, double tol, long max_iters) {
  const auto t0 = Clock::now();
  require_valid(inst, "solve_markov_optimal");
  const int n = inst.size();
  const Instance shifted = shift_zero_nopurchase(inst, tol::kNoPurchaseEps);

  auto continuation = [&](const std::vector<double>& g, int i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += shifted.weight(i, k) * g[k];
    return s;
  };

  // Value iteration, capped; policy iteration below makes the answer exact.
  std::vector<double> g(shifted.revenues), next(static_cast<std::size_t>(n));
  long iters = 0;
  const long vi_cap = std::min<long>(max_iters, 2000);
  for (; iters < vi_cap; ++iters) {
    double diff = 0.0;
    for (int i = 0; i < n; ++i) {
      next[i] = std::max(shifted.revenues[i], continuation(g, i));
      diff = std::max(diff, std::abs(next[i] - g[i]));
    }
    g.swap(next);
    if (diff <= tol) break;
  }

  double scale = 1.0;
  for (double r : inst.revenues) scale = std::max(scale, std::abs(r));
  const double tie = std::max(tol, 1e-12) * scale;
  std::vector<char> in(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) in[i] = shifted.revenues[i] >= continuation(g, i) - tie;
  bool stable = false;
  for (long round = 0; round < max_iters && !stable; ++round, ++iters) {
    const auto v = stopping_values(shifted, in);
    std::vector<char> next_in(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) next_in[i] = shifted.revenues[i] >= continuation(v, i) - tie;
    stable = next_in == in;
    in.swap(next_in);
  }
  if (!stable) throw NumericError("solve_markov_optimal: no convergence within max_iters");

  SolveResult res;
  res.assortment = Assortment::from_indicator(std::vector<double>(in.begin(), in.end()));
  try {
    res.revenue = markov_evaluate(inst, res.assortment).revenue;
  } catch (const NumericError&) {
    res.revenue = markov_evaluate(shifted, res.assortment).revenue;
  }
  for (int j : res.assortment.complement(n)) res.plan.sets[j] = {};
  res.stats.lp_iterations = iters;
  res.stats.wall_seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------
// Enumeration oracles

namespace {

template <class Value>
SolveResult enumerate(const Instance& inst, int cap, const char* who, Value value) {
  require_valid(inst, who);
  const int n = inst.size();
  if (n > cap || n > 30) throw PreconditionError(std::string(who) + ": n exceeds the enumeration cap");
  const auto t0 = Clock::now();
  SolveResult best;
  bool have = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto s = Assortment::from_mask(mask);
    double v;
    try {
      v = value(s);
    } catch (const NumericError&) {
      continue;
    }
    if (!have || v > best.revenue) {
      have = true;
      best.revenue = v;
      best.assortment = s;
    }
  }
  best.stats.nodes = static_cast<long>(std::uint64_t{1} << n);
  best.stats.wall_seconds = seconds_since(t0);
  return best;
}

}  // namespace

SolveResult brute_force_mcst(const Instance& inst, int cap) {
  // Members in non-increasing revenue order feed the fast recommendation path.
  std::vector<int> order(static_cast<std::size_t>(inst.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return inst.revenues[a] > inst.revenues[b]; });
  std::vector<int> ordered;
  auto res = enumerate(inst, cap, "brute_force_mcst", [&](const Assortment& s) {
    ordered.clear();
    for (int i : order)
      if (s.contains(i)) ordered.push_back(i);
    double v = 0.0;
    for (int j = 0; j < inst.size(); ++j)
      v += s.contains(j) ? inst.arrivals[j] * inst.revenues[j]
                         : inst.arrivals[j] * best_recommendation_value(inst, j, ordered);
    return v;
  });
  auto pr = mcst_revenue(inst, res.assortment);
  res.plan = std::move(pr.plan);
  res.revenue = pr.revenue;
  return res;
}

SolveResult brute_force_markov(const Instance& inst, int cap) {
  auto res = enumerate(inst, cap, "brute_force_markov",
                       [&](const Assortment& s) { return markov_evaluate(inst, s).revenue; });
  for (int j : res.assortment.complement(inst.size())) res.plan.sets[j] = {};
  return res;
}

SolveResult brute_force_choosy(const Instance& inst, int cap) {
  auto res = enumerate(inst, cap, "brute_force_choosy", [&](const Assortment& s) { return choosy_revenue(inst, s); });
  for (int j : res.assortment.complement(inst.size())) res.plan.sets[j] = {};
  return res;
}

}  // namespace mcst
