#include "mcst/poly_solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace mcst {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_sorted(const std::vector<double>& revenues, const char* who) {
  if (!std::is_sorted(revenues.begin(), revenues.end(), std::greater<>()))
    throw PreconditionError(std::string(who) + ": revenues must be non-increasing (canonicalize first)");
}

}  // namespace

// ---------------------------------------------------------------------------
// Homogeneous transitions

HomogeneousInstance as_homogeneous(const Instance& inst) {
  const auto rep = validate_instance(inst);
  if (!rep.homogeneous) throw PreconditionError("instance is not homogeneous");
  HomogeneousInstance h;
  h.revenues = inst.revenues;
  h.arrivals = inst.arrivals;
  const auto row = inst.row(0);
  h.weights.assign(row.begin(), row.end());
  return h;
}

int homogeneous_prefix_length(const HomogeneousInstance& h) {
  const int n = h.size();
  if (n == 0 || h.revenues[0] < 0.0) return 0;
  double rv = h.revenues[0] * h.weights[1];
  double v = h.weights[0] + h.weights[1];
  for (int i = 1; i < n; ++i) {
    const double ratio = v > 0.0 ? rv / v : 0.0;
    if (h.revenues[i] - ratio < 0.0) return i;
    rv += h.revenues[i] * h.weights[i + 1];
    v += h.weights[i + 1];
  }
  return n;
}

std::vector<double> homogeneous_adjusted_revenues(const HomogeneousInstance& h) {
  const int n = h.size();
  std::vector<double> out;
  if (n < 2) return out;
  out.reserve(static_cast<std::size_t>(n) - 1);
  double rv = h.revenues[0] * h.weights[1];
  double v = h.weights[0] + h.weights[1];
  for (int i = 1; i < n; ++i) {
    out.push_back(h.revenues[i] - (v > 0.0 ? rv / v : 0.0));
    rv += h.revenues[i] * h.weights[i + 1];
    v += h.weights[i + 1];
  }
  return out;
}

double homogeneous_prefix_revenue(const HomogeneousInstance& h, int t) {
  double direct = 0.0, outside = 0.0, rv = 0.0, v = h.weights[0];
  for (int i = 0; i < h.size(); ++i) {
    if (i < t) {
      direct += h.arrivals[i] * h.revenues[i];
      rv += h.revenues[i] * h.weights[i + 1];
      v += h.weights[i + 1];
    } else {
      outside += h.arrivals[i];
    }
  }
  return direct + outside * (v > 0.0 ? rv / v : 0.0);
}

SolveResult solve_homogeneous(const Instance& inst) {
  const auto t0 = Clock::now();
  const auto h = as_homogeneous(inst);
  require_sorted(h.revenues, "solve_homogeneous");
  const int t = homogeneous_prefix_length(h);

  SolveResult res;
  res.assortment = Assortment::prefix(t);
  for (int j = t; j < h.size(); ++j) res.plan.sets[j] = res.assortment.members();
  res.revenue = homogeneous_prefix_revenue(h, t);
  res.stats.wall_seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------
// Transit to one product

TransitToOneInstance as_transit_to_one(const Instance& inst) {
  const int n = inst.size();
  TransitToOneInstance t;
  t.revenues = inst.revenues;
  t.arrivals = inst.arrivals;
  t.parent.assign(static_cast<std::size_t>(n), -1);
  t.link_weight.assign(static_cast<std::size_t>(n), 0.0);
  t.nopurchase.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    t.nopurchase[j] = inst.nopurchase(j);
    for (int i = 0; i < n; ++i) {
      if (inst.weight(j, i) <= 0.0) continue;
      if (t.parent[j] >= 0)
        throw PreconditionError("product " + std::to_string(j + 1) + " transits to more than one product");
      t.parent[j] = i;
      t.link_weight[j] = inst.weight(j, i);
    }
  }
  return t;
}

namespace {

// Expected revenue from customers of j when j is out and its parent p is in.
double transit_gain(const TransitToOneInstance& t, int j, int p) {
  const double den = t.link_weight[j] + t.nopurchase[j];
  if (den <= 0.0) return 0.0;
  return std::max(0.0, t.arrivals[j] * t.link_weight[j] / den * t.revenues[p]);
}

}  // namespace

TreeDpTable tree_dp_table(const TransitToOneInstance& t) {
  require_sorted(t.revenues, "solve_tree_dp");
  const int n = t.size();
  TreeDpTable tab;
  tab.parent = t.parent;
  for (int j = 0; j < n; ++j) {
    const int p = tab.parent[j];
    if (p >= 0 && !(t.revenues[j] < t.revenues[p] && t.link_weight[j] > 0.0)) tab.parent[j] = -1;
  }
  std::vector<double> acc_with(static_cast<std::size_t>(n), 0.0), acc_without(static_cast<std::size_t>(n), 0.0);
  tab.with.assign(static_cast<std::size_t>(n), 0.0);
  tab.without.assign(static_cast<std::size_t>(n), 0.0);
  // A remaining link points to a strictly higher revenue, hence a lower index.
  for (int j = n - 1; j >= 0; --j) {
    tab.with[j] = t.arrivals[j] * t.revenues[j] + acc_with[j];
    tab.without[j] = acc_without[j];
    const int p = tab.parent[j];
    if (p < 0) {
      tab.optimum += std::max(tab.with[j], tab.without[j]);
      continue;
    }
    acc_with[p] += std::max(tab.with[j], transit_gain(t, j, p) + tab.without[j]);
    acc_without[p] += std::max(tab.with[j], tab.without[j]);
  }
  return tab;
}

SolveResult solve_tree_dp(const TransitToOneInstance& t) {
  const auto t0 = Clock::now();
  const auto tab = tree_dp_table(t);
  const int n = t.size();
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) {
    const int p = tab.parent[j];
    if (p < 0)
      in[j] = tab.with[j] >= tab.without[j];
    else if (in[p])
      in[j] = tab.with[j] >= transit_gain(t, j, p) + tab.without[j];
    else
      in[j] = tab.with[j] >= tab.without[j];
  }
  SolveResult res;
  std::vector<int> members;
  for (int j = 0; j < n; ++j)
    if (in[j]) members.push_back(j);
  res.assortment = Assortment(std::move(members));
  for (int j = 0; j < n; ++j) {
    if (in[j]) continue;
    const int p = tab.parent[j];
    if (p >= 0 && in[p] && t.revenues[p] >= 0.0)
      res.plan.sets[j] = {p};
    else
      res.plan.sets[j] = {};
  }
  res.revenue = tab.optimum;
  res.stats.wall_seconds = seconds_since(t0);
  return res;
}

SolveResult solve_tree_dp(const Instance& inst) { return solve_tree_dp(as_transit_to_one(inst)); }

// ---------------------------------------------------------------------------
// Revenue-ordered assortments

RevenueOrderedResult best_revenue_ordered(const Instance& inst) {
  const auto t0 = Clock::now();
  require_sorted(inst.revenues, "best_revenue_ordered");
  const int n = inst.size();
  RevenueOrderedResult out;
  out.prefix_revenues.resize(static_cast<std::size_t>(n) + 1);
  for (int t = 0; t <= n; ++t) out.prefix_revenues[t] = mcst_revenue_value(inst, Assortment::prefix(t));

  int best = 1;
  for (int t = 2; t <= n; ++t)
    if (out.prefix_revenues[t] > out.prefix_revenues[best]) best = t;
  if (out.prefix_revenues[0] > out.prefix_revenues[best]) best = 0;

  auto& cert = out.certificate;
  cert.best_t = best;
  cert.ro_revenue = out.prefix_revenues[best];
  auto sorted = inst.revenues;
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  cert.distinct_revenues = static_cast<int>(sorted.size());
  cert.r_max = inst.revenues.front();
  cert.r_min = inst.revenues.back();
  cert.bound_factor = 1.0 / cert.distinct_revenues;
  if (cert.r_min > 0.0)
    cert.bound_factor = std::max(cert.bound_factor, 1.0 / (1.0 + std::log(cert.r_max / cert.r_min)));
  cert.guarantee = cert.ro_revenue / cert.bound_factor;

  auto pr = mcst_revenue(inst, Assortment::prefix(best));
  out.result.assortment = Assortment::prefix(best);
  out.result.plan = std::move(pr.plan);
  out.result.revenue = pr.revenue;
  out.result.stats.wall_seconds = seconds_since(t0);
  return out;
}

}  // namespace mcst
