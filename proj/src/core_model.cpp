#include "mcst/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mcst/dense_linalg.hpp"
#include "mcst/tolerances.hpp"

namespace mcst {

Instance Instance::zeros(int n) {
  if (n < 1) throw PreconditionError("instance needs at least one product");
  Instance inst;
  inst.revenues.assign(static_cast<std::size_t>(n), 0.0);
  inst.arrivals.assign(static_cast<std::size_t>(n), 0.0);
  inst.transitions.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1), 0.0);
  return inst;
}

// ---------------------------------------------------------------------------
// Assortment

Assortment::Assortment(std::vector<int> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

Assortment Assortment::full(int n) { return prefix(n); }

Assortment Assortment::prefix(int t) {
  std::vector<int> m(static_cast<std::size_t>(std::max(t, 0)));
  std::iota(m.begin(), m.end(), 0);
  return Assortment(std::move(m));
}

Assortment Assortment::from_mask(std::uint64_t mask) {
  std::vector<int> m;
  for (int i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1U) m.push_back(i);
  return Assortment(std::move(m));
}

Assortment Assortment::from_indicator(std::span<const double> x) {
  std::vector<int> m;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.5) m.push_back(static_cast<int>(i));
  return Assortment(std::move(m));
}

bool Assortment::contains(int product) const {
  return std::binary_search(members_.begin(), members_.end(), product);
}

std::vector<char> Assortment::indicator(int n) const {
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (int p : members_) in[static_cast<std::size_t>(p)] = 1;
  return in;
}

std::vector<int> Assortment::complement(int n) const {
  std::vector<int> out;
  auto it = members_.begin();
  for (int p = 0; p < n; ++p) {
    if (it != members_.end() && *it == p) {
      ++it;
      continue;
    }
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation and canonical ordering

ValidationReport validate_instance(const Instance& inst) {
  ValidationReport rep;
  const int n = inst.size();
  auto fail = [&](const std::string& msg) { rep.violations.push_back(msg); };

  if (n < 1) {
    fail("instance has no products");
    return rep;
  }
  if (inst.arrivals.size() != static_cast<std::size_t>(n)) {
    fail("arrivals length != n");
    return rep;
  }
  if (inst.transitions.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1)) {
    fail("transitions shape != n x (n+1)");
    return rep;
  }

  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(inst.revenues[j])) fail("revenue of product " + std::to_string(j + 1) + " is not finite");
  }

  double arrival_sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double a = inst.arrivals[j];
    if (!std::isfinite(a) || a < 0.0 || a > 1.0)
      fail("arrival of product " + std::to_string(j + 1) + " outside [0,1]");
    arrival_sum += a;
  }
  if (std::abs(arrival_sum - 1.0) > tol::kFeasibility) {
    std::ostringstream os;
    os.precision(17);
    os << "arrivals sum != 1 (sum = " << arrival_sum << ")";
    fail(os.str());
  }

  rep.transit_to_one = true;
  for (int j = 0; j < n; ++j) {
    double row_sum = 0.0;
    int positive = 0;
    bool bad_entry = false;
    for (int c = 0; c <= n; ++c) {
      const double v = inst.row(j)[c];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) bad_entry = true;
      row_sum += v;
      if (c > 0 && v > 0.0) ++positive;
    }
    if (bad_entry) fail("transition row " + std::to_string(j + 1) + " has entries outside [0,1]");
    if (std::abs(row_sum - 1.0) > tol::kFeasibility) {
      std::ostringstream os;
      os.precision(17);
      os << "transition row " << j + 1 << " sums to " << row_sum << " != 1";
      fail(os.str());
    }
    if (positive > 1) rep.transit_to_one = false;
    if (inst.nopurchase(j) == 0.0) rep.has_zero_nopurchase = true;
  }

  rep.homogeneous = true;
  for (int j = 1; j < n && rep.homogeneous; ++j)
    for (int c = 0; c <= n; ++c)
      if (std::abs(inst.row(j)[c] - inst.row(0)[c]) > 1e-12) {
        rep.homogeneous = false;
        break;
      }

  rep.revenues_sorted = std::is_sorted(inst.revenues.begin(), inst.revenues.end(), std::greater<>());
  return rep;
}

CanonicalForm canonicalize(const Instance& inst) {
  const int n = inst.size();
  CanonicalForm cf;
  cf.to_original.resize(static_cast<std::size_t>(n));
  std::iota(cf.to_original.begin(), cf.to_original.end(), 0);
  std::stable_sort(cf.to_original.begin(), cf.to_original.end(),
                   [&](int a, int b) { return inst.revenues[a] > inst.revenues[b]; });
  cf.identity = std::is_sorted(cf.to_original.begin(), cf.to_original.end());
  if (cf.identity) {
    cf.instance = inst;
    return cf;
  }
  cf.instance = Instance::zeros(n);
  for (int c = 0; c < n; ++c) {
    const int o = cf.to_original[c];
    cf.instance.revenues[c] = inst.revenues[o];
    cf.instance.arrivals[c] = inst.arrivals[o];
    cf.instance.nopurchase(c) = inst.nopurchase(o);
    for (int d = 0; d < n; ++d) cf.instance.weight(c, d) = inst.weight(o, cf.to_original[d]);
  }
  return cf;
}

Assortment CanonicalForm::assortment_to_original(const Assortment& s) const {
  std::vector<int> m;
  m.reserve(s.members().size());
  for (int c : s) m.push_back(to_original[c]);
  return Assortment(std::move(m));
}

RecommendationPlan CanonicalForm::plan_to_original(const RecommendationPlan& plan) const {
  RecommendationPlan out;
  for (const auto& [j, set] : plan.sets) {
    std::vector<int> mapped;
    mapped.reserve(set.size());
    for (int c : set) mapped.push_back(to_original[c]);
    std::sort(mapped.begin(), mapped.end());
    out.sets[to_original[j]] = std::move(mapped);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Attraction-model subproblem

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::vector<int> revenue_order(const Instance& inst, const Assortment& s) {
  std::vector<int> order(s.begin(), s.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return inst.revenues[a] > inst.revenues[b]; });
  return order;
}

// Greedy over a revenue-ordered candidate list; returns the optimal ratio and
// the number of leading candidates taken.
std::pair<double, std::size_t> greedy_ratio(const Instance& inst, int j, std::span<const int> ordered) {
  double num = 0.0;
  double den = inst.nopurchase(j);
  double ratio = 0.0;
  std::size_t taken = 0;
  for (; taken < ordered.size(); ++taken) {
    const int i = ordered[taken];
    if (inst.revenues[i] < ratio) break;
    num += inst.revenues[i] * inst.weight(j, i);
    den += inst.weight(j, i);
    ratio = safe_ratio(num, den);
  }
  return {ratio, taken};
}

}  // namespace

Recommendation best_recommendation(const Instance& inst, int j, const Assortment& s) {
  if (j < 0 || j >= inst.size()) throw PreconditionError("best_recommendation: product out of range");
  if (s.contains(j)) throw PreconditionError("best_recommendation: product " + std::to_string(j + 1) + " is offered");
  const auto ordered = revenue_order(inst, s);
  const auto [ratio, taken] = greedy_ratio(inst, j, ordered);
  Recommendation rec;
  rec.value = ratio;
  rec.set.assign(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(taken));
  // Later candidates can only tie the ratio when their weight is zero.
  for (std::size_t k = taken; k < ordered.size(); ++k)
    if (inst.revenues[ordered[k]] >= ratio && inst.weight(j, ordered[k]) == 0.0) rec.set.push_back(ordered[k]);
  std::sort(rec.set.begin(), rec.set.end());
  return rec;
}

double best_recommendation_value(const Instance& inst, int j, std::span<const int> ordered) {
  return greedy_ratio(inst, j, ordered).first;
}

// ---------------------------------------------------------------------------
// Evaluators

void check_plan(const Instance& inst, const Assortment& s, const RecommendationPlan& plan) {
  const int n = inst.size();
  const auto outside = s.complement(n);
  if (plan.sets.size() != outside.size()) throw PreconditionError("plan keys must be exactly the products outside S");
  for (int j : outside) {
    auto it = plan.sets.find(j);
    if (it == plan.sets.end()) throw PreconditionError("plan is missing product " + std::to_string(j + 1));
    for (int i : it->second)
      if (!s.contains(i))
        throw PreconditionError("plan recommends product " + std::to_string(i + 1) + " which is not offered");
  }
}

Evaluation mcst_evaluate(const Instance& inst, const Assortment& s, const RecommendationPlan& plan) {
  check_plan(inst, s, plan);
  const int n = inst.size();
  Evaluation ev;
  ev.purchase_probs.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i : s) ev.purchase_probs[static_cast<std::size_t>(i) + 1] += inst.arrivals[i];
  for (const auto& [j, rset] : plan.sets) {
    double den = inst.nopurchase(j);
    for (int i : rset) den += inst.weight(j, i);
    const double lam = inst.arrivals[j];
    if (den <= 0.0) {
      ev.purchase_probs[0] += lam;
      continue;
    }
    for (int i : rset) ev.purchase_probs[static_cast<std::size_t>(i) + 1] += lam * inst.weight(j, i) / den;
    ev.purchase_probs[0] += lam * inst.nopurchase(j) / den;
  }
  // Sums of arrival rates can land one ulp above 1.
  for (double& p : ev.purchase_probs) p = std::min(p, 1.0);
  for (int i : s) ev.revenue += inst.revenues[i] * ev.prob(i);
  return ev;
}

PlanRevenue mcst_revenue(const Instance& inst, const Assortment& s) {
  PlanRevenue out;
  for (int i : s) out.revenue += inst.arrivals[i] * inst.revenues[i];
  for (int j : s.complement(inst.size())) {
    auto rec = best_recommendation(inst, j, s);
    out.revenue += inst.arrivals[j] * rec.value;
    out.plan.sets[j] = std::move(rec.set);
  }
  return out;
}

double mcst_revenue_value(const Instance& inst, const Assortment& s) {
  const auto ordered = revenue_order(inst, s);
  const auto in = s.indicator(inst.size());
  double rev = 0.0;
  for (int j = 0; j < inst.size(); ++j) {
    if (in[j])
      rev += inst.arrivals[j] * inst.revenues[j];
    else if (inst.arrivals[j] != 0.0)
      rev += inst.arrivals[j] * best_recommendation_value(inst, j, ordered);
  }
  return rev;
}

Evaluation markov_evaluate(const Instance& inst, const Assortment& s) {
  const int n = inst.size();
  const auto outside = s.complement(n);
  const std::size_t k = outside.size();
  Evaluation ev;
  ev.purchase_probs.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i : s) ev.purchase_probs[static_cast<std::size_t>(i) + 1] = inst.arrivals[i];

  if (k > 0) {
    // Expected visits y to unavailable products: (I - rho)^T y = lambda.
    std::vector<double> m(k * k, 0.0);
    std::vector<double> rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
      rhs[a] = inst.arrivals[outside[a]];
      for (std::size_t b = 0; b < k; ++b) {
        const double rho = inst.weight(outside[b], outside[a]);
        m[a * k + b] = (a == b ? 1.0 : 0.0) - rho;
      }
    }
    std::vector<double> visits;
    try {
      visits = solve_dense(std::move(m), std::move(rhs));
    } catch (const NumericError&) {
      throw NumericError("markov_evaluate: transition chain outside the assortment is not absorbing");
    }
    for (std::size_t a = 0; a < k; ++a) {
      if (visits[a] < -tol::kFeasibility)
        throw NumericError("markov_evaluate: transition chain outside the assortment is not absorbing");
      const int j = outside[a];
      ev.purchase_probs[0] += visits[a] * inst.nopurchase(j);
      for (int i : s) ev.purchase_probs[static_cast<std::size_t>(i) + 1] += visits[a] * inst.weight(j, i);
    }
  }
  // Sums of arrival rates can land one ulp above 1.
  for (double& p : ev.purchase_probs) p = std::min(p, 1.0);
  for (int i : s) ev.revenue += inst.revenues[i] * ev.prob(i);
  return ev;
}

double choosy_revenue(const Instance& inst, const Assortment& s) {
  const int n = inst.size();
  const auto in = s.indicator(n);
  double rev = 0.0;
  for (int j : s) rev += inst.arrivals[j] * inst.revenues[j];
  for (int i = 0; i < n; ++i) {
    if (in[i]) continue;
    double inner = 0.0;
    for (int j : s) inner += inst.revenues[j] * inst.weight(i, j);
    rev += inst.arrivals[i] * inner;
  }
  return rev;
}

}  // namespace mcst
