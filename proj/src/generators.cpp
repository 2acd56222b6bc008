#include "mcst/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "mcst/rng.hpp"

namespace mcst {

std::string to_string(RevenueDist d) { return d == RevenueDist::Uniform ? "UNI" : "EXP"; }

std::string to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::Dense: return "DEN";
    case TransitionKind::Sparse: return "SPA";
    case TransitionKind::Homogeneous: return "HOMOG";
    case TransitionKind::Tree: return "TREE";
  }
  return "?";
}

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}
}  // namespace

RevenueDist parse_revenue_dist(const std::string& s) {
  const auto l = lower(s);
  if (l == "uni") return RevenueDist::Uniform;
  if (l == "exp") return RevenueDist::Exponential;
  throw PreconditionError("unknown revenue distribution '" + s + "' (expected uni|exp)");
}

TransitionKind parse_transition_kind(const std::string& s) {
  const auto l = lower(s);
  if (l == "den") return TransitionKind::Dense;
  if (l == "spa") return TransitionKind::Sparse;
  if (l == "homog" || l == "homogeneous") return TransitionKind::Homogeneous;
  if (l == "tree") return TransitionKind::Tree;
  throw PreconditionError("unknown transition kind '" + s + "' (expected den|spa|homog|tree)");
}

void Graph::validate() const {
  if (vertex_count < 0) throw PreconditionError("graph: negative vertex count");
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count)
      throw PreconditionError("graph: edge endpoint out of range");
    if (u == v) throw PreconditionError("graph: self-loop");
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) throw PreconditionError("graph: duplicate edge");
  }
}

namespace {

constexpr std::uint64_t kRevenueStream = 0;
constexpr std::uint64_t kArrivalStream = 1;
constexpr std::uint64_t kRowStreamBase = 2;

void fill_revenues(Instance& inst, RevenueDist dist, std::uint64_t seed) {
  StreamRng rng(seed, kRevenueStream);
  for (double& r : inst.revenues) r = dist == RevenueDist::Uniform ? rng.uniform() : rng.exponential(1.0);
  std::sort(inst.revenues.begin(), inst.revenues.end(), std::greater<>());
}

void fill_arrivals(Instance& inst, std::uint64_t seed) {
  StreamRng rng(seed, kArrivalStream);
  double sum = 0.0;
  for (double& a : inst.arrivals) sum += (a = rng.uniform_positive());
  for (double& a : inst.arrivals) a /= sum;
}

void normalize_row(Instance& inst, int j) {
  const int n = inst.size();
  double sum = 0.0;
  for (int c = 0; c <= n; ++c) sum += inst.row(j)[c];
  inst.nopurchase(j) /= sum;
  for (int i = 0; i < n; ++i) inst.weight(j, i) /= sum;
}

void check_n(int n) {
  if (n < 1) throw PreconditionError("generator: n must be >= 1");
}

}  // namespace

Instance gen_random(const GenSpec& spec) {
  check_n(spec.n);
  switch (spec.transition_kind) {
    case TransitionKind::Homogeneous: return gen_homogeneous(spec.n, spec.revenue_dist, spec.seed);
    case TransitionKind::Tree: return gen_tree(spec.n, spec.seed, spec.revenue_dist);
    default: break;
  }
  const int n = spec.n;
  Instance inst = Instance::zeros(n);
  fill_revenues(inst, spec.revenue_dist, spec.seed);
  fill_arrivals(inst, spec.seed);
  const double keep = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    StreamRng rng(spec.seed, kRowStreamBase + static_cast<std::uint64_t>(j));
    inst.nopurchase(j) = rng.uniform_positive();
    for (int i = 0; i < n; ++i) {
      if (spec.transition_kind == TransitionKind::Sparse) {
        const bool kept = rng.uniform() < keep;
        const double value = rng.uniform_positive();
        inst.weight(j, i) = kept ? value : 0.0;
      } else {
        inst.weight(j, i) = rng.uniform_positive();
      }
    }
    normalize_row(inst, j);
  }
  return inst;
}

Instance gen_homogeneous(int n, RevenueDist revenue_dist, std::uint64_t seed) {
  check_n(n);
  Instance inst = Instance::zeros(n);
  fill_revenues(inst, revenue_dist, seed);
  fill_arrivals(inst, seed);
  StreamRng rng(seed, kRowStreamBase);
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  double sum = 0.0;
  for (double& v : row) sum += (v = rng.uniform_positive());
  for (double& v : row) v /= sum;
  for (int j = 0; j < n; ++j) std::copy(row.begin(), row.end(), inst.transitions.begin() + static_cast<std::ptrdiff_t>(j) * (n + 1));
  return inst;
}

Instance gen_tree_with_parents(const std::vector<int>& parents, std::uint64_t seed, RevenueDist revenue_dist) {
  const int n = static_cast<int>(parents.size());
  check_n(n);
  Instance inst = Instance::zeros(n);
  fill_revenues(inst, revenue_dist, seed);
  fill_arrivals(inst, seed);
  for (int j = 0; j < n; ++j) {
    const int p = parents[j];
    if (p == j || p >= n || p < -1) throw PreconditionError("gen_tree_with_parents: bad parent index");
    StreamRng rng(seed, kRowStreamBase + static_cast<std::uint64_t>(j));
    if (p < 0) {
      inst.nopurchase(j) = 1.0;
      continue;
    }
    const double link = rng.uniform_positive();
    const double stay = rng.uniform_positive();
    inst.weight(j, p) = link / (link + stay);
    inst.nopurchase(j) = stay / (link + stay);
  }
  return inst;
}

Instance gen_tree(int n, std::uint64_t seed, RevenueDist revenue_dist) {
  check_n(n);
  std::vector<int> parents(static_cast<std::size_t>(n), -1);
  // Parent choice uses its own stream so the row streams match gen_tree_with_parents.
  StreamRng topo(seed, kRowStreamBase + static_cast<std::uint64_t>(n));
  for (int j = 1; j < n; ++j) parents[j] = static_cast<int>(topo.below(static_cast<std::uint64_t>(j)));
  return gen_tree_with_parents(parents, seed, revenue_dist);
}

TightFamily gen_tight_family(int k, double eps) {
  if (k < 2) throw PreconditionError("gen_tight_family: k must be >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("gen_tight_family: eps must lie in (0,1)");
  // Kahan summation of eps^1 + ... + eps^(k-1).
  double tail = 0.0, comp = 0.0;
  for (int j = 1; j <= k - 1; ++j) {
    const double y = std::pow(eps, j) - comp;
    const double t = tail + y;
    comp = (t - tail) - y;
    tail = t;
  }
  if (!(1.0 - tail > 0.0)) throw PreconditionError("gen_tight_family: eps too large for k");

  TightFamily tf;
  tf.k = k;
  tf.eps = eps;
  const int n = 2 * k - 1;
  tf.p0.assign(static_cast<std::size_t>(k), -1);
  tf.p1.assign(static_cast<std::size_t>(k - 1), -1);
  // Classes in decreasing revenue (k first); inside a class p^0 precedes p^1.
  int next = 0;
  tf.p0[k - 1] = next++;
  for (int c = k - 1; c >= 1; --c) {
    tf.p0[c - 1] = next++;
    tf.p1[c - 1] = next++;
  }
  Instance inst = Instance::zeros(n);
  for (int c = 1; c <= k; ++c) {
    const double r = std::pow(eps, -(c - 1));
    inst.revenues[tf.p0[c - 1]] = r;
    inst.nopurchase(tf.p0[c - 1]) = 1.0;
    if (c < k) {
      inst.revenues[tf.p1[c - 1]] = r;
      inst.arrivals[tf.p1[c - 1]] = std::pow(eps, c);
      inst.weight(tf.p1[c - 1], tf.p0[c]) = 1.0;
    }
  }
  inst.arrivals[tf.p0[0]] = 1.0 - tail;
  tf.instance = std::move(inst);
  return tf;
}

Reduction reduce_independent_set(const Graph& g, int k, double nopurchase_eps) {
  g.validate();
  const int nv = g.vertex_count;
  if (k <= 0 || k > nv) throw PreconditionError("reduce_independent_set: need 0 < k <= |V|");
  if (nopurchase_eps < 0.0 || nopurchase_eps >= 1.0) throw PreconditionError("reduce_independent_set: eps out of range");
  const int m = static_cast<int>(g.edges.size());
  const int n = 1 + nv + m;

  Reduction red;
  red.dummy = 0;
  for (int v = 0; v < nv; ++v) red.vertex_product.push_back(1 + v);
  for (int e = 0; e < m; ++e) red.edge_product.push_back(1 + nv + e);

  Instance inst = Instance::zeros(n);
  const double vertex_arrival = 1.0 / static_cast<double>(nv + k);
  const double total = static_cast<double>(m) + static_cast<double>(nv) * vertex_arrival;
  red.scale = 1.0 / total;
  red.threshold = static_cast<double>(m + 1) * red.scale;

  inst.revenues[red.dummy] = 2.0;
  inst.nopurchase(red.dummy) = 1.0;
  for (int v = 0; v < nv; ++v) {
    const int p = red.vertex_product[v];
    inst.revenues[p] = 1.0;
    inst.arrivals[p] = vertex_arrival * red.scale;
    inst.weight(p, red.dummy) = 1.0;
  }
  for (int e = 0; e < m; ++e) {
    const int p = red.edge_product[e];
    inst.revenues[p] = 0.0;
    inst.arrivals[p] = red.scale;
    inst.weight(p, red.vertex_product[g.edges[e].first]) = 0.5;
    inst.weight(p, red.vertex_product[g.edges[e].second]) = 0.5;
  }
  if (nopurchase_eps > 0.0) {
    for (int j = 0; j < n; ++j) {
      if (inst.nopurchase(j) != 0.0) continue;
      for (int i = 0; i < n; ++i) inst.weight(j, i) *= 1.0 - nopurchase_eps;
      inst.nopurchase(j) = nopurchase_eps;
    }
  }
  red.instance = std::move(inst);
  return red;
}

}  // namespace mcst
