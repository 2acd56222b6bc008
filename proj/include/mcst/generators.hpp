#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcst/core_model.hpp"

namespace mcst {

enum class RevenueDist { Uniform, Exponential };
enum class TransitionKind { Dense, Sparse, Homogeneous, Tree };

std::string to_string(RevenueDist d);
std::string to_string(TransitionKind k);
RevenueDist parse_revenue_dist(const std::string& s);
TransitionKind parse_transition_kind(const std::string& s);

struct GenSpec {
  int n = 1;
  RevenueDist revenue_dist = RevenueDist::Uniform;
  TransitionKind transition_kind = TransitionKind::Dense;
  std::uint64_t seed = 0;
};

struct Graph {
  int vertex_count = 0;
  std::vector<std::pair<int, int>> edges;

  /// Throws PreconditionError on self-loops, duplicates or bad endpoints.
  void validate() const;
};

/// Random instance following the experimental protocol: revenues drawn then
/// sorted, arrivals and transition rows are normalized uniforms. Stream 0
/// feeds the revenues, stream 1 the arrivals and stream 2 + j row j.
Instance gen_random(const GenSpec& spec);

Instance gen_homogeneous(int n, RevenueDist revenue_dist, std::uint64_t seed);

/// Transit-to-one instance: product j > 0 links to one uniformly chosen
/// higher-revenue product, plus a positive no-purchase weight.
Instance gen_tree(int n, std::uint64_t seed, RevenueDist revenue_dist = RevenueDist::Uniform);

/// Transit-to-one instance with a fixed link structure. parents[j] is the
/// single product j links to, or -1. Revenues are sorted random draws, so a
/// parent should carry a lower index than its child.
Instance gen_tree_with_parents(const std::vector<int>& parents, std::uint64_t seed,
                               RevenueDist revenue_dist = RevenueDist::Uniform);

/// Worst case for revenue-ordered assortments: k revenue classes, n = 2k-1.
struct TightFamily {
  Instance instance;
  int k = 0;
  double eps = 0.0;
  std::vector<int> p0;  // p0[c-1] is product p^0_c, c = 1..k
  std::vector<int> p1;  // p1[c-1] is product p^1_c, c = 1..k-1
};

TightFamily gen_tight_family(int k, double eps);

/// MCST instance whose optimum reaches `threshold` exactly when the graph has
/// an independent set of size k. Arrivals are normalized; `scale` is the
/// normalization factor so that threshold = (m + 1) * scale.
struct Reduction {
  Instance instance;
  double scale = 1.0;
  double threshold = 0.0;
  int dummy = 0;
  std::vector<int> vertex_product;
  std::vector<int> edge_product;
};

/// With nopurchase_eps > 0 every zero no-purchase weight is replaced by eps
/// and the rest of the row is scaled by (1 - eps).
Reduction reduce_independent_set(const Graph& g, int k, double nopurchase_eps = 0.0);

}  // namespace mcst
