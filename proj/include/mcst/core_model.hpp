#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Products are 0-based inside the library. File formats and the CLI use the
// 1-based numbering of the model (product 0 is the no-purchase option there).

namespace mcst {

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem data. `transitions` is n x (n+1) row-major; column 0 of row j is
/// the no-purchase weight v_{j0}, column i+1 is the weight from j to i.
struct Instance {
  std::vector<double> revenues;
  std::vector<double> arrivals;
  std::vector<double> transitions;

  static Instance zeros(int n);

  int size() const { return static_cast<int>(revenues.size()); }
  double nopurchase(int j) const { return transitions[idx(j, 0)]; }
  double weight(int j, int i) const { return transitions[idx(j, i + 1)]; }
  double& nopurchase(int j) { return transitions[idx(j, 0)]; }
  double& weight(int j, int i) { return transitions[idx(j, i + 1)]; }
  std::span<const double> row(int j) const {
    return {transitions.data() + idx(j, 0), revenues.size() + 1};
  }

 private:
  std::size_t idx(int j, int col) const {
    return static_cast<std::size_t>(j) * (revenues.size() + 1) + static_cast<std::size_t>(col);
  }
};

/// Offered set. Members are kept sorted ascending and unique.
class Assortment {
 public:
  Assortment() = default;
  explicit Assortment(std::vector<int> members);

  static Assortment full(int n);
  static Assortment prefix(int t);
  static Assortment from_mask(std::uint64_t mask);
  /// Members are the coordinates with x > 0.5.
  static Assortment from_indicator(std::span<const double> x);

  bool contains(int product) const;
  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  std::vector<char> indicator(int n) const;
  std::vector<int> complement(int n) const;

  friend bool operator==(const Assortment&, const Assortment&) = default;

 private:
  std::vector<int> members_;
};

/// R_j for every product j outside the assortment.
struct RecommendationPlan {
  std::map<int, std::vector<int>> sets;

  friend bool operator==(const RecommendationPlan&, const RecommendationPlan&) = default;
};

/// purchase_probs[0] is the no-purchase probability, purchase_probs[p+1] the
/// probability that product p is bought.
struct Evaluation {
  std::vector<double> purchase_probs;
  double revenue = 0.0;

  double prob(int product) const { return purchase_probs[static_cast<std::size_t>(product) + 1]; }
  double nopurchase_prob() const { return purchase_probs[0]; }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool revenues_sorted = false;
  bool homogeneous = false;
  bool transit_to_one = false;
  bool has_zero_nopurchase = false;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_instance(const Instance& inst);

/// Same instance with products sorted by revenue (non-increasing, ties by
/// original index). `to_original[c]` is the original index of product c.
struct CanonicalForm {
  Instance instance;
  std::vector<int> to_original;
  bool identity = true;

  Assortment assortment_to_original(const Assortment& s) const;
  RecommendationPlan plan_to_original(const RecommendationPlan& plan) const;
};

CanonicalForm canonicalize(const Instance& inst);

struct SolveStats {
  long nodes = 0;
  long lp_iterations = 0;
  long incumbent_updates = 0;
  long cuts = 0;
  double build_seconds = 0.0;
  double wall_seconds = 0.0;
  double gap = 0.0;
  bool optimal = true;
};

struct SolveResult {
  Assortment assortment;
  RecommendationPlan plan;
  double revenue = 0.0;
  SolveStats stats;
};

struct Recommendation {
  std::vector<int> set;
  double value = 0.0;
};

/// Optimal recommended set for a customer who arrived at unavailable product
/// j: maximizes sum_{i in R} r_i v_ji / (sum_{i in R} v_ji + v_j0) over R in S,
/// with 0/0 read as 0. Returns the largest maximizer of the form
/// {i in S : r_i >= optimal ratio}.
Recommendation best_recommendation(const Instance& inst, int j, const Assortment& s);

/// Fast path used by the enumerators: `ordered` lists the members of S in
/// non-increasing revenue order. Returns only the value.
double best_recommendation_value(const Instance& inst, int j, std::span<const int> ordered);

/// Throws PreconditionError unless plan has exactly the keys outside S and
/// every R_j is a subset of S.
void check_plan(const Instance& inst, const Assortment& s, const RecommendationPlan& plan);

/// Purchase probabilities and revenue for an explicit plan. A customer whose
/// recommendation has zero total weight (including v_j0 = 0) leaves.
Evaluation mcst_evaluate(const Instance& inst, const Assortment& s, const RecommendationPlan& plan);

struct PlanRevenue {
  double revenue = 0.0;
  RecommendationPlan plan;
};

/// Revenue of S with the optimal recommendation for every j outside S.
PlanRevenue mcst_revenue(const Instance& inst, const Assortment& s);
double mcst_revenue_value(const Instance& inst, const Assortment& s);

/// Markov chain choice model with unlimited transitions among unavailable
/// products. Throws NumericError if the chain on the complement of S is not
/// absorbing.
Evaluation markov_evaluate(const Instance& inst, const Assortment& s);

/// Two-product nonparametric ("choosy") model: a customer transits once with
/// the raw weights and buys only if the transited product is offered.
double choosy_revenue(const Instance& inst, const Assortment& s);

}  // namespace mcst
