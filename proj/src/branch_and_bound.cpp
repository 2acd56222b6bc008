#include "mcst/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "mcst/lp.hpp"
#include "mcst/tolerances.hpp"

namespace mcst {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kKelleyCap = 400;  // master solves per node before branching anyway

constexpr int kStallRounds = 60;  // rounds without bound progress before branching

// Must exceed the master's primal feasibility tolerance, or a cut that is
// already present but satisfied only up to that tolerance is re-added forever.
double cut_tolerance(double value) { return 5e-9 + 1e-9 * std::abs(value); }

// Relaxation master: x in the node box, theta_b bounded by the cuts.
class Master {
 public:
  explicit Master(const CutModel& model) : model_(model), n_(model.num_products()), nb_(model.num_blocks()) {
    std::vector<double> cost, lo, up;
    for (int i = 0; i < n_; ++i) {
      cost.push_back(model.linear_cost(i));
      lo.push_back(0.0);
      up.push_back(1.0);
    }
    for (int b = 0; b < nb_; ++b) {
      cost.push_back(1.0);
      // The slack below keeps the master feasible under rounding in the cuts.
      lo.push_back(model.block_lower(b) - 1.0);
      up.push_back(model.block_upper(b));
      active_.push_back(model.block_upper(b) > model.block_lower(b));
    }
    sx_ = std::make_unique<lp::Simplex>(std::move(cost), std::move(lo), std::move(up));
    row_.assign(static_cast<std::size_t>(n_ + nb_), 0.0);
    x_.resize(static_cast<std::size_t>(n_));
  }

  void set_box(const std::vector<int>& fix) {
    for (int i = 0; i < n_; ++i) {
      if (fix[i] < 0)
        sx_->set_bounds(i, 0.0, 1.0);
      else
        sx_->set_bounds(i, fix[i], fix[i]);
    }
  }

  /// Solves the master once and adds the violated cuts. Returns the master
  /// value; `converged` is set when no cut was violated.
  double round(bool& converged, SolveStats& stats) {
    const long before = sx_->iterations();
    const auto st = sx_->solve();
    stats.lp_iterations += sx_->iterations() - before;
    if (st != lp::Status::Optimal) throw NumericError("branch and bound: relaxation master not optimal");
    const auto v = sx_->values();
    for (int i = 0; i < n_; ++i) x_[i] = std::clamp(v[i], 0.0, 1.0);
    const double bound = sx_->objective();
    converged = true;
    for (int b = 0; b < nb_; ++b) {
      if (!active_[b]) continue;
      const double estimate = model_.lower_estimate(b, x_);
      if (v[n_ + b] <= estimate + cut_tolerance(estimate)) continue;
      const double value = model_.separate(b, x_, cut_);
      if (v[n_ + b] <= value + cut_tolerance(value)) continue;
      // A cut that does not separate the master point (rounding in x) would
      // come back every round.
      const double at_x = clean(cut_);
      if (v[n_ + b] <= at_x + cut_tolerance(at_x)) continue;
      converged = false;
      std::fill(row_.begin(), row_.end(), 0.0);
      for (int i = 0; i < n_; ++i) row_[i] = -cut_.coef[i];
      row_[n_ + b] = 1.0;
      sx_->add_row(row_, -lp::kInf, cut_.constant);
      ++stats.cuts;
    }
    return bound;
  }

  /// Drops cuts that are slack at the last master solution once the pool grows.
  void prune_cuts() {
    if (sx_->num_rows() < 4 * (n_ + nb_) + 200) return;
    sx_->remove_rows([&](int r) { return sx_->row_activity(r) > sx_->row_upper(r) - 1e-7; });
  }

  const std::vector<double>& x() const { return x_; }

 private:
  // Removes coefficients far below the largest one, keeping the cut valid on
  // the unit box: a tiny positive term is bounded by its value at x_i = 1.
  // Returns the cut value at the master point.
  double clean(Cut& cut) const {
    double big = 1.0;
    for (double c : cut.coef) big = std::max(big, std::abs(c));
    for (int i = 0; i < n_; ++i) {
      double& c = cut.coef[i];
      if (std::abs(c) <= 1e-12 * big) {
        if (c > 0.0) cut.constant += c;
        c = 0.0;
      }
    }
    double at_x = cut.constant;
    for (int i = 0; i < n_; ++i) at_x += cut.coef[i] * x_[i];
    return at_x;
  }

  const CutModel& model_;
  int n_, nb_;
  std::vector<char> active_;
  std::unique_ptr<lp::Simplex> sx_;
  std::vector<double> row_;
  std::vector<double> x_;
  Cut cut_;
};

struct Node {
  std::vector<int> fix;
  double bound = 0.0;
  long id = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

bool fractional(double v) { return std::abs(v - std::round(v)) > tol::kIntegrality; }

class Search {
 public:
  Search(const CutModel& model, const BnbLimits& limits)
      : model_(model), limits_(limits), master_(model), n_(model.num_products()), start_(Clock::now()) {}

  void offer(const Assortment& s) {
    if (s == last_offered_ && have_offered_) return;
    have_offered_ = true;
    last_offered_ = s;
    const double v = model_.evaluate(s);
    if (!have_incumbent_ || v > incumbent_value_ + tol::kGapAbs) {
      if (have_incumbent_) ++stats_.incumbent_updates;
      have_incumbent_ = true;
      incumbent_ = s;
      incumbent_value_ = v;
    }
  }

  BnbOutcome run() {
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    Node current{std::vector<int>(static_cast<std::size_t>(n_), -1), kInfBound, next_id_++};
    bool have_current = true;
    bool stopped = false;

    for (;;) {
      if (!have_current) {
        // Discard nodes the incumbent already dominates.
        while (!open.empty() && open.top().bound <= incumbent_value_ + tol::kGapAbs) open.pop();
        if (open.empty()) break;
        current = open.top();
        open.pop();
        have_current = true;
      }
      if (limit_hit()) {
        stopped = true;
        open.push(current);
        break;
      }
      ++stats_.nodes;
      std::vector<Node> children;
      process(current, children);
      have_current = false;
      if (!children.empty()) {
        // Plunge into the first child; the sibling waits in the queue.
        open.push(std::move(children[1]));
        current = std::move(children[0]);
        have_current = true;
      }
    }

    BnbOutcome out;
    out.best = incumbent_;
    out.value = incumbent_value_;
    double bound = incumbent_value_;
    if (stopped) {
      while (!open.empty()) {
        bound = std::max(bound, open.top().bound);
        open.pop();
      }
    }
    out.bound = bound;
    out.stats = stats_;
    out.stats.gap = std::max(0.0, bound - incumbent_value_);
    out.stats.optimal = !stopped || out.stats.gap <= tol::kGapAbs;
    out.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return out;
  }

 private:
  static constexpr double kInfBound = 1e300;

  bool time_up() const {
    return limits_.time_limit > 0.0 &&
           std::chrono::duration<double>(Clock::now() - start_).count() >= limits_.time_limit;
  }

  bool limit_hit() const {
    return (limits_.node_limit > 0 && stats_.nodes >= limits_.node_limit) || time_up();
  }

  Assortment rounded(const std::vector<double>& x) const {
    std::vector<int> members;
    for (int i = 0; i < n_; ++i)
      if (x[i] >= 0.5) members.push_back(i);
    return Assortment(std::move(members));
  }

  // Returns the node bound; fills `children` (rounding direction first) when
  // the node has to be split.
  double process(const Node& node, std::vector<Node>& children) {
    master_.set_box(node.fix);
    double bound = kInfBound;
    double last_progress_bound = kInfBound;
    int last_progress = 0;
    bool converged = false;
    for (int iter = 0;; ++iter) {
      bound = std::min(bound, master_.round(converged, stats_));
      offer(rounded(master_.x()));
      if (bound <= incumbent_value_ + tol::kGapAbs) {
        master_.prune_cuts();
        return bound;
      }
      if (converged) break;
      if (last_progress_bound - bound > 1e-9 * std::max(1.0, std::abs(bound))) {
        last_progress_bound = bound;
        last_progress = iter;
      }
      const bool can_branch = branch_variable(node) >= 0;
      if (can_branch && (iter >= kKelleyCap || iter - last_progress >= kStallRounds)) break;
      if (iter >= 20 * kKelleyCap || (iter % 16 == 15 && time_up())) break;
      if (iter % 50 == 49) master_.prune_cuts();
    }
    master_.prune_cuts();

    int j = branch_variable(node);
    if (j < 0) {
      // Integral but not yet dominated by the incumbent: split on a free variable.
      offer(rounded(master_.x()));
      if (bound <= incumbent_value_ + tol::kGapAbs) return bound;
      for (int i = 0; i < n_ && j < 0; ++i)
        if (node.fix[i] < 0) j = i;
      if (j < 0) return bound;
    }
    const int first = master_.x()[j] >= 0.5 ? 1 : 0;
    for (int side : {first, 1 - first}) {
      Node child{node.fix, bound, next_id_++};
      child.fix[j] = side;
      children.push_back(std::move(child));
    }
    return bound;
  }

  int branch_variable(const Node& node) const {
    int best = -1;
    double best_dist = 1.0;
    const auto& x = master_.x();
    for (int i = 0; i < n_; ++i) {
      if (node.fix[i] >= 0 || !fractional(x[i])) continue;
      const double dist = std::abs(x[i] - 0.5);
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    return best;
  }

  const CutModel& model_;
  BnbLimits limits_;
  Master master_;
  int n_;
  Clock::time_point start_;
  SolveStats stats_;
  long next_id_ = 0;
  bool have_incumbent_ = false;
  Assortment incumbent_;
  double incumbent_value_ = -kInfBound;
  bool have_offered_ = false;
  Assortment last_offered_;
};

}  // namespace

BnbOutcome branch_and_bound(const CutModel& model, const Assortment& warm_start, const BnbLimits& limits) {
  Search search(model, limits);
  search.offer(warm_start);
  return search.run();
}

double relaxation_bound(const CutModel& model, const std::vector<int>& fix) {
  if (static_cast<int>(fix.size()) != model.num_products())
    throw PreconditionError("relaxation_bound: fix vector has the wrong length");
  Master master(model);
  master.set_box(fix);
  SolveStats stats;
  bool converged = false;
  double bound = 0.0;
  for (int iter = 0; iter < 100000 && !converged; ++iter) bound = master.round(converged, stats);
  if (!converged) throw NumericError("relaxation_bound: cutting planes did not converge");
  return bound;
}

}  // namespace mcst
