#include <cmath>
#include <random>

#include "doctest.h"
#include "mcst/exact.hpp"
#include "mcst/generators.hpp"
#include "mcst/poly_solvers.hpp"
#include "oracles.hpp"

using namespace mcst;

namespace {

// Full LP relaxation of the compact program (x in [0,1]^n).
double compact_relaxation(const Instance& inst, const std::vector<int>& fix) {
  auto mip = build_mip(inst);
  for (int i = 0; i < inst.size(); ++i) {
    if (fix[i] < 0) continue;
    mip.program.lower[mip.x_var(i)] = mip.program.upper[mip.x_var(i)] = fix[i];
  }
  const auto sol = lp::solve_lp(mip.program);
  REQUIRE(sol.status == lp::Status::Optimal);
  return sol.objective;
}

// Per-customer block of the relaxation, solved directly as an LP.
double block_lp(const Instance& inst, int j, const std::vector<double>& x) {
  const int n = inst.size();
  lp::LinearProgram p(n + 1);
  for (int i = 0; i < n; ++i) {
    p.cost[i] = inst.revenues[i];
    p.upper[i] = x[i];
    p.add_row({{i, inst.nopurchase(j)}, {n, -inst.weight(j, i)}}, lp::RowSense::LessEqual, 0.0);
  }
  p.upper[n] = 1.0;
  p.add_row(std::vector<double>(static_cast<std::size_t>(n + 1), 1.0), lp::RowSense::Equal, 1.0 - x[j]);
  const auto sol = lp::solve_lp(p);
  REQUIRE(sol.status == lp::Status::Optimal);
  return inst.arrivals[j] * sol.objective;
}

}  // namespace

TEST_CASE("cut model: separation value equals the per-customer LP and the cut is tight") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const auto inst = gen_random({10, seed % 2 ? RevenueDist::Exponential : RevenueDist::Uniform,
                                  seed % 3 ? TransitionKind::Sparse : TransitionKind::Dense, seed});
    const McstCutModel model(inst);
    for (int trial = 0; trial < 40; ++trial) {
      // Mostly 0/1 coordinates: ties in the knapsack order come from these.
      std::vector<double> x(10);
      for (auto& v : x) {
        const double r = u(gen);
        v = r < 0.35 ? 0.0 : r < 0.7 ? 1.0 : u(gen);
      }
      for (int b = 0; b < 10; ++b) {
        Cut cut;
        const double value = model.separate(b, x, cut);
        CHECK(value == doctest::Approx(block_lp(inst, b, x)).epsilon(1e-9).scale(1.0));
        double at_x = cut.constant;
        for (int i = 0; i < 10; ++i) at_x += cut.coef[i] * x[i];
        CHECK(at_x == doctest::Approx(value).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("compact program: sizes for two products") {
  std::mt19937_64 gen(1);
  const auto mip = build_mip(oracle::random_instance(2, gen));
  CHECK(mip.num_binaries() == 2);
  CHECK(mip.num_continuous() == 6);
  CHECK(mip.program.num_vars() == 8);
  CHECK(mip.program.num_rows() == 4 + 2 + 4);
  CHECK(mip.z_var(1, 1) == 2 + 3);
  CHECK(mip.z0_var(1) == 7);
}

TEST_CASE("compact program: value at an integral point equals the evaluator") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + trial % 5;
    const auto inst = oracle::random_instance(n, gen, 0.3, trial % 3 == 0 ? 0.3 : 0.0);
    const auto mip = build_mip(inst);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      const auto s = Assortment::from_mask(m);
      const auto sol = solve_mip_at(mip, s);
      REQUIRE(sol.status == lp::Status::Optimal);
      // A zero no-purchase weight is replaced by 1e-9, which moves the value
      // by at most that order.
      CHECK(sol.objective == doctest::Approx(mcst_revenue_value(inst, s)).epsilon(1e-7));
    }
  }
}

TEST_CASE("compact program: eps substitution is inert when every v_j0 > 0") {
  const auto inst = gen_random({6, RevenueDist::Uniform, TransitionKind::Sparse, 3});
  const auto a = build_mip(inst, 1e-9);
  const auto b = build_mip(inst, 5e-10);
  for (std::uint64_t m = 0; m < 64; m += 5) {
    const auto s = Assortment::from_mask(m);
    CHECK(std::abs(solve_mip_at(a, s).objective - solve_mip_at(b, s).objective) < 1e-12);
  }
  // and finite when a row has v_j0 = 0
  Instance z = Instance::zeros(2);
  z.revenues = {2, 1};
  z.arrivals = {0.5, 0.5};
  z.weight(0, 1) = 1.0;
  z.nopurchase(1) = 1.0;
  const auto mip = build_mip(z);
  const auto sol = solve_mip_at(mip, Assortment({1}));
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(std::isfinite(sol.objective));
  CHECK(sol.objective == doctest::Approx(mcst_revenue_value(z, Assortment({1}))).epsilon(1e-8));
}

TEST_CASE("cut relaxation: root and node bounds match the compact relaxation") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int n = 3 + static_cast<int>(seed % 5);
    const auto inst = gen_random({n, seed % 2 ? RevenueDist::Exponential : RevenueDist::Uniform,
                                  seed % 3 ? TransitionKind::Dense : TransitionKind::Sparse, seed});
    std::vector<int> fix(static_cast<std::size_t>(n), -1);
    CHECK(mcst_root_bound(inst) == doctest::Approx(compact_relaxation(inst, fix)).epsilon(1e-7));
    fix[seed % n] = static_cast<int>(seed % 2);
    McstCutModel model(inst);
    const double node = relaxation_bound(model, fix);
    CHECK(node == doctest::Approx(compact_relaxation(inst, fix)).epsilon(1e-7));
    // the node bound dominates every completion
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      const auto s = Assortment::from_mask(m);
      if (fix[seed % n] != static_cast<int>(s.contains(static_cast<int>(seed % n)))) continue;
      CHECK(node >= mcst_revenue_value(inst, s) - 1e-9);
    }
  }
}

TEST_CASE("exact mcst: equals enumeration for n <= 12") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 4 + static_cast<int>(seed % 9);
    const auto kind = static_cast<TransitionKind>(seed % 4);
    const auto inst = gen_random({n, seed % 2 ? RevenueDist::Exponential : RevenueDist::Uniform, kind, seed});
    const auto exact = solve_mcst_exact(inst);
    const auto brute = brute_force_mcst(inst);
    CHECK(exact.stats.optimal);
    CHECK(exact.revenue == doctest::Approx(brute.revenue).epsilon(1e-8));
    CHECK(mcst_evaluate(inst, exact.assortment, exact.plan).revenue == doctest::Approx(exact.revenue).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("exact mcst: zero no-purchase rows and unsorted revenues") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    const auto inst = oracle::random_instance(n, gen, 0.3, 0.4, false);
    const auto exact = solve_mcst_exact(inst);
    const auto best = oracle::maximize(n, [&](const Assortment& s) { return oracle::mcst_revenue(inst, s); });
    CHECK(exact.revenue == doctest::Approx(best.value).epsilon(1e-8));
  }
}

TEST_CASE("exact mcst: tight family optimum is every p0 product") {
  const int k = 4;
  const double eps = 0.01;
  const auto tf = gen_tight_family(k, eps);
  const auto res = solve_mcst_exact(tf.instance);
  double tail = 0.0;
  for (int j = 1; j <= k - 1; ++j) tail += std::pow(eps, j);
  CHECK(res.revenue == doctest::Approx(k - tail).epsilon(1e-10));
  CHECK(res.assortment == Assortment(tf.p0));
}

TEST_CASE("exact mcst: tight family with revenues spanning many orders of magnitude") {
  for (int k : {8, 10}) {
    const auto tf = gen_tight_family(k, 1e-3);
    const auto res = solve_mcst_exact(tf.instance);
    double tail = 0.0;
    for (int j = 1; j <= k - 1; ++j) tail += std::pow(1e-3, j);
    CHECK(res.stats.optimal);
    CHECK(res.revenue == doctest::Approx(k - tail).epsilon(1e-10));
  }
}

TEST_CASE("exact mcst: homogeneous instances match the polynomial algorithm") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gen_homogeneous(5 + static_cast<int>(seed % 20), RevenueDist::Exponential, seed);
    CHECK(solve_mcst_exact(inst).revenue == doctest::Approx(solve_homogeneous(inst).revenue).epsilon(1e-8));
  }
}

TEST_CASE("exact mcst: dominates the revenue-ordered assortment, within its guarantee") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_random({30, RevenueDist::Uniform, TransitionKind::Sparse, seed});
    const auto ro = best_revenue_ordered(inst);
    const auto exact = solve_mcst_exact(inst);
    CHECK(exact.revenue >= ro.result.revenue - 1e-9);
    CHECK(ro.result.revenue >= ro.certificate.bound_factor * exact.revenue - 1e-9);
  }
}

TEST_CASE("exact mcst: limits report an incumbent and a gap") {
  const auto inst = gen_random({40, RevenueDist::Exponential, TransitionKind::Sparse, 5});
  const auto full = solve_mcst_exact(inst);
  const auto limited = solve_mcst_exact(inst, {1, 0.0});
  CHECK(limited.stats.nodes <= 1);
  CHECK(limited.revenue <= full.revenue + 1e-12);
  CHECK(limited.stats.gap >= 0.0);
  if (!limited.stats.optimal) CHECK(limited.stats.gap > 0.0);
  CHECK(limited.revenue + limited.stats.gap >= full.revenue - 1e-9);
}

TEST_CASE("exact choosy: equals enumeration and is dominated by mcst") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int n = 3 + static_cast<int>(seed % 10);
    const auto inst = gen_random({n, seed % 2 ? RevenueDist::Exponential : RevenueDist::Uniform,
                                  seed % 3 ? TransitionKind::Dense : TransitionKind::Sparse, seed});
    const auto res = solve_choosy_exact(inst);
    const auto best = oracle::maximize(n, [&](const Assortment& s) { return oracle::choosy_revenue(inst, s); });
    CHECK(res.revenue == doctest::Approx(best.value).epsilon(1e-8));
    CHECK(brute_force_choosy(inst).revenue == doctest::Approx(best.value).epsilon(1e-12));
    CHECK(res.revenue >= choosy_revenue(inst, Assortment::full(n)) - 1e-12);
    CHECK(solve_mcst_exact(inst).revenue >= res.revenue - 1e-9);
  }
}

TEST_CASE("markov optimum: enumeration, homogeneous and equal revenues") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);
    const auto inst = gen_random({n, seed % 2 ? RevenueDist::Exponential : RevenueDist::Uniform,
                                  seed % 3 ? TransitionKind::Dense : TransitionKind::Sparse, seed});
    const auto res = solve_markov_optimal(inst);
    const auto best = oracle::maximize(
        n, [&](const Assortment& s) { return oracle::revenue_of(inst, oracle::markov_probs(inst, s)); });
    CHECK(res.revenue == doctest::Approx(best.value).epsilon(1e-9));
    CHECK(brute_force_markov(inst).revenue == doctest::Approx(best.value).epsilon(1e-9));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gen_homogeneous(3 + static_cast<int>(seed), RevenueDist::Uniform, seed);
    CHECK(solve_markov_optimal(inst).revenue == doctest::Approx(solve_homogeneous(inst).revenue).epsilon(1e-9));
  }
  auto flat = gen_random({7, RevenueDist::Uniform, TransitionKind::Dense, 3});
  for (auto& r : flat.revenues) r = 1.5;
  const auto res = solve_markov_optimal(flat);
  CHECK(res.assortment == Assortment::full(7));
  CHECK(res.revenue == doctest::Approx(1.5));
}

TEST_CASE("markov optimum: rows without a no-purchase weight") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracle::random_instance(5, gen, 0.2, 0.4);
    const auto res = solve_markov_optimal(inst);
    CHECK(std::isfinite(res.revenue));
    CHECK(res.revenue >= choosy_revenue(inst, Assortment::full(5)) - 1e-12);
  }
}

TEST_CASE("brute force: caps and trivial cases") {
  Instance one = Instance::zeros(1);
  one.revenues = {1.0};
  one.arrivals = {1.0};
  one.nopurchase(0) = 1.0;
  CHECK(brute_force_mcst(one).assortment == Assortment::full(1));
  const auto big = gen_random({17, RevenueDist::Uniform, TransitionKind::Dense, 1});
  CHECK_THROWS_AS(brute_force_mcst(big), PreconditionError);
  CHECK_THROWS_AS(brute_force_markov(big), PreconditionError);
  CHECK_THROWS_AS(brute_force_choosy(big), PreconditionError);
  const auto ex = oracle::example1();
  CHECK(brute_force_mcst(ex).assortment == brute_force_mcst(ex).assortment);
}
