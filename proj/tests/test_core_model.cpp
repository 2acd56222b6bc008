#include <cmath>
#include <random>

#include "doctest.h"
#include "mcst/core_model.hpp"
#include "oracles.hpp"

using namespace mcst;

TEST_CASE("validate: example instance, arrival sum, structure flags") {
  const auto rep = validate_instance(oracle::example1());
  CHECK(rep.ok());
  CHECK_FALSE(rep.homogeneous);
  CHECK(rep.revenues_sorted);

  auto bad = oracle::example1();
  bad.arrivals = {0.25, 0.25, 0.25, 0.15};
  const auto r2 = validate_instance(bad);
  REQUIRE_FALSE(r2.ok());
  CHECK(r2.violations.front().find("arrivals") != std::string::npos);

  Instance h = Instance::zeros(3);
  h.revenues = {3, 2, 1};
  h.arrivals = {0.2, 0.3, 0.5};
  for (int j = 0; j < 3; ++j) {
    h.nopurchase(j) = 0.4;
    h.weight(j, 0) = 0.1, h.weight(j, 1) = 0.2, h.weight(j, 2) = 0.3;
  }
  const auto r3 = validate_instance(h);
  CHECK(r3.ok());
  CHECK(r3.homogeneous);
  CHECK_FALSE(r3.transit_to_one);
  CHECK_FALSE(r3.has_zero_nopurchase);

  Instance t = Instance::zeros(2);
  t.revenues = {2, 1};
  t.arrivals = {0.5, 0.5};
  t.nopurchase(0) = 1.0;
  t.weight(1, 0) = 1.0;
  const auto r4 = validate_instance(t);
  CHECK(r4.transit_to_one);
  CHECK(r4.has_zero_nopurchase);

  t.weight(1, 0) = 1.5;
  t.revenues = {-1, 2};
  const auto r5 = validate_instance(t);
  CHECK(r5.violations.size() >= 1);
  CHECK_FALSE(r5.revenues_sorted);
}

TEST_CASE("best recommendation: worked example") {
  const auto inst = oracle::example1();
  const auto a = best_recommendation(inst, 1, Assortment({0, 2, 3}));
  CHECK(a.set == std::vector<int>{0, 2});
  CHECK(a.value == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(oracle::best_recommendation_value(inst, 1, Assortment({0, 2, 3})) == doctest::Approx(1.5));
  const auto b = best_recommendation(inst, 1, Assortment({2, 3}));
  CHECK(b.set == std::vector<int>{2, 3});
  CHECK_THROWS_AS(best_recommendation(inst, 0, Assortment({0, 2})), PreconditionError);
}

TEST_CASE("best recommendation: zero over zero") {
  Instance inst = Instance::zeros(3);
  inst.revenues = {2, 1, 0};
  inst.arrivals = {0.2, 0.3, 0.5};
  inst.nopurchase(0) = 1.0;
  inst.nopurchase(1) = 1.0;
  inst.weight(2, 2) = 1.0;  // all mass on itself, none on S, v_20 = 0
  const auto rec = best_recommendation(inst, 2, Assortment({0, 1}));
  CHECK(rec.value == 0.0);
  CHECK(rec.set == std::vector<int>{0, 1});
}

TEST_CASE("best recommendation: matches enumeration and is inclusion-maximal") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 6;
    const auto inst = oracle::random_instance(n, gen, 0.4, trial % 3 == 0 ? 0.5 : 0.0, trial % 2 == 0);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      const auto s = Assortment::from_mask(m);
      for (int j = 0; j < n; ++j) {
        if (s.contains(j)) continue;
        const auto rec = best_recommendation(inst, j, s);
        const double want = oracle::best_recommendation_value(inst, j, s);
        REQUIRE(rec.value == doctest::Approx(want).epsilon(1e-12));
        CHECK(oracle::recommendation_value(inst, j, rec.set) == doctest::Approx(want).epsilon(1e-12));
        // The set is the revenue threshold at the optimal ratio, and it holds
        // every product that some maximizer actually recommends.
        for (int i : s.members()) {
          const bool in = std::find(rec.set.begin(), rec.set.end(), i) != rec.set.end();
          if (inst.revenues[i] > want + 1e-12) CHECK(in);
          if (inst.revenues[i] < want - 1e-12) CHECK_FALSE(in);
        }
        const auto& pool = s.members();
        for (std::uint64_t r = 0; r < (std::uint64_t{1} << pool.size()); ++r) {
          const auto cand = oracle::members_of(r, pool);
          if (oracle::recommendation_value(inst, j, cand) < want - 1e-12) continue;
          for (int i : cand)
            if (inst.weight(j, i) > 0.0) CHECK(std::find(rec.set.begin(), rec.set.end(), i) != rec.set.end());
        }
      }
    }
  }
}

TEST_CASE("best recommendation: zero-weight products above the ratio do not change the value") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5;
    auto inst = oracle::random_instance(n, gen, 0.0);
    // Product 0 carries the largest revenue; make it invisible from row 4.
    const double w = inst.weight(4, 0);
    inst.weight(4, 0) = 0.0;
    inst.nopurchase(4) += w;
    const Assortment without({1, 2, 3});
    const Assortment with({0, 1, 2, 3});
    const auto a = best_recommendation(inst, 4, without);
    const auto b = best_recommendation(inst, 4, with);
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-14));
    CHECK(std::find(b.set.begin(), b.set.end(), 0) != b.set.end());
  }
}

TEST_CASE("mcst evaluate: full and empty assortments") {
  std::mt19937_64 gen(3);
  const auto inst = oracle::random_instance(6, gen);
  const auto full = Assortment::full(6);
  const auto ev = mcst_evaluate(inst, full, {});
  double expect = 0.0;
  for (int i = 0; i < 6; ++i) expect += inst.arrivals[i] * inst.revenues[i];
  CHECK(ev.revenue == doctest::Approx(expect).epsilon(1e-14));
  CHECK(ev.nopurchase_prob() == 0.0);

  const auto empty = mcst_revenue(inst, Assortment());
  CHECK(empty.revenue == 0.0);
  const auto ev0 = mcst_evaluate(inst, Assortment(), empty.plan);
  CHECK(ev0.nopurchase_prob() == doctest::Approx(1.0).epsilon(1e-15));
  for (const auto& [j, r] : empty.plan.sets) CHECK(r.empty());
}

TEST_CASE("mcst evaluate: regularity violation of the worked example") {
  const auto inst = oracle::example1();
  const Assortment s({0, 2, 3}), s2({2, 3});
  const auto p = mcst_revenue(inst, s);
  const auto p2 = mcst_revenue(inst, s2);
  const double pr3 = mcst_evaluate(inst, s, p.plan).prob(2);
  const double pr3b = mcst_evaluate(inst, s2, p2.plan).prob(2);
  CHECK(std::abs(pr3 - 0.3125) <= 4 * std::numeric_limits<double>::epsilon());
  CHECK(std::abs(pr3b - 0.3) <= 4 * std::numeric_limits<double>::epsilon());
  CHECK(pr3 > pr3b);
  CHECK(p.plan.sets.at(1) == std::vector<int>{0, 2});
  CHECK(p2.plan.sets.at(1) == std::vector<int>{2, 3});
}

TEST_CASE("mcst revenue: matches plan enumeration on random 8-product instances") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 4; ++trial) {
    const auto inst = oracle::random_instance(8, gen, 0.3, trial == 3 ? 0.4 : 0.0);
    for (std::uint64_t m = 0; m < 256; ++m) {
      const auto s = Assortment::from_mask(m);
      const auto pr = mcst_revenue(inst, s);
      REQUIRE(pr.revenue == doctest::Approx(oracle::mcst_revenue(inst, s)).epsilon(1e-12));
      CHECK(mcst_revenue_value(inst, s) == doctest::Approx(pr.revenue).epsilon(1e-12));
      const auto ev = mcst_evaluate(inst, s, pr.plan);
      CHECK(ev.revenue == doctest::Approx(pr.revenue).epsilon(1e-12));
      const auto probs = oracle::mcst_probs(inst, s, pr.plan);
      for (int i = 0; i <= 8; ++i) CHECK(ev.purchase_probs[i] == doctest::Approx(probs[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("mcst evaluate: probability conservation for arbitrary plans") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 9;
    const auto inst = oracle::random_instance(n, gen, 0.5, 0.2, false);
    const auto s = Assortment::from_mask(gen() & ((std::uint64_t{1} << n) - 1));
    RecommendationPlan plan;
    for (int j : s.complement(n)) plan.sets[j] = oracle::members_of(gen(), s.members());
    const auto ev = mcst_evaluate(inst, s, plan);
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
      CHECK(ev.purchase_probs[i] >= 0.0);
      CHECK(ev.purchase_probs[i] <= 1.0 + 1e-12);
      if (i > 0 && !s.contains(i - 1)) CHECK(ev.purchase_probs[i] == 0.0);
      total += ev.purchase_probs[i];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mcst evaluate: malformed plans are rejected") {
  const auto inst = oracle::example1();
  const Assortment s({0, 2});
  RecommendationPlan plan;
  plan.sets[1] = {0};
  CHECK_THROWS_AS(mcst_evaluate(inst, s, plan), PreconditionError);  // key 3 missing
  plan.sets[3] = {1};
  CHECK_THROWS_AS(mcst_evaluate(inst, s, plan), PreconditionError);  // 1 is not offered
  plan.sets[3] = {2};
  CHECK_NOTHROW(mcst_evaluate(inst, s, plan));
}

TEST_CASE("markov evaluate: full assortment and power-series oracle") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 5;
    const auto inst = oracle::random_instance(n, gen, 0.2);
    double expect = 0.0;
    for (int i = 0; i < n; ++i) expect += inst.arrivals[i] * inst.revenues[i];
    CHECK(markov_evaluate(inst, Assortment::full(n)).revenue == doctest::Approx(expect).epsilon(1e-14));
    // complements of size <= 3
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
      if (gen() % 2 == 0 && out.size() < 3) out.push_back(i);
    std::vector<int> in;
    for (int i = 0; i < n; ++i)
      if (std::find(out.begin(), out.end(), i) == out.end()) in.push_back(i);
    const Assortment s(in);
    const auto ev = markov_evaluate(inst, s);
    const auto want = oracle::markov_probs(inst, s);
    for (int i = 0; i <= n; ++i) CHECK(std::abs(ev.purchase_probs[i] - want[i]) <= 1e-10);
  }
}

TEST_CASE("markov evaluate: equals single transition on homogeneous rows with plan S") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 6;
    auto inst = oracle::random_instance(n, gen, 0.0);
    for (int j = 1; j < n; ++j)
      for (int c = 0; c <= n; ++c) inst.transitions[j * (n + 1) + c] = inst.transitions[c];
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      const auto s = Assortment::from_mask(m);
      RecommendationPlan plan;
      for (int j : s.complement(n)) plan.sets[j] = s.members();
      CHECK(markov_evaluate(inst, s).revenue == doctest::Approx(mcst_evaluate(inst, s, plan).revenue).epsilon(1e-9));
    }
  }
}

TEST_CASE("markov evaluate: non-absorbing complement is an error") {
  Instance inst = Instance::zeros(3);
  inst.revenues = {3, 2, 1};
  inst.arrivals = {0.4, 0.3, 0.3};
  inst.weight(0, 1) = 1.0;
  inst.weight(1, 0) = 1.0;
  inst.nopurchase(2) = 1.0;
  CHECK_THROWS_AS(markov_evaluate(inst, Assortment({2})), NumericError);
  CHECK_NOTHROW(markov_evaluate(inst, Assortment({0})));
}

TEST_CASE("choosy revenue: full, empty and the double-sum oracle") {
  std::mt19937_64 gen(4);
  const auto inst = oracle::random_instance(6, gen, 0.3);
  double expect = 0.0;
  for (int i = 0; i < 6; ++i) expect += inst.arrivals[i] * inst.revenues[i];
  CHECK(choosy_revenue(inst, Assortment::full(6)) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(choosy_revenue(inst, Assortment()) == 0.0);
  for (std::uint64_t m = 0; m < 64; ++m) {
    const auto s = Assortment::from_mask(m);
    CHECK(choosy_revenue(inst, s) == doctest::Approx(oracle::choosy_revenue(inst, s)).epsilon(1e-13));
  }
}

TEST_CASE("dominance: single transition with recommendations beats choosy") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 7;
    const auto inst = oracle::random_instance(n, gen, 0.3, 0.2);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      const auto s = Assortment::from_mask(m);
      CHECK(mcst_revenue_value(inst, s) >= choosy_revenue(inst, s) - 1e-12);
    }
  }
}

TEST_CASE("canonical form: sorting and mapping back") {
  std::mt19937_64 gen(2);
  const auto inst = oracle::random_instance(7, gen, 0.3, 0.0, false);
  const auto cf = canonicalize(inst);
  CHECK(validate_instance(cf.instance).revenues_sorted);
  for (std::uint64_t m = 0; m < 128; m += 7) {
    const auto s = Assortment::from_mask(m);
    const auto orig = cf.assortment_to_original(s);
    CHECK(mcst_revenue_value(cf.instance, s) == doctest::Approx(mcst_revenue_value(inst, orig)).epsilon(1e-13));
    const auto plan = cf.plan_to_original(mcst_revenue(cf.instance, s).plan);
    CHECK_NOTHROW(check_plan(inst, orig, plan));
  }
}

TEST_CASE("assortment basics") {
  CHECK(Assortment({3, 1, 3}).members() == std::vector<int>{1, 3});
  CHECK(Assortment::prefix(3).members() == std::vector<int>{0, 1, 2});
  CHECK(Assortment::from_mask(0b1010).members() == std::vector<int>{1, 3});
  CHECK(Assortment({0, 2}).complement(4) == std::vector<int>{1, 3});
  const std::vector<double> x{0.2, 0.7, 1.0};
  CHECK(Assortment::from_indicator(x).members() == std::vector<int>{1, 2});
}
