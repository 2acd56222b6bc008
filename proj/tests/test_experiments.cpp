#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mcst/experiments.hpp"
#include "mcst/tolerances.hpp"

using namespace mcst;
using namespace mcst::experiments;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.cells = {{5, RevenueDist::Uniform, TransitionKind::Dense}, {8, RevenueDist::Exponential, TransitionKind::Sparse}};
  cfg.instances_per_cell = 6;
  cfg.seed = 11;
  cfg.threads = 3;
  return cfg;
}

}  // namespace

TEST_CASE("experiments: config parsing") {
  const auto cfg = config_from_json(nlohmann::json::parse(
      R"({"cells":[{"n":30,"rev":"exp","trans":"spa"}],"instances_per_cell":7,"seed":5,"tables":[1]})"));
  REQUIRE(cfg.cells.size() == 1);
  CHECK(cfg.cells[0].label() == "(30,EXP,SPA)");
  CHECK(cfg.instances_per_cell == 7);
  CHECK(cfg.tables == std::vector<int>{1});
  CHECK(config_from_json(nlohmann::json::object()).cells.size() == 16);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"bogus":1})")), PreconditionError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"instances_per_cell":0})")), PreconditionError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"tables":[4]})")), PreconditionError);
  const auto round = config_from_json(config_to_json(cfg));
  CHECK(round.cells[0].n == 30);
  CHECK(round.seed == 5);
}

TEST_CASE("experiments: instance seeds are distinct per cell and index") {
  std::set<std::uint64_t> seen;
  for (int c = 0; c < 16; ++c)
    for (int i = 0; i < 100; ++i) seen.insert(instance_seed(1, c, i));
  CHECK(seen.size() == 1600);
}

TEST_CASE("experiments: parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(1000, 4, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](int i) { if (i == 7) throw PreconditionError("x"); }), PreconditionError);
}

TEST_CASE("experiments: revenue-ordered rows, summaries and bounds") {
  const auto cfg = small_config();
  const auto rep = run_table1(cfg);
  REQUIRE(rep.rows.size() == 12);
  for (const auto& r : rep.rows) {
    CHECK(r.optimal);
    CHECK(r.ratio <= 1.0 + 1e-9);
    CHECK(r.ratio >= r.bound_factor - 1e-9);
  }
  const auto again = summarize_table1(rep.rows, 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(again[c].ratio_mean == rep.summary[c].ratio_mean);
    CHECK(again[c].ratio_min == rep.summary[c].ratio_min);
    CHECK(rep.summary[c].instances == 6);
    CHECK(rep.summary[c].limit_hits == 0);
  }
}

TEST_CASE("experiments: comparison rows and cross ratios") {
  const auto cfg = small_config();
  const auto rep = run_comparison(cfg);
  REQUIRE(rep.rows.size() == 12);
  for (const auto& r : rep.rows) {
    CHECK(r.mcst >= r.choosy - tol::kFeasibility);
    CHECK(r.markov_of_mcst <= r.markov + 1e-9);
    CHECK(r.markov_of_choosy <= r.markov + 1e-9);
    CHECK(r.choosy_of_mcst <= r.choosy + 1e-9);
    CHECK(r.choosy_of_markov <= r.choosy + 1e-9);
  }
  for (const auto& s : rep.table2) CHECK(s.mcst_ge_choosy_pct == 100.0);
  const auto t3 = summarize_table3(rep.rows, 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(t3[c].markov_mcst_mean == rep.table3[c].markov_mcst_mean);
    CHECK(t3[c].choosy_markov_min == rep.table3[c].choosy_markov_min);
    CHECK(rep.table3[c].markov_mcst_mean <= 1.0 + 1e-9);
    CHECK(rep.table3[c].markov_mcst_min > 0.0);
  }
}

TEST_CASE("experiments: limit hits are excluded from the ratios") {
  std::vector<Table1Row> rows(3);
  rows[0].ratio = 0.9;
  rows[1].ratio = 0.5;
  rows[1].optimal = false;
  rows[2].ratio = 1.0;
  const auto s = summarize_table1(rows, 1);
  CHECK(s[0].limit_hits == 1);
  CHECK(s[0].ratio_mean == doctest::Approx(0.95));
  CHECK(s[0].ratio_min == doctest::Approx(0.9));
  CHECK(safe_ratio(0.0, 0.0) == 1.0);
}

TEST_CASE("experiments: deterministic CSV across runs and thread counts") {
  auto cfg = small_config();
  const auto base = std::filesystem::temp_directory_path() / "mcst_bench_test";
  std::filesystem::remove_all(base);
  run_bench(cfg, base / "a");
  cfg.threads = 1;
  run_bench(cfg, base / "b");
  for (const char* f : {"table1_rows.csv", "table1_summary.csv", "comparison_rows.csv", "table2_summary.csv",
                        "table3_summary.csv"}) {
    const auto a = slurp(base / "a" / f);
    CHECK_MESSAGE(!a.empty(), f);
    CHECK_MESSAGE(a == slurp(base / "b" / f), f);
  }
  CHECK(std::filesystem::exists(base / "a" / "table1_timing.csv"));
  const auto header = slurp(base / "a" / "table1_summary.csv").substr(0, 40);
  CHECK(header.rfind("cell,instances,limit_hits", 0) == 0);
  std::filesystem::remove_all(base);
}
