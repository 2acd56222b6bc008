#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcst/generators.hpp"

namespace mcst::experiments {

struct Cell {
  int n = 5;
  RevenueDist revenue_dist = RevenueDist::Uniform;
  TransitionKind transition_kind = TransitionKind::Dense;
  std::string label() const;  // "(50,UNI,DEN)"
};

struct ExperimentConfig {
  std::vector<Cell> cells;
  int instances_per_cell = 100;
  std::uint64_t seed = 1;
  double time_limit = 60.0;  // per exact solve, seconds; 0: none
  long node_limit = 0;
  int threads = 0;  // 0: hardware concurrency
  std::vector<int> tables{1, 2, 3};
  std::string output_dir = "results";
};

/// n in {5, 10, 30, 50} crossed with {UNI, EXP} x {DEN, SPA}.
std::vector<Cell> default_cells();

/// Missing keys take the defaults above. Throws PreconditionError on bad
/// values or unknown keys.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Generator seed of instance `index` in cell `cell`; independent of the
/// thread count and of the other cells.
std::uint64_t instance_seed(std::uint64_t seed, int cell, int index);
Instance make_instance(const ExperimentConfig& cfg, int cell, int index);

// table1_*.csv: exact MCST optimum against the best revenue-ordered assortment.

struct Table1Row {
  int cell = 0;
  int index = 0;
  std::uint64_t seed = 0;
  bool optimal = true;  // exact solve finished within its limits
  long nodes = 0;
  double exact_revenue = 0.0;
  double ro_revenue = 0.0;
  double ratio = 1.0;  // ro / exact
  double bound_factor = 1.0;
  // Wall clock; kept out of the deterministic CSV files.
  double build_seconds = 0.0;
  double solve_seconds = 0.0;
  double ro_seconds = 0.0;
};

struct Table1Summary {
  int cell = 0;
  int instances = 0;
  int limit_hits = 0;  // excluded from the ratio columns
  double ratio_mean = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double build_seconds_mean = 0.0;
  double solve_seconds_mean = 0.0;
  double solve_seconds_max = 0.0;
  double ro_seconds_mean = 0.0;
};

struct Table1Report {
  std::vector<Table1Row> rows;
  std::vector<Table1Summary> summary;
};

// comparison_rows.csv, table2/3 summaries: optima of the three models and cross evaluations.

struct ComparisonRow {
  int cell = 0;
  int index = 0;
  std::uint64_t seed = 0;
  bool optimal = true;  // both branch-and-bound solves finished
  double mcst = 0.0;
  double markov = 0.0;
  double choosy = 0.0;
  // Optimal assortment of one model scored under another; the MCST plan is
  // dropped when its assortment is scored under Markov or choosy.
  double markov_of_mcst = 0.0;
  double markov_of_choosy = 0.0;
  double choosy_of_mcst = 0.0;
  double choosy_of_markov = 0.0;
};

struct Table2Summary {
  int cell = 0;
  int instances = 0;
  int limit_hits = 0;
  double mcst_ge_markov_pct = 0.0;
  double markov_ratio_mean = 0.0, markov_ratio_min = 0.0, markov_ratio_max = 0.0;
  double mcst_ge_choosy_pct = 0.0;
  double choosy_ratio_mean = 0.0, choosy_ratio_min = 0.0, choosy_ratio_max = 0.0;
};

/// Ratios are (assortment of the column model under the true model) /
/// (true model optimum).
struct Table3Summary {
  int cell = 0;
  int instances = 0;
  int limit_hits = 0;
  double markov_mcst_mean = 0.0, markov_choosy_mean = 0.0;
  double choosy_mcst_mean = 0.0, choosy_markov_mean = 0.0;
  double markov_mcst_min = 0.0, markov_choosy_min = 0.0;
  double choosy_mcst_min = 0.0, choosy_markov_min = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<Table2Summary> table2;
  std::vector<Table3Summary> table3;
};

/// ratio a / b with 0 / 0 read as 1.
double safe_ratio(double a, double b);

Table1Report run_table1(const ExperimentConfig& cfg);
/// Solves all three models once; feeds both comparison summaries.
ComparisonReport run_comparison(const ExperimentConfig& cfg);
ComparisonReport run_table2(const ExperimentConfig& cfg);
ComparisonReport run_table3(const ExperimentConfig& cfg);

std::vector<Table1Summary> summarize_table1(const std::vector<Table1Row>& rows, int cells);
std::vector<Table2Summary> summarize_table2(const std::vector<ComparisonRow>& rows, int cells);
std::vector<Table3Summary> summarize_table3(const std::vector<ComparisonRow>& rows, int cells);

/// Writes table1_rows.csv, table1_summary.csv and table1_timing.csv. The first
/// two are byte-identical across runs of the same config; the timing file
/// holds the wall-clock columns.
void write_table1(const std::filesystem::path& dir, const ExperimentConfig& cfg, const Table1Report& report);
/// comparison_rows.csv, table2_summary.csv, table3_summary.csv.
void write_comparison(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ComparisonReport& report,
                      bool table2, bool table3);

/// Runs every table listed in cfg and writes the files into dir.
void run_bench(const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Calls task(i) for i in [0, count) on `threads` workers (0: hardware).
void parallel_for(int count, int threads, const std::function<void(int)>& task);

}  // namespace mcst::experiments
