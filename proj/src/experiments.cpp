#include "mcst/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "mcst/exact.hpp"
#include "mcst/poly_solvers.hpp"
#include "mcst/rng.hpp"
#include "mcst/tolerances.hpp"

namespace mcst::experiments {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mean, min and max of a sample; NaN when empty.
struct Stat {
  double sum = 0.0, lo = kNaN, hi = kNaN;
  int count = 0;
  void add(double v) {
    sum += v;
    lo = count == 0 ? v : std::min(lo, v);
    hi = count == 0 ? v : std::max(hi, v);
    ++count;
  }
  double mean() const { return count == 0 ? kNaN : sum / count; }
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << field(fields), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string field(double v) { return num(v); }
  static std::string field(int v) { return std::to_string(v); }
  static std::string field(long v) { return std::to_string(v); }
  static std::string field(std::uint64_t v) { return std::to_string(v); }
  static std::string field(bool v) { return v ? "1" : "0"; }
  static std::string field(const std::string& v) { return v; }
  std::ofstream out_;
};

ExactLimits limits_of(const ExperimentConfig& cfg) { return {cfg.node_limit, cfg.time_limit}; }

void check_config(const ExperimentConfig& cfg) {
  if (cfg.cells.empty()) throw PreconditionError("experiment config: no cells");
  if (cfg.instances_per_cell < 1) throw PreconditionError("experiment config: instances_per_cell must be >= 1");
  for (const auto& c : cfg.cells)
    if (c.n < 1) throw PreconditionError("experiment config: cell n must be >= 1");
  for (int t : cfg.tables)
    if (t < 1 || t > 3) throw PreconditionError("experiment config: tables must be among 1, 2, 3");
}

}  // namespace

std::string Cell::label() const {
  return "(" + std::to_string(n) + "," + to_string(revenue_dist) + "," + to_string(transition_kind) + ")";
}

std::vector<Cell> default_cells() {
  std::vector<Cell> cells;
  for (auto kind : {TransitionKind::Dense, TransitionKind::Sparse})
    for (auto dist : {RevenueDist::Uniform, RevenueDist::Exponential})
      for (int n : {5, 10, 30, 50}) cells.push_back({n, dist, kind});
  return cells;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw PreconditionError("experiment config must be a JSON object");
  static const std::set<std::string> known{"cells", "instances_per_cell", "seed", "time_limit",
                                           "node_limit", "threads", "tables", "output_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw PreconditionError("experiment config: unknown key '" + key + "'");
  ExperimentConfig cfg;
  try {
    if (j.contains("cells")) {
      for (const auto& c : j.at("cells"))
        cfg.cells.push_back({c.at("n").get<int>(), parse_revenue_dist(c.at("rev").get<std::string>()),
                             parse_transition_kind(c.at("trans").get<std::string>())});
    } else {
      cfg.cells = default_cells();
    }
    cfg.instances_per_cell = j.value("instances_per_cell", cfg.instances_per_cell);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.time_limit = j.value("time_limit", cfg.time_limit);
    cfg.node_limit = j.value("node_limit", cfg.node_limit);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("tables")) cfg.tables = j.at("tables").get<std::vector<int>>();
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("experiment config: ") + e.what());
  }
  check_config(cfg);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json cells = json::array();
  for (const auto& c : cfg.cells)
    cells.push_back({{"n", c.n}, {"rev", to_string(c.revenue_dist)}, {"trans", to_string(c.transition_kind)}});
  return {{"cells", cells},           {"instances_per_cell", cfg.instances_per_cell},
          {"seed", cfg.seed},         {"time_limit", cfg.time_limit},
          {"node_limit", cfg.node_limit}, {"threads", cfg.threads},
          {"tables", cfg.tables},     {"output_dir", cfg.output_dir}};
}

std::uint64_t instance_seed(std::uint64_t seed, int cell, int index) {
  return splitmix64(splitmix64(seed ^ (0xC3A5C85C97CB3127ULL * static_cast<std::uint64_t>(cell + 1))) +
                    static_cast<std::uint64_t>(index));
}

Instance make_instance(const ExperimentConfig& cfg, int cell, int index) {
  const auto& c = cfg.cells.at(static_cast<std::size_t>(cell));
  return gen_random({c.n, c.revenue_dist, c.transition_kind, instance_seed(cfg.seed, cell, index)});
}

double safe_ratio(double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0;
  return a / b;
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(count, 1));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

Table1Report run_table1(const ExperimentConfig& cfg) {
  check_config(cfg);
  const int per = cfg.instances_per_cell;
  const int total = static_cast<int>(cfg.cells.size()) * per;
  Table1Report report;
  report.rows.resize(static_cast<std::size_t>(total));
  parallel_for(total, cfg.threads, [&](int k) {
    Table1Row& row = report.rows[static_cast<std::size_t>(k)];
    row.cell = k / per;
    row.index = k % per;
    row.seed = instance_seed(cfg.seed, row.cell, row.index);
    const Instance inst = make_instance(cfg, row.cell, row.index);

    const auto t0 = Clock::now();
    const auto cf = canonicalize(inst);
    const auto ro = best_revenue_ordered(cf.instance);
    row.ro_seconds = seconds_since(t0);
    row.ro_revenue = ro.result.revenue;
    row.bound_factor = ro.certificate.bound_factor;

    const auto exact = solve_mcst_exact(inst, limits_of(cfg));
    row.optimal = exact.stats.optimal;
    row.nodes = exact.stats.nodes;
    row.exact_revenue = exact.revenue;
    row.ratio = safe_ratio(row.ro_revenue, row.exact_revenue);
    row.build_seconds = exact.stats.build_seconds;
    row.solve_seconds = exact.stats.wall_seconds - exact.stats.build_seconds;
  });
  report.summary = summarize_table1(report.rows, static_cast<int>(cfg.cells.size()));
  return report;
}

std::vector<Table1Summary> summarize_table1(const std::vector<Table1Row>& rows, int cells) {
  std::vector<Table1Summary> out(static_cast<std::size_t>(cells));
  std::vector<Stat> ratio(out.size()), build(out.size()), solve(out.size()), ro(out.size());
  for (int c = 0; c < cells; ++c) out[c].cell = c;
  for (const auto& r : rows) {
    auto& s = out.at(static_cast<std::size_t>(r.cell));
    ++s.instances;
    build[r.cell].add(r.build_seconds);
    solve[r.cell].add(r.solve_seconds);
    ro[r.cell].add(r.ro_seconds);
    if (!r.optimal) {
      ++s.limit_hits;
      continue;
    }
    ratio[r.cell].add(r.ratio);
  }
  for (int c = 0; c < cells; ++c) {
    auto& s = out[c];
    s.ratio_mean = ratio[c].mean();
    s.ratio_min = ratio[c].lo;
    s.ratio_max = ratio[c].hi;
    s.build_seconds_mean = build[c].mean();
    s.solve_seconds_mean = solve[c].mean();
    s.solve_seconds_max = solve[c].hi;
    s.ro_seconds_mean = ro[c].mean();
  }
  return out;
}

ComparisonReport run_comparison(const ExperimentConfig& cfg) {
  check_config(cfg);
  const int per = cfg.instances_per_cell;
  const int total = static_cast<int>(cfg.cells.size()) * per;
  ComparisonReport report;
  report.rows.resize(static_cast<std::size_t>(total));
  parallel_for(total, cfg.threads, [&](int k) {
    ComparisonRow& row = report.rows[static_cast<std::size_t>(k)];
    row.cell = k / per;
    row.index = k % per;
    row.seed = instance_seed(cfg.seed, row.cell, row.index);
    const Instance inst = make_instance(cfg, row.cell, row.index);

    const auto mcst = solve_mcst_exact(inst, limits_of(cfg));
    const auto markov = solve_markov_optimal(inst);
    const auto choosy = solve_choosy_exact(inst, limits_of(cfg));
    row.optimal = mcst.stats.optimal && choosy.stats.optimal;
    row.mcst = mcst.revenue;
    row.markov = markov.revenue;
    row.choosy = choosy.revenue;
    row.markov_of_mcst = markov_evaluate(inst, mcst.assortment).revenue;
    row.markov_of_choosy = markov_evaluate(inst, choosy.assortment).revenue;
    row.choosy_of_mcst = choosy_revenue(inst, mcst.assortment);
    row.choosy_of_markov = choosy_revenue(inst, markov.assortment);
  });
  const int cells = static_cast<int>(cfg.cells.size());
  report.table2 = summarize_table2(report.rows, cells);
  report.table3 = summarize_table3(report.rows, cells);
  return report;
}

ComparisonReport run_table2(const ExperimentConfig& cfg) { return run_comparison(cfg); }
ComparisonReport run_table3(const ExperimentConfig& cfg) { return run_comparison(cfg); }

std::vector<Table2Summary> summarize_table2(const std::vector<ComparisonRow>& rows, int cells) {
  std::vector<Table2Summary> out(static_cast<std::size_t>(cells));
  std::vector<Stat> markov(out.size()), choosy(out.size());
  std::vector<int> ge_markov(out.size(), 0), ge_choosy(out.size(), 0);
  for (int c = 0; c < cells; ++c) out[c].cell = c;
  for (const auto& r : rows) {
    auto& s = out.at(static_cast<std::size_t>(r.cell));
    ++s.instances;
    if (!r.optimal) {
      ++s.limit_hits;
      continue;
    }
    markov[r.cell].add(safe_ratio(r.mcst, r.markov));
    choosy[r.cell].add(safe_ratio(r.mcst, r.choosy));
    if (r.mcst >= r.markov - tol::kFeasibility) ++ge_markov[r.cell];
    if (r.mcst >= r.choosy - tol::kFeasibility) ++ge_choosy[r.cell];
  }
  for (int c = 0; c < cells; ++c) {
    auto& s = out[c];
    const int used = markov[c].count;
    s.mcst_ge_markov_pct = used == 0 ? kNaN : 100.0 * ge_markov[c] / used;
    s.mcst_ge_choosy_pct = used == 0 ? kNaN : 100.0 * ge_choosy[c] / used;
    s.markov_ratio_mean = markov[c].mean();
    s.markov_ratio_min = markov[c].lo;
    s.markov_ratio_max = markov[c].hi;
    s.choosy_ratio_mean = choosy[c].mean();
    s.choosy_ratio_min = choosy[c].lo;
    s.choosy_ratio_max = choosy[c].hi;
  }
  return out;
}

std::vector<Table3Summary> summarize_table3(const std::vector<ComparisonRow>& rows, int cells) {
  std::vector<Table3Summary> out(static_cast<std::size_t>(cells));
  std::vector<Stat> mm(out.size()), mc(out.size()), cm(out.size()), ck(out.size());
  for (int c = 0; c < cells; ++c) out[c].cell = c;
  for (const auto& r : rows) {
    auto& s = out.at(static_cast<std::size_t>(r.cell));
    ++s.instances;
    if (!r.optimal) {
      ++s.limit_hits;
      continue;
    }
    mm[r.cell].add(safe_ratio(r.markov_of_mcst, r.markov));
    mc[r.cell].add(safe_ratio(r.markov_of_choosy, r.markov));
    cm[r.cell].add(safe_ratio(r.choosy_of_mcst, r.choosy));
    ck[r.cell].add(safe_ratio(r.choosy_of_markov, r.choosy));
  }
  for (int c = 0; c < cells; ++c) {
    auto& s = out[c];
    s.markov_mcst_mean = mm[c].mean();
    s.markov_choosy_mean = mc[c].mean();
    s.choosy_mcst_mean = cm[c].mean();
    s.choosy_markov_mean = ck[c].mean();
    s.markov_mcst_min = mm[c].lo;
    s.markov_choosy_min = mc[c].lo;
    s.choosy_mcst_min = cm[c].lo;
    s.choosy_markov_min = ck[c].lo;
  }
  return out;
}

void write_table1(const std::filesystem::path& dir, const ExperimentConfig& cfg, const Table1Report& report) {
  std::filesystem::create_directories(dir);
  CsvFile rows(dir / "table1_rows.csv", "cell,index,seed,optimal,nodes,exact_revenue,ro_revenue,ro_ratio,bound_factor");
  for (const auto& r : report.rows)
    rows.row(cfg.cells[r.cell].label(), r.index, r.seed, r.optimal, r.nodes, r.exact_revenue, r.ro_revenue, r.ratio,
             r.bound_factor);
  CsvFile summary(dir / "table1_summary.csv", "cell,instances,limit_hits,ro_ratio_mean,ro_ratio_min,ro_ratio_max");
  for (const auto& s : report.summary)
    summary.row(cfg.cells[s.cell].label(), s.instances, s.limit_hits, s.ratio_mean, s.ratio_min, s.ratio_max);
  CsvFile timing(dir / "table1_timing.csv",
                 "cell,instances,build_seconds_mean,solve_seconds_mean,solve_seconds_max,ro_seconds_mean");
  for (const auto& s : report.summary)
    timing.row(cfg.cells[s.cell].label(), s.instances, s.build_seconds_mean, s.solve_seconds_mean, s.solve_seconds_max,
               s.ro_seconds_mean);
  CsvFile timing_rows(dir / "table1_timing_rows.csv", "cell,index,build_seconds,solve_seconds,ro_seconds");
  for (const auto& r : report.rows)
    timing_rows.row(cfg.cells[r.cell].label(), r.index, r.build_seconds, r.solve_seconds, r.ro_seconds);
}

void write_comparison(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ComparisonReport& report,
                      bool table2, bool table3) {
  std::filesystem::create_directories(dir);
  CsvFile rows(dir / "comparison_rows.csv",
               "cell,index,seed,optimal,mcst,markov,choosy,markov_of_mcst,markov_of_choosy,choosy_of_mcst,"
               "choosy_of_markov");
  for (const auto& r : report.rows)
    rows.row(cfg.cells[r.cell].label(), r.index, r.seed, r.optimal, r.mcst, r.markov, r.choosy, r.markov_of_mcst,
             r.markov_of_choosy, r.choosy_of_mcst, r.choosy_of_markov);
  if (table2) {
    CsvFile f(dir / "table2_summary.csv",
              "cell,instances,limit_hits,mcst_ge_markov_pct,mcst_markov_mean,mcst_markov_min,mcst_markov_max,"
              "mcst_ge_choosy_pct,mcst_choosy_mean,mcst_choosy_min,mcst_choosy_max");
    for (const auto& s : report.table2)
      f.row(cfg.cells[s.cell].label(), s.instances, s.limit_hits, s.mcst_ge_markov_pct, s.markov_ratio_mean,
            s.markov_ratio_min, s.markov_ratio_max, s.mcst_ge_choosy_pct, s.choosy_ratio_mean, s.choosy_ratio_min,
            s.choosy_ratio_max);
  }
  if (table3) {
    CsvFile f(dir / "table3_summary.csv",
              "cell,instances,limit_hits,true_markov_mcst_mean,true_markov_choosy_mean,true_choosy_mcst_mean,"
              "true_choosy_markov_mean,true_markov_mcst_min,true_markov_choosy_min,true_choosy_mcst_min,"
              "true_choosy_markov_min");
    for (const auto& s : report.table3)
      f.row(cfg.cells[s.cell].label(), s.instances, s.limit_hits, s.markov_mcst_mean, s.markov_choosy_mean,
            s.choosy_mcst_mean, s.choosy_markov_mean, s.markov_mcst_min, s.markov_choosy_min, s.choosy_mcst_min,
            s.choosy_markov_min);
  }
}

void run_bench(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  check_config(cfg);
  const auto has = [&](int t) { return std::find(cfg.tables.begin(), cfg.tables.end(), t) != cfg.tables.end(); };
  if (has(1)) write_table1(dir, cfg, run_table1(cfg));
  if (has(2) || has(3)) write_comparison(dir, cfg, run_comparison(cfg), has(2), has(3));
}

}  // namespace mcst::experiments
