// mcst: generate, solve, evaluate, reduce and benchmark assortment instances.
// Machine-readable output goes to stdout or files, summaries to stderr.
// Exit codes: 0 success, 1 usage or input error, 2 solver failure or limit.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "mcst/exact.hpp"
#include "mcst/experiments.hpp"
#include "mcst/io.hpp"
#include "mcst/poly_solvers.hpp"

using namespace mcst;
using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kSolver = 2;

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << '\n';
  else
    io::write_json_file(out_path, j);
}

// Runs a canonical-form solver and maps its answer back to the file's numbering.
SolveResult on_canonical(const Instance& inst, const std::function<SolveResult(const Instance&)>& solve) {
  const auto cf = canonicalize(inst);
  SolveResult res = solve(cf.instance);
  res.assortment = cf.assortment_to_original(res.assortment);
  res.plan = cf.plan_to_original(res.plan);
  return res;
}

SolveResult run_method(const Instance& inst, const std::string& method, const ExactLimits& limits) {
  if (method == "exact") return solve_mcst_exact(inst, limits);
  if (method == "choosy") return solve_choosy_exact(inst, limits);
  if (method == "markov") {
    const auto report = validate_instance(inst);
    if (!report.ok()) throw PreconditionError("invalid instance: " + report.violations.front());
    return solve_markov_optimal(inst);
  }
  if (method == "homogeneous") return on_canonical(inst, solve_homogeneous);
  if (method == "tree") return on_canonical(inst, [](const Instance& c) { return solve_tree_dp(c); });
  if (method == "ro") {
    return on_canonical(inst, [](const Instance& c) {
      const auto t0 = std::chrono::steady_clock::now();
      auto ro = best_revenue_ordered(c);
      ro.result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return ro.result;
    });
  }
  throw PreconditionError("unknown method '" + method + "'");
}

int cmd_gen(int n, const std::string& rev, const std::string& trans, std::uint64_t seed, const std::string& out) {
  const Instance inst = gen_random({n, parse_revenue_dist(rev), parse_transition_kind(trans), seed});
  emit(io::instance_to_json(inst), out);
  std::fprintf(stderr, "generated n=%d %s %s seed=%llu\n", n, rev.c_str(), trans.c_str(),
               static_cast<unsigned long long>(seed));
  return 0;
}

int cmd_solve(const std::string& file, const std::string& method, double time_limit, long node_limit) {
  const Instance inst = io::load_instance(file);
  const auto res = run_method(inst, method, {node_limit, time_limit});
  std::cout << io::result_to_json(res).dump(2) << '\n';
  std::fprintf(stderr, "%s: revenue %.10g, |S| = %d, %.3fs, nodes %ld%s\n", method.c_str(), res.revenue,
               res.assortment.size(), res.stats.wall_seconds, res.stats.nodes,
               res.stats.optimal ? "" : " (limit reached, not proven optimal)");
  return res.stats.optimal ? 0 : kSolver;
}

int cmd_eval(const std::string& file, const std::string& list, const std::string& model) {
  const Instance inst = io::load_instance(file);
  const Assortment s = io::parse_assortment_list(list, inst.size());
  json out{{"model", model}, {"assortment", io::assortment_to_json(s)}};
  if (model == "mcst") {
    const auto pr = mcst_revenue(inst, s);
    const auto ev = mcst_evaluate(inst, s, pr.plan);
    SolveResult as_result{s, pr.plan, pr.revenue, {}};
    out["revenue"] = pr.revenue;
    out["plan"] = io::result_to_json(as_result)["plan"];
    out["purchase_probs"] = ev.purchase_probs;
  } else if (model == "markov") {
    const auto ev = markov_evaluate(inst, s);
    out["revenue"] = ev.revenue;
    out["purchase_probs"] = ev.purchase_probs;
  } else if (model == "choosy") {
    out["revenue"] = choosy_revenue(inst, s);
  } else {
    throw PreconditionError("unknown model '" + model + "'");
  }
  std::cout << out.dump(2) << '\n';
  std::fprintf(stderr, "%s revenue %.10g\n", model.c_str(), out["revenue"].get<double>());
  if (out.contains("purchase_probs")) {
    const auto probs = out["purchase_probs"].get<std::vector<double>>();
    for (std::size_t i = 0; i < probs.size(); ++i) std::fprintf(stderr, "  Pr_%zu = %.10g\n", i, probs[i]);
  }
  return 0;
}

int cmd_reduce(const std::string& graph_file, int k, const std::string& out) {
  const Graph g = io::graph_from_json(io::read_json_file(graph_file));
  const auto red = reduce_independent_set(g, k);
  emit(io::instance_to_json(red.instance), out);
  json info{{"scale", red.scale}, {"threshold", red.threshold}, {"dummy_product", red.dummy + 1}};
  if (out.empty())
    std::cerr << info.dump() << '\n';
  else
    std::cout << info.dump(2) << '\n';
  std::fprintf(stderr, "independent set of size %d exists iff optimal revenue >= %.17g (scale %.17g)\n", k,
               red.threshold, red.scale);
  return 0;
}

int cmd_bench(const std::string& config_file, const std::string& out_dir) {
  auto cfg = experiments::config_from_json(io::read_json_file(config_file));
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  experiments::run_bench(cfg, cfg.output_dir);
  std::fprintf(stderr, "wrote results to %s\n", cfg.output_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MCST assortment optimization toolkit"};
  app.require_subcommand(1);

  int n = 10;
  std::string rev = "uni", trans = "den", out;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--n", n, "Number of products")->required()->check(CLI::PositiveNumber);
  gen->add_option("--rev", rev, "Revenue distribution")->check(CLI::IsMember({"uni", "exp"}));
  gen->add_option("--trans", trans, "Transition structure")->check(CLI::IsMember({"den", "spa", "homog", "tree"}));
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("-o,--output", out, "Output file (default stdout)");

  std::string file, method = "exact";
  double time_limit = 0.0;
  long node_limit = 0;
  auto* solve = app.add_subcommand("solve", "Solve an instance and print the result as JSON");
  solve->add_option("instance", file, "Instance JSON file")->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method, "Solver")
      ->check(CLI::IsMember({"exact", "ro", "homogeneous", "tree", "markov", "choosy"}));
  solve->add_option("--time-limit", time_limit, "Seconds for exact|choosy (0: none)")->check(CLI::NonNegativeNumber);
  solve->add_option("--node-limit", node_limit, "Nodes for exact|choosy (0: none)")->check(CLI::NonNegativeNumber);

  std::string list, model = "mcst";
  auto* eval = app.add_subcommand("eval", "Evaluate an assortment");
  eval->add_option("instance", file, "Instance JSON file")->required()->check(CLI::ExistingFile);
  eval->add_option("--assortment", list, "Comma separated product ids, e.g. 1,3,4")->required();
  eval->add_option("--model", model, "Choice model")->check(CLI::IsMember({"mcst", "markov", "choosy"}));

  std::string graph;
  int k = 1;
  auto* reduce = app.add_subcommand("reduce", "Build the MCST instance of an independent set question");
  reduce->add_option("--graph", graph, "Graph JSON file")->required()->check(CLI::ExistingFile);
  reduce->add_option("--k", k, "Independent set size")->required();
  reduce->add_option("-o,--output", out, "Output file (default stdout)");

  std::string config;
  auto* bench = app.add_subcommand("bench", "Run the experiment tables");
  bench->add_option("--config", config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("-o,--output", out, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return cmd_gen(n, rev, trans, seed, out);
    if (*solve) return cmd_solve(file, method, time_limit, node_limit);
    if (*eval) return cmd_eval(file, list, model);
    if (*reduce) return cmd_reduce(graph, k, out);
    if (*bench) return cmd_bench(config, out);
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolver;
  }
  return kUsage;
}
