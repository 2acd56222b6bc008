#include "mcst/io.hpp"

#include <fstream>
#include <sstream>

namespace mcst::io {

namespace {

[[noreturn]] void fail(const std::string& what) { throw PreconditionError("json: " + what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<double> number_array(const json& j, const char* what, std::size_t expected) {
  if (!j.is_array() || j.size() != expected) fail(std::string(what) + " must be an array of length " + std::to_string(expected));
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : j) {
    if (!v.is_number()) fail(std::string(what) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

int product_index(const json& v, int n) {
  if (!v.is_number_integer()) fail("product ids must be integers");
  const int p = v.get<int>();
  if (p < 1 || p > n) fail("product id " + std::to_string(p) + " outside 1.." + std::to_string(n));
  return p - 1;
}

}  // namespace

json instance_to_json(const Instance& inst) {
  const int n = inst.size();
  json rows = json::array();
  for (int j = 0; j < n; ++j) {
    const auto r = inst.row(j);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"n", n}, {"revenues", inst.revenues}, {"arrivals", inst.arrivals}, {"transitions", rows}};
}

Instance instance_from_json(const json& j) {
  const auto& jn = field(j, "n");
  if (!jn.is_number_integer() || jn.get<int>() < 1) fail("n must be a positive integer");
  const int n = jn.get<int>();
  Instance inst = Instance::zeros(n);
  inst.revenues = number_array(field(j, "revenues"), "revenues", n);
  inst.arrivals = number_array(field(j, "arrivals"), "arrivals", n);
  const auto& rows = field(j, "transitions");
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) fail("transitions must have n rows");
  for (int r = 0; r < n; ++r) {
    const auto row = number_array(rows[r], "transition row", static_cast<std::size_t>(n) + 1);
    std::copy(row.begin(), row.end(), inst.transitions.begin() + static_cast<std::ptrdiff_t>(r) * (n + 1));
  }
  return inst;
}

json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u + 1, v + 1});
  return {{"vertices", g.vertex_count}, {"edges", edges}};
}

Graph graph_from_json(const json& j) {
  Graph g;
  const auto& jv = field(j, "vertices");
  if (!jv.is_number_integer() || jv.get<int>() < 0) fail("vertices must be a nonnegative integer");
  g.vertex_count = jv.get<int>();
  const auto& edges = field(j, "edges");
  if (!edges.is_array()) fail("edges must be an array");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) fail("each edge must be a pair");
    g.edges.emplace_back(product_index(e[0], g.vertex_count), product_index(e[1], g.vertex_count));
  }
  g.validate();
  return g;
}

json assortment_to_json(const Assortment& s) {
  json out = json::array();
  for (int p : s) out.push_back(p + 1);
  return out;
}

Assortment assortment_from_json(const json& j, int n) {
  if (!j.is_array()) fail("assortment must be an array");
  std::vector<int> members;
  for (const auto& v : j) members.push_back(product_index(v, n));
  return Assortment(std::move(members));
}

json result_to_json(const SolveResult& r) {
  json plan = json::object();
  for (const auto& [j, set] : r.plan.sets) plan[std::to_string(j + 1)] = assortment_to_json(Assortment(set));
  const auto& s = r.stats;
  return {{"assortment", assortment_to_json(r.assortment)},
          {"revenue", r.revenue},
          {"plan", plan},
          {"stats",
           {{"nodes", s.nodes},
            {"lp_iterations", s.lp_iterations},
            {"incumbent_updates", s.incumbent_updates},
            {"cuts", s.cuts},
            {"build_seconds", s.build_seconds},
            {"wall_seconds", s.wall_seconds},
            {"gap", s.gap},
            {"optimal", s.optimal}}}};
}

SolveResult result_from_json(const json& j, int n) {
  SolveResult r;
  r.assortment = assortment_from_json(field(j, "assortment"), n);
  r.revenue = field(j, "revenue").get<double>();
  for (const auto& [key, set] : field(j, "plan").items()) {
    int id = 0;
    try {
      id = std::stoi(key);
    } catch (const std::exception&) {
      fail("plan keys must be product ids");
    }
    r.plan.sets[product_index(json(id), n)] = assortment_from_json(set, n).members();
  }
  if (j.contains("stats")) {
    const auto& s = j.at("stats");
    r.stats.nodes = s.value("nodes", 0L);
    r.stats.lp_iterations = s.value("lp_iterations", 0L);
    r.stats.incumbent_updates = s.value("incumbent_updates", 0L);
    r.stats.cuts = s.value("cuts", 0L);
    r.stats.build_seconds = s.value("build_seconds", 0.0);
    r.stats.wall_seconds = s.value("wall_seconds", 0.0);
    r.stats.gap = s.value("gap", 0.0);
    r.stats.optimal = s.value("optimal", true);
  }
  return r;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Instance load_instance(const std::filesystem::path& path) { return instance_from_json(read_json_file(path)); }

void save_instance(const std::filesystem::path& path, const Instance& inst) { write_json_file(path, instance_to_json(inst)); }

Assortment parse_assortment_list(const std::string& text, int n) {
  std::vector<int> members;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) fail("bad product id '" + item + "'");
    members.push_back(product_index(json(id), n));
  }
  return Assortment(std::move(members));
}

}  // namespace mcst::io
