#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mcst/core_model.hpp"
#include "mcst/generators.hpp"

// JSON forms of the domain types. Products are numbered 1..n in every file;
// the conversion to 0-based indices happens here and nowhere else.

namespace mcst::io {

using nlohmann::json;

/// {"n", "revenues", "arrivals", "transitions"}; transitions[j][0] is the
/// no-purchase weight. Throws PreconditionError on malformed input.
json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);

/// {"vertices", "edges": [[u, v], ...]} with 1-based vertices.
json graph_to_json(const Graph& g);
Graph graph_from_json(const json& j);

json assortment_to_json(const Assortment& s);
Assortment assortment_from_json(const json& j, int n);

/// {"assortment", "revenue", "plan": {"j": [...]}, "stats": {...}}.
json result_to_json(const SolveResult& r);
SolveResult result_from_json(const json& j, int n);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const Instance& inst);

/// "1,3,4" -> {0, 2, 3}. Empty string is the empty assortment.
Assortment parse_assortment_list(const std::string& text, int n);

}  // namespace mcst::io
