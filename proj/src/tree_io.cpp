#include "parsimony_threshold/tree_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "parsimony_threshold/errors.hpp"

namespace parsimony_threshold {

std::string write_tree_json(const WeightedTree& tree) {
  const auto weights = tree.weights();
  std::string out = "{\"weights\": [";
  for (VertexId v = 1; v < weights.size(); ++v) {
    if (v > 1) out += ", ";
    out += tree.contains(v) ? fmt::format("{:.17g}", weights[v]) : std::string("null");
  }
  out += "], \"cutset\": [";
  const auto cut = tree.boundary().vertices();
  for (std::size_t i = 0; i < cut.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(cut[i]);
  }
  out += "]}\n";
  return out;
}

WeightedTree read_tree_json(std::string_view text, int max_depth) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("tree JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("weights") || !doc.contains("cutset") ||
      !doc["weights"].is_array() || !doc["cutset"].is_array()) {
    throw ValidationError("tree JSON needs \"weights\" and \"cutset\" arrays");
  }
  std::vector<VertexId> ids;
  for (const auto& id : doc["cutset"]) {
    if (!id.is_number_unsigned()) throw ValidationError("cutset ids must be non-negative integers");
    ids.push_back(id.get<VertexId>());
  }
  Cutset boundary = Cutset::from_vertices(std::move(ids), max_depth);

  std::vector<double> weights{NAN};
  for (const auto& w : doc["weights"]) {
    if (w.is_null()) {
      weights.push_back(NAN);
    } else if (w.is_number()) {
      weights.push_back(w.get<double>());
    } else {
      throw ValidationError("weights must be numbers or null");
    }
  }
  return WeightedTree(std::move(weights), std::move(boundary));
}

WeightedTree read_tree_file(const std::string& path, int max_depth) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open tree file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_tree_json(buf.str(), max_depth);
}

}  // namespace parsimony_threshold
