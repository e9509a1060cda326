#pragma once

#include <string>
#include <string_view>

#include "parsimony_threshold/tree_model.hpp"

namespace parsimony_threshold {

// {"weights": [w_1, ..., w_m], "cutset": [ids]}
//
// Array position i holds the weight of vertex i+1 in heap order; the root has
// no entry. Slots of vertices below the cutset are null. Numbers are written
// with 17 significant digits, so a write/read cycle is bit-exact.
std::string write_tree_json(const WeightedTree& tree);

WeightedTree read_tree_json(std::string_view text, int max_depth = kDefaultMaxDepth);
WeightedTree read_tree_file(const std::string& path, int max_depth = kDefaultMaxDepth);

}  // namespace parsimony_threshold
