#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedcog/matrix.hpp"

namespace fedcog {

/// Party i's view of the global graph: its internal nodes (with features and
/// labels), the external border nodes its internal nodes connect to (ids and
/// owner parties only, never features), and the intra-/inter-edges it can see.
struct LocalGraph {
  int party = 0;
  std::vector<int> internal_nodes;                 // ascending global ids
  std::vector<std::pair<int, int>> external_nodes; // (global id, owner party), ascending by id
  std::vector<std::pair<int, int>> intra_edges;    // global ids, first < second
  std::vector<std::pair<int, int>> inter_edges;    // (internal id, external id)
  Matrix features;                                 // |internal_nodes| x F, row i for internal_nodes[i]
  std::vector<int> labels;                         // aligned with internal_nodes

  int num_internal() const { return static_cast<int>(internal_nodes.size()); }

  // position of a global id within internal_nodes, -1 if not internal
  int internal_index(int global_id) const {
    auto it = std::lower_bound(internal_nodes.begin(), internal_nodes.end(), global_id);
    if (it == internal_nodes.end() || *it != global_id) return -1;
    return static_cast<int>(it - internal_nodes.begin());
  }

  bool is_internal(int global_id) const { return internal_index(global_id) >= 0; }

  int external_owner(int global_id) const {
    auto it = std::lower_bound(external_nodes.begin(), external_nodes.end(),
                               std::make_pair(global_id, -1));
    if (it == external_nodes.end() || it->first != global_id)
      throw std::invalid_argument("local graph: unknown external node");
    return it->second;
  }

  bool has_intra_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(intra_edges.begin(), intra_edges.end(), std::make_pair(u, v));
  }
};

}  // namespace fedcog
