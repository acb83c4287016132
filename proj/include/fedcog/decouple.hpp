#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedcog/local_graph.hpp"

namespace fedcog {

/// The party's local graph with every inter-edge completed by a placeholder
/// node standing in for the foreign endpoint. Placeholders carry no features;
/// their embeddings are pinned to zero by the propagation step.
///
/// Node indexing: internal nodes first (ascending global id), then
/// placeholders (ascending external global id).
struct InternalGraph {
  int party = 0;
  std::vector<int> internal_ids;      // ascending global ids
  std::vector<int> placeholder_ids;   // ascending global ids of external nodes
  std::vector<int> placeholder_owner; // owner party, aligned with placeholder_ids
  std::vector<std::vector<int>> adj;  // local indices, sorted
  std::vector<int> sla_degree;        // 1 + degree in this graph, per local index

  int num_internal() const { return static_cast<int>(internal_ids.size()); }
  int num_placeholders() const { return static_cast<int>(placeholder_ids.size()); }
  int num_total() const { return num_internal() + num_placeholders(); }

  int internal_index(int global_id) const {
    auto it = std::lower_bound(internal_ids.begin(), internal_ids.end(), global_id);
    if (it == internal_ids.end() || *it != global_id) return -1;
    return static_cast<int>(it - internal_ids.begin());
  }

  int placeholder_index(int external_global_id) const {
    auto it = std::lower_bound(placeholder_ids.begin(), placeholder_ids.end(), external_global_id);
    if (it == placeholder_ids.end() || *it != external_global_id) return -1;
    return num_internal() + static_cast<int>(it - placeholder_ids.begin());
  }
};

/// Bipartite view used by the second propagation half-step: for each internal
/// node, the foreign parties owning at least one of its neighbors. Nodes with
/// no inter-edges have an empty slot list but still receive their self term.
struct BorderGraph {
  int party = 0;
  std::vector<std::vector<int>> slots;  // per internal local index, ascending party ids
};

/// Splits a local graph into its internal graph and border graph. Duplicate
/// inter-edges to the same external node collapse onto one placeholder.
inline std::pair<InternalGraph, BorderGraph> graph_decoupling(const LocalGraph& lg) {
  InternalGraph ig;
  ig.party = lg.party;
  ig.internal_ids = lg.internal_nodes;

  for (const auto& [u, v] : lg.inter_edges) {
    if (lg.internal_index(u) < 0)
      throw std::invalid_argument("graph_decoupling: inter-edge with non-internal endpoint");
  }

  ig.placeholder_ids.reserve(lg.external_nodes.size());
  ig.placeholder_owner.reserve(lg.external_nodes.size());
  for (const auto& [ext, owner] : lg.external_nodes) {
    ig.placeholder_ids.push_back(ext);
    ig.placeholder_owner.push_back(owner);
  }

  ig.adj.assign(ig.num_total(), {});
  for (const auto& [u, v] : lg.intra_edges) {
    const int iu = ig.internal_index(u);
    const int iv = ig.internal_index(v);
    if (iu < 0 || iv < 0)
      throw std::invalid_argument("graph_decoupling: intra-edge with non-internal endpoint");
    ig.adj[iu].push_back(iv);
    ig.adj[iv].push_back(iu);
  }
  for (const auto& [u, ext] : lg.inter_edges) {
    const int iu = ig.internal_index(u);
    const int ie = ig.placeholder_index(ext);
    if (ie < 0) throw std::invalid_argument("graph_decoupling: inter-edge to unknown external node");
    ig.adj[iu].push_back(ie);
    ig.adj[ie].push_back(iu);
  }
  for (auto& nbrs : ig.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  ig.sla_degree.resize(ig.num_total());
  for (int i = 0; i < ig.num_total(); ++i)
    ig.sla_degree[i] = 1 + static_cast<int>(ig.adj[i].size());

  BorderGraph bg;
  bg.party = lg.party;
  bg.slots.assign(ig.num_internal(), {});
  for (const auto& [u, ext] : lg.inter_edges) {
    const int iu = ig.internal_index(u);
    bg.slots[iu].push_back(lg.external_owner(ext));
  }
  for (auto& s : bg.slots) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return {std::move(ig), std::move(bg)};
}

}  // namespace fedcog
