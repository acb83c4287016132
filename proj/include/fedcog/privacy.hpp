#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedcog/local_graph.hpp"

namespace fedcog {

/// Nodes of one party whose entire (non-self) neighborhood is owned by the
/// given adversary coalition — the structural precondition for feature
/// recovery from exchanged half-step values.
struct ExposureReport {
  int party = 0;
  std::vector<int> exposed_nodes;  // ascending global ids
  std::vector<int> adversary_set;  // ascending party ids
};

/// Edges added by the local-nearest-neighbor defense, and the nodes it could
/// not protect (single-node parties).
struct LnncPlan {
  std::vector<std::pair<int, int>> added_edges;  // intra-party, (u, u_N)
  std::vector<int> skipped;                      // unprotectable nodes
};

/// A node is exposed when every non-self neighbor is external and owned by an
/// adversary. A node with no neighbors at all satisfies the condition
/// vacuously and is reported as exposed.
inline ExposureReport find_exposed_nodes(const LocalGraph& lg, const std::set<int>& adversaries) {
  if (adversaries.count(lg.party))
    throw std::invalid_argument("find_exposed_nodes: the party itself cannot be an adversary");
  ExposureReport report;
  report.party = lg.party;
  report.adversary_set.assign(adversaries.begin(), adversaries.end());

  std::vector<bool> has_intra(lg.num_internal(), false);
  for (const auto& [u, v] : lg.intra_edges) {
    has_intra[lg.internal_index(u)] = true;
    has_intra[lg.internal_index(v)] = true;
  }
  std::vector<std::vector<int>> inter_of(lg.num_internal());
  for (const auto& [u, ext] : lg.inter_edges) inter_of[lg.internal_index(u)].push_back(ext);

  for (int i = 0; i < lg.num_internal(); ++i) {
    if (has_intra[i]) continue;
    bool all_adversarial = true;
    for (int ext : inter_of[i]) {
      if (!adversaries.count(lg.external_owner(ext))) {
        all_adversarial = false;
        break;
      }
    }
    if (all_adversarial) report.exposed_nodes.push_back(lg.internal_nodes[i]);
  }
  return report;
}

/// Angular distance in [0, 1]: arccos of the normalized dot product over pi.
/// A single zero vector is maximally distant (1.0); two zero vectors coincide
/// (0.0). The dot product is clamped to [-1, 1] before arccos.
inline double angular_distance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("angular_distance: dimension mismatch");
  if (x == y) {
    // exact zero for identical vectors; arccos would amplify rounding here
    for (double v : x)
      if (v != 0.0) return 0.0;
    return 0.0;
  }
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    dot += x[j] * y[j];
    nx += x[j] * x[j];
    ny += y[j] * y[j];
  }
  if (nx == 0.0 && ny == 0.0) return 0.0;
  if (nx == 0.0 || ny == 0.0) return 1.0;
  const double c = std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
  return std::acos(c) / std::numbers::pi;
}

/// Connects every internally-isolated node to its angular-distance nearest
/// local node, so no node's whole neighborhood can be foreign. Nodes already
/// protected by an earlier added edge are left alone; single-node parties are
/// recorded as skipped. The returned graph carries the added intra-edges, so
/// every degree used by later propagation includes them.
inline std::pair<LocalGraph, LnncPlan> lnnc_augment(const LocalGraph& lg) {
  LocalGraph out = lg;
  LnncPlan plan;

  std::vector<bool> has_intra(lg.num_internal(), false);
  for (const auto& [u, v] : lg.intra_edges) {
    has_intra[lg.internal_index(u)] = true;
    has_intra[lg.internal_index(v)] = true;
  }

  auto feature_row = [&](int idx) {
    return std::vector<double>(lg.features.row(idx), lg.features.row(idx) + lg.features.cols);
  };

  for (int i = 0; i < lg.num_internal(); ++i) {
    if (has_intra[i]) continue;
    const int u = lg.internal_nodes[i];
    if (lg.num_internal() < 2) {
      plan.skipped.push_back(u);
      continue;
    }
    const std::vector<double> xu = feature_row(i);
    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    for (int k = 0; k < lg.num_internal(); ++k) {
      if (k == i) continue;
      const double d = angular_distance(xu, feature_row(k));
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    const int un = lg.internal_nodes[best];
    const auto edge = std::minmax(u, un);
    out.intra_edges.emplace_back(edge.first, edge.second);
    plan.added_edges.emplace_back(u, un);
    has_intra[i] = true;
    has_intra[best] = true;
  }
  std::sort(out.intra_edges.begin(), out.intra_edges.end());
  return {std::move(out), std::move(plan)};
}

struct AttackCount {
  long long equations = 0;
  long long unknowns = 0;
};

/// Equation/unknown bookkeeping for the feature-recovery attack through one
/// of the victim's border nodes.
///   depth 1: F equations against |N(u_B)| (F+1) unknowns.
///   depth 2: 2F equations against
///            |N(u_B)| (F+2) + sum_v |N(v) inside victim| (F+1) unknowns.
inline AttackCount attack_count(int victim_border_node_neighbors,
                                const std::vector<int>& inner_internal_neighbor_counts, int layers,
                                int feature_dim) {
  if (layers != 1 && layers != 2)
    throw std::invalid_argument("attack_count: only depths 1 and 2 are counted");
  if (victim_border_node_neighbors < 0 || feature_dim < 0)
    throw std::invalid_argument("attack_count: negative count");
  for (int c : inner_internal_neighbor_counts)
    if (c < 0) throw std::invalid_argument("attack_count: negative count");

  const long long F = feature_dim;
  const long long nb = victim_border_node_neighbors;
  AttackCount out;
  if (layers == 1) {
    out.equations = F;
    out.unknowns = nb * (F + 1);
    return out;
  }
  if (static_cast<int>(inner_internal_neighbor_counts.size()) != victim_border_node_neighbors)
    throw std::invalid_argument("attack_count: one inner neighbor count per border neighbor required");
  out.equations = 2 * F;
  out.unknowns = nb * (F + 2);
  for (int c : inner_internal_neighbor_counts) out.unknowns += static_cast<long long>(c) * (F + 1);
  return out;
}

}  // namespace fedcog
