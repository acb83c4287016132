#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedcog/graph.hpp"
#include "fedcog/local_graph.hpp"
#include "fedcog/rng.hpp"

namespace fedcog {

/// Assignment of every node to exactly one party. Every party owns at least
/// one node.
struct Partition {
  std::vector<int> owner;  // node id -> party id
  int num_parties = 0;

  void validate(int num_nodes) const {
    if (static_cast<int>(owner.size()) != num_nodes)
      throw std::invalid_argument("partition: owner size != num_nodes");
    if (num_parties <= 0) throw std::invalid_argument("partition: no parties");
    std::vector<int> counts(num_parties, 0);
    for (int p : owner) {
      if (p < 0 || p >= num_parties) throw std::invalid_argument("partition: owner out of range");
      ++counts[p];
    }
    for (int c : counts)
      if (c == 0) throw std::invalid_argument("partition: empty party");
  }

  std::vector<int> party_sizes() const {
    std::vector<int> sizes(num_parties, 0);
    for (int p : owner) ++sizes[p];
    return sizes;
  }
};

struct PartitionStats {
  double intra_edge_fraction = 0.0;  // edges with both endpoints in one party / |E|
  double avg_label_emd = 0.0;        // in [0, 2]
  std::vector<int> party_sizes;
};

namespace detail {

inline double sq_dist(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

}  // namespace detail

/// Lloyd's algorithm on node features with k-means++ seeding. Empty clusters
/// are repaired by stealing the point farthest from its assigned centroid
/// (only from clusters that keep at least one member); ties break by node id.
inline Partition kmeans_partition(const GlobalGraph& g, int m, int max_iters, std::uint64_t seed) {
  const int n = g.num_nodes;
  const int dim = g.feature_dim();
  if (m <= 0 || m > n) throw std::invalid_argument("kmeans_partition: need 0 < m <= num_nodes");

  Rng rng(seed);
  Matrix centroids(m, dim);
  // k-means++ seeding
  {
    const int first = rng.uniform_int(0, n - 1);
    for (int j = 0; j < dim; ++j) centroids(0, j) = g.features(first, j);
    std::vector<double> d2(n);
    for (int c = 1; c < m; ++c) {
      double total = 0.0;
      for (int u = 0; u < n; ++u) {
        double best = std::numeric_limits<double>::max();
        for (int k = 0; k < c; ++k)
          best = std::min(best, detail::sq_dist(g.features.row(u), centroids.row(k), dim));
        d2[u] = best;
        total += best;
      }
      int pick;
      if (total <= 0.0) {
        pick = rng.uniform_int(0, n - 1);
      } else {
        double target = rng.uniform() * total;
        pick = n - 1;
        for (int u = 0; u < n; ++u) {
          target -= d2[u];
          if (target <= 0.0) {
            pick = u;
            break;
          }
        }
      }
      for (int j = 0; j < dim; ++j) centroids(c, j) = g.features(pick, j);
    }
  }

  std::vector<int> assign(n, 0);
  const int iters = std::max(1, max_iters);
  for (int iter = 0; iter < iters; ++iter) {
    bool changed = false;
    for (int u = 0; u < n; ++u) {
      int best_k = 0;
      double best_d = std::numeric_limits<double>::max();
      for (int k = 0; k < m; ++k) {
        const double d = detail::sq_dist(g.features.row(u), centroids.row(k), dim);
        if (d < best_d) {
          best_d = d;
          best_k = k;
        }
      }
      if (assign[u] != best_k) {
        assign[u] = best_k;
        changed = true;
      }
    }

    std::vector<int> counts(m, 0);
    for (int a : assign) ++counts[a];
    for (int k = 0; k < m; ++k) {
      if (counts[k] > 0) continue;
      // steal the point farthest from its centroid, from clusters with >= 2 members
      int steal = -1;
      double worst = -1.0;
      for (int u = 0; u < n; ++u) {
        if (counts[assign[u]] < 2) continue;
        const double d = detail::sq_dist(g.features.row(u), centroids.row(assign[u]), dim);
        if (d > worst) {
          worst = d;
          steal = u;
        }
      }
      if (steal < 0) throw std::runtime_error("kmeans_partition: cannot repair empty cluster");
      --counts[assign[steal]];
      assign[steal] = k;
      ++counts[k];
      changed = true;
    }

    centroids.fill(0.0);
    for (int u = 0; u < n; ++u)
      for (int j = 0; j < dim; ++j) centroids(assign[u], j) += g.features(u, j);
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < dim; ++j) centroids(k, j) /= counts[k];

    if (!changed) break;
  }

  Partition p;
  p.owner = std::move(assign);
  p.num_parties = m;
  p.validate(n);
  return p;
}

/// Greedy topological partitioner: m seeds spread by farthest-point BFS
/// distance, then region growing one frontier node at a time. The smallest
/// region takes the unassigned frontier node with the most neighbors already
/// inside it; ties break by node id. Regions stay within one node of each
/// other in size, so parties are balanced.
inline Partition topological_partition(const GlobalGraph& g, int m, std::uint64_t seed) {
  const int n = g.num_nodes;
  if (m <= 0 || m > n) throw std::invalid_argument("topological_partition: need 0 < m <= num_nodes");

  auto bfs_dist = [&](int src, std::vector<int>& dist) {
    dist.assign(n, std::numeric_limits<int>::max());
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : g.adj[u]) {
        if (dist[v] == std::numeric_limits<int>::max()) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
  };

  Rng rng(seed);
  // double sweep: the farthest node from a random start is a good extremal
  // first seed (unreachable nodes count as infinitely far, so disconnected
  // components get seeded before anything else)
  std::vector<int> min_dist, tmp;
  bfs_dist(rng.uniform_int(0, n - 1), tmp);
  int first = 0;
  long long first_d = -1;
  for (int u = 0; u < n; ++u) {
    const long long d = tmp[u] == std::numeric_limits<int>::max()
                            ? std::numeric_limits<long long>::max()
                            : tmp[u];
    if (d > first_d) {
      first_d = d;
      first = u;
    }
  }
  std::vector<int> seeds{first};
  bfs_dist(first, min_dist);
  while (static_cast<int>(seeds.size()) < m) {
    int best = -1;
    long long best_d = -1;
    for (int u = 0; u < n; ++u) {
      if (std::find(seeds.begin(), seeds.end(), u) != seeds.end()) continue;
      const long long d = min_dist[u] == std::numeric_limits<int>::max()
                              ? std::numeric_limits<long long>::max()
                              : min_dist[u];
      if (d > best_d) {
        best_d = d;
        best = u;
      }
    }
    seeds.push_back(best);
    bfs_dist(best, tmp);
    for (int u = 0; u < n; ++u) min_dist[u] = std::min(min_dist[u], tmp[u]);
  }

  std::vector<int> owner(n, -1);
  std::vector<int> sizes(m, 0);
  for (int k = 0; k < m; ++k) {
    owner[seeds[k]] = k;
    sizes[k] = 1;
  }

  int assigned = m;
  while (assigned < n) {
    // smallest region grows next; ties by region id
    int region = 0;
    for (int k = 1; k < m; ++k)
      if (sizes[k] < sizes[region]) region = k;

    // frontier node with the most neighbors already inside the region
    int best = -1;
    int best_links = -1;
    for (int u = 0; u < n; ++u) {
      if (owner[u] >= 0) continue;
      int links = 0;
      for (int v : g.adj[u])
        if (owner[v] == region) ++links;
      if (links > 0 && links > best_links) {
        best_links = links;
        best = u;
      }
    }
    if (best < 0) {
      // frontier exhausted (disconnected remainder): take the smallest
      // unassigned node id
      for (int u = 0; u < n; ++u) {
        if (owner[u] < 0) {
          best = u;
          break;
        }
      }
    }
    owner[best] = region;
    ++sizes[region];
    ++assigned;
  }

  Partition p;
  p.owner = std::move(owner);
  p.num_parties = m;
  p.validate(n);
  return p;
}

/// Builds each party's view: owned nodes, every edge touching an owned node,
/// border nodes with owner annotations, and the owned nodes' features/labels.
inline std::vector<LocalGraph> induce_local_graphs(const GlobalGraph& g, const Partition& p) {
  p.validate(g.num_nodes);
  const int m = p.num_parties;
  std::vector<LocalGraph> parties(m);
  for (int i = 0; i < m; ++i) parties[i].party = i;

  for (int u = 0; u < g.num_nodes; ++u) parties[p.owner[u]].internal_nodes.push_back(u);

  for (const auto& [u, v] : g.edges) {
    const int pu = p.owner[u];
    const int pv = p.owner[v];
    if (pu == pv) {
      parties[pu].intra_edges.emplace_back(u, v);
    } else {
      parties[pu].inter_edges.emplace_back(u, v);
      parties[pv].inter_edges.emplace_back(v, u);
    }
  }

  for (LocalGraph& lg : parties) {
    std::sort(lg.intra_edges.begin(), lg.intra_edges.end());
    std::sort(lg.inter_edges.begin(), lg.inter_edges.end());
    std::map<int, int> ext;  // id -> owner
    for (const auto& [in, out] : lg.inter_edges) ext[out] = p.owner[out];
    lg.external_nodes.assign(ext.begin(), ext.end());

    lg.features = Matrix(lg.num_internal(), g.feature_dim());
    lg.labels.resize(lg.num_internal());
    for (int i = 0; i < lg.num_internal(); ++i) {
      const int u = lg.internal_nodes[i];
      for (int j = 0; j < g.feature_dim(); ++j) lg.features(i, j) = g.features(u, j);
      lg.labels[i] = g.labels.empty() ? 0 : g.labels[u];
    }
  }
  return parties;
}

/// Mean over parties of the L1 distance between the party's label histogram
/// and the global one. Lives in [0, 2].
inline double label_emd(const Partition& p, const GlobalGraph& g) {
  p.validate(g.num_nodes);
  const int c = g.num_classes;
  if (c <= 0 || g.labels.empty()) throw std::invalid_argument("label_emd: graph has no labels");
  std::vector<double> global_hist(c, 0.0);
  for (int y : g.labels) global_hist[y] += 1.0;
  for (double& x : global_hist) x /= static_cast<double>(g.num_nodes);

  const std::vector<int> sizes = p.party_sizes();
  std::vector<std::vector<double>> hist(p.num_parties, std::vector<double>(c, 0.0));
  for (int u = 0; u < g.num_nodes; ++u) hist[p.owner[u]][g.labels[u]] += 1.0;

  double total = 0.0;
  for (int i = 0; i < p.num_parties; ++i) {
    double emd = 0.0;
    for (int k = 0; k < c; ++k) emd += std::fabs(hist[i][k] / sizes[i] - global_hist[k]);
    total += emd;
  }
  return total / p.num_parties;
}

inline PartitionStats partition_stats(const Partition& p, const GlobalGraph& g) {
  p.validate(g.num_nodes);
  PartitionStats s;
  s.party_sizes = p.party_sizes();
  long long intra = 0;
  for (const auto& [u, v] : g.edges)
    if (p.owner[u] == p.owner[v]) ++intra;
  s.intra_edge_fraction =
      g.edges.empty() ? 1.0 : static_cast<double>(intra) / static_cast<double>(g.edges.size());
  s.avg_label_emd = g.labels.empty() ? 0.0 : label_emd(p, g);
  return s;
}

}  // namespace fedcog
