#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedcog/matrix.hpp"
#include "fedcog/rng.hpp"

namespace fedcog {

/// Undirected global graph with node features and class labels. The single
/// source of truth the federated pipeline is checked against.
///
/// Self-loops are never stored; every degree/propagation computation adds the
/// implicit self-loop (the self-loop-augmented convention used throughout).
struct GlobalGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // canonical: u < v, sorted, unique
  Matrix features;                         // num_nodes x F
  std::vector<int> labels;                 // class id in 0..num_classes-1
  int num_classes = 0;
  std::vector<std::vector<int>> adj;       // sorted neighbor lists

  int degree(int u) const { return static_cast<int>(adj[u].size()); }
  int feature_dim() const { return features.cols; }

  bool has_edge(int u, int v) const {
    const auto& nu = adj[u];
    return std::binary_search(nu.begin(), nu.end(), v);
  }

  // Normalizes the edge list (orders endpoints, sorts, dedups, drops
  // self-loops), validates endpoints and features, builds adjacency.
  static GlobalGraph build(int n, std::vector<std::pair<int, int>> edge_list,
                           Matrix features, std::vector<int> labels, int num_classes) {
    if (n < 0) throw std::invalid_argument("graph: negative node count");
    for (auto& [u, v] : edge_list) {
      if (u < 0 || u >= n || v < 0 || v >= n)
        throw std::invalid_argument("graph: edge endpoint out of range");
      if (u > v) std::swap(u, v);
    }
    std::erase_if(edge_list, [](const auto& e) { return e.first == e.second; });
    std::sort(edge_list.begin(), edge_list.end());
    edge_list.erase(std::unique(edge_list.begin(), edge_list.end()), edge_list.end());

    if (features.rows != n)
      throw std::invalid_argument("graph: feature row count != num_nodes");
    for (double x : features.data)
      if (!std::isfinite(x)) throw std::invalid_argument("graph: non-finite feature entry");
    if (!labels.empty() && static_cast<int>(labels.size()) != n)
      throw std::invalid_argument("graph: label count != num_nodes");
    for (int y : labels)
      if (y < 0 || y >= num_classes) throw std::invalid_argument("graph: label out of range");

    GlobalGraph g;
    g.num_nodes = n;
    g.edges = std::move(edge_list);
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.num_classes = num_classes;
    g.adj.assign(n, {});
    for (const auto& [u, v] : g.edges) {
      g.adj[u].push_back(v);
      g.adj[v].push_back(u);
    }
    for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
    return g;
  }
};

/// Per-node self-loop-augmented degree, entry u = 1 + deg(u).
struct DegreeVector {
  std::vector<int> sla_degree;
};

inline DegreeVector sla_degrees(const GlobalGraph& g) {
  DegreeVector d;
  d.sla_degree.resize(g.num_nodes);
  for (int u = 0; u < g.num_nodes; ++u) d.sla_degree[u] = 1 + g.degree(u);
  return d;
}

/// One step of generalized normalized-adjacency propagation:
///   out[u] = sum over v in N(u) u {u} of (1+d_u)^{-r} (1+d_v)^{-(1-r)} h[v].
/// r = 1/2 is the symmetric normalization; r = 1 is row normalization,
/// r = 0 column normalization. Neighbor sums run in ascending node id with
/// the self term merged at its sorted position.
inline Matrix propagate_once(const GlobalGraph& g, const Matrix& h, double r) {
  if (h.rows != g.num_nodes)
    throw std::invalid_argument("propagate_once: embedding rows != num_nodes");
  const DegreeVector deg = sla_degrees(g);
  std::vector<double> src_coeff(g.num_nodes);  // (1+d_v)^{-(1-r)}
  std::vector<double> dst_coeff(g.num_nodes);  // (1+d_u)^{-r}
  for (int u = 0; u < g.num_nodes; ++u) {
    src_coeff[u] = std::pow(static_cast<double>(deg.sla_degree[u]), -(1.0 - r));
    dst_coeff[u] = std::pow(static_cast<double>(deg.sla_degree[u]), -r);
  }
  Matrix out(g.num_nodes, h.cols);
  for (int u = 0; u < g.num_nodes; ++u) {
    double* orow = out.row(u);
    bool self_done = false;
    auto accumulate = [&](int v) {
      const double c = dst_coeff[u] * src_coeff[v];
      const double* hrow = h.row(v);
      for (int j = 0; j < h.cols; ++j) orow[j] += c * hrow[j];
    };
    for (int v : g.adj[u]) {
      if (!self_done && u < v) {
        accumulate(u);
        self_done = true;
      }
      accumulate(v);
    }
    if (!self_done) accumulate(u);
  }
  return out;
}

/// Parameter-free stacked propagation starting from the node features.
inline Matrix centralized_sgc(const GlobalGraph& g, int layers, double r) {
  if (layers < 0) throw std::invalid_argument("centralized_sgc: negative layer count");
  Matrix h = g.features;
  for (int l = 0; l < layers; ++l) h = propagate_once(g, h, r);
  return h;
}

enum class Activation { Linear, Relu };

inline Matrix apply_activation(Matrix m, Activation act) {
  if (act == Activation::Relu) return relu(std::move(m));
  return m;
}

/// Full graph-convolution forward pass: H <- act(S H W) per layer, with the
/// symmetric normalization (r = 1/2).
inline Matrix centralized_gcn_forward(const GlobalGraph& g, const std::vector<Matrix>& weights,
                                      Activation act) {
  Matrix h = g.features;
  for (const Matrix& w : weights) {
    if (h.cols != w.rows) throw std::invalid_argument("gcn_forward: weight shape mismatch");
    h = apply_activation(matmul(propagate_once(g, h, 0.5), w), act);
  }
  return h;
}

/// density = 2|E| / (|V| (|V|-1))
inline double edge_density(const GlobalGraph& g) {
  if (g.num_nodes < 2) throw std::invalid_argument("edge_density: needs at least 2 nodes");
  return 2.0 * static_cast<double>(g.edges.size()) /
         (static_cast<double>(g.num_nodes) * (static_cast<double>(g.num_nodes) - 1.0));
}

/// Stochastic block model graph with class-correlated Gaussian features.
/// Block b gets label b mod num_classes; each class has a fixed random unit
/// mean vector and features are mean + standard Gaussian noise. Deterministic
/// for a fixed seed.
inline GlobalGraph sbm_generate(const std::vector<int>& block_sizes, double p_in, double p_out,
                                int feature_dim, int num_classes, std::uint64_t seed) {
  if (block_sizes.empty()) throw std::invalid_argument("sbm: no blocks");
  for (int s : block_sizes)
    if (s <= 0) throw std::invalid_argument("sbm: empty block");
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1)
    throw std::invalid_argument("sbm: probability out of [0,1]");
  if (feature_dim <= 0 || num_classes <= 0)
    throw std::invalid_argument("sbm: feature_dim and num_classes must be positive");

  int n = 0;
  for (int s : block_sizes) n += s;
  std::vector<int> block_of(n);
  {
    int node = 0;
    for (int b = 0; b < static_cast<int>(block_sizes.size()); ++b)
      for (int k = 0; k < block_sizes[b]; ++k) block_of[node++] = b;
  }

  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double p = block_of[u] == block_of[v] ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(u, v);
    }
  }

  // class means: random directions, unit norm
  Matrix means(num_classes, feature_dim);
  for (int c = 0; c < num_classes; ++c) {
    double norm2 = 0.0;
    for (int j = 0; j < feature_dim; ++j) {
      means(c, j) = rng.normal();
      norm2 += means(c, j) * means(c, j);
    }
    const double inv = norm2 > 0 ? 1.0 / std::sqrt(norm2) : 0.0;
    for (int j = 0; j < feature_dim; ++j) means(c, j) *= inv;
  }

  Matrix feats(n, feature_dim);
  std::vector<int> labels(n);
  for (int u = 0; u < n; ++u) {
    labels[u] = block_of[u] % num_classes;
    for (int j = 0; j < feature_dim; ++j) feats(u, j) = means(labels[u], j) + rng.normal();
  }
  return GlobalGraph::build(n, std::move(edges), std::move(feats), std::move(labels), num_classes);
}

}  // namespace fedcog
