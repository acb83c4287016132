// Test-only reference implementations. Everything here is built from the
// dense matrix definitions directly (full adjacency + explicit matrix
// products) so it shares no code path with the sparse propagation it checks.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fedcog/fedtrain.hpp"
#include "fedcog/graph.hpp"
#include "fedcog/matrix.hpp"
#include "fedcog/partition.hpp"
#include "fedcog/rng.hpp"

namespace oracle {

using fedcog::GlobalGraph;
using fedcog::Matrix;

// self-loop-augmented adjacency, A + I
inline Matrix dense_sla_adjacency(const GlobalGraph& g) {
  Matrix a(g.num_nodes, g.num_nodes);
  for (const auto& [u, v] : g.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  for (int u = 0; u < g.num_nodes; ++u) a(u, u) = 1.0;
  return a;
}

// diag(deg^-r) * (A + I) * diag(deg^(r-1)), built as explicit products
inline Matrix dense_prop_matrix(const GlobalGraph& g, double r) {
  const Matrix a = dense_sla_adjacency(g);
  std::vector<double> deg(g.num_nodes, 0.0);
  for (int u = 0; u < g.num_nodes; ++u)
    for (int v = 0; v < g.num_nodes; ++v) deg[u] += a(u, v);
  Matrix left(g.num_nodes, g.num_nodes);
  Matrix right(g.num_nodes, g.num_nodes);
  for (int u = 0; u < g.num_nodes; ++u) {
    left(u, u) = std::pow(deg[u], -r);
    right(u, u) = std::pow(deg[u], r - 1.0);
  }
  return fedcog::matmul(fedcog::matmul(left, a), right);
}

inline Matrix dense_propagate(const GlobalGraph& g, const Matrix& h, double r) {
  return fedcog::matmul(dense_prop_matrix(g, r), h);
}

inline Matrix dense_sgc(const GlobalGraph& g, int layers, double r) {
  Matrix h = g.features;
  for (int l = 0; l < layers; ++l) h = dense_propagate(g, h, r);
  return h;
}

inline Matrix dense_gcn(const GlobalGraph& g, const std::vector<Matrix>& weights, bool use_relu) {
  Matrix h = g.features;
  for (const Matrix& w : weights) {
    h = fedcog::matmul(dense_propagate(g, h, 0.5), w);
    if (use_relu)
      for (double& x : h.data) x = x > 0.0 ? x : 0.0;
  }
  return h;
}

inline Matrix dense_appnp(const GlobalGraph& g, int layers, double alpha) {
  Matrix h = g.features;
  for (int l = 0; l < layers; ++l) {
    Matrix p = dense_propagate(g, h, 0.5);
    for (std::size_t i = 0; i < p.data.size(); ++i)
      p.data[i] = (1.0 - alpha) * p.data[i] + alpha * g.features.data[i];
    h = std::move(p);
  }
  return h;
}

// all-pairs AUC with half credit for ties
inline double brute_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// central finite differences of a scalar function of parameter tensors
inline std::vector<Matrix> finite_diff(
    const std::function<double(const std::vector<Matrix>&)>& loss, std::vector<Matrix> params,
    double eps = 1e-5) {
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix grad(params[t].rows, params[t].cols);
    for (std::size_t i = 0; i < params[t].data.size(); ++i) {
      const double saved = params[t].data[i];
      params[t].data[i] = saved + eps;
      const double up = loss(params);
      params[t].data[i] = saved - eps;
      const double down = loss(params);
      params[t].data[i] = saved;
      grad.data[i] = (up - down) / (2.0 * eps);
    }
    grads.push_back(std::move(grad));
  }
  return grads;
}

// Erdos-Renyi graph with Gaussian features and random labels
inline GlobalGraph random_graph(fedcog::Rng& rng, int n, double p, int feature_dim,
                                int num_classes) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  Matrix feats(n, feature_dim);
  for (double& x : feats.data) x = rng.normal();
  std::vector<int> labels(n);
  for (int& y : labels) y = rng.uniform_int(0, num_classes - 1);
  return GlobalGraph::build(n, std::move(edges), std::move(feats), std::move(labels), num_classes);
}

// uniform owner assignment with empty parties repaired deterministically
inline fedcog::Partition random_partition(fedcog::Rng& rng, int n, int m) {
  fedcog::Partition p;
  p.num_parties = m;
  p.owner.resize(n);
  for (int u = 0; u < n; ++u) p.owner[u] = rng.uniform_int(0, m - 1);
  std::vector<int> counts(m, 0);
  for (int o : p.owner) ++counts[o];
  for (int k = 0; k < m; ++k) {
    if (counts[k] > 0) continue;
    for (int u = 0; u < n; ++u) {
      if (counts[p.owner[u]] > 1) {
        --counts[p.owner[u]];
        p.owner[u] = k;
        ++counts[k];
        break;
      }
    }
  }
  p.validate(n);
  return p;
}

}  // namespace oracle
