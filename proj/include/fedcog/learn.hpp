#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedcog/graph.hpp"
#include "fedcog/matrix.hpp"
#include "fedcog/rng.hpp"

namespace fedcog {

/// Softmax classifier head over propagated embeddings. Either a single linear
/// layer or one hidden ReLU layer of width 64. Parameter tensors alternate
/// weight, bias (bias stored as a 1 x width matrix).
struct ClassifierParams {
  std::vector<Matrix> tensors;
  bool hidden = false;

  static ClassifierParams linear(int in_dim, int num_classes) {
    ClassifierParams p;
    p.tensors = {Matrix(in_dim, num_classes), Matrix(1, num_classes)};
    return p;
  }
  static ClassifierParams with_hidden(int in_dim, int num_classes, int width = 64) {
    ClassifierParams p;
    p.hidden = true;
    p.tensors = {Matrix(in_dim, width), Matrix(1, width), Matrix(width, num_classes),
                 Matrix(1, num_classes)};
    return p;
  }

  void randomize(Rng& rng, double scale = 0.01) {
    for (Matrix& t : tensors)
      for (double& v : t.data) v = scale * rng.normal();
  }

  int num_classes() const { return tensors.back().cols; }
};

/// Dot-product link scorer: both endpoint embeddings go through one shared
/// projection (output width 100) and the score is the sigmoid of their inner
/// product.
struct LinkModelParams {
  static constexpr int kProjectionDim = 100;
  std::vector<Matrix> tensors;  // single projection matrix, in_dim x 100

  static LinkModelParams make(int in_dim) {
    LinkModelParams p;
    p.tensors = {Matrix(in_dim, kProjectionDim)};
    return p;
  }
  void randomize(Rng& rng, double scale = 0.01) {
    for (double& v : tensors[0].data) v = scale * rng.normal();
  }
  const Matrix& projection() const { return tensors[0]; }
};

struct LossGrad {
  double loss = 0.0;
  std::vector<Matrix> grads;  // same shapes as the parameter tensors
};

namespace detail {

inline void softmax_row(double* row, int n) {
  double mx = row[0];
  for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    row[j] = std::exp(row[j] - mx);
    sum += row[j];
  }
  for (int j = 0; j < n; ++j) row[j] /= sum;
}

}  // namespace detail

/// Mean softmax cross-entropy over the masked nodes, with exact analytic
/// gradients for every parameter tensor.
inline LossGrad classify_loss_grad(const Matrix& h, const ClassifierParams& p,
                                   const std::vector<int>& labels, const std::vector<int>& mask) {
  if (mask.empty()) throw std::invalid_argument("classify_loss_grad: empty mask");
  const int b = static_cast<int>(mask.size());
  const int c = p.num_classes();

  // gather masked rows
  Matrix x(b, h.cols);
  for (int i = 0; i < b; ++i) {
    const int u = mask[i];
    if (u < 0 || u >= h.rows) throw std::invalid_argument("classify_loss_grad: mask out of range");
    for (int j = 0; j < h.cols; ++j) x(i, j) = h(u, j);
  }

  Matrix a1, z1;  // hidden pre/post activation
  Matrix logits;
  if (p.hidden) {
    const Matrix& w1 = p.tensors[0];
    const Matrix& b1 = p.tensors[1];
    z1 = matmul(x, w1);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < z1.cols; ++j) z1(i, j) += b1(0, j);
    a1 = relu(z1);
    logits = matmul(a1, p.tensors[2]);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < c; ++j) logits(i, j) += p.tensors[3](0, j);
  } else {
    logits = matmul(x, p.tensors[0]);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < c; ++j) logits(i, j) += p.tensors[1](0, j);
  }

  Matrix probs = logits;
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    detail::softmax_row(probs.row(i), c);
    const int y = labels[mask[i]];
    if (y < 0 || y >= c) throw std::invalid_argument("classify_loss_grad: label out of range");
    loss -= std::log(std::max(probs(i, y), 1e-300));
  }
  loss /= b;

  // dlogits = (softmax - onehot) / b
  Matrix dlogits = probs;
  for (int i = 0; i < b; ++i) {
    dlogits(i, labels[mask[i]]) -= 1.0;
    for (int j = 0; j < c; ++j) dlogits(i, j) /= b;
  }

  LossGrad out;
  out.loss = loss;
  out.grads.reserve(p.tensors.size());
  auto bias_grad = [&](const Matrix& d) {
    Matrix g(1, d.cols);
    for (int i = 0; i < d.rows; ++i)
      for (int j = 0; j < d.cols; ++j) g(0, j) += d(i, j);
    return g;
  };
  auto weight_grad = [&](const Matrix& input, const Matrix& d) {
    Matrix g(input.cols, d.cols);
    for (int i = 0; i < input.rows; ++i)
      for (int k = 0; k < input.cols; ++k) {
        const double xv = input(i, k);
        if (xv == 0.0) continue;
        for (int j = 0; j < d.cols; ++j) g(k, j) += xv * d(i, j);
      }
    return g;
  };

  if (p.hidden) {
    Matrix dw2 = weight_grad(a1, dlogits);
    Matrix db2 = bias_grad(dlogits);
    // back through the second layer and the ReLU
    Matrix da1(b, a1.cols);
    const Matrix& w2 = p.tensors[2];
    for (int i = 0; i < b; ++i)
      for (int k = 0; k < w2.rows; ++k) {
        double s = 0.0;
        for (int j = 0; j < c; ++j) s += dlogits(i, j) * w2(k, j);
        da1(i, k) = z1(i, k) > 0.0 ? s : 0.0;
      }
    out.grads.push_back(weight_grad(x, da1));
    out.grads.push_back(bias_grad(da1));
    out.grads.push_back(std::move(dw2));
    out.grads.push_back(std::move(db2));
  } else {
    out.grads.push_back(weight_grad(x, dlogits));
    out.grads.push_back(bias_grad(dlogits));
  }
  return out;
}

inline Matrix classifier_logits(const Matrix& h, const ClassifierParams& p) {
  Matrix cur = h;
  if (p.hidden) {
    cur = matmul(cur, p.tensors[0]);
    for (int i = 0; i < cur.rows; ++i)
      for (int j = 0; j < cur.cols; ++j) cur(i, j) += p.tensors[1](0, j);
    cur = relu(std::move(cur));
    cur = matmul(cur, p.tensors[2]);
    for (int i = 0; i < cur.rows; ++i)
      for (int j = 0; j < cur.cols; ++j) cur(i, j) += p.tensors[3](0, j);
  } else {
    cur = matmul(cur, p.tensors[0]);
    for (int i = 0; i < cur.rows; ++i)
      for (int j = 0; j < cur.cols; ++j) cur(i, j) += p.tensors[1](0, j);
  }
  return cur;
}

struct LinkExample {
  int u = 0;
  int v = 0;
  int label = 0;  // 1 = edge, 0 = non-edge
};

inline double link_score(const Matrix& h, const LinkModelParams& p, int u, int v) {
  const Matrix& proj = p.projection();
  double dot = 0.0;
  for (int j = 0; j < proj.cols; ++j) {
    double pu = 0.0, pv = 0.0;
    for (int k = 0; k < proj.rows; ++k) {
      pu += h(u, k) * proj(k, j);
      pv += h(v, k) * proj(k, j);
    }
    dot += pu * pv;
  }
  return 1.0 / (1.0 + std::exp(-dot));
}

/// Mean binary cross-entropy of sigmoid inner-product scores, with the exact
/// analytic gradient of the shared projection.
inline LossGrad link_loss_grad(const Matrix& h, const LinkModelParams& p,
                               const std::vector<LinkExample>& batch) {
  if (batch.empty()) throw std::invalid_argument("link_loss_grad: empty batch");
  const Matrix& proj = p.projection();
  const int b = static_cast<int>(batch.size());

  LossGrad out;
  out.grads = {Matrix(proj.rows, proj.cols)};
  Matrix& dproj = out.grads[0];

  std::vector<double> pu(proj.cols), pv(proj.cols);
  for (const LinkExample& ex : batch) {
    if (ex.u < 0 || ex.u >= h.rows || ex.v < 0 || ex.v >= h.rows)
      throw std::invalid_argument("link_loss_grad: node index out of range");
    for (int j = 0; j < proj.cols; ++j) {
      double su = 0.0, sv = 0.0;
      for (int k = 0; k < proj.rows; ++k) {
        su += h(ex.u, k) * proj(k, j);
        sv += h(ex.v, k) * proj(k, j);
      }
      pu[j] = su;
      pv[j] = sv;
    }
    double z = 0.0;
    for (int j = 0; j < proj.cols; ++j) z += pu[j] * pv[j];
    const double s = 1.0 / (1.0 + std::exp(-z));
    const double y = ex.label;
    // cross-entropy evaluated in the logit domain, stable for saturated scores
    out.loss += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::fabs(z)));
    const double dz = (s - y) / b;
    // dz/dproj = h_u^T (h_v P) + h_v^T (h_u P)
    for (int k = 0; k < proj.rows; ++k) {
      const double hu = h(ex.u, k);
      const double hv = h(ex.v, k);
      for (int j = 0; j < proj.cols; ++j) dproj(k, j) += dz * (hu * pv[j] + hv * pu[j]);
    }
  }
  out.loss /= b;
  return out;
}

/// Train/test node ids for classification: a fixed number of training nodes
/// per class, then a uniform test sample from the rest.
struct NodeSplit {
  std::vector<int> train_ids;
  std::vector<int> test_ids;
};

inline NodeSplit sample_node_split(const GlobalGraph& g, int per_class, int test_size,
                                   std::uint64_t seed) {
  if (g.labels.empty()) throw std::invalid_argument("sample_node_split: graph has no labels");
  Rng rng(seed);
  std::vector<std::vector<int>> by_class(g.num_classes);
  for (int u = 0; u < g.num_nodes; ++u) by_class[g.labels[u]].push_back(u);

  NodeSplit split;
  std::vector<bool> taken(g.num_nodes, false);
  for (int c = 0; c < g.num_classes; ++c) {
    if (static_cast<int>(by_class[c].size()) < per_class)
      throw std::invalid_argument("sample_node_split: class " + std::to_string(c) +
                                  " has fewer than per_class nodes");
    rng.shuffle(by_class[c]);
    for (int i = 0; i < per_class; ++i) {
      split.train_ids.push_back(by_class[c][i]);
      taken[by_class[c][i]] = true;
    }
  }
  std::sort(split.train_ids.begin(), split.train_ids.end());

  std::vector<int> rest;
  for (int u = 0; u < g.num_nodes; ++u)
    if (!taken[u]) rest.push_back(u);
  if (static_cast<int>(rest.size()) < test_size)
    throw std::invalid_argument("sample_node_split: not enough nodes left for the test set");
  rng.shuffle(rest);
  split.test_ids.assign(rest.begin(), rest.begin() + test_size);
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

/// Positive edges split between train and test, plus the same number of
/// uniformly sampled non-edges per split. All four sets are pairwise disjoint.
struct LinkSplit {
  std::vector<LinkExample> train;  // positives then negatives
  std::vector<LinkExample> test;
};

inline LinkSplit sample_link_split(const GlobalGraph& g, double train_frac, std::uint64_t seed) {
  const long long e = static_cast<long long>(g.edges.size());
  if (e < 4) throw std::invalid_argument("sample_link_split: need at least 4 edges");
  if (train_frac <= 0.0 || train_frac >= 1.0)
    throw std::invalid_argument("sample_link_split: train_frac outside (0,1)");
  const long long n = g.num_nodes;
  const long long non_edges = n * (n - 1) / 2 - e;
  if (non_edges < e)
    throw std::invalid_argument("sample_link_split: graph too dense to sample negatives");

  Rng rng(seed);
  std::vector<int> order(g.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  const int n_train = static_cast<int>(static_cast<double>(e) * train_frac);

  LinkSplit split;
  for (long long i = 0; i < e; ++i) {
    const auto& [u, v] = g.edges[order[i]];
    LinkExample ex{u, v, 1};
    (i < n_train ? split.train : split.test).push_back(ex);
  }

  // negatives: uniform over non-edges, no duplicates, rejection first and an
  // exhaustive fallback if the graph is too dense for rejection to finish
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> negs;
  long long attempts = 0;
  const long long max_attempts = 1000 * e + 1000;
  while (static_cast<long long>(negs.size()) < e && attempts < max_attempts) {
    ++attempts;
    int u = rng.uniform_int(0, g.num_nodes - 1);
    int v = rng.uniform_int(0, g.num_nodes - 1);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (g.has_edge(u, v)) continue;
    if (!seen.emplace(u, v).second) continue;
    negs.emplace_back(u, v);
  }
  if (static_cast<long long>(negs.size()) < e) {
    for (int u = 0; u < g.num_nodes && static_cast<long long>(negs.size()) < e; ++u)
      for (int v = u + 1; v < g.num_nodes && static_cast<long long>(negs.size()) < e; ++v)
        if (!g.has_edge(u, v) && seen.emplace(u, v).second) negs.emplace_back(u, v);
  }
  for (long long i = 0; i < e; ++i) {
    LinkExample ex{negs[i].first, negs[i].second, 0};
    (i < n_train ? split.train : split.test).push_back(ex);
  }
  return split;
}

/// Fraction of correct predictions over the mask.
inline double accuracy(const std::vector<int>& pred_labels, const std::vector<int>& true_labels,
                       const std::vector<int>& mask) {
  if (mask.empty()) throw std::invalid_argument("accuracy: empty mask");
  long long correct = 0;
  for (int u : mask)
    if (pred_labels[u] == true_labels[u]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

/// Rank-based AUC (Mann-Whitney); tied scores count one half.
inline double auc(const std::vector<double>& scores, const std::vector<int>& binary_labels) {
  if (scores.size() != binary_labels.size())
    throw std::invalid_argument("auc: score/label size mismatch");
  const int n = static_cast<int>(scores.size());
  long long n_pos = 0, n_neg = 0;
  for (int y : binary_labels) (y ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc: needs both classes");

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a] < scores[b]; });

  // average ranks over ties, 1-based
  std::vector<double> rank(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * ((i + 1) + j);
    for (int k = i; k < j; ++k) rank[idx[k]] = avg;
    i = j;
  }
  double rank_sum_pos = 0.0;
  for (int k = 0; k < n; ++k)
    if (binary_labels[k]) rank_sum_pos += rank[k];
  const double u_stat = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u_stat / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace fedcog
