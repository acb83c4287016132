#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedcog/decouple.hpp"
#include "fedcog/graph.hpp"
#include "fedcog/matrix.hpp"

namespace fedcog {

/// Which propagation family runs on the decoupled graphs.
///   Sgc:   parameter-free symmetric normalization (r = 1/2)
///   Gpr:   generalized exponent r in [0, 1]
///   Appnp: symmetric normalization with teleport back to the input features
///   Gcn:   per-layer weights + activation (verification only; not trained)
struct PropagationVariant {
  enum class Kind { Gcn, Sgc, Appnp, Gpr };
  Kind kind = Kind::Sgc;
  double alpha = 0.1;            // Appnp restart probability, (0, 1]
  double r = 0.5;                // Gpr exponent
  std::vector<Matrix> weights;   // Gcn, one per layer
  Activation activation = Activation::Relu;  // Gcn

  static PropagationVariant sgc() { return {}; }
  static PropagationVariant gpr(double r) {
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("gpr: r outside [0,1]");
    PropagationVariant v;
    v.kind = Kind::Gpr;
    v.r = r;
    return v;
  }
  static PropagationVariant appnp(double alpha) {
    if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("appnp: alpha outside (0,1]");
    PropagationVariant v;
    v.kind = Kind::Appnp;
    v.alpha = alpha;
    return v;
  }
  static PropagationVariant gcn(std::vector<Matrix> weights, Activation act) {
    PropagationVariant v;
    v.kind = Kind::Gcn;
    v.weights = std::move(weights);
    v.activation = act;
    return v;
  }

  double exponent() const { return kind == Kind::Gpr ? r : 0.5; }
};

/// Intermediate embeddings after the internal half-step, one row per
/// internal-graph node (internal nodes first, then placeholders).
using HalfStepBuffer = Matrix;

/// Cross-party transfer of one placeholder's half-step value.
struct Message {
  int from_party = 0;
  int to_party = 0;
  int node = 0;  // global id, owned by to_party
  int layer = 0;
  std::vector<double> payload;
};

/// Propagation and training cost accounting. Counters only go up.
struct CostMeter {
  long long mul_adds = 0;
  long long floats_sent = 0;
  long long exchange_rounds = 0;
};

/// Source-side coefficient: (1 + d_v)^{-(1-r)} given the source's SLA degree.
inline double beta_coeff(int sla_degree_of_source, const PropagationVariant& v) {
  if (sla_degree_of_source < 1) throw std::invalid_argument("beta_coeff: sla degree < 1");
  return std::pow(static_cast<double>(sla_degree_of_source), -(1.0 - v.exponent()));
}

/// Target-side coefficient: (1 + d_u)^{-r} given the target's SLA degree.
inline double gamma_coeff(int sla_degree_of_target, const PropagationVariant& v) {
  if (sla_degree_of_target < 1) throw std::invalid_argument("gamma_coeff: sla degree < 1");
  return std::pow(static_cast<double>(sla_degree_of_target), -v.exponent());
}

/// First half-step on the internal graph. `h` holds the party's internal-node
/// embeddings; placeholders enter the sums as zero and produce the partial
/// sums that will be routed to their owners. Sources accumulate in ascending
/// local index with the self term merged at its position.
inline HalfStepBuffer internal_propagate(const InternalGraph& ig, const Matrix& h,
                                         const PropagationVariant& v, int layer,
                                         CostMeter* meter = nullptr) {
  if (h.rows != ig.num_internal())
    throw std::invalid_argument("internal_propagate: missing embedding rows for internal nodes");
  const int total = ig.num_total();
  const int dim = h.cols;

  std::vector<double> beta(total);
  for (int i = 0; i < total; ++i) beta[i] = beta_coeff(ig.sla_degree[i], v);

  HalfStepBuffer half(total, dim);
  long long pairs = 0;
  for (int u = 0; u < total; ++u) {
    double* orow = half.row(u);
    bool self_done = false;
    auto accumulate = [&](int src) {
      ++pairs;
      if (src >= ig.num_internal()) return;  // placeholder source, pinned to zero
      const double b = beta[src];
      const double* hrow = h.row(src);
      for (int j = 0; j < dim; ++j) orow[j] += b * hrow[j];
    };
    for (int s : ig.adj[u]) {
      if (!self_done && u < s) {
        accumulate(u);
        self_done = true;
      }
      accumulate(s);
    }
    if (!self_done) accumulate(u);
  }
  if (meter) meter->mul_adds += pairs * dim;

  if (v.kind == PropagationVariant::Kind::Gcn) {
    if (layer < 0 || layer >= static_cast<int>(v.weights.size()))
      throw std::invalid_argument("internal_propagate: no weight matrix for layer");
    const Matrix& w = v.weights[layer];
    if (meter)
      meter->mul_adds += static_cast<long long>(total) * w.rows * w.cols;
    half = matmul(half, w);
  }
  return half;
}

/// Collects every placeholder's half-step value into a message addressed to
/// the placeholder's owner. Inboxes come back sorted by (from_party, node).
/// Routing through a central relay moves the same payloads twice (up and
/// down), which only changes the meter attribution.
inline std::vector<std::vector<Message>> route_messages(
    const std::vector<const InternalGraph*>& graphs, const std::vector<HalfStepBuffer>& half_steps,
    int layer, CostMeter* meter = nullptr, bool via_server = false) {
  const int m = static_cast<int>(graphs.size());
  if (static_cast<int>(half_steps.size()) != m)
    throw std::invalid_argument("route_messages: one half-step buffer per party required");
  std::vector<std::vector<Message>> inbox(m);
  for (int i = 0; i < m; ++i) {
    const InternalGraph& ig = *graphs[i];
    if (half_steps[i].rows != ig.num_total())
      throw std::invalid_argument("route_messages: half-step buffer has wrong row count");
    for (int p = 0; p < ig.num_placeholders(); ++p) {
      const int owner = ig.placeholder_owner[p];
      if (owner < 0 || owner >= m)
        throw std::invalid_argument("route_messages: placeholder owner annotation missing");
      Message msg;
      msg.from_party = i;
      msg.to_party = owner;
      msg.node = ig.placeholder_ids[p];
      msg.layer = layer;
      const double* row = half_steps[i].row(ig.num_internal() + p);
      msg.payload.assign(row, row + half_steps[i].cols);
      if (meter)
        meter->floats_sent += static_cast<long long>(msg.payload.size()) * (via_server ? 2 : 1);
      inbox[owner].push_back(std::move(msg));
    }
  }
  for (auto& box : inbox) {
    std::sort(box.begin(), box.end(), [](const Message& a, const Message& b) {
      return std::tie(a.from_party, a.node) < std::tie(b.from_party, b.node);
    });
  }
  return inbox;
}

/// Test instrumentation (negative controls in the verification path).
struct RunHooks {
  // returns the gamma to use for (party, global node id)
  std::function<double(int party, int node, double gamma)> adjust_gamma;
};

/// Second half-step on the border graph. Every internal node takes its self
/// term first, then the foreign partial sums in ascending party id. The
/// variant's post-step (activation / teleport) applies afterwards.
inline Matrix border_propagate(const InternalGraph& ig, const BorderGraph& bg,
                               const HalfStepBuffer& own_half, const std::vector<Message>& inbox,
                               const PropagationVariant& v, int layer, const Matrix& h0,
                               CostMeter* meter = nullptr, const RunHooks* hooks = nullptr) {
  const int k = ig.num_internal();
  const int dim = own_half.cols;
  if (own_half.rows != ig.num_total())
    throw std::invalid_argument("border_propagate: half-step buffer has wrong row count");

  std::map<std::pair<int, int>, const Message*> by_slot;  // (node, from_party) -> payload
  for (const Message& msg : inbox) {
    if (!by_slot.emplace(std::make_pair(msg.node, msg.from_party), &msg).second)
      throw std::invalid_argument("border_propagate: duplicate payload for slot");
  }

  Matrix out(k, dim);
  long long terms = 0;
  std::size_t consumed = 0;
  for (int i = 0; i < k; ++i) {
    const int node = ig.internal_ids[i];
    double gamma = gamma_coeff(ig.sla_degree[i], v);
    if (hooks && hooks->adjust_gamma) gamma = hooks->adjust_gamma(bg.party, node, gamma);
    double* orow = out.row(i);
    const double* self = own_half.row(i);
    for (int j = 0; j < dim; ++j) orow[j] = gamma * self[j];
    ++terms;
    for (int foreign : bg.slots[i]) {
      auto it = by_slot.find(std::make_pair(node, foreign));
      if (it == by_slot.end())
        throw std::invalid_argument("border_propagate: missing payload for node " +
                                    std::to_string(node) + " from party " +
                                    std::to_string(foreign));
      const Message& msg = *it->second;
      if (static_cast<int>(msg.payload.size()) != dim)
        throw std::invalid_argument("border_propagate: payload dimension mismatch");
      for (int j = 0; j < dim; ++j) orow[j] += gamma * msg.payload[j];
      ++terms;
      ++consumed;
    }
  }
  if (consumed != inbox.size())
    throw std::invalid_argument("border_propagate: payload without a matching slot");
  if (meter) meter->mul_adds += terms * dim;

  switch (v.kind) {
    case PropagationVariant::Kind::Gcn:
      out = apply_activation(std::move(out), v.activation);
      break;
    case PropagationVariant::Kind::Appnp: {
      if (!h0.same_shape(out))
        throw std::invalid_argument("border_propagate: teleport anchor shape mismatch");
      for (std::size_t idx = 0; idx < out.data.size(); ++idx)
        out.data[idx] = (1.0 - v.alpha) * out.data[idx] + v.alpha * h0.data[idx];
      break;
    }
    case PropagationVariant::Kind::Sgc:
    case PropagationVariant::Kind::Gpr:
      break;
  }
  return out;
}

struct PartyGraphs {
  InternalGraph ig;
  BorderGraph bg;
};

struct RunOptions {
  std::vector<int> party_order;  // processing order inside each phase; empty = 0..m-1
  bool parallel = false;         // run per-party phases on worker threads
  bool via_server = false;       // relay exchange through a server (meter only)
  const RunHooks* hooks = nullptr;
  std::function<void(int layer, const std::vector<Matrix>&)> on_layer;
};

struct FedcogResult {
  std::vector<Matrix> embeddings;  // per party, rows = internal nodes
  CostMeter meter;
};

/// Runs `layers` rounds of internal propagation, message exchange, and border
/// propagation across all parties. The exchange is a barrier: every border
/// step sees exactly the payloads produced in the same layer, so results are
/// identical for any party processing order or thread count.
inline FedcogResult fedcog_run(const std::vector<PartyGraphs>& parties,
                               const std::vector<Matrix>& features, int layers,
                               const PropagationVariant& variant, const RunOptions& opt = {}) {
  const int m = static_cast<int>(parties.size());
  if (static_cast<int>(features.size()) != m)
    throw std::invalid_argument("fedcog_run: one feature matrix per party required");
  if (layers < 0) throw std::invalid_argument("fedcog_run: negative layer count");

  std::vector<int> order = opt.party_order;
  if (order.empty()) {
    order.resize(m);
    for (int i = 0; i < m; ++i) order[i] = i;
  }
  if (static_cast<int>(order.size()) != m)
    throw std::invalid_argument("fedcog_run: party_order must cover every party");

  FedcogResult result;
  result.embeddings = features;
  std::vector<const InternalGraph*> graphs(m);
  for (int i = 0; i < m; ++i) graphs[i] = &parties[i].ig;

  auto for_each_party = [&](const std::function<void(int)>& body) {
    if (opt.parallel) {
      std::vector<std::future<void>> futs;
      futs.reserve(m);
      for (int idx = 0; idx < m; ++idx)
        futs.push_back(std::async(std::launch::async, body, order[idx]));
      for (auto& f : futs) f.get();
    } else {
      for (int idx = 0; idx < m; ++idx) body(order[idx]);
    }
  };

  for (int layer = 0; layer < layers; ++layer) {
    std::vector<HalfStepBuffer> half(m);
    std::vector<CostMeter> local(m);
    for_each_party([&](int i) {
      half[i] = internal_propagate(parties[i].ig, result.embeddings[i], variant, layer, &local[i]);
    });
    for (int i = 0; i < m; ++i) result.meter.mul_adds += local[i].mul_adds;

    auto inbox = route_messages(graphs, half, layer, &result.meter, opt.via_server);
    result.meter.exchange_rounds += 1;

    std::vector<Matrix> next(m);
    std::vector<CostMeter> border_local(m);
    for_each_party([&](int i) {
      next[i] = border_propagate(parties[i].ig, parties[i].bg, half[i], inbox[i], variant, layer,
                                 features[i], &border_local[i], opt.hooks);
    });
    for (int i = 0; i < m; ++i) result.meter.mul_adds += border_local[i].mul_adds;
    result.embeddings = std::move(next);
    if (opt.on_layer) opt.on_layer(layer + 1, result.embeddings);
  }
  return result;
}

/// Centralized reference for every variant, reporting the embedding matrix
/// after each layer. fedcog_run on any partition of the graph must reproduce
/// these values row for row.
inline std::vector<Matrix> centralized_variant_trace(const GlobalGraph& g,
                                                     const PropagationVariant& v, int layers) {
  std::vector<Matrix> trace;
  Matrix h = g.features;
  for (int l = 0; l < layers; ++l) {
    switch (v.kind) {
      case PropagationVariant::Kind::Sgc:
        h = propagate_once(g, h, 0.5);
        break;
      case PropagationVariant::Kind::Gpr:
        h = propagate_once(g, h, v.r);
        break;
      case PropagationVariant::Kind::Appnp: {
        Matrix prop = propagate_once(g, h, 0.5);
        for (std::size_t i = 0; i < prop.data.size(); ++i)
          prop.data[i] = (1.0 - v.alpha) * prop.data[i] + v.alpha * g.features.data[i];
        h = std::move(prop);
        break;
      }
      case PropagationVariant::Kind::Gcn:
        h = apply_activation(matmul(propagate_once(g, h, 0.5), v.weights[l]), v.activation);
        break;
    }
    trace.push_back(h);
  }
  return trace;
}

}  // namespace fedcog
