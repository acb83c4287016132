#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedcog/learn.hpp"
#include "fedcog/matrix.hpp"
#include "fedcog/rng.hpp"

namespace fedcog {

enum class FedAlgo { FedAvg, FedAdagrad, FedAdam, FedDyn };

struct TrainConfig {
  FedAlgo algo = FedAlgo::FedAvg;
  int rounds = 1;
  int local_epochs = 1;
  double participation = 1.0;  // (0, 1]
  std::uint64_t seed = 0;
  double lr = 0.1;
  double tau = 1e-3;    // adaptive denominators (FedAdagrad / FedAdam)
  double beta1 = 0.9;   // FedAdam
  double beta2 = 0.99;  // FedAdam
  double dyn_alpha = 0.01;  // FedDyn regularizer strength
  // Strips the moment accumulation and adaptive scaling from FedAdagrad and
  // FedAdam, reducing both to the plain averaged step.
  bool disable_adaptivity = false;

  void validate() const {
    if (rounds < 0) throw std::invalid_argument("train: negative round count");
    if (local_epochs < 1) throw std::invalid_argument("train: local_epochs must be >= 1");
    if (participation <= 0.0 || participation > 1.0)
      throw std::invalid_argument("train: participation outside (0,1]");
    if (lr <= 0.0) throw std::invalid_argument("train: learning rate must be positive");
    if (algo == FedAlgo::FedDyn && dyn_alpha <= 0.0)
      throw std::invalid_argument("train: FedDyn alpha must be positive");
  }
};

/// One party's training view: a loss/gradient callback over the shared
/// parameter tensors plus its local sample count.
struct LocalObjective {
  std::function<LossGrad(const std::vector<Matrix>&)> loss_grad;
  long long sample_count = 0;
};

struct Contribution {
  std::vector<Matrix> grad;  // effective gradient, (theta_start - theta_end) / lr
  long long samples = 0;
  double loss = 0.0;  // local loss at the round-start parameters
  bool empty = true;
};

namespace detail {

inline std::vector<Matrix> zeros_like(const std::vector<Matrix>& t) {
  std::vector<Matrix> z;
  z.reserve(t.size());
  for (const Matrix& m : t) z.emplace_back(m.rows, m.cols);
  return z;
}

inline void axpy(std::vector<Matrix>& dst, const std::vector<Matrix>& src, double s) {
  for (std::size_t i = 0; i < dst.size(); ++i) add_scaled(dst[i], src[i], s);
}

inline long long param_count(const std::vector<Matrix>& t) {
  long long n = 0;
  for (const Matrix& m : t) n += static_cast<long long>(m.data.size());
  return n;
}

}  // namespace detail

/// Gradient of the dynamic-regularizer penalty
///   pen(theta) = -<lambda, theta> + (alpha/2) ||theta - anchor||^2
/// added to a party's local loss under FedDyn.
inline LossGrad feddyn_penalty_grad(const std::vector<Matrix>& params,
                                    const std::vector<Matrix>& anchor,
                                    const std::vector<Matrix>& lambda, double alpha) {
  LossGrad out;
  out.grads = detail::zeros_like(params);
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].data.size(); ++i) {
      const double theta = params[t].data[i];
      const double diff = theta - anchor[t].data[i];
      out.loss += -lambda[t].data[i] * theta + 0.5 * alpha * diff * diff;
      out.grads[t].data[i] = -lambda[t].data[i] + alpha * diff;
    }
  }
  return out;
}

/// Runs the party's local epochs from the shared parameters and reports the
/// effective gradient. With one epoch (and no dynamic penalty) this is
/// exactly the local analytic gradient. Parties with no samples contribute
/// nothing.
inline Contribution local_round(const LocalObjective& obj, const std::vector<Matrix>& params,
                                int local_epochs, double lr,
                                const std::vector<Matrix>* dyn_lambda = nullptr,
                                double dyn_alpha = 0.0) {
  Contribution c;
  if (obj.sample_count <= 0) return c;
  c.samples = obj.sample_count;
  c.empty = false;

  auto full_grad = [&](const std::vector<Matrix>& theta) {
    LossGrad lg = obj.loss_grad(theta);
    if (dyn_lambda) {
      LossGrad pen = feddyn_penalty_grad(theta, params, *dyn_lambda, dyn_alpha);
      lg.loss += pen.loss;
      detail::axpy(lg.grads, pen.grads, 1.0);
    }
    return lg;
  };

  if (local_epochs == 1) {
    LossGrad lg = full_grad(params);
    c.loss = lg.loss;
    c.grad = std::move(lg.grads);
    return c;
  }

  std::vector<Matrix> theta = params;
  for (int e = 0; e < local_epochs; ++e) {
    LossGrad lg = full_grad(theta);
    if (e == 0) c.loss = lg.loss;
    detail::axpy(theta, lg.grads, -lr);
  }
  c.grad = params;
  for (std::size_t t = 0; t < c.grad.size(); ++t)
    for (std::size_t i = 0; i < c.grad[t].data.size(); ++i)
      c.grad[t].data[i] = (c.grad[t].data[i] - theta[t].data[i]) / lr;
  return c;
}

/// Sample-count-weighted average of the non-empty contributions, accumulated
/// in the order given (ascending party id).
inline std::vector<Matrix> aggregate(const std::vector<Contribution>& contributions) {
  long long total = 0;
  const std::vector<Matrix>* shape = nullptr;
  for (const Contribution& c : contributions) {
    if (c.empty) continue;
    total += c.samples;
    shape = &c.grad;
  }
  if (!shape) throw std::invalid_argument("aggregate: all contributions empty");
  std::vector<Matrix> agg = detail::zeros_like(*shape);
  for (const Contribution& c : contributions) {
    if (c.empty) continue;
    const double w = static_cast<double>(c.samples) / static_cast<double>(total);
    detail::axpy(agg, c.grad, w);
  }
  return agg;
}

/// Server-side optimizer state. Moment tensors mirror the parameter shapes.
struct ServerState {
  FedAlgo algo = FedAlgo::FedAvg;
  std::vector<Matrix> params;
  std::vector<Matrix> m;  // FedAdam first moment
  std::vector<Matrix> v;  // FedAdagrad / FedAdam second moment
  std::vector<Matrix> h;  // FedDyn running correction
  int round = 0;

  static ServerState make(FedAlgo algo, std::vector<Matrix> params) {
    ServerState st;
    st.algo = algo;
    st.m = detail::zeros_like(params);
    st.v = detail::zeros_like(params);
    st.h = detail::zeros_like(params);
    st.params = std::move(params);
    return st;
  }
};

/// Applies one server update with the aggregated effective gradient.
///   FedAvg:     theta -= lr * g
///   FedAdagrad: v += g^2;                theta -= lr * g / (sqrt(v) + tau)
///   FedAdam:    m, v exponential moving; theta -= lr * m / (sqrt(v) + tau)
///   FedDyn:     h -= alpha * g;          theta -= lr * g - (lr/alpha) * h
inline void server_step(ServerState& st, const std::vector<Matrix>& agg, const TrainConfig& cfg) {
  if (agg.size() != st.params.size())
    throw std::invalid_argument("server_step: aggregate shape mismatch");
  for (std::size_t t = 0; t < agg.size(); ++t)
    if (!agg[t].same_shape(st.params[t]))
      throw std::invalid_argument("server_step: aggregate shape mismatch");

  switch (st.algo) {
    case FedAlgo::FedAvg:
      detail::axpy(st.params, agg, -cfg.lr);
      break;
    case FedAlgo::FedAdagrad:
      if (cfg.disable_adaptivity) {
        detail::axpy(st.params, agg, -cfg.lr);
        break;
      }
      for (std::size_t t = 0; t < agg.size(); ++t)
        for (std::size_t i = 0; i < agg[t].data.size(); ++i) {
          const double g = agg[t].data[i];
          st.v[t].data[i] += g * g;
          st.params[t].data[i] -= cfg.lr * g / (std::sqrt(st.v[t].data[i]) + cfg.tau);
        }
      break;
    case FedAlgo::FedAdam:
      if (cfg.disable_adaptivity) {
        detail::axpy(st.params, agg, -cfg.lr);
        break;
      }
      for (std::size_t t = 0; t < agg.size(); ++t)
        for (std::size_t i = 0; i < agg[t].data.size(); ++i) {
          const double g = agg[t].data[i];
          st.m[t].data[i] = cfg.beta1 * st.m[t].data[i] + (1.0 - cfg.beta1) * g;
          st.v[t].data[i] = cfg.beta2 * st.v[t].data[i] + (1.0 - cfg.beta2) * g * g;
          st.params[t].data[i] -= cfg.lr * st.m[t].data[i] / (std::sqrt(st.v[t].data[i]) + cfg.tau);
        }
      break;
    case FedAlgo::FedDyn:
      for (std::size_t t = 0; t < agg.size(); ++t)
        for (std::size_t i = 0; i < agg[t].data.size(); ++i) {
          const double g = agg[t].data[i];
          st.h[t].data[i] -= cfg.dyn_alpha * g;
          st.params[t].data[i] -= cfg.lr * g - (cfg.lr / cfg.dyn_alpha) * st.h[t].data[i];
        }
      break;
  }
  ++st.round;
}

struct RoundRecord {
  int round = 0;
  double loss = 0.0;    // participation-weighted local loss at round start
  double metric = std::numeric_limits<double>::quiet_NaN();
  long long floats_up = 0;  // parameters uploaded this round
};

struct TrainResult {
  std::vector<Matrix> params;
  std::vector<RoundRecord> history;
  long long train_floats_sent = 0;
};

/// The round loop: sample participants, collect local contributions,
/// aggregate, apply the server update. Deterministic for a fixed seed. The
/// optional eval callback is scored after each round's update.
inline TrainResult federated_train(const std::vector<LocalObjective>& parties,
                                   const TrainConfig& cfg, std::vector<Matrix> init_params,
                                   const std::function<double(const std::vector<Matrix>&)>& eval = {}) {
  cfg.validate();
  const int m = static_cast<int>(parties.size());
  bool any = false;
  for (const LocalObjective& p : parties) any = any || p.sample_count > 0;
  if (!any) throw std::invalid_argument("federated_train: no trainable party");

  ServerState st = ServerState::make(cfg.algo, std::move(init_params));
  std::vector<std::vector<Matrix>> lambda;  // FedDyn per-party dual state
  if (cfg.algo == FedAlgo::FedDyn) lambda.assign(m, detail::zeros_like(st.params));

  Rng rng(cfg.seed);
  const long long pcount = detail::param_count(st.params);
  TrainResult result;

  for (int round = 0; round < cfg.rounds; ++round) {
    std::vector<int> active;
    if (cfg.participation >= 1.0) {
      active.resize(m);
      for (int i = 0; i < m; ++i) active[i] = i;
    } else {
      const int c = std::max(1, static_cast<int>(std::lround(cfg.participation * m)));
      active = rng.sample_without_replacement(m, c);
      std::sort(active.begin(), active.end());
    }

    std::vector<Contribution> contribs;
    contribs.reserve(active.size());
    double loss_num = 0.0;
    long long loss_den = 0;
    int uploaders = 0;
    for (int i : active) {
      const std::vector<Matrix>* lam = cfg.algo == FedAlgo::FedDyn ? &lambda[i] : nullptr;
      Contribution c = local_round(parties[i], st.params, cfg.local_epochs, cfg.lr, lam,
                                   cfg.dyn_alpha);
      if (!c.empty) {
        loss_num += c.loss * static_cast<double>(c.samples);
        loss_den += c.samples;
        ++uploaders;
        if (cfg.algo == FedAlgo::FedDyn) {
          // lambda_i <- lambda_i - alpha (theta_end - theta_start)
          detail::axpy(lambda[i], c.grad, cfg.dyn_alpha * cfg.lr);
        }
      }
      contribs.push_back(std::move(c));
    }

    const std::vector<Matrix> agg = aggregate(contribs);
    server_step(st, agg, cfg);

    RoundRecord rec;
    rec.round = round + 1;
    rec.loss = loss_den > 0 ? loss_num / static_cast<double>(loss_den) : 0.0;
    rec.floats_up = pcount * uploaders;
    result.train_floats_sent += rec.floats_up;
    if (eval) rec.metric = eval(st.params);
    result.history.push_back(rec);
  }
  result.params = std::move(st.params);
  return result;
}

}  // namespace fedcog
