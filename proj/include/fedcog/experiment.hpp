#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fedcog/dataset.hpp"
#include "fedcog/decouple.hpp"
#include "fedcog/fedprop.hpp"
#include "fedcog/fedtrain.hpp"
#include "fedcog/graph.hpp"
#include "fedcog/learn.hpp"
#include "fedcog/partition.hpp"
#include "fedcog/privacy.hpp"

namespace fedcog {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// configuration

struct DatasetConfig {
  enum class Kind { Sbm, Citation };
  Kind kind = Kind::Sbm;
  // sbm
  std::vector<int> block_sizes;
  double p_in = 0.0, p_out = 0.0;
  int feature_dim = 0, num_classes = 0;
  std::uint64_t seed = 0;
  // citation
  std::string content, cites;
};

struct PartitionerConfig {
  std::string method;  // "kmeans" | "topological"
  int parts = 1;
  std::uint64_t seed = 0;
  int max_iters = 50;
};

struct ModelConfig {
  std::string variant;  // "sgc" | "gcn" | "appnp" | "gpr"
  int layers = 2;
  double alpha = 0.1;  // appnp
  double r = 0.5;      // gpr
  std::uint64_t weight_seed = 7;  // gcn verification weights
  std::string activation = "relu";
};

struct TaskConfig {
  enum class Kind { Node, Link };
  Kind kind = Kind::Node;
  // node
  int train_per_class = 30;
  int test_size = 1000;
  std::string head = "linear";  // "linear" | "hidden"
  // link
  double train_frac = 0.5;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  PartitionerConfig partitioner;
  bool lnnc = false;
  ModelConfig model;
  TaskConfig task;
  TrainConfig train;
  std::string pipeline = "fedcog";  // "fedcog" | "disconnected" | "centralized"
  std::string output;
  json raw;  // echoed into reports
};

namespace cfgdetail {

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key))
    throw std::invalid_argument("config: missing key '" + key + "' in " + where);
  return j.at(key);
}

}  // namespace cfgdetail

inline ExperimentConfig parse_config(const json& j) {
  using cfgdetail::require;
  ExperimentConfig cfg;
  cfg.raw = j;

  const json& ds = require(j, "dataset", "config");
  const std::string kind = require(ds, "kind", "dataset").get<std::string>();
  if (kind == "sbm") {
    cfg.dataset.kind = DatasetConfig::Kind::Sbm;
    cfg.dataset.block_sizes = require(ds, "block_sizes", "dataset").get<std::vector<int>>();
    cfg.dataset.p_in = require(ds, "p_in", "dataset").get<double>();
    cfg.dataset.p_out = require(ds, "p_out", "dataset").get<double>();
    cfg.dataset.feature_dim = require(ds, "feature_dim", "dataset").get<int>();
    cfg.dataset.num_classes = require(ds, "num_classes", "dataset").get<int>();
    cfg.dataset.seed = require(ds, "seed", "dataset").get<std::uint64_t>();
  } else if (kind == "citation") {
    cfg.dataset.kind = DatasetConfig::Kind::Citation;
    cfg.dataset.content = require(ds, "content", "dataset").get<std::string>();
    cfg.dataset.cites = require(ds, "cites", "dataset").get<std::string>();
  } else {
    throw std::invalid_argument("config: dataset.kind must be 'sbm' or 'citation'");
  }

  const json& pt = require(j, "partitioner", "config");
  cfg.partitioner.method = require(pt, "method", "partitioner").get<std::string>();
  if (cfg.partitioner.method != "kmeans" && cfg.partitioner.method != "topological")
    throw std::invalid_argument("config: partitioner.method must be 'kmeans' or 'topological'");
  cfg.partitioner.parts = require(pt, "parts", "partitioner").get<int>();
  if (cfg.partitioner.parts < 1) throw std::invalid_argument("config: partitioner.parts must be >= 1");
  cfg.partitioner.seed = require(pt, "seed", "partitioner").get<std::uint64_t>();
  cfg.partitioner.max_iters = pt.value("max_iters", 50);

  cfg.lnnc = require(j, "lnnc", "config").get<bool>();

  const json& md = require(j, "model", "config");
  cfg.model.variant = require(md, "variant", "model").get<std::string>();
  cfg.model.layers = require(md, "layers", "model").get<int>();
  if (cfg.model.layers < 0) throw std::invalid_argument("config: model.layers must be >= 0");
  if (cfg.model.variant == "appnp") cfg.model.alpha = require(md, "alpha", "model").get<double>();
  else cfg.model.alpha = md.value("alpha", 0.1);
  if (cfg.model.variant == "gpr") cfg.model.r = require(md, "r", "model").get<double>();
  else cfg.model.r = md.value("r", 0.5);
  cfg.model.weight_seed = md.value("weight_seed", std::uint64_t{7});
  cfg.model.activation = md.value("activation", std::string("relu"));
  if (cfg.model.variant != "sgc" && cfg.model.variant != "gcn" && cfg.model.variant != "appnp" &&
      cfg.model.variant != "gpr")
    throw std::invalid_argument("config: model.variant must be sgc|gcn|appnp|gpr");

  const json& tk = require(j, "task", "config");
  const std::string tkind = require(tk, "kind", "task").get<std::string>();
  cfg.task.seed = require(tk, "seed", "task").get<std::uint64_t>();
  if (tkind == "node") {
    cfg.task.kind = TaskConfig::Kind::Node;
    cfg.task.train_per_class = require(tk, "train_per_class", "task").get<int>();
    cfg.task.test_size = require(tk, "test_size", "task").get<int>();
    cfg.task.head = tk.value("head", std::string("linear"));
    if (cfg.task.head != "linear" && cfg.task.head != "hidden")
      throw std::invalid_argument("config: task.head must be 'linear' or 'hidden'");
  } else if (tkind == "link") {
    cfg.task.kind = TaskConfig::Kind::Link;
    cfg.task.train_frac = require(tk, "train_frac", "task").get<double>();
  } else {
    throw std::invalid_argument("config: task.kind must be 'node' or 'link'");
  }

  const json& tr = require(j, "train", "config");
  const std::string algo = require(tr, "algo", "train").get<std::string>();
  if (algo == "fedavg") cfg.train.algo = FedAlgo::FedAvg;
  else if (algo == "fedadagrad") cfg.train.algo = FedAlgo::FedAdagrad;
  else if (algo == "fedadam") cfg.train.algo = FedAlgo::FedAdam;
  else if (algo == "feddyn") cfg.train.algo = FedAlgo::FedDyn;
  else throw std::invalid_argument("config: train.algo must be fedavg|fedadagrad|fedadam|feddyn");
  cfg.train.lr = require(tr, "lr", "train").get<double>();
  cfg.train.rounds = require(tr, "rounds", "train").get<int>();
  cfg.train.participation = require(tr, "participation", "train").get<double>();
  cfg.train.seed = require(tr, "seed", "train").get<std::uint64_t>();
  cfg.train.local_epochs = tr.value("local_epochs", 1);
  cfg.train.tau = tr.value("tau", 1e-3);
  cfg.train.beta1 = tr.value("beta1", 0.9);
  cfg.train.beta2 = tr.value("beta2", 0.99);
  cfg.train.dyn_alpha = tr.value("dyn_alpha", 0.01);
  cfg.train.disable_adaptivity = tr.value("disable_adaptivity", false);
  cfg.train.validate();

  cfg.pipeline = j.value("pipeline", std::string("fedcog"));
  if (cfg.pipeline != "fedcog" && cfg.pipeline != "disconnected" && cfg.pipeline != "centralized")
    throw std::invalid_argument("config: pipeline must be fedcog|disconnected|centralized");
  cfg.output = cfgdetail::require(j, "output", "config").get<std::string>();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return parse_config(j);
}

/// Re-seeds the experimental stages (partitioner, split, training) from one
/// master seed. The dataset seed is untouched so sweeps run on a fixed graph.
inline void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.partitioner.seed = seed;
  cfg.task.seed = seed + 1;
  cfg.train.seed = seed + 2;
  cfg.raw["partitioner"]["seed"] = cfg.partitioner.seed;
  cfg.raw["task"]["seed"] = cfg.task.seed;
  cfg.raw["train"]["seed"] = cfg.train.seed;
}

// ---------------------------------------------------------------------------
// pipeline stages

inline GlobalGraph load_dataset(const DatasetConfig& ds) {
  if (ds.kind == DatasetConfig::Kind::Sbm)
    return sbm_generate(ds.block_sizes, ds.p_in, ds.p_out, ds.feature_dim, ds.num_classes, ds.seed);
  return load_citation_dataset(ds.content, ds.cites);
}

inline Partition make_partition(const GlobalGraph& g, const PartitionerConfig& pc) {
  if (pc.method == "kmeans") return kmeans_partition(g, pc.parts, pc.max_iters, pc.seed);
  return topological_partition(g, pc.parts, pc.seed);
}

inline PropagationVariant make_variant(const ModelConfig& mc, int feature_dim, int layers) {
  if (mc.variant == "sgc") return PropagationVariant::sgc();
  if (mc.variant == "gpr") return PropagationVariant::gpr(mc.r);
  if (mc.variant == "appnp") return PropagationVariant::appnp(mc.alpha);
  // gcn: random square weights, verification only
  Rng rng(mc.weight_seed);
  std::vector<Matrix> weights;
  const double scale = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  for (int l = 0; l < layers; ++l) {
    Matrix w(feature_dim, feature_dim);
    for (double& v : w.data) v = scale * rng.normal();
    weights.push_back(std::move(w));
  }
  return PropagationVariant::gcn(std::move(weights),
                                 mc.activation == "linear" ? Activation::Linear : Activation::Relu);
}

/// Per-party LNNC outcome rolled into reports and the lnnc-audit command.
struct LnncAuditRow {
  int party = 0;
  int exposed_before = 0;
  int edges_added = 0;
  int skipped = 0;
};

/// Everything the propagation stage needs, one build per experiment.
struct Federation {
  Partition partition;
  std::vector<LocalGraph> locals;  // post-LNNC when enabled
  std::vector<PartyGraphs> graphs;
  std::vector<Matrix> features;
  std::vector<LnncAuditRow> lnnc_rows;  // empty when lnnc off
  GlobalGraph effective_global;         // original edges plus all LNNC additions
};

inline Federation build_federation(const GlobalGraph& g, Partition p, bool lnnc, bool drop_inter) {
  Federation fed;
  fed.partition = std::move(p);
  fed.locals = induce_local_graphs(g, fed.partition);

  if (drop_inter) {
    for (LocalGraph& lg : fed.locals) {
      lg.inter_edges.clear();
      lg.external_nodes.clear();
    }
  }

  std::vector<std::pair<int, int>> added;
  if (lnnc) {
    for (LocalGraph& lg : fed.locals) {
      std::set<int> others;
      for (int i = 0; i < fed.partition.num_parties; ++i)
        if (i != lg.party) others.insert(i);
      const auto before = find_exposed_nodes(lg, others);
      auto [augmented, plan] = lnnc_augment(lg);
      LnncAuditRow row;
      row.party = lg.party;
      row.exposed_before = static_cast<int>(before.exposed_nodes.size());
      row.edges_added = static_cast<int>(plan.added_edges.size());
      row.skipped = static_cast<int>(plan.skipped.size());
      fed.lnnc_rows.push_back(row);
      for (const auto& [u, v] : plan.added_edges) added.emplace_back(u, v);
      lg = std::move(augmented);
    }
  }

  std::vector<std::pair<int, int>> all_edges = g.edges;
  all_edges.insert(all_edges.end(), added.begin(), added.end());
  fed.effective_global =
      GlobalGraph::build(g.num_nodes, std::move(all_edges), g.features, g.labels, g.num_classes);

  fed.graphs.reserve(fed.locals.size());
  fed.features.reserve(fed.locals.size());
  for (const LocalGraph& lg : fed.locals) {
    auto [ig, bg] = graph_decoupling(lg);
    fed.graphs.push_back(PartyGraphs{std::move(ig), std::move(bg)});
    fed.features.push_back(lg.features);
  }
  return fed;
}

/// Scatters per-party embedding rows back into global node order.
inline Matrix gather_embeddings(const Federation& fed, const std::vector<Matrix>& per_party,
                                int num_nodes) {
  const int dim = per_party.empty() ? 0 : per_party[0].cols;
  Matrix out(num_nodes, dim);
  for (std::size_t i = 0; i < fed.locals.size(); ++i) {
    const LocalGraph& lg = fed.locals[i];
    for (int k = 0; k < lg.num_internal(); ++k) {
      const int u = lg.internal_nodes[k];
      for (int j = 0; j < dim; ++j) out(u, j) = per_party[i](k, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// experiment driver

struct ExperimentReport {
  json body;

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << body.dump(2) << "\n";
  }

  // one line per round: round <TAB> loss <TAB> metric
  void write_history(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history: " + path);
    for (const auto& rec : body.at("history")) {
      out << rec.at("round").get<int>() << "\t" << rec.at("loss").get<double>();
      if (!rec.at("metric").is_null()) out << "\t" << rec.at("metric").get<double>();
      out << "\n";
    }
  }
};

namespace expdetail {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
  }
}

}  // namespace expdetail

namespace expdetail {

inline json meter_to_json(const CostMeter& meter, long long placeholders, long long train_floats) {
  return json{{"mul_adds", meter.mul_adds},
              {"floats_sent", meter.floats_sent},
              {"exchange_rounds", meter.exchange_rounds},
              {"placeholders", placeholders},
              {"train_floats_sent", train_floats}};
}

inline json history_to_json(const std::vector<RoundRecord>& history) {
  json arr = json::array();
  for (const RoundRecord& r : history) {
    json rec{{"round", r.round}, {"loss", r.loss}, {"floats_up", r.floats_up}};
    if (std::isnan(r.metric)) rec["metric"] = nullptr;
    else rec["metric"] = r.metric;
    arr.push_back(std::move(rec));
  }
  return arr;
}

}  // namespace expdetail

/// Runs the configured pipeline end to end:
/// partition -> induce -> (LNNC) -> decouple -> propagate -> federated train
/// -> evaluate. The disconnected pipeline drops inter-edges before
/// propagating (and skips LNNC, which defends the cross-party exchange the
/// baseline does not perform); the centralized pipeline is the same machinery
/// with a single party holding everything.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.model.variant == "gcn")
    throw std::invalid_argument("run_experiment: gcn is verification-only; train sgc, appnp or gpr");

  const GlobalGraph g = expdetail::stage("dataset", [&] { return load_dataset(cfg.dataset); });

  Partition part;
  bool lnnc = cfg.lnnc;
  bool drop_inter = false;
  if (cfg.pipeline == "centralized") {
    part.owner.assign(g.num_nodes, 0);
    part.num_parties = 1;
    lnnc = false;
  } else {
    part = expdetail::stage("partition", [&] { return make_partition(g, cfg.partitioner); });
    if (cfg.pipeline == "disconnected") {
      drop_inter = true;
      lnnc = false;
    }
  }
  const PartitionStats stats = partition_stats(part, g);

  Federation fed = expdetail::stage(
      "decouple", [&] { return build_federation(g, std::move(part), lnnc, drop_inter); });
  const PropagationVariant variant = make_variant(cfg.model, g.feature_dim(), cfg.model.layers);
  FedcogResult prop = expdetail::stage(
      "propagate", [&] { return fedcog_run(fed.graphs, fed.features, cfg.model.layers, variant); });
  long long placeholders = 0;
  for (const PartyGraphs& pg : fed.graphs) placeholders += pg.ig.num_placeholders();

  const Matrix global_emb = gather_embeddings(fed, prop.embeddings, g.num_nodes);
  const int emb_dim = global_emb.cols;

  TrainResult trained;
  double final_metric = 0.0;
  std::string metric_name;

  if (cfg.task.kind == TaskConfig::Kind::Node) {
    metric_name = "accuracy";
    const NodeSplit split = expdetail::stage("split", [&] {
      return sample_node_split(g, cfg.task.train_per_class, cfg.task.test_size, cfg.task.seed);
    });
    ClassifierParams proto = cfg.task.head == "hidden"
                                 ? ClassifierParams::with_hidden(emb_dim, g.num_classes)
                                 : ClassifierParams::linear(emb_dim, g.num_classes);
    {
      Rng rng(cfg.train.seed ^ 0x9e3779b97f4a7c15ULL);
      proto.randomize(rng);
    }

    std::vector<LocalObjective> objectives;
    for (std::size_t i = 0; i < fed.locals.size(); ++i) {
      auto data = std::make_shared<std::pair<Matrix, std::vector<int>>>(prop.embeddings[i],
                                                                        fed.locals[i].labels);
      auto mask = std::make_shared<std::vector<int>>();
      for (int u : split.train_ids) {
        const int k = fed.locals[i].internal_index(u);
        if (k >= 0) mask->push_back(k);
      }
      LocalObjective obj;
      obj.sample_count = static_cast<long long>(mask->size());
      const bool hidden = proto.hidden;
      obj.loss_grad = [data, mask, hidden](const std::vector<Matrix>& tensors) {
        ClassifierParams p;
        p.hidden = hidden;
        p.tensors = tensors;
        return classify_loss_grad(data->first, p, data->second, *mask);
      };
      objectives.push_back(std::move(obj));
    }

    // evaluation over the test rows only
    Matrix test_rows(static_cast<int>(split.test_ids.size()), emb_dim);
    std::vector<int> test_labels(split.test_ids.size());
    for (std::size_t i = 0; i < split.test_ids.size(); ++i) {
      for (int j = 0; j < emb_dim; ++j) test_rows(static_cast<int>(i), j) = global_emb(split.test_ids[i], j);
      test_labels[i] = g.labels[split.test_ids[i]];
    }
    const bool hidden = proto.hidden;
    auto eval = [&, hidden](const std::vector<Matrix>& tensors) {
      ClassifierParams p;
      p.hidden = hidden;
      p.tensors = tensors;
      const Matrix logits = classifier_logits(test_rows, p);
      long long correct = 0;
      for (int i = 0; i < logits.rows; ++i) {
        int arg = 0;
        for (int j = 1; j < logits.cols; ++j)
          if (logits(i, j) > logits(i, arg)) arg = j;
        if (arg == test_labels[i]) ++correct;
      }
      return static_cast<double>(correct) / static_cast<double>(logits.rows);
    };

    trained = expdetail::stage(
        "train", [&] { return federated_train(objectives, cfg.train, proto.tensors, eval); });
    final_metric = eval(trained.params);
  } else {
    metric_name = "auc";
    const LinkSplit split = expdetail::stage(
        "split", [&] { return sample_link_split(g, cfg.task.train_frac, cfg.task.seed); });
    LinkModelParams proto = LinkModelParams::make(emb_dim);
    {
      Rng rng(cfg.train.seed ^ 0x9e3779b97f4a7c15ULL);
      proto.randomize(rng);
    }

    // training pairs go to the party owning the first endpoint; the scoring
    // party reads the partner row from the gathered embedding matrix
    auto emb_shared = std::make_shared<Matrix>(global_emb);
    std::vector<std::vector<LinkExample>> party_batches(fed.partition.num_parties);
    for (const LinkExample& ex : split.train)
      party_batches[fed.partition.owner[ex.u]].push_back(ex);

    std::vector<LocalObjective> objectives;
    for (int i = 0; i < fed.partition.num_parties; ++i) {
      auto batch = std::make_shared<std::vector<LinkExample>>(std::move(party_batches[i]));
      LocalObjective obj;
      obj.sample_count = static_cast<long long>(batch->size());
      obj.loss_grad = [emb_shared, batch](const std::vector<Matrix>& tensors) {
        LinkModelParams p;
        p.tensors = tensors;
        return link_loss_grad(*emb_shared, p, *batch);
      };
      objectives.push_back(std::move(obj));
    }

    auto eval = [&](const std::vector<Matrix>& tensors) {
      LinkModelParams p;
      p.tensors = tensors;
      std::vector<double> scores;
      std::vector<int> labels;
      scores.reserve(split.test.size());
      for (const LinkExample& ex : split.test) {
        scores.push_back(link_score(global_emb, p, ex.u, ex.v));
        labels.push_back(ex.label);
      }
      return auc(scores, labels);
    };

    trained = expdetail::stage(
        "train", [&] { return federated_train(objectives, cfg.train, proto.tensors, eval); });
    final_metric = eval(trained.params);
  }

  ExperimentReport report;
  report.body = json{
      {"config", cfg.raw},
      {"pipeline", cfg.pipeline},
      {"partition_stats",
       json{{"intra_edge_fraction", stats.intra_edge_fraction},
            {"avg_label_emd", stats.avg_label_emd},
            {"party_sizes", stats.party_sizes}}},
      {"lnnc",
       [&] {
         json rows = json::array();
         for (const LnncAuditRow& r : fed.lnnc_rows)
           rows.push_back(json{{"party", r.party},
                               {"exposed_before", r.exposed_before},
                               {"edges_added", r.edges_added},
                               {"skipped", r.skipped}});
         return json{{"enabled", lnnc}, {"parties", rows}};
       }()},
      {"cost", expdetail::meter_to_json(prop.meter, placeholders, trained.train_floats_sent)},
      {"history", expdetail::history_to_json(trained.history)},
      {"final_metric", final_metric},
      {"metric_name", metric_name}};
  if (!cfg.output.empty()) {
    report.write(cfg.output);
    report.write_history(cfg.output + ".history");
  }
  return report;
}

// ---------------------------------------------------------------------------
// equivalence verification

struct VerifyReport {
  bool pass = false;
  double tolerance = 0.0;
  double worst_rel_err = 0.0;
  int worst_layer = -1;
  int worst_node = -1;
  std::vector<double> per_layer_err;
};

/// Propagates the configured model both ways — federated over the decoupled
/// party graphs and centrally over the (LNNC-augmented) global graph — and
/// compares every node's embedding after every layer.
inline VerifyReport verify_equivalence(const ExperimentConfig& cfg, const RunHooks* hooks = nullptr) {
  const GlobalGraph g = load_dataset(cfg.dataset);
  Partition part = make_partition(g, cfg.partitioner);
  Federation fed = build_federation(g, std::move(part), cfg.lnnc, false);

  const PropagationVariant variant = make_variant(cfg.model, g.feature_dim(), cfg.model.layers);
  const std::vector<Matrix> central = centralized_variant_trace(fed.effective_global, variant,
                                                                cfg.model.layers);

  VerifyReport report;
  report.tolerance = cfg.model.variant == "gcn" && cfg.model.activation == "relu" ? 1e-5 : 1e-8;
  report.per_layer_err.assign(cfg.model.layers, 0.0);

  RunOptions opt;
  opt.hooks = hooks;
  opt.on_layer = [&](int layer, const std::vector<Matrix>& embeddings) {
    const Matrix& ref = central[layer - 1];
    double& layer_err = report.per_layer_err[layer - 1];
    for (std::size_t i = 0; i < fed.locals.size(); ++i) {
      const LocalGraph& lg = fed.locals[i];
      for (int k = 0; k < lg.num_internal(); ++k) {
        const int u = lg.internal_nodes[k];
        for (int j = 0; j < ref.cols; ++j) {
          const double e = rel_err(embeddings[i](k, j), ref(u, j));
          if (e > layer_err) layer_err = e;
          if (e > report.worst_rel_err) {
            report.worst_rel_err = e;
            report.worst_layer = layer;
            report.worst_node = u;
          }
        }
      }
    }
  };
  fedcog_run(fed.graphs, fed.features, cfg.model.layers, variant, opt);
  report.pass = report.worst_rel_err < report.tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// file surfaces

inline void write_partition_tsv(const std::string& path, const Partition& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write partition file: " + path);
  for (std::size_t u = 0; u < p.owner.size(); ++u) out << u << "\t" << p.owner[u] << "\n";
}

inline Partition read_partition_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open partition file: " + path);
  Partition p;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    long long node, party;
    if (!(ss >> node >> party))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed partition line");
    if (node != static_cast<long long>(p.owner.size()))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": node ids must be dense");
    p.owner.push_back(static_cast<int>(party));
    p.num_parties = std::max(p.num_parties, static_cast<int>(party) + 1);
  }
  return p;
}

}  // namespace fedcog
