#include <catch2/catch_amalgamated.hpp>

#include "fedcog/experiment.hpp"
#include "fedcog/fedprop.hpp"
#include "oracles.hpp"

using namespace fedcog;

namespace {

GlobalGraph path4_with_features() {
  Matrix feats(4, 1);
  feats(0, 0) = 1.0;
  feats(1, 0) = 2.0;
  feats(2, 0) = 3.0;
  feats(3, 0) = 4.0;
  return GlobalGraph::build(4, {{0, 1}, {1, 2}, {2, 3}}, feats, {0, 0, 0, 0}, 1);
}

Federation federate(const GlobalGraph& g, std::vector<int> owner, int m) {
  Partition p;
  p.owner = std::move(owner);
  p.num_parties = m;
  return build_federation(g, std::move(p), false, false);
}

}  // namespace

TEST_CASE("beta and gamma coefficients") {
  auto sgc = PropagationVariant::sgc();
  SECTION("beta at r=0.5 is the inverse square root of the SLA degree") {
    REQUIRE(beta_coeff(4, sgc) == Catch::Approx(0.5));  // d_v = 3
    REQUIRE(beta_coeff(1, sgc) == 1.0);                 // isolated source
    REQUIRE(beta_coeff(17, PropagationVariant::gpr(1.0)) == 1.0);  // row-normalization limit
  }
  SECTION("gamma mirrors beta on the target side") {
    REQUIRE(gamma_coeff(4, sgc) == Catch::Approx(0.5));
    REQUIRE(gamma_coeff(9, PropagationVariant::gpr(0.0)) == 1.0);
  }
  SECTION("beta * gamma recovers the symmetric normalization") {
    for (int du : {0, 1, 2, 5}) {
      for (int dv : {0, 3, 7}) {
        const double product = beta_coeff(1 + dv, sgc) * gamma_coeff(1 + du, sgc);
        REQUIRE(product == Catch::Approx(1.0 / std::sqrt((1.0 + du) * (1.0 + dv))));
      }
    }
  }
  SECTION("beta * gamma matches the generalized exponent split") {
    auto gpr = PropagationVariant::gpr(0.3);
    const double product = beta_coeff(4, gpr) * gamma_coeff(3, gpr);
    REQUIRE(product == Catch::Approx(std::pow(3.0, -0.3) * std::pow(4.0, -0.7)));
  }
}

TEST_CASE("internal propagation on the split path") {
  // party 1 of the a-b-c-d path owning {c, d}; global sla degrees c:3, d:2
  auto g = path4_with_features();
  auto fed = federate(g, {0, 0, 1, 1}, 2);
  const InternalGraph& ig = fed.graphs[1].ig;

  auto half = internal_propagate(ig, fed.features[1], PropagationVariant::sgc(), 0);
  // h_c = 3/sqrt(3) + 4/sqrt(2), placeholder b@1 = 3/sqrt(3)
  REQUIRE(half(0, 0) == Catch::Approx(3.0 / std::sqrt(3.0) + 4.0 / std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(half(0, 0) == Catch::Approx(4.5605).margin(5e-5));
  const int pb = ig.placeholder_index(1);
  REQUIRE(half(pb, 0) == Catch::Approx(1.7321).margin(5e-5));
}

TEST_CASE("internal propagation edge cases") {
  SECTION("isolated internal node keeps its embedding") {
    LocalGraph lg;
    lg.party = 0;
    lg.internal_nodes = {0};
    lg.features = Matrix(1, 2);
    lg.features(0, 0) = 3.0;
    lg.features(0, 1) = -1.0;
    lg.labels = {0};
    auto [ig, bg] = graph_decoupling(lg);
    auto half = internal_propagate(ig, lg.features, PropagationVariant::sgc(), 0);
    REQUIRE(half(0, 0) == 3.0);
    REQUIRE(half(0, 1) == -1.0);
  }
  SECTION("all-zero embeddings stay zero") {
    Rng rng(7);
    auto g = oracle::random_graph(rng, 10, 0.3, 2, 2);
    auto fed = federate(g, oracle::random_partition(rng, 10, 2).owner, 2);
    auto half = internal_propagate(fed.graphs[0].ig, Matrix(fed.graphs[0].ig.num_internal(), 2),
                                   PropagationVariant::sgc(), 0);
    for (double x : half.data) REQUIRE(x == 0.0);
  }
  SECTION("missing embedding rows rejected") {
    auto g = path4_with_features();
    auto fed = federate(g, {0, 0, 1, 1}, 2);
    REQUIRE_THROWS_AS(
        internal_propagate(fed.graphs[0].ig, Matrix(1, 1), PropagationVariant::sgc(), 0),
        std::invalid_argument);
  }
}

TEST_CASE("message routing") {
  auto g = path4_with_features();
  auto fed = federate(g, {0, 0, 1, 1}, 2);
  std::vector<const InternalGraph*> graphs{&fed.graphs[0].ig, &fed.graphs[1].ig};

  std::vector<HalfStepBuffer> halves;
  for (int i = 0; i < 2; ++i)
    halves.push_back(internal_propagate(fed.graphs[i].ig, fed.features[i],
                                        PropagationVariant::sgc(), 0));

  CostMeter meter;
  auto inbox = route_messages(graphs, halves, 0, &meter);
  // party 0 owns node 1 (placeholder at party 1); party 1 owns node 2
  REQUIRE(inbox[0].size() == 1);
  REQUIRE(inbox[0][0].node == 1);
  REQUIRE(inbox[0][0].from_party == 1);
  REQUIRE(inbox[1].size() == 1);
  REQUIRE(inbox[1][0].node == 2);
  REQUIRE(inbox[1][0].payload.size() == 1);
  REQUIRE(meter.floats_sent == 2);  // two placeholders, one float each

  SECTION("no placeholders, no messages") {
    Rng rng(3);
    auto g1 = oracle::random_graph(rng, 8, 0.3, 2, 2);
    auto fed1 = federate(g1, std::vector<int>(8, 0), 1);
    std::vector<const InternalGraph*> gs{&fed1.graphs[0].ig};
    std::vector<HalfStepBuffer> hs{internal_propagate(fed1.graphs[0].ig, fed1.features[0],
                                                      PropagationVariant::sgc(), 0)};
    auto box = route_messages(gs, hs, 0);
    REQUIRE(box[0].empty());
  }
}

TEST_CASE("border propagation reproduces the centralized row") {
  auto g = path4_with_features();
  auto fed = federate(g, {0, 0, 1, 1}, 2);
  std::vector<const InternalGraph*> graphs{&fed.graphs[0].ig, &fed.graphs[1].ig};
  auto variant = PropagationVariant::sgc();

  std::vector<HalfStepBuffer> halves;
  for (int i = 0; i < 2; ++i)
    halves.push_back(internal_propagate(fed.graphs[i].ig, fed.features[i], variant, 0));
  auto inbox = route_messages(graphs, halves, 0);

  auto out1 = border_propagate(fed.graphs[1].ig, fed.graphs[1].bg, halves[1], inbox[1], variant, 0,
                               fed.features[1]);
  REQUIRE(out1(0, 0) == Catch::Approx(3.2997).margin(5e-5));
  auto central = propagate_once(g, g.features, 0.5);
  REQUIRE(out1(0, 0) == Catch::Approx(central(2, 0)).epsilon(1e-12));
  REQUIRE(out1(1, 0) == Catch::Approx(central(3, 0)).epsilon(1e-12));

  SECTION("self term only for nodes without inter-edges") {
    auto out0 = border_propagate(fed.graphs[0].ig, fed.graphs[0].bg, halves[0], inbox[0], variant,
                                 0, fed.features[0]);
    // node 0 has no inter-edges: gamma * own half-step
    const double gamma = gamma_coeff(2, variant);
    REQUIRE(out0(0, 0) == Catch::Approx(gamma * halves[0](0, 0)).epsilon(1e-14));
  }
  SECTION("missing payload rejected") {
    REQUIRE_THROWS_AS(border_propagate(fed.graphs[1].ig, fed.graphs[1].bg, halves[1], {}, variant,
                                       0, fed.features[1]),
                      std::invalid_argument);
  }
  SECTION("duplicate payload rejected") {
    auto doubled = inbox[1];
    doubled.push_back(doubled[0]);
    REQUIRE_THROWS_AS(border_propagate(fed.graphs[1].ig, fed.graphs[1].bg, halves[1], doubled,
                                       variant, 0, fed.features[1]),
                      std::invalid_argument);
  }
  SECTION("full teleport returns the anchor") {
    auto appnp = PropagationVariant::appnp(1.0);
    std::vector<HalfStepBuffer> ah;
    for (int i = 0; i < 2; ++i)
      ah.push_back(internal_propagate(fed.graphs[i].ig, fed.features[i], appnp, 0));
    auto abox = route_messages(graphs, ah, 0);
    auto out = border_propagate(fed.graphs[1].ig, fed.graphs[1].bg, ah[1], abox[1], appnp, 0,
                                fed.features[1]);
    REQUIRE(out(0, 0) == fed.features[1](0, 0));
    REQUIRE(out(1, 0) == fed.features[1](1, 0));
  }
}

TEST_CASE("fedcog_run basics") {
  Rng rng(50);
  SECTION("zero layers returns the inputs") {
    auto g = oracle::random_graph(rng, 10, 0.3, 3, 2);
    auto fed = federate(g, oracle::random_partition(rng, 10, 3).owner, 3);
    auto result = fedcog_run(fed.graphs, fed.features, 0, PropagationVariant::sgc());
    for (int i = 0; i < 3; ++i) REQUIRE(result.embeddings[i] == fed.features[i]);
  }
  SECTION("single party equals centralized propagation") {
    auto g = oracle::random_graph(rng, 25, 0.2, 4, 2);
    auto fed = federate(g, std::vector<int>(25, 0), 1);
    auto result = fedcog_run(fed.graphs, fed.features, 2, PropagationVariant::sgc());
    auto central = centralized_sgc(g, 2, 0.5);
    REQUIRE(max_rel_err(result.embeddings[0], central) < 1e-15);
  }
  SECTION("three-party block-model graph matches the oracle") {
    auto g = sbm_generate({20, 20, 20}, 0.3, 0.08, 5, 3, 99);
    auto fed = federate(g, oracle::random_partition(rng, 60, 3).owner, 3);
    auto result = fedcog_run(fed.graphs, fed.features, 2, PropagationVariant::sgc());
    auto central = oracle::dense_sgc(g, 2, 0.5);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const LocalGraph& lg = fed.locals[i];
      for (int k = 0; k < lg.num_internal(); ++k)
        for (int j = 0; j < 5; ++j)
          worst = std::max(worst, rel_err(result.embeddings[i](k, j),
                                          central(lg.internal_nodes[k], j)));
    }
    REQUIRE(worst < 1e-8);
  }
}

TEST_CASE("equivalence against the centralized oracle across variants") {
  Rng rng(60);
  const std::vector<PropagationVariant> variants = {
      PropagationVariant::sgc(),      PropagationVariant::gpr(0.0), PropagationVariant::gpr(0.3),
      PropagationVariant::gpr(1.0),   PropagationVariant::appnp(0.1),
      PropagationVariant::appnp(0.5),
  };
  for (int trial = 0; trial < 18; ++trial) {
    const int n = rng.uniform_int(12, 90);
    const int m = std::vector<int>{1, 2, 3, 5}[trial % 4];
    const int layers = 1 + trial % 3;
    auto g = oracle::random_graph(rng, n, 0.12, 3, 2);
    auto fed = federate(g, oracle::random_partition(rng, n, m).owner, m);
    const auto& variant = variants[trial % variants.size()];

    auto result = fedcog_run(fed.graphs, fed.features, layers, variant);
    auto trace = centralized_variant_trace(g, variant, layers);
    const Matrix& central = trace.back();
    for (int i = 0; i < m; ++i) {
      const LocalGraph& lg = fed.locals[i];
      for (int k = 0; k < lg.num_internal(); ++k)
        for (int j = 0; j < 3; ++j)
          REQUIRE(rel_err(result.embeddings[i](k, j), central(lg.internal_nodes[k], j)) < 1e-8);
    }
  }
  SECTION("gcn with random weights and relu") {
    for (int trial = 0; trial < 4; ++trial) {
      const int n = rng.uniform_int(10, 60);
      const int m = 1 + trial;
      auto g = oracle::random_graph(rng, n, 0.15, 3, 2);
      std::vector<Matrix> weights;
      for (int l = 0; l < 2; ++l) {
        Matrix w(3, 3);
        for (double& x : w.data) x = rng.normal() * 0.6;
        weights.push_back(std::move(w));
      }
      auto variant = PropagationVariant::gcn(weights, Activation::Relu);
      auto fed = federate(g, oracle::random_partition(rng, n, m).owner, m);
      auto result = fedcog_run(fed.graphs, fed.features, 2, variant);
      auto dense = oracle::dense_gcn(g, weights, true);
      for (int i = 0; i < m; ++i) {
        const LocalGraph& lg = fed.locals[i];
        for (int k = 0; k < lg.num_internal(); ++k)
          for (int j = 0; j < 3; ++j)
            REQUIRE(rel_err(result.embeddings[i](k, j), dense(lg.internal_nodes[k], j)) < 1e-5);
      }
    }
  }
}

TEST_CASE("propagation is linear for the weightless variants") {
  Rng rng(70);
  auto g = oracle::random_graph(rng, 30, 0.2, 3, 2);
  const int m = 3;
  auto fed = federate(g, oracle::random_partition(rng, 30, m).owner, m);

  std::vector<Matrix> x = fed.features, y = fed.features, combo = fed.features;
  for (int i = 0; i < m; ++i) {
    for (double& v : y[i].data) v = rng.normal();
    for (std::size_t idx = 0; idx < combo[i].data.size(); ++idx)
      combo[i].data[idx] = 2.0 * x[i].data[idx] - 0.5 * y[i].data[idx];
  }
  auto variant = PropagationVariant::gpr(0.3);
  auto rx = fedcog_run(fed.graphs, x, 2, variant);
  auto ry = fedcog_run(fed.graphs, y, 2, variant);
  auto rc = fedcog_run(fed.graphs, combo, 2, variant);
  for (int i = 0; i < m; ++i) {
    for (std::size_t idx = 0; idx < rc.embeddings[i].data.size(); ++idx) {
      const double expect = 2.0 * rx.embeddings[i].data[idx] - 0.5 * ry.embeddings[i].data[idx];
      REQUIRE(rel_err(rc.embeddings[i].data[idx], expect) < 1e-12);
    }
  }
}

TEST_CASE("message accounting matches the closed form") {
  Rng rng(80);
  auto g = oracle::random_graph(rng, 40, 0.15, 6, 2);
  const int m = 4;
  auto fed = federate(g, oracle::random_partition(rng, 40, m).owner, m);
  long long placeholders = 0;
  for (const auto& pg : fed.graphs) placeholders += pg.ig.num_placeholders();

  const int layers = 3;
  auto result = fedcog_run(fed.graphs, fed.features, layers, PropagationVariant::sgc());
  REQUIRE(result.meter.floats_sent == layers * 6 * placeholders);
  REQUIRE(result.meter.exchange_rounds == layers);
  REQUIRE(result.meter.mul_adds > 0);
}

TEST_CASE("relaying through a server doubles the metered traffic only") {
  Rng rng(85);
  auto g = oracle::random_graph(rng, 30, 0.2, 4, 2);
  auto fed = federate(g, oracle::random_partition(rng, 30, 3).owner, 3);

  auto direct = fedcog_run(fed.graphs, fed.features, 2, PropagationVariant::sgc());
  RunOptions opt;
  opt.via_server = true;
  auto relayed = fedcog_run(fed.graphs, fed.features, 2, PropagationVariant::sgc(), opt);

  REQUIRE(relayed.meter.floats_sent == 2 * direct.meter.floats_sent);
  for (int i = 0; i < 3; ++i) REQUIRE(relayed.embeddings[i] == direct.embeddings[i]);
}

TEST_CASE("scheduling independence") {
  Rng rng(90);
  auto g = oracle::random_graph(rng, 35, 0.2, 4, 2);
  const int m = 5;
  auto fed = federate(g, oracle::random_partition(rng, 35, m).owner, m);
  auto variant = PropagationVariant::sgc();

  auto base = fedcog_run(fed.graphs, fed.features, 3, variant);

  RunOptions reversed;
  reversed.party_order = {4, 3, 2, 1, 0};
  auto rev = fedcog_run(fed.graphs, fed.features, 3, variant, reversed);

  RunOptions parallel;
  parallel.parallel = true;
  auto par = fedcog_run(fed.graphs, fed.features, 3, variant, parallel);

  for (int i = 0; i < m; ++i) {
    REQUIRE(base.embeddings[i] == rev.embeddings[i]);   // bit identical
    REQUIRE(base.embeddings[i] == par.embeddings[i]);
  }
  REQUIRE(base.meter.floats_sent == rev.meter.floats_sent);
  REQUIRE(base.meter.mul_adds == par.meter.mul_adds);
}
