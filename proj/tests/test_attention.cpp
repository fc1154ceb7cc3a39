#include <cmath>

#include "doctest.h"
#include "fd_check.hpp"
#include "paga/attention.hpp"
#include "paga/random.hpp"
#include "paga/skip_experiment.hpp"

using namespace paga;
using namespace paga::ad;

namespace {

HeteroGraph random_typed_graph(Rng& rng, std::size_t n_vertices,
                               std::size_t n_edges, int n_types = 3) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n_edges; ++i) {
    Edge e;
    e.source = static_cast<VertexId>(rng.below(n_vertices));
    do {
      e.target = static_cast<VertexId>(rng.below(n_vertices));
    } while (e.target == e.source);
    e.edge_type = static_cast<int>(rng.below(n_types));
    edges.push_back(std::move(e));
  }
  return HeteroGraph::build(n_vertices, Tensor::zeros({n_vertices, 1}),
                            std::move(edges));
}

PagaConfig small_config(PhiKind kind = PhiKind::kSummation) {
  PagaConfig cfg;
  cfg.lambda = 2;
  cfg.c_e = 2;
  cfg.n_head = 2;
  cfg.phi_kind = kind;
  cfg.c_x = 1;
  cfg.c_y = 1;
  cfg.lstm_hidden = 3;
  cfg.embed_width = 2;
  cfg.edge_features = EdgeFeatureMode::kFull;
  return cfg;
}

}  // namespace

TEST_CASE("a graph with no edges yields a purely diagonal psi") {
  Rng rng(201);
  HeteroGraph g = HeteroGraph::build(4, Tensor::zeros({4, 1}), {});
  PagaModel model = PagaModel::create(g, small_config(), rng);
  auto paths = enumerate_all_paths(g, model.cfg.lambda);
  std::vector<Tensor> psi = model.psi_values(g, paths);
  REQUIRE(psi.size() == 2);
  const Tensor& gate = model.params.get("self_gate");
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(psi[h].at(i, j) == (i == j ? gate[h] : 0.0));
      }
    }
  }
}

TEST_CASE("two-path graph: psi is the gamma-weighted sum of path gates") {
  // u -> v directly (type 0) and u -> w -> v (types 1 then 2).
  std::vector<Edge> edges{Edge{0, 0, 1, 0, {}}, Edge{1, 0, 2, 1, {}},
                          Edge{2, 2, 1, 2, {}}};
  HeteroGraph g = HeteroGraph::build(3, Tensor::zeros({3, 1}), edges);
  Rng rng(202);
  PagaConfig cfg = small_config(PhiKind::kSummation);
  cfg.n_head = 1;
  cfg.gamma = 0.7;
  PagaModel model = PagaModel::create(g, cfg, rng);
  auto paths = enumerate_all_paths(g, cfg.lambda);
  Tensor psi = model.psi_values(g, paths)[0];

  // Manual forward pass of the summation extractor, straight from the
  // parameter tensors.
  const Tensor& table = model.params.get("embed.table");
  const Tensor& we = model.params.get("phi.edge.weight");
  const Tensor& be = model.params.get("phi.edge.bias");
  const Tensor& wh = model.params.get("phi.head.weight");
  const Tensor& bh = model.params.get("phi.head.bias");
  auto edge_vec = [&](int type) {
    return std::vector<double>{table.at(type, 0), table.at(type, 1)};
  };
  auto phi_of = [&](const std::vector<int>& types) {
    std::vector<double> z(we.cols(), 0.0);
    for (int ty : types) {
      auto x = edge_vec(ty);
      for (std::size_t j = 0; j < we.cols(); ++j) {
        double s = be[j];
        for (std::size_t i = 0; i < 2; ++i) s += x[i] * we.at(i, j);
        z[j] += s;
      }
    }
    double out = bh[0];
    for (std::size_t j = 0; j < wh.rows(); ++j) out += z[j] * wh.at(j, 0);
    return out;
  };

  const double expect_uv = 0.7 * phi_of({0}) + 0.7 * 0.7 * phi_of({1, 2});
  CHECK(psi.at(0, 1) == doctest::Approx(expect_uv).epsilon(1e-12));
  CHECK(psi.at(0, 2) == doctest::Approx(0.7 * phi_of({1})).epsilon(1e-12));
  CHECK(psi.at(2, 1) == doctest::Approx(0.7 * phi_of({2})).epsilon(1e-12));
}

TEST_CASE("psi support: zero outside the lambda ring, for random graphs") {
  Rng rng(203);
  for (int trial = 0; trial < 10; ++trial) {
    HeteroGraph g = random_typed_graph(rng, 3 + rng.below(6), rng.below(16));
    PagaConfig cfg = small_config(trial % 2 == 0 ? PhiKind::kSummation
                                                 : PhiKind::kRecurrent);
    PagaModel model = PagaModel::create(g, cfg, rng);
    auto paths = enumerate_all_paths(g, cfg.lambda);
    std::vector<Tensor> psi = model.psi_values(g, paths);
    for (std::size_t u = 0; u < g.num_vertices(); ++u) {
      auto ring = lambda_ring(g, static_cast<VertexId>(u), cfg.lambda);
      for (std::size_t v = 0; v < g.num_vertices(); ++v) {
        const bool in_ring =
            std::find(ring.begin(), ring.end(), static_cast<VertexId>(v)) !=
            ring.end();
        if (u != v && !in_ring) {
          for (const Tensor& head : psi) CHECK(head.at(u, v) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("paga_forward is linear in x for fixed psi") {
  Rng rng(204);
  HeteroGraph g = random_typed_graph(rng, 5, 9);
  PagaConfig cfg = small_config();
  cfg.c_x = 3;
  cfg.c_y = 2;
  PagaModel model = PagaModel::create(g, cfg, rng);
  auto paths = enumerate_all_paths(g, cfg.lambda);

  Tensor x1 = Tensor::zeros({5, 3});
  Tensor x2 = Tensor::zeros({5, 3});
  for (std::size_t i = 0; i < x1.size(); ++i) {
    x1[i] = rng.normal();
    x2[i] = rng.normal();
  }
  const double alpha = 1.7, beta = -0.45;
  Tensor mix_combo = Tensor::zeros({5, 3});
  for (std::size_t i = 0; i < x1.size(); ++i) {
    mix_combo[i] = alpha * x1[i] + beta * x2[i];
  }

  auto forward = [&](const Tensor& x) {
    Tape tape;
    nn::BoundParams bp = nn::BoundParams::bind(tape, model.params);
    AttentionHeads psi = model.psi(tape, bp, g, paths);
    return paga_forward(psi, tape.constant(x), bp["mix.weight"]).value();
  };
  Tensor y1 = forward(x1);
  Tensor y2 = forward(x2);
  Tensor yc = forward(mix_combo);
  for (std::size_t i = 0; i < yc.size(); ++i) {
    CHECK(std::abs(yc[i] - (alpha * y1[i] + beta * y2[i])) < 1e-12);
  }
}

TEST_CASE("a parallel duplicate edge adds exactly one phi term") {
  Rng rng(205);
  std::vector<Edge> edges{Edge{0, 0, 1, 0, {}}};
  HeteroGraph g1 = HeteroGraph::build(2, Tensor::zeros({2, 1}), edges);
  edges.push_back(Edge{1, 0, 1, 0, {}});  // duplicate
  HeteroGraph g2 = HeteroGraph::build(2, Tensor::zeros({2, 1}), edges);

  PagaConfig cfg = small_config(PhiKind::kSummation);
  cfg.n_head = 1;
  PagaModel model = PagaModel::create(g1, cfg, rng);
  Tensor psi1 = model.psi_values(g1, enumerate_all_paths(g1, cfg.lambda))[0];
  Tensor psi2 = model.psi_values(g2, enumerate_all_paths(g2, cfg.lambda))[0];

  // Identical features on the duplicate, so the new path contributes the
  // same gate value again.
  const double one_term = psi1.at(0, 1) - 0.0;
  CHECK(psi2.at(0, 1) - psi1.at(0, 1) ==
        doctest::Approx(one_term).epsilon(1e-12));
  CHECK(psi2.at(1, 1) == psi1.at(1, 1));
  CHECK(psi2.at(0, 0) == psi1.at(0, 0));
}

TEST_CASE("paga_forward examples") {
  Rng rng(206);
  Tape tape;
  SUBCASE("identity psi and identity combiner reproduce x") {
    Tensor x = Tensor::zeros({3, 2});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    AttentionHeads psi{tape.constant(Tensor::identity(3))};
    Var y = paga_forward(psi, tape.constant(x),
                         tape.constant(Tensor::identity(2)));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.value()[i] == x[i]);
  }
  SUBCASE("the skip-interaction target psi routes features as stated") {
    Tensor x = Tensor({3, 1}, {0.0, 1.25, -2.5});
    AttentionHeads psi{tape.constant(target_psi())};
    Var y = paga_forward(psi, tape.constant(x),
                         tape.constant(Tensor::identity(1)));
    CHECK(y.value().at(0, 0) == x.at(2, 0));  // y(a) = x(c)
    CHECK(y.value().at(1, 0) == x.at(1, 0));  // y(b) = x(b)
    CHECK(y.value().at(2, 0) == x.at(2, 0));  // y(c) = x(c)
  }
  SUBCASE("random psi and x match a nested-loop evaluation") {
    Tensor psi_v = Tensor::zeros({4, 4});
    Tensor x = Tensor::zeros({4, 3});
    Tensor mix = Tensor::zeros({3, 2});
    for (std::size_t i = 0; i < psi_v.size(); ++i) psi_v[i] = rng.normal();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = rng.normal();
    AttentionHeads psi{tape.constant(psi_v)};
    Var y = paga_forward(psi, tape.constant(x), tape.constant(mix));
    for (std::size_t u = 0; u < 4; ++u) {
      for (std::size_t o = 0; o < 2; ++o) {
        double expect = 0.0;
        for (std::size_t v = 0; v < 4; ++v) {
          for (std::size_t c = 0; c < 3; ++c) {
            expect += psi_v.at(u, v) * x.at(v, c) * mix.at(c, o);
          }
        }
        CHECK(y.value().at(u, o) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("batched column forward agrees with the generic form") {
  Rng rng(207);
  HeteroGraph g = random_typed_graph(rng, 4, 7);
  PagaConfig cfg = small_config(PhiKind::kConcatenation);
  PagaModel model = PagaModel::create(g, cfg, rng);
  auto paths = enumerate_all_paths(g, cfg.lambda);
  Tensor x = Tensor::zeros({4, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();

  Tape tape;
  nn::BoundParams bp = nn::BoundParams::bind(tape, model.params);
  AttentionHeads psi = model.psi(tape, bp, g, paths);
  Tensor generic =
      paga_forward(psi, tape.constant(x), bp["mix.weight"]).value();
  Tensor batched =
      paga_forward_columns(psi, tape.constant(x), bp["mix.weight"]).value();
  for (std::size_t i = 0; i < generic.size(); ++i) {
    CHECK(generic[i] == doctest::Approx(batched[i]).epsilon(1e-14));
  }
}

TEST_CASE("block forward with batch 1 agrees with the generic form") {
  Rng rng(215);
  HeteroGraph g = random_typed_graph(rng, 5, 8);
  PagaConfig cfg = small_config(PhiKind::kSummation);
  cfg.c_x = 2;
  cfg.c_y = 3;
  PagaModel model = PagaModel::create(g, cfg, rng);
  auto paths = enumerate_all_paths(g, cfg.lambda);
  Tensor x = Tensor::zeros({5, 2});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();

  Tape tape;
  nn::BoundParams bp = nn::BoundParams::bind(tape, model.params);
  AttentionHeads psi = model.psi(tape, bp, g, paths);
  Tensor generic = paga_forward(psi, tape.constant(x), bp["mix.weight"]).value();
  Tensor blocks = paga_forward_blocks(psi, tape.constant(x), bp["mix.weight"],
                                      2, 3, 1)
                      .value();
  REQUIRE(generic.same_shape(blocks));
  for (std::size_t i = 0; i < generic.size(); ++i) {
    CHECK(generic[i] == doctest::Approx(blocks[i]).epsilon(1e-13));
  }
}

TEST_CASE("block forward batches columns independently") {
  Rng rng(216);
  HeteroGraph g = random_typed_graph(rng, 4, 7);
  PagaConfig cfg = small_config(PhiKind::kConcatenation);
  cfg.c_x = 2;
  cfg.c_y = 2;
  PagaModel model = PagaModel::create(g, cfg, rng);
  auto paths = enumerate_all_paths(g, cfg.lambda);
  const std::size_t B = 3;
  Tensor x = Tensor::zeros({4, 2 * B});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();

  Tape tape;
  nn::BoundParams bp = nn::BoundParams::bind(tape, model.params);
  AttentionHeads psi = model.psi(tape, bp, g, paths);
  Tensor batched =
      paga_forward_blocks(psi, tape.constant(x), bp["mix.weight"], 2, 2, B)
          .value();
  for (std::size_t e = 0; e < B; ++e) {
    Tensor xe = Tensor::zeros({4, 2});
    for (std::size_t v = 0; v < 4; ++v) {
      xe.at(v, 0) = x.at(v, e);
      xe.at(v, 1) = x.at(v, B + e);
    }
    Tensor ye =
        paga_forward(psi, tape.constant(xe), bp["mix.weight"]).value();
    for (std::size_t v = 0; v < 4; ++v) {
      CHECK(batched.at(v, e) == doctest::Approx(ye.at(v, 0)).epsilon(1e-13));
      CHECK(batched.at(v, B + e) == doctest::Approx(ye.at(v, 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("lambda mismatch between index and config is a contract error") {
  Rng rng(208);
  HeteroGraph g = random_typed_graph(rng, 4, 6);
  PagaConfig cfg = small_config();
  PagaModel model = PagaModel::create(g, cfg, rng);
  auto wrong = enumerate_all_paths(g, cfg.lambda + 1);
  Tape tape;
  nn::BoundParams bp = nn::BoundParams::bind(tape, model.params);
  CHECK_THROWS_AS(model.psi(tape, bp, g, wrong), ContractError);
}

TEST_CASE("gradients flow end to end through psi and the forward map") {
  Rng rng(209);
  HeteroGraph g = random_typed_graph(rng, 5, 10);
  for (PhiKind kind :
       {PhiKind::kRecurrent, PhiKind::kSummation, PhiKind::kConcatenation}) {
    CAPTURE(phi_kind_name(kind));
    PagaConfig cfg = small_config(kind);
    PagaModel model = PagaModel::create(g, cfg, rng);
    auto paths = enumerate_all_paths(g, cfg.lambda);
    Tensor x = Tensor::zeros({5, 4});
    Tensor target = Tensor::zeros({5, 4});
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.normal();
      target[i] = rng.normal();
    }

    auto loss_fn = [&](Tape& tape, const nn::BoundParams& bp) {
      AttentionHeads psi = model.psi(tape, bp, g, paths);
      Var pred = paga_forward_columns(psi, tape.constant(x), bp["mix.weight"]);
      return mse_loss(pred, tape.constant(target));
    };
    std::map<std::string, Tensor> grads;
    {
      Tape tape;
      nn::BoundParams bp = nn::BoundParams::bind(tape, model.params);
      Var loss = loss_fn(tape, bp);
      tape.backward(loss);
      grads = bp.grads();
    }
    auto eval = [&]() {
      Tape tape;
      nn::BoundParams bp = nn::BoundParams::bind(tape, model.params);
      return loss_fn(tape, bp).value().item();
    };
    CHECK(test::check_all_grads(model.params, grads, eval) == 0);
  }
}
