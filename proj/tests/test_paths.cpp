#include <algorithm>
#include <set>

#include "doctest.h"
#include "paga/embedding.hpp"
#include "paga/paths.hpp"
#include "paga/random.hpp"
#include "paga/skip_experiment.hpp"

using namespace paga;

namespace {

// Independent brute-force enumerator: recursion over the raw edge list,
// no CSR, no shared code with the implementation under test.
void brute_force_recurse(const std::vector<Edge>& edges, VertexId at,
                         int remaining, std::vector<EdgeId>& prefix,
                         std::set<VertexId>& seen,
                         std::multiset<std::vector<EdgeId>>& out) {
  if (remaining == 0) return;
  for (const Edge& e : edges) {
    if (e.source != at || seen.count(e.target)) continue;
    prefix.push_back(e.id);
    out.insert(prefix);
    seen.insert(e.target);
    brute_force_recurse(edges, e.target, remaining - 1, prefix, seen, out);
    seen.erase(e.target);
    prefix.pop_back();
  }
}

std::multiset<std::vector<EdgeId>> brute_force_paths(const HeteroGraph& g,
                                                     VertexId u, int lambda) {
  std::multiset<std::vector<EdgeId>> out;
  std::vector<EdgeId> prefix;
  std::set<VertexId> seen{u};
  brute_force_recurse(g.edges(), u, lambda, prefix, seen, out);
  return out;
}

std::multiset<std::vector<EdgeId>> flatten(const PathIndex& index) {
  std::multiset<std::vector<EdgeId>> out;
  for (const auto& [v, paths] : index.entries()) {
    for (const Path& p : paths) out.insert(p.edges);
  }
  return out;
}

HeteroGraph random_multigraph(Rng& rng, std::size_t n_vertices,
                              std::size_t n_edges) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n_edges; ++i) {
    Edge e;
    e.source = static_cast<VertexId>(rng.below(n_vertices));
    do {
      e.target = static_cast<VertexId>(rng.below(n_vertices));
    } while (e.target == e.source);
    e.edge_type = static_cast<int>(rng.below(3));
    edges.push_back(std::move(e));
  }
  return HeteroGraph::build(n_vertices, Tensor::zeros({n_vertices, 1}),
                            std::move(edges));
}

}  // namespace

TEST_CASE("skip graph paths from a with lambda 2") {
  HeteroGraph g = skip_graph();
  PathIndex index = enumerate_paths(g, 0, 2);
  REQUIRE(index.entries().size() == 2);
  REQUIRE(index.entries().count(1) == 1);
  REQUIRE(index.entries().count(2) == 1);
  CHECK(index.entries().at(1) == std::vector<Path>{Path{{0}}});
  CHECK(index.entries().at(2) == std::vector<Path>{Path{{0, 1}}});
}

TEST_CASE("vertex without out-edges yields an empty index") {
  HeteroGraph g = skip_graph();
  PathIndex index = enumerate_paths(g, 2, 3);
  CHECK(index.entries().empty());
  CHECK(lambda_ring(g, 2, 3).empty());
}

TEST_CASE("enumerate_paths preconditions") {
  HeteroGraph g = skip_graph();
  CHECK_THROWS_AS(enumerate_paths(g, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_paths(g, 7, 2), ValidationError);
}

TEST_CASE("random multigraphs match the brute-force enumerator exactly") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t v = 2 + rng.below(9);    // |V| <= 10
    const std::size_t e = rng.below(26);       // |E| <= 25
    const int lambda = 1 + static_cast<int>(rng.below(4));
    HeteroGraph g = random_multigraph(rng, v, e);
    for (std::size_t u = 0; u < v; ++u) {
      PathIndex index = enumerate_paths(g, static_cast<VertexId>(u), lambda);
      CHECK(flatten(index) == brute_force_paths(g, static_cast<VertexId>(u), lambda));
    }
  }
}

TEST_CASE("stored paths chain and never repeat a vertex") {
  Rng rng(78);
  for (int trial = 0; trial < 20; ++trial) {
    HeteroGraph g = random_multigraph(rng, 2 + rng.below(8), rng.below(22));
    for (std::size_t u = 0; u < g.num_vertices(); ++u) {
      PathIndex index = enumerate_paths(g, static_cast<VertexId>(u), 4);
      for (const auto& [target, paths] : index.entries()) {
        for (const Path& p : paths) {
          validate_path(g, p);
          CHECK(g.edge(p.edges.front()).source == static_cast<VertexId>(u));
          CHECK(g.edge(p.edges.back()).target == target);
          std::set<VertexId> seen{static_cast<VertexId>(u)};
          for (EdgeId id : p.edges) {
            CHECK(seen.insert(g.edge(id).target).second);
          }
        }
      }
    }
  }
}

TEST_CASE("enumeration is deterministic and lexicographically ordered") {
  Rng rng(79);
  HeteroGraph g = random_multigraph(rng, 8, 20);
  for (std::size_t u = 0; u < 8; ++u) {
    PathIndex a = enumerate_paths(g, static_cast<VertexId>(u), 3);
    PathIndex b = enumerate_paths(g, static_cast<VertexId>(u), 3);
    REQUIRE(a.entries().size() == b.entries().size());
    for (const auto& [target, paths] : a.entries()) {
      CHECK(paths == b.entries().at(target));
      CHECK(std::is_sorted(paths.begin(), paths.end()));
    }
  }
}

TEST_CASE("lambda ring equals the path index key set") {
  HeteroGraph g = skip_graph();
  CHECK(lambda_ring(g, 0, 1) == std::vector<VertexId>{1});
  CHECK(lambda_ring(g, 0, 2) == std::vector<VertexId>{1, 2});

  Rng rng(80);
  for (int trial = 0; trial < 10; ++trial) {
    HeteroGraph r = random_multigraph(rng, 9, 20);
    for (std::size_t u = 0; u < 9; ++u) {
      auto ring = lambda_ring(r, static_cast<VertexId>(u), 3);
      auto oracle = brute_force_paths(r, static_cast<VertexId>(u), 3);
      std::set<VertexId> targets;
      for (const auto& path : oracle) {
        targets.insert(r.edge(path.back()).target);
      }
      CHECK(ring == std::vector<VertexId>(targets.begin(), targets.end()));
    }
  }
}

TEST_CASE("edge feature sequences") {
  HeteroGraph g = skip_graph();
  EdgeTypeEmbedding embed{Tensor({3, 1}, {0.25, -0.75, 2.0})};

  SUBCASE("two distinct types give two distinct vectors") {
    auto seq = edge_feature_sequence(g, Path{{0, 1}}, embed);
    REQUIRE(seq.size() == 2);
    CHECK(seq[0] != seq[1]);
    CHECK(seq[0] == std::vector<double>{0.25});
    CHECK(seq[1] == std::vector<double>{-0.75});
  }
  SUBCASE("length-1 path gives a singleton") {
    auto seq = edge_feature_sequence(g, Path{{1}}, embed);
    REQUIRE(seq.size() == 1);
    CHECK(seq[0] == std::vector<double>{-0.75});
  }
  SUBCASE("zero-width raw features reduce to the embedding lookup") {
    auto seq = edge_feature_sequence(g, Path{{0}}, embed);
    CHECK(seq[0] == embed.lookup(0));
  }
  SUBCASE("raw features are appended after the type embedding") {
    std::vector<Edge> edges{Edge{0, 0, 1, 0, {7.0, 8.0}},
                            Edge{1, 1, 2, 1, {9.0, 10.0}}};
    HeteroGraph g2 =
        HeteroGraph::build(3, Tensor::zeros({3, 1}), std::move(edges));
    auto seq = edge_feature_sequence(g2, Path{{0, 1}}, embed);
    CHECK(seq[0] == std::vector<double>{0.25, 7.0, 8.0});
    CHECK(seq[1] == std::vector<double>{-0.75, 9.0, 10.0});
  }
  SUBCASE("stale edge id is an integrity error") {
    CHECK_THROWS_AS(edge_feature_sequence(g, Path{{5}}, embed), ValidationError);
  }
  SUBCASE("non-chaining path is rejected") {
    std::vector<Edge> edges{Edge{0, 0, 1, 0, {}}, Edge{1, 2, 1, 0, {}}};
    HeteroGraph g2 = HeteroGraph::build(3, Tensor::zeros({3, 1}), edges);
    CHECK_THROWS_AS(edge_feature_sequence(g2, Path{{0, 1}}, embed),
                    ValidationError);
  }
}
