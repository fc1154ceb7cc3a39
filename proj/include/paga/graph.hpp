#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paga/tensor.hpp"

namespace paga {

using VertexId = std::int32_t;
using EdgeId = std::int64_t;

// Reserved type for self-loop edges. Regular edge types are small
// non-negative integers; the reserved type also owns the extra row of the
// edge-type embedding table.
inline constexpr int kSelfEdgeType = -1;

struct Edge {
  EdgeId id = 0;
  VertexId source = 0;
  VertexId target = 0;
  int edge_type = 0;
  std::vector<double> feature;  // raw, pre-embedding; may be empty
};

// Compressed row index over edge ids: edge_ids[offsets[u] .. offsets[u+1])
// lists the edges keyed by vertex u, in ascending edge id order.
struct CsrIndex {
  std::vector<std::size_t> offsets;
  std::vector<EdgeId> edge_ids;
};

// Directed heterogeneous multigraph. Immutable after build; safe to share
// across threads.
class HeteroGraph {
 public:
  static HeteroGraph build(std::size_t num_vertices, Tensor vertex_features,
                           std::vector<Edge> edges) {
    if (vertex_features.rank() != 2 ||
        vertex_features.rows() != num_vertices) {
      throw ShapeError("build_graph: vertex feature rows (" +
                       std::to_string(vertex_features.rank() == 2
                                          ? vertex_features.rows()
                                          : 0) +
                       ") must equal num_vertices (" +
                       std::to_string(num_vertices) + ")");
    }
    HeteroGraph g;
    g.num_vertices_ = num_vertices;
    g.vertex_features_ = std::move(vertex_features);
    g.edges_ = std::move(edges);
    // Edge ids are positional.
    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
      g.edges_[i].id = static_cast<EdgeId>(i);
    }
    g.validate_edges();
    g.build_index(g.out_index_, /*by_source=*/true);
    g.build_index(g.in_index_, /*by_source=*/false);
    return g;
  }

  std::size_t num_vertices() const { return num_vertices_; }
  std::size_t num_edges() const { return edges_.size(); }

  const Edge& edge(EdgeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= edges_.size()) {
      throw ValidationError("edge id " + std::to_string(id) + " out of range");
    }
    return edges_[static_cast<std::size_t>(id)];
  }

  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const EdgeId> out_edge_ids(VertexId u) const {
    check_vertex(u);
    return {out_index_.edge_ids.data() + out_index_.offsets[u],
            out_index_.offsets[u + 1] - out_index_.offsets[u]};
  }

  std::span<const EdgeId> in_edge_ids(VertexId v) const {
    check_vertex(v);
    return {in_index_.edge_ids.data() + in_index_.offsets[v],
            in_index_.offsets[v + 1] - in_index_.offsets[v]};
  }

  std::vector<Edge> out_edges(VertexId u) const {
    std::vector<Edge> out;
    for (EdgeId id : out_edge_ids(u)) out.push_back(edges_[id]);
    return out;
  }

  const CsrIndex& out_index() const { return out_index_; }
  const CsrIndex& in_index() const { return in_index_; }
  const Tensor& vertex_features() const { return vertex_features_; }

  std::size_t vertex_feature_width() const { return vertex_features_.cols(); }

  // Raw feature width shared by all edges (validated at build).
  std::size_t edge_feature_width() const {
    return edges_.empty() ? 0 : edges_[0].feature.size();
  }

  // Number of distinct non-reserved types = max type + 1.
  int num_edge_types() const {
    int n = 0;
    for (const Edge& e : edges_) {
      if (e.edge_type >= 0) n = std::max(n, e.edge_type + 1);
    }
    return n;
  }

  void check_vertex(VertexId u) const {
    if (u < 0 || static_cast<std::size_t>(u) >= num_vertices_) {
      throw ValidationError("vertex " + std::to_string(u) + " out of range [0, " +
                            std::to_string(num_vertices_) + ")");
    }
  }

  // Full invariant scan; throws on the first violation.
  void validate() const {
    validate_edges();
    validate_index(out_index_, true);
    validate_index(in_index_, false);
  }

 private:
  void validate_edges() const {
    for (const Edge& e : edges_) {
      if (e.source < 0 || static_cast<std::size_t>(e.source) >= num_vertices_) {
        throw ValidationError("edge " + std::to_string(e.id) + ": source " +
                              std::to_string(e.source) + " out of range");
      }
      if (e.target < 0 || static_cast<std::size_t>(e.target) >= num_vertices_) {
        throw ValidationError("edge " + std::to_string(e.id) + ": target " +
                              std::to_string(e.target) + " out of range");
      }
      if (e.source == e.target && e.edge_type != kSelfEdgeType) {
        throw ValidationError("edge " + std::to_string(e.id) +
                              ": self-loop requires the reserved self type");
      }
      if (e.edge_type < kSelfEdgeType) {
        throw ValidationError("edge " + std::to_string(e.id) + ": bad type " +
                              std::to_string(e.edge_type));
      }
      if (e.feature.size() != edges_[0].feature.size()) {
        throw ShapeError("edge " + std::to_string(e.id) +
                         ": ragged feature width " +
                         std::to_string(e.feature.size()) + " vs " +
                         std::to_string(edges_[0].feature.size()));
      }
    }
  }

  void build_index(CsrIndex& index, bool by_source) {
    index.offsets.assign(num_vertices_ + 1, 0);
    for (const Edge& e : edges_) {
      VertexId key = by_source ? e.source : e.target;
      ++index.offsets[key + 1];
    }
    for (std::size_t i = 1; i <= num_vertices_; ++i) {
      index.offsets[i] += index.offsets[i - 1];
    }
    index.edge_ids.assign(edges_.size(), 0);
    std::vector<std::size_t> cursor(index.offsets.begin(),
                                    index.offsets.end() - 1);
    // Iterating edges in id order keeps each bucket id-sorted.
    for (const Edge& e : edges_) {
      VertexId key = by_source ? e.source : e.target;
      index.edge_ids[cursor[key]++] = e.id;
    }
  }

  void validate_index(const CsrIndex& index, bool by_source) const {
    const char* name = by_source ? "out_index" : "in_index";
    if (index.offsets.size() != num_vertices_ + 1 ||
        index.offsets.front() != 0 || index.offsets.back() != edges_.size()) {
      throw ValidationError(std::string(name) + ": bad offsets");
    }
    std::vector<int> seen(edges_.size(), 0);
    for (std::size_t u = 0; u < num_vertices_; ++u) {
      if (index.offsets[u] > index.offsets[u + 1]) {
        throw ValidationError(std::string(name) + ": offsets not monotone at vertex " +
                              std::to_string(u));
      }
      for (std::size_t k = index.offsets[u]; k < index.offsets[u + 1]; ++k) {
        EdgeId id = index.edge_ids[k];
        const Edge& e = edge(id);
        VertexId key = by_source ? e.source : e.target;
        if (key != static_cast<VertexId>(u)) {
          throw ValidationError(std::string(name) + ": edge " + std::to_string(id) +
                                " filed under vertex " + std::to_string(u));
        }
        ++seen[id];
      }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i] != 1) {
        throw ValidationError(std::string(name) + ": edge " + std::to_string(i) +
                              " referenced " + std::to_string(seen[i]) + " times");
      }
    }
  }

  std::size_t num_vertices_ = 0;
  Tensor vertex_features_ = Tensor::zeros({0, 0});
  std::vector<Edge> edges_;
  CsrIndex out_index_, in_index_;
};

inline HeteroGraph build_graph(std::size_t num_vertices, Tensor vertex_features,
                               std::vector<Edge> edges) {
  return HeteroGraph::build(num_vertices, std::move(vertex_features),
                            std::move(edges));
}

}  // namespace paga
