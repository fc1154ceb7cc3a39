#pragma once

#include <string>
#include <vector>

#include "paga/graph.hpp"
#include "paga/paths.hpp"
#include "paga/tensor.hpp"

namespace paga {

// Learnable per-type edge embedding. The table carries one row per edge type
// plus one reserved row for the self type (last row).
struct EdgeTypeEmbedding {
  Tensor table;  // (num_types + 1) x width

  std::size_t width() const { return table.cols(); }
  std::size_t rows() const { return table.rows(); }

  std::size_t row_for_type(int edge_type) const {
    std::size_t self_row = table.rows() - 1;
    if (edge_type == kSelfEdgeType) return self_row;
    if (edge_type < 0 || static_cast<std::size_t>(edge_type) >= self_row) {
      throw ValidationError("edge type " + std::to_string(edge_type) +
                            " not covered by embedding table");
    }
    return static_cast<std::size_t>(edge_type);
  }

  std::vector<double> lookup(int edge_type) const {
    std::size_t r = row_for_type(edge_type);
    std::vector<double> row(width());
    for (std::size_t c = 0; c < width(); ++c) row[c] = table.at(r, c);
    return row;
  }
};

// Per-edge feature vectors along a path: type embedding concatenated with the
// raw edge feature. Width = embedding width + raw width for every edge.
inline std::vector<std::vector<double>> edge_feature_sequence(
    const HeteroGraph& g, const Path& p, const EdgeTypeEmbedding& embed) {
  validate_path(g, p);
  std::vector<std::vector<double>> seq;
  seq.reserve(p.edges.size());
  for (EdgeId id : p.edges) {
    const Edge& e = g.edge(id);
    std::vector<double> f = embed.lookup(e.edge_type);
    f.insert(f.end(), e.feature.begin(), e.feature.end());
    seq.push_back(std::move(f));
  }
  return seq;
}

}  // namespace paga
