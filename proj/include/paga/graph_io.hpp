#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "paga/graph.hpp"

#include "json.hpp"

namespace paga {

// Graph file schema:
//   {
//     "num_vertices": n,
//     "vertex_features": [[...], ...],        // n rows
//     "edges": [{"source": s, "target": t, "type": k, "feature": [...]}, ...]
//   }
// Edge ids are implicit in array order. Numbers are 64-bit floats.

inline nlohmann::json graph_to_json(const HeteroGraph& g) {
  nlohmann::json j;
  j["num_vertices"] = g.num_vertices();
  nlohmann::json feats = nlohmann::json::array();
  const Tensor& vf = g.vertex_features();
  for (std::size_t r = 0; r < g.num_vertices(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < vf.cols(); ++c) row.push_back(vf.at(r, c));
    feats.push_back(std::move(row));
  }
  j["vertex_features"] = std::move(feats);
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges()) {
    edges.push_back({{"source", e.source},
                     {"target", e.target},
                     {"type", e.edge_type},
                     {"feature", e.feature}});
  }
  j["edges"] = std::move(edges);
  return j;
}

inline HeteroGraph graph_from_json(const nlohmann::json& j) {
  if (!j.contains("num_vertices") || !j.contains("vertex_features") ||
      !j.contains("edges")) {
    throw ValidationError(
        "graph json: required fields num_vertices, vertex_features, edges");
  }
  const std::size_t n = j.at("num_vertices").get<std::size_t>();
  const auto& feats = j.at("vertex_features");
  if (!feats.is_array() || feats.size() != n) {
    throw ShapeError("graph json: vertex_features must have num_vertices rows");
  }
  std::size_t width = n == 0 ? 0 : feats.at(0).size();
  std::vector<double> values;
  values.reserve(n * width);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = feats.at(r);
    if (row.size() != width) {
      throw ShapeError("graph json: ragged vertex_features at row " +
                       std::to_string(r));
    }
    for (const auto& v : row) values.push_back(v.get<double>());
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < j.at("edges").size(); ++i) {
    const auto& je = j.at("edges").at(i);
    Edge e;
    e.id = static_cast<EdgeId>(i);
    e.source = je.at("source").get<VertexId>();
    e.target = je.at("target").get<VertexId>();
    e.edge_type = je.at("type").get<int>();
    if (je.contains("feature")) {
      e.feature = je.at("feature").get<std::vector<double>>();
    }
    edges.push_back(std::move(e));
  }
  return HeteroGraph::build(n, Tensor({n, width}, std::move(values)),
                            std::move(edges));
}

inline void save_graph(const HeteroGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << graph_to_json(g).dump(2) << "\n";
}

inline HeteroGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("graph json parse error: ") + e.what());
  }
  return graph_from_json(j);
}

// Returns "valid" or a description of the first violated invariant.
inline std::string validate_graph_file(const std::string& path) {
  try {
    HeteroGraph g = load_graph(path);
    g.validate();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "valid";
}

}  // namespace paga
