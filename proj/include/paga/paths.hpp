#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "paga/graph.hpp"

namespace paga {

// Ordered edge sequence; consecutive edges chain target-to-source and no
// vertex is visited twice (simple path).
struct Path {
  std::vector<EdgeId> edges;

  std::size_t length() const { return edges.size(); }

  bool operator==(const Path& o) const { return edges == o.edges; }
  bool operator<(const Path& o) const { return edges < o.edges; }
};

// All simple paths out of one source vertex, keyed by target, lengths in
// [1, lambda]. Lists are ordered lexicographically by edge-id sequence.
class PathIndex {
 public:
  PathIndex(VertexId source, int lambda) : source_(source), lambda_(lambda) {}

  VertexId source() const { return source_; }
  int lambda() const { return lambda_; }

  const std::map<VertexId, std::vector<Path>>& entries() const {
    return entries_;
  }

  void add(VertexId target, Path p) { entries_[target].push_back(std::move(p)); }

  std::size_t total_paths() const {
    std::size_t n = 0;
    for (const auto& [v, ps] : entries_) n += ps.size();
    return n;
  }

 private:
  VertexId source_;
  int lambda_;
  std::map<VertexId, std::vector<Path>> entries_;
};

namespace detail {

inline void dfs_paths(const HeteroGraph& g, VertexId at, int remaining,
                      std::vector<EdgeId>& stack, std::vector<char>& visited,
                      PathIndex& out) {
  if (remaining == 0) return;
  for (EdgeId id : g.out_edge_ids(at)) {
    const Edge& e = g.edge(id);
    if (visited[e.target]) continue;  // simple paths only
    stack.push_back(id);
    out.add(e.target, Path{stack});
    visited[e.target] = 1;
    dfs_paths(g, e.target, remaining - 1, stack, visited, out);
    visited[e.target] = 0;
    stack.pop_back();
  }
}

}  // namespace detail

// Exhaustive bounded-length simple-path enumeration. Out-edges are expanded
// in ascending edge-id order, so emission order is lexicographic in edge-id
// sequences and identical across calls.
inline PathIndex enumerate_paths(const HeteroGraph& g, VertexId u, int lambda) {
  g.check_vertex(u);
  if (lambda < 1) throw std::invalid_argument("enumerate_paths: lambda must be >= 1");
  PathIndex index(u, lambda);
  std::vector<EdgeId> stack;
  std::vector<char> visited(g.num_vertices(), 0);
  visited[u] = 1;
  detail::dfs_paths(g, u, lambda, stack, visited, index);
  return index;
}

inline std::vector<PathIndex> enumerate_all_paths(const HeteroGraph& g,
                                                  int lambda) {
  std::vector<PathIndex> all;
  all.reserve(g.num_vertices());
  for (std::size_t u = 0; u < g.num_vertices(); ++u) {
    all.push_back(enumerate_paths(g, static_cast<VertexId>(u), lambda));
  }
  return all;
}

// Vertices reachable by simple paths of length <= lambda; sorted. Equals the
// key set of enumerate_paths.
inline std::vector<VertexId> lambda_ring(const HeteroGraph& g, VertexId u,
                                         int lambda) {
  PathIndex index = enumerate_paths(g, u, lambda);
  std::vector<VertexId> ring;
  ring.reserve(index.entries().size());
  for (const auto& [v, ps] : index.entries()) ring.push_back(v);
  return ring;
}

// Checks the chaining invariant of a path within a graph.
inline void validate_path(const HeteroGraph& g, const Path& p) {
  if (p.edges.empty()) throw ValidationError("path: empty edge sequence");
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    const Edge& e = g.edge(p.edges[i]);  // throws on stale ids
    if (i > 0 && g.edge(p.edges[i - 1]).target != e.source) {
      throw ValidationError("path: edges " + std::to_string(p.edges[i - 1]) +
                            " and " + std::to_string(p.edges[i]) +
                            " do not chain");
    }
  }
}

}  // namespace paga
