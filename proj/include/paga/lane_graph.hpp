#pragma once

#include <vector>

#include "paga/graph.hpp"
#include "paga/random.hpp"

namespace paga {

inline constexpr int kSequentialEdge = 0;
inline constexpr int kLateralEdge = 1;

// Synthetic lane graphs: parallel chains of lane segments with sequential
// (drive-through) links, optional lateral (lane-change) links between
// aligned segments of adjacent chains, and injected forks that branch a
// segment into the neighboring chain.
struct LaneGraphConfig {
  int num_chains = 3;
  int chain_length = 6;
  double lateral_prob = 0.5;  // per aligned pair; links both directions
  double fork_rate = 0.15;    // per eligible segment
  std::uint64_t seed = 0;
  double lane_spacing = 3.5;
  double segment_length = 10.0;
};

// Vertex raw features: 2D position and unit direction (4 channels).
// Edge raw features: target minus source position, then both unit
// directions (6 channels).
inline HeteroGraph gen_lane_graph(const LaneGraphConfig& cfg) {
  if (cfg.num_chains < 1 || cfg.chain_length < 2) {
    throw std::invalid_argument("gen_lane_graph: need >= 1 chain of length >= 2");
  }
  Rng rng(mix_seed(cfg.seed, 0x1a9e));
  const std::size_t n = static_cast<std::size_t>(cfg.num_chains) *
                        static_cast<std::size_t>(cfg.chain_length);
  auto vid = [&](int chain, int pos) {
    return static_cast<VertexId>(chain * cfg.chain_length + pos);
  };

  Tensor features = Tensor::zeros({n, 4});
  for (int c = 0; c < cfg.num_chains; ++c) {
    for (int p = 0; p < cfg.chain_length; ++p) {
      const std::size_t v = static_cast<std::size_t>(vid(c, p));
      features.at(v, 0) = p * cfg.segment_length;
      features.at(v, 1) = c * cfg.lane_spacing;
      features.at(v, 2) = 1.0;  // direction (1, 0): straight lanes
      features.at(v, 3) = 0.0;
    }
  }

  std::vector<Edge> edges;
  auto add_edge = [&](VertexId s, VertexId t, int type) {
    Edge e;
    e.source = s;
    e.target = t;
    e.edge_type = type;
    e.feature = {features.at(t, 0) - features.at(s, 0),
                 features.at(t, 1) - features.at(s, 1),
                 features.at(s, 2),
                 features.at(s, 3),
                 features.at(t, 2),
                 features.at(t, 3)};
    edges.push_back(std::move(e));
  };

  for (int c = 0; c < cfg.num_chains; ++c) {
    for (int p = 0; p + 1 < cfg.chain_length; ++p) {
      add_edge(vid(c, p), vid(c, p + 1), kSequentialEdge);
    }
  }

  // Fork injection: an extra sequential edge into the adjacent chain,
  // branching the segment. At least one fork when the rate is positive.
  bool has_fork = false;
  if (cfg.num_chains > 1 && cfg.fork_rate > 0.0) {
    for (int c = 0; c < cfg.num_chains; ++c) {
      for (int p = 0; p + 1 < cfg.chain_length; ++p) {
        if (rng.uniform() < cfg.fork_rate) {
          const int other = c + 1 < cfg.num_chains ? c + 1 : c - 1;
          add_edge(vid(c, p), vid(other, p + 1), kSequentialEdge);
          has_fork = true;
        }
      }
    }
    if (!has_fork) {
      add_edge(vid(0, 0), vid(1, 1), kSequentialEdge);
    }
  }

  for (int c = 0; c + 1 < cfg.num_chains; ++c) {
    for (int p = 0; p < cfg.chain_length; ++p) {
      if (rng.uniform() < cfg.lateral_prob) {
        add_edge(vid(c, p), vid(c + 1, p), kLateralEdge);
        add_edge(vid(c + 1, p), vid(c, p), kLateralEdge);
      }
    }
  }

  return HeteroGraph::build(n, std::move(features), std::move(edges));
}

}  // namespace paga
