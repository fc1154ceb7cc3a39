#pragma once

#include <set>
#include <string>
#include <vector>

#include "paga/autodiff.hpp"
#include "paga/graph.hpp"
#include "paga/nn.hpp"

namespace paga {

// Single graph-attention layer over 1-ring out-neighborhoods plus self.
// Scores come from the mapped features of both endpoints, pass a leaky
// rectifier and an exp-normalization so the weights over each neighborhood
// are nonnegative and sum to one.
struct GatLayer {
  std::size_t c_in = 1;
  std::size_t c_out = 1;  // per head
  std::size_t n_head = 1;
  double leaky_slope = 0.2;
  std::string prefix = "gat";

  void init_params(nn::ParamStore& store, Rng& rng) const {
    for (std::size_t h = 0; h < n_head; ++h) {
      const std::string p = head_prefix(h);
      store.add(p + ".weight", nn::uniform_init(rng, {c_in, c_out}, c_in));
      store.add(p + ".att_src", nn::uniform_init(rng, {c_out, 1}, c_out));
      store.add(p + ".att_dst", nn::uniform_init(rng, {c_out, 1}, c_out));
    }
  }

  std::string head_prefix(std::size_t h) const {
    return prefix + ".head" + std::to_string(h);
  }

  // Deduplicated neighborhood {u} + out-neighbors, ascending vertex id.
  static std::vector<std::size_t> neighborhood(const HeteroGraph& g,
                                               VertexId u) {
    std::set<VertexId> nbrs{u};
    for (EdgeId id : g.out_edge_ids(u)) nbrs.insert(g.edge(id).target);
    return {nbrs.begin(), nbrs.end()};
  }

  // x: [V, c_in] -> [V, n_head * c_out]
  ad::Var forward(ad::Tape& tape, const nn::BoundParams& params,
                  const HeteroGraph& g, ad::Var x) const {
    using namespace ad;
    const std::size_t V = g.num_vertices();
    std::vector<Var> head_outputs;
    for (std::size_t h = 0; h < n_head; ++h) {
      const std::string p = head_prefix(h);
      Var mapped = matmul(x, params[p + ".weight"]);       // [V, c_out]
      Var s_src = matmul(mapped, params[p + ".att_src"]);  // [V, 1]
      Var s_dst = matmul(mapped, params[p + ".att_dst"]);  // [V, 1]
      std::vector<Var> rows;
      for (std::size_t u = 0; u < V; ++u) {
        std::vector<std::size_t> nbrs = neighborhood(g, static_cast<VertexId>(u));
        std::vector<Var> scores;
        scores.reserve(nbrs.size());
        for (std::size_t v : nbrs) {
          scores.push_back(leaky_relu(add(pick(s_src, u, 0), pick(s_dst, v, 0)),
                                      leaky_slope));
        }
        Var e = ad::exp(stack_scalars(scores));     // [k]
        Var alpha = div_scalar(e, sum(e));          // softmax over neighborhood
        Var nbr_feats = gather_rows(mapped, nbrs);  // [k, c_out]
        rows.push_back(matmul(reshape(alpha, {1, nbrs.size()}), nbr_feats));
      }
      head_outputs.push_back(concat_rows(rows));  // [V, c_out]
    }
    return head_outputs.size() == 1 ? head_outputs[0]
                                    : concat_cols(head_outputs);
  }

  // Batched scalar-signal variant (c_in = c_out = 1, one example per column
  // of x [V, B]); attention is computed per example.
  ad::Var forward_columns(ad::Tape& tape, const nn::BoundParams& params,
                          const HeteroGraph& g, ad::Var x) const {
    using namespace ad;
    if (c_in != 1 || c_out != 1 || n_head != 1) {
      throw ContractError("GatLayer::forward_columns: scalar single-head only");
    }
    const std::size_t V = g.num_vertices();
    const std::string p = head_prefix(0);
    Var mapped = mul_scalar(x, pick(params[p + ".weight"], 0, 0));   // [V, B]
    Var s_src = mul_scalar(mapped, pick(params[p + ".att_src"], 0, 0));
    Var s_dst = mul_scalar(mapped, pick(params[p + ".att_dst"], 0, 0));
    std::vector<Var> rows;
    for (std::size_t u = 0; u < V; ++u) {
      std::vector<std::size_t> nbrs = neighborhood(g, static_cast<VertexId>(u));
      Var src_row = gather_rows(s_src, {u});                    // [1, B]
      std::vector<Var> score_rows;
      for (std::size_t v : nbrs) {
        score_rows.push_back(
            leaky_relu(add(src_row, gather_rows(s_dst, {v})), leaky_slope));
      }
      Var e = ad::exp(concat_rows(score_rows));   // [k, B]
      Var alpha = div_rowwise(e, sum_rows(e));    // column-wise softmax
      Var weighted = mul(alpha, gather_rows(mapped, nbrs));  // [k, B]
      Var y_u = gather_rows(weighted, {0});
      for (std::size_t k = 1; k < nbrs.size(); ++k) {
        y_u = add(y_u, gather_rows(weighted, {k}));
      }
      rows.push_back(y_u);
    }
    return concat_rows(rows);  // [V, B]
  }
};

// Stacked scalar GAT layers sharing one store; used by the skip-experiment baseline.
inline ad::Var gat_forward_columns(ad::Tape& tape, const nn::BoundParams& params,
                                   const HeteroGraph& g,
                                   const std::vector<GatLayer>& layers,
                                   ad::Var x) {
  ad::Var h = x;
  for (const GatLayer& l : layers) {
    h = l.forward_columns(tape, params, g, h);
  }
  return h;
}

}  // namespace paga
