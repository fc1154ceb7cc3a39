#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "paga/autodiff.hpp"
#include "paga/embedding.hpp"
#include "paga/graph.hpp"
#include "paga/nn.hpp"
#include "paga/paths.hpp"
#include "paga/phi.hpp"

namespace paga {

// Which ingredients of the per-edge feature vector reach the extractor.
enum class EdgeFeatureMode { kFull, kTypeOnly, kRawOnly, kZero };

inline const char* edge_feature_mode_name(EdgeFeatureMode m) {
  switch (m) {
    case EdgeFeatureMode::kFull: return "type+raw";
    case EdgeFeatureMode::kTypeOnly: return "type_only";
    case EdgeFeatureMode::kRawOnly: return "raw_only";
    case EdgeFeatureMode::kZero: return "none";
  }
  return "?";
}

struct PagaConfig {
  int lambda = 2;
  std::size_t c_e = 1;       // Phi input width; must match the feature mode
  std::size_t n_head = 1;
  PhiKind phi_kind = PhiKind::kRecurrent;
  std::optional<double> gamma;  // explicit per-length decay, off by default
  std::size_t c_x = 1;
  std::size_t c_y = 1;
  std::size_t lstm_hidden = 16;
  std::size_t embed_width = 1;
  EdgeFeatureMode edge_features = EdgeFeatureMode::kFull;

  void validate() const {
    if (lambda < 1) throw std::invalid_argument("PagaConfig: lambda must be >= 1");
    if (n_head < 1) throw std::invalid_argument("PagaConfig: n_head must be >= 1");
    if (gamma && (*gamma <= 0.0 || *gamma >= 1.0)) {
      throw std::invalid_argument("PagaConfig: gamma must lie in (0, 1)");
    }
  }

  // Effective Phi input width for a graph with the given raw edge width.
  std::size_t effective_c_e(std::size_t raw_width) const {
    switch (edge_features) {
      case EdgeFeatureMode::kFull: return embed_width + raw_width;
      case EdgeFeatureMode::kTypeOnly: return embed_width;
      case EdgeFeatureMode::kRawOnly: return raw_width;
      case EdgeFeatureMode::kZero: return 1;
    }
    return 0;
  }
};

// Per-head attention gates with their tape handles. psi[h] is a [V, V] Var
// supported on the lambda-ring plus the diagonal.
using AttentionHeads = std::vector<ad::Var>;

namespace detail {

struct PathBatches {
  // One bucket per path length l = 1..lambda; empty buckets skipped later.
  struct Bucket {
    // types[t][i]: embedding row of the t-th edge of path i
    std::vector<std::vector<std::size_t>> type_rows;
    // raw[t]: [n, raw_width] values of the t-th edge of path i
    std::vector<Tensor> raw;
    std::vector<std::size_t> pair_of_path;  // index into `pairs`
    std::size_t count = 0;
  };
  std::vector<Bucket> buckets;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (u, v)
};

inline PathBatches collect_path_batches(const HeteroGraph& g,
                                        const std::vector<PathIndex>& index,
                                        const EdgeTypeEmbedding& embed,
                                        int lambda) {
  PathBatches out;
  out.buckets.resize(lambda);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_ids;
  const std::size_t raw_w = g.edge_feature_width();
  // First pass: count paths per length.
  std::vector<std::size_t> counts(lambda, 0);
  for (const PathIndex& pi : index) {
    for (const auto& [v, paths] : pi.entries()) {
      for (const Path& p : paths) ++counts[p.length() - 1];
    }
  }
  for (int l = 0; l < lambda; ++l) {
    auto& b = out.buckets[l];
    b.type_rows.assign(l + 1, {});
    for (auto& tr : b.type_rows) tr.reserve(counts[l]);
    b.raw.assign(l + 1, Tensor::zeros({counts[l], raw_w}));
  }
  for (const PathIndex& pi : index) {
    const std::size_t u = static_cast<std::size_t>(pi.source());
    for (const auto& [v, paths] : pi.entries()) {
      auto key = std::make_pair(u, static_cast<std::size_t>(v));
      auto it = pair_ids.find(key);
      std::size_t pid;
      if (it == pair_ids.end()) {
        pid = out.pairs.size();
        pair_ids.emplace(key, pid);
        out.pairs.push_back(key);
      } else {
        pid = it->second;
      }
      for (const Path& p : paths) {
        auto& b = out.buckets[p.length() - 1];
        const std::size_t row = b.count++;
        for (std::size_t t = 0; t < p.length(); ++t) {
          const Edge& e = g.edge(p.edges[t]);
          b.type_rows[t].push_back(embed.row_for_type(e.edge_type));
          for (std::size_t c = 0; c < raw_w; ++c) {
            b.raw[t].at(row, c) = e.feature[c];
          }
        }
        b.pair_of_path.push_back(pid);
      }
    }
  }
  return out;
}

inline ad::Var step_features(ad::Tape& tape, const nn::BoundParams& params,
                             const PagaConfig& cfg, const std::string& embed_name,
                             const std::vector<std::size_t>& type_rows,
                             const Tensor& raw) {
  using namespace ad;
  switch (cfg.edge_features) {
    case EdgeFeatureMode::kFull: {
      Var types = gather_rows(params[embed_name], type_rows);
      if (raw.cols() == 0) return types;
      return concat_cols({types, tape.constant(raw)});
    }
    case EdgeFeatureMode::kTypeOnly:
      return gather_rows(params[embed_name], type_rows);
    case EdgeFeatureMode::kRawOnly:
      return tape.constant(raw);
    case EdgeFeatureMode::kZero:
      return tape.constant(Tensor::zeros({raw.rows(), 1}));
  }
  throw std::logic_error("step_features: unreachable");
}

}  // namespace detail

// Psi(u, v) = sum over path lengths l <= lambda, over paths p in P_l(u, v), of
// Phi(edge feature sequence of p), optionally scaled by gamma^l. The diagonal
// carries the learnable per-head self-gate (the empty-path term); everything
// off the lambda-ring stays exactly zero.
inline AttentionHeads compute_psi(ad::Tape& tape, const nn::BoundParams& params,
                                  const HeteroGraph& g,
                                  const std::vector<PathIndex>& index,
                                  const PhiExtractor& phi,
                                  const EdgeTypeEmbedding& embed,
                                  const PagaConfig& cfg,
                                  const std::string& embed_name = "embed.table",
                                  const std::string& self_gate_name = "self_gate") {
  cfg.validate();
  for (const PathIndex& pi : index) {
    if (pi.lambda() != cfg.lambda) {
      throw ContractError("compute_psi: path index built with lambda " +
                          std::to_string(pi.lambda()) + ", config wants " +
                          std::to_string(cfg.lambda));
    }
  }
  const std::size_t V = g.num_vertices();
  paga::detail::PathBatches batches =
      paga::detail::collect_path_batches(g, index, embed, cfg.lambda);

  std::optional<ad::Var> pair_gates;  // [n_pairs, n_head]
  for (int l = 1; l <= cfg.lambda; ++l) {
    const auto& b = batches.buckets[l - 1];
    if (b.count == 0) continue;
    std::vector<ad::Var> steps;
    for (int t = 0; t < l; ++t) {
      steps.push_back(paga::detail::step_features(tape, params, cfg, embed_name,
                                                  b.type_rows[t], b.raw[t]));
    }
    ad::Var gates = phi.apply_batch(tape, params, steps);  // [count, n_head]
    if (cfg.gamma) {
      gates = ad::scale(gates, std::pow(*cfg.gamma, static_cast<double>(l)));
    }
    ad::Var grouped =
        ad::group_sum_rows(gates, b.pair_of_path, batches.pairs.size());
    pair_gates = pair_gates ? ad::add(*pair_gates, grouped) : grouped;
  }

  AttentionHeads heads;
  ad::Var self_gate = params[self_gate_name];  // [n_head]
  for (std::size_t h = 0; h < cfg.n_head; ++h) {
    ad::Var psi_h;
    if (pair_gates) {
      ad::Var col =
          ad::reshape(ad::slice_cols(*pair_gates, h, 1), {batches.pairs.size()});
      psi_h = ad::scatter_pairs(col, batches.pairs, V);
    } else {
      psi_h = tape.constant(Tensor::zeros({V, V}));
    }
    heads.push_back(ad::add_scaled_identity(psi_h, ad::pick(self_gate, h)));
  }
  return heads;
}

// y = mix(concat_h(Psi_h x)) for x of shape [V, c_x]; the head combiner is a
// plain linear map [n_head * c_x, c_y].
inline ad::Var paga_forward(const AttentionHeads& psi, ad::Var x, ad::Var mix) {
  using namespace ad;
  if (psi.empty()) throw ShapeError("paga_forward: no attention heads");
  std::vector<Var> ys;
  ys.reserve(psi.size());
  for (const Var& p : psi) ys.push_back(matmul(p, x));
  Var cat = ys.size() == 1 ? ys[0] : concat_cols(ys);
  return matmul(cat, mix);
}

// Batched scalar-signal variant: x holds one example per column ([V, B],
// c_x = c_y = 1). Algebraically identical to paga_forward applied per column.
inline ad::Var paga_forward_columns(const AttentionHeads& psi, ad::Var x,
                                    ad::Var mix) {
  using namespace ad;
  if (mix.value().rank() != 2 || mix.value().rows() != psi.size() ||
      mix.value().cols() != 1) {
    throw ShapeError("paga_forward_columns: mix must be [n_head, 1]");
  }
  std::optional<Var> y;
  for (std::size_t h = 0; h < psi.size(); ++h) {
    Var yh = mul_scalar(matmul(psi[h], x), pick(mix, h, 0));
    y = y ? add(*y, yh) : yh;
  }
  return *y;
}

// Batched multi-channel variant: x packs B examples as [V, c_x * B] with
// channel-major blocks (columns [c*B, (c+1)*B) carry channel c). Output uses
// the same layout with c_y blocks. Per column this equals paga_forward.
inline ad::Var paga_forward_blocks(const AttentionHeads& psi, ad::Var x,
                                   ad::Var mix, std::size_t c_x,
                                   std::size_t c_y, std::size_t batch) {
  using namespace ad;
  if (psi.empty()) throw ShapeError("paga_forward_blocks: no attention heads");
  if (x.value().rank() != 2 || x.value().cols() != c_x * batch) {
    throw ShapeError("paga_forward_blocks: x must be [V, c_x * batch]");
  }
  if (mix.value().rank() != 2 || mix.value().rows() != psi.size() * c_x ||
      mix.value().cols() != c_y) {
    throw ShapeError("paga_forward_blocks: mix must be [n_head * c_x, c_y]");
  }
  std::vector<Var> propagated;  // per head: [V, c_x * batch]
  propagated.reserve(psi.size());
  for (const Var& p : psi) propagated.push_back(matmul(p, x));
  std::vector<Var> out_blocks;
  for (std::size_t j = 0; j < c_y; ++j) {
    std::optional<Var> acc;
    for (std::size_t h = 0; h < psi.size(); ++h) {
      for (std::size_t c = 0; c < c_x; ++c) {
        Var block = slice_cols(propagated[h], c * batch, batch);
        Var term = mul_scalar(block, pick(mix, h * c_x + c, j));
        acc = acc ? add(*acc, term) : term;
      }
    }
    out_blocks.push_back(*acc);
  }
  return out_blocks.size() == 1 ? out_blocks[0] : concat_cols(out_blocks);
}

// PAGA attention layer: edge-type embedding + Phi extractor + per-head
// self-gates + head combiner, with parameters in one store.
struct PagaModel {
  PagaConfig cfg;
  nn::ParamStore params;
  PhiExtractor phi;

  static PagaModel create(const HeteroGraph& g, PagaConfig cfg, Rng& rng) {
    cfg.validate();
    const std::size_t eff = cfg.effective_c_e(g.edge_feature_width());
    if (cfg.c_e != eff) {
      throw ContractError("PagaModel: c_e " + std::to_string(cfg.c_e) +
                          " != effective edge feature width " +
                          std::to_string(eff));
    }
    PagaModel m;
    m.cfg = cfg;
    m.phi = PhiExtractor{cfg.phi_kind, cfg.c_e, cfg.lstm_hidden, cfg.n_head,
                         cfg.lambda};
    const std::size_t n_types = static_cast<std::size_t>(g.num_edge_types());
    m.params.add("embed.table",
                 nn::uniform_init(rng, {n_types + 1, cfg.embed_width}, 1));
    m.phi.init_params(m.params, rng);
    m.params.add("self_gate", nn::uniform_init(rng, {cfg.n_head}, 1));
    m.params.add("mix.weight", nn::uniform_init(rng, {cfg.n_head * cfg.c_x, cfg.c_y},
                                                cfg.n_head * cfg.c_x));
    return m;
  }

  EdgeTypeEmbedding embedding() const {
    return EdgeTypeEmbedding{params.get("embed.table")};
  }

  AttentionHeads psi(ad::Tape& tape, const nn::BoundParams& bound,
                     const HeteroGraph& g,
                     const std::vector<PathIndex>& index) const {
    return compute_psi(tape, bound, g, index, phi, embedding(), cfg);
  }

  // Frozen-parameter gate values, one [V, V] tensor per head.
  std::vector<Tensor> psi_values(const HeteroGraph& g,
                                 const std::vector<PathIndex>& index) const {
    ad::Tape tape;
    nn::BoundParams bound = nn::BoundParams::bind(tape, params);
    AttentionHeads heads = psi(tape, bound, g, index);
    std::vector<Tensor> out;
    out.reserve(heads.size());
    for (const ad::Var& h : heads) out.push_back(h.value());
    return out;
  }
};

}  // namespace paga
