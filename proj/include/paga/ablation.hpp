#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "paga/adam.hpp"
#include "paga/attention.hpp"
#include "paga/lane_graph.hpp"
#include "paga/paths.hpp"

namespace paga {

// Fork-disambiguation regression on a lane graph, with two-channel signals
// so that one attention pattern per channel is required.
//
// Channel 0 label: the signal on the lane's left-neighbor-of-successor —
// follow a sequential edge, then the lateral edge toward the left (positive
// lateral offset), summed over all such 2-paths. Both lateral directions
// share one edge type, so telling left from right takes the raw spatial
// channels; and the distractor route (successor-of-neighbor) visits
// different vertices wherever lateral links are sparse or forks break the
// grid symmetry, so this channel also separates order-sensitive extractors
// from permutation-invariant ones.
//
// Channel 1 label: the signal on the direct successor (sequential 1-paths).
// A single attention head has to compromise between the two patterns; with
// two or more heads both are representable at once.
struct ForkTask {
  HeteroGraph graph;
  std::vector<PathIndex> paths;
  Tensor left_neighbor_of_successor;  // [V, V]; channel-0 labels = map * x0
  Tensor successor;                   // [V, V]; channel-1 labels = map * x1

  static bool leftward(const Edge& e) {
    // Raw edge feature layout: (dx, dy, src dir, tgt dir); left = +dy.
    return e.feature.size() >= 2 && e.feature[1] > 0.0;
  }

  static ForkTask build(const LaneGraphConfig& cfg, int lambda) {
    ForkTask t;
    t.graph = gen_lane_graph(cfg);
    t.paths = enumerate_all_paths(t.graph, lambda);
    const std::size_t V = t.graph.num_vertices();
    t.left_neighbor_of_successor = Tensor::zeros({V, V});
    t.successor = Tensor::zeros({V, V});
    for (const PathIndex& pi : t.paths) {
      for (const auto& [target, list] : pi.entries()) {
        for (const Path& p : list) {
          if (p.length() == 2 &&
              t.graph.edge(p.edges[0]).edge_type == kSequentialEdge &&
              t.graph.edge(p.edges[1]).edge_type == kLateralEdge &&
              leftward(t.graph.edge(p.edges[1]))) {
            t.left_neighbor_of_successor.at(pi.source(), target) += 1.0;
          }
          if (p.length() == 1 &&
              t.graph.edge(p.edges[0]).edge_type == kSequentialEdge) {
            t.successor.at(pi.source(), target) += 1.0;
          }
        }
      }
    }
    return t;
  }
};

// Block layout: [V, 2n] with columns [0, n) holding channel 0 and columns
// [n, 2n) channel 1, matching paga_forward_blocks.
struct ForkDataset {
  std::size_t n_train = 0, n_eval = 0;
  Tensor x_train, y_train;  // [V, 2 * n_train]
  Tensor x_eval, y_eval;    // [V, 2 * n_eval]
};

inline ForkDataset gen_fork_dataset(const ForkTask& task, std::size_t n_train,
                                    std::size_t n_eval, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xf0c4));
  const std::size_t V = task.graph.num_vertices();
  auto make = [&](std::size_t n) {
    Tensor x = Tensor::zeros({V, 2 * n});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
    Tensor y = Tensor::zeros({V, 2 * n});
    for (std::size_t u = 0; u < V; ++u) {
      for (std::size_t i = 0; i < n; ++i) {
        double y0 = 0.0, y1 = 0.0;
        for (std::size_t w = 0; w < V; ++w) {
          y0 += task.left_neighbor_of_successor.at(u, w) * x.at(w, i);
          y1 += task.successor.at(u, w) * x.at(w, n + i);
        }
        y.at(u, i) = y0;
        y.at(u, n + i) = y1;
      }
    }
    return std::make_pair(x, y);
  };
  ForkDataset d;
  d.n_train = n_train;
  d.n_eval = n_eval;
  std::tie(d.x_train, d.y_train) = make(n_train);
  std::tie(d.x_eval, d.y_eval) = make(n_eval);
  return d;
}

struct AblationTaskConfig {
  LaneGraphConfig graph;
  std::size_t n_train = 192;
  std::size_t n_eval = 192;
  int epochs = 400;
  double lr = 0.02;
  PagaConfig base = [] {
    PagaConfig c;
    c.lambda = 2;
    c.c_e = 32;  // 26 embedding channels + 6 raw spatial channels
    c.n_head = 8;
    c.phi_kind = PhiKind::kRecurrent;
    c.c_x = 2;
    c.c_y = 2;
    c.lstm_hidden = 64;
    c.embed_width = 26;
    c.edge_features = EdgeFeatureMode::kFull;
    return c;
  }();
};

// Full-batch training of one PAGA variant on the fork task; returns the
// plain eval MSE after the last epoch.
inline double train_fork_variant(const ForkTask& task, const ForkDataset& data,
                                 const PagaConfig& cfg, int epochs, double lr,
                                 std::uint64_t seed) {
  Rng init_rng(mix_seed(seed, 0xab1a));
  PagaModel model = PagaModel::create(task.graph, cfg, init_rng);
  AdamConfig adam_cfg;
  adam_cfg.lr = lr;
  AdamState adam(adam_cfg);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    ad::Tape tape;
    nn::BoundParams bound = nn::BoundParams::bind(tape, model.params);
    AttentionHeads heads = model.psi(tape, bound, task.graph, task.paths);
    ad::Var pred =
        paga_forward_blocks(heads, tape.constant(data.x_train),
                            bound["mix.weight"], cfg.c_x, cfg.c_y, data.n_train);
    ad::Var loss =
        ad::scale(ad::mse_loss(pred, tape.constant(data.y_train)), 0.5);
    if (!std::isfinite(loss.value().item())) break;
    tape.backward(loss);
    adam.step(model.params, bound.grads());
  }
  ad::Tape tape;
  nn::BoundParams bound = nn::BoundParams::bind(tape, model.params);
  AttentionHeads heads = model.psi(tape, bound, task.graph, task.paths);
  ad::Var pred =
      paga_forward_blocks(heads, tape.constant(data.x_eval),
                          bound["mix.weight"], cfg.c_x, cfg.c_y, data.n_eval);
  return ad::mse_loss(pred, tape.constant(data.y_eval)).value().item();
}

enum class AblationKind { kPhiForm, kEdgeFeatures, kCapacity };

inline const char* ablation_kind_name(AblationKind k) {
  switch (k) {
    case AblationKind::kPhiForm: return "phi_form";
    case AblationKind::kEdgeFeatures: return "edge_features";
    case AblationKind::kCapacity: return "capacity";
  }
  return "?";
}

inline AblationKind ablation_kind_from_name(const std::string& s) {
  if (s == "phi_form") return AblationKind::kPhiForm;
  if (s == "edge_features") return AblationKind::kEdgeFeatures;
  if (s == "capacity") return AblationKind::kCapacity;
  throw std::invalid_argument("unknown ablation: " + s);
}

struct AblationVariant {
  std::string name;
  PagaConfig cfg;
};

inline std::vector<AblationVariant> ablation_variants(AblationKind kind,
                                                      const PagaConfig& base) {
  std::vector<AblationVariant> out;
  auto push = [&](const std::string& name, auto mutate) {
    PagaConfig c = base;
    mutate(c);
    out.push_back({name, c});
  };
  switch (kind) {
    case AblationKind::kPhiForm:
      push("recurrent", [](PagaConfig& c) { c.phi_kind = PhiKind::kRecurrent; });
      push("summation", [](PagaConfig& c) { c.phi_kind = PhiKind::kSummation; });
      push("concatenation",
           [](PagaConfig& c) { c.phi_kind = PhiKind::kConcatenation; });
      break;
    case AblationKind::kEdgeFeatures:
      push("type+raw", [](PagaConfig& c) {
        c.edge_features = EdgeFeatureMode::kFull;
      });
      push("type_only", [](PagaConfig& c) {
        c.edge_features = EdgeFeatureMode::kTypeOnly;
        c.c_e = c.embed_width;
      });
      push("raw_only", [](PagaConfig& c) {
        c.edge_features = EdgeFeatureMode::kRawOnly;
        c.c_e = 6;
      });
      push("none", [](PagaConfig& c) {
        c.edge_features = EdgeFeatureMode::kZero;
        c.c_e = 1;
      });
      break;
    case AblationKind::kCapacity:
      push("ce32_head1", [](PagaConfig& c) {
        c.n_head = 1;
      });
      push("ce1_head8", [](PagaConfig& c) {
        c.embed_width = 1;
        c.edge_features = EdgeFeatureMode::kTypeOnly;
        c.c_e = 1;
      });
      push("ce32_head8", [](PagaConfig&) {});
      break;
  }
  return out;
}

struct AblationRow {
  std::string variant;
  int n_seeds = 0;
  double mean_mse = 0.0;
  double std_mse = 0.0;
};

struct AblationTable {
  AblationKind kind = AblationKind::kPhiForm;
  std::vector<AblationRow> rows;
};

// Runs every variant over the given seeds (fresh graph, dataset and
// initialization per seed) and reports mean and standard deviation of the
// eval MSE. Seeds fan out over a worker pool; aggregation order is fixed.
inline AblationTable run_ablation(AblationKind kind,
                                  const AblationTaskConfig& task_cfg,
                                  const std::vector<std::uint64_t>& seeds,
                                  int jobs = 1) {
  if (seeds.empty()) throw std::invalid_argument("run_ablation: empty seed list");
  std::vector<AblationVariant> variants = ablation_variants(kind, task_cfg.base);

  struct Job {
    std::size_t variant;
    std::size_t seed_index;
  };
  std::vector<Job> jobs_list;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs_list.push_back({v, s});
  }
  std::vector<double> mse(jobs_list.size(), 0.0);

  auto run_one = [&](std::size_t j) {
    const Job& job = jobs_list[j];
    const std::uint64_t seed = seeds[job.seed_index];
    LaneGraphConfig gcfg = task_cfg.graph;
    gcfg.seed = mix_seed(seed, 0x9a4b);
    ForkTask task = ForkTask::build(gcfg, task_cfg.base.lambda);
    ForkDataset data =
        gen_fork_dataset(task, task_cfg.n_train, task_cfg.n_eval, seed);
    mse[j] = train_fork_variant(task, data, variants[job.variant].cfg,
                                task_cfg.epochs, task_cfg.lr,
                                mix_seed(seed, 0x77 + job.variant));
  };

  if (jobs <= 1) {
    for (std::size_t j = 0; j < jobs_list.size(); ++j) run_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(jobs), jobs_list.size()));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < jobs_list.size();
             j = next.fetch_add(1)) {
          run_one(j);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  AblationTable table;
  table.kind = kind;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    AblationRow row;
    row.variant = variants[v].name;
    row.n_seeds = static_cast<int>(seeds.size());
    std::vector<double> vals;
    for (std::size_t j = 0; j < jobs_list.size(); ++j) {
      if (jobs_list[j].variant == v) vals.push_back(mse[j]);
    }
    const double n = static_cast<double>(vals.size());
    row.mean_mse = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
    double var = 0.0;
    for (double x : vals) var += (x - row.mean_mse) * (x - row.mean_mse);
    row.std_mse = std::sqrt(var / n);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace paga
