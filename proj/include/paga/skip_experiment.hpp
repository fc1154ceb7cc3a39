#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "paga/adam.hpp"
#include "paga/attention.hpp"
#include "paga/gat.hpp"
#include "paga/gcn.hpp"
#include "paga/graph.hpp"
#include "paga/paths.hpp"

namespace paga {

// The three-vertex skip-interaction graph: a -> b -> c with one edge type
// per edge and no raw edge features.
inline HeteroGraph skip_graph() {
  std::vector<Edge> edges;
  edges.push_back(Edge{0, 0, 1, 0, {}});
  edges.push_back(Edge{1, 1, 2, 1, {}});
  return HeteroGraph::build(3, Tensor::zeros({3, 1}), std::move(edges));
}

// Target attention: vertex a copies c, b and c keep themselves.
inline Tensor target_psi() {
  return Tensor({3, 3}, {0, 0, 1, 0, 1, 0, 0, 0, 1});
}

struct SkipDatasetConfig {
  std::size_t n_train = 4500;
  std::size_t n_eval = 500;
  std::uint64_t seed = 0;
};

// Columns are examples: x rows are vertices (a, b, c), x(a) = 0 everywhere,
// x(b), x(c) i.i.d. standard normal. Labels follow y(a)=x(c), y(b)=x(b),
// y(c)=x(c) exactly.
struct SkipDataset {
  Tensor x_train, y_train;  // [3, n_train]
  Tensor x_eval, y_eval;    // [3, n_eval]
};

inline SkipDataset gen_skip_dataset(const SkipDatasetConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0x5da7a5e7));
  auto make = [&rng](std::size_t n) {
    Tensor x = Tensor::zeros({3, n});
    Tensor y = Tensor::zeros({3, n});
    for (std::size_t i = 0; i < n; ++i) {
      const double xb = rng.normal();
      const double xc = rng.normal();
      x.at(1, i) = xb;
      x.at(2, i) = xc;
      y.at(0, i) = xc;
      y.at(1, i) = xb;
      y.at(2, i) = xc;
    }
    return std::make_pair(x, y);
  };
  SkipDataset d;
  std::tie(d.x_train, d.y_train) = make(cfg.n_train);
  std::tie(d.x_eval, d.y_eval) = make(cfg.n_eval);
  return d;
}

enum class ModelKind { kPaga, kGcn, kGat };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kPaga: return "paga";
    case ModelKind::kGcn: return "gcn";
    case ModelKind::kGat: return "gat";
  }
  return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
  if (s == "paga") return ModelKind::kPaga;
  if (s == "gcn") return ModelKind::kGcn;
  if (s == "gat") return ModelKind::kGat;
  throw std::invalid_argument("unknown model kind: " + s);
}

struct TrainConfig {
  int epochs = 50;
  double lr = 0.01;
  std::size_t batch = 64;
  int gcn_depth = 2;

  // Skip-experiment PAGA settings; hidden size 1 and a linear (concatenation) Phi,
  // no nonlinearities anywhere in the skip-experiment models.
  PagaConfig paga = [] {
    PagaConfig c;
    c.lambda = 2;
    c.c_e = 1;
    c.n_head = 1;
    c.phi_kind = PhiKind::kConcatenation;
    c.c_x = 1;
    c.c_y = 1;
    c.lstm_hidden = 1;
    c.embed_width = 1;
    c.edge_features = EdgeFeatureMode::kFull;  // skip-interaction edges carry no raw features
    return c;
  }();
};

struct TrialResult {
  std::vector<double> train_curve;  // objective on the full train set per epoch
  std::vector<double> eval_curve;   // plain eval MSE per epoch
  double final_eval_mse = 0.0;
  double mse_vertex[3] = {0, 0, 0};
  bool diverged = false;

  double final_train_loss() const {
    return train_curve.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : train_curve.back();
  }
};

// Training objective: half mean squared error. Eval metrics are reported as
// plain mean squared error.
inline double half_mse(const Tensor& pred, const Tensor& target) {
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return 0.5 * s / static_cast<double>(pred.size());
}

namespace detail {

inline Tensor gather_columns(const Tensor& m, const std::vector<std::size_t>& cols) {
  Tensor out = Tensor::zeros({m.rows(), cols.size()});
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out.at(r, c) = m.at(r, cols[c]);
    }
  }
  return out;
}

// One trainable skip-experiment model behind a common interface.
struct SkipModel {
  ModelKind kind;
  HeteroGraph graph;
  std::vector<PathIndex> paths;
  std::optional<PagaModel> paga;
  std::optional<LinearGcn> gcn;
  std::vector<GatLayer> gat_layers;
  nn::ParamStore gat_params;

  static SkipModel create(ModelKind kind, const TrainConfig& cfg, Rng& rng) {
    SkipModel m;
    m.kind = kind;
    m.graph = skip_graph();
    switch (kind) {
      case ModelKind::kPaga:
        m.paths = enumerate_all_paths(m.graph, cfg.paga.lambda);
        m.paga = PagaModel::create(m.graph, cfg.paga, rng);
        break;
      case ModelKind::kGcn:
        m.gcn = LinearGcn::create(m.graph, cfg.gcn_depth, rng);
        break;
      case ModelKind::kGat: {
        for (int l = 0; l < 2; ++l) {
          GatLayer layer;
          layer.prefix = "gat" + std::to_string(l);
          m.gat_layers.push_back(layer);
          layer.init_params(m.gat_params, rng);
        }
        break;
      }
    }
    return m;
  }

  nn::ParamStore& param_store() {
    switch (kind) {
      case ModelKind::kPaga: return paga->params;
      case ModelKind::kGcn: return gcn->params;
      case ModelKind::kGat: return gat_params;
    }
    throw std::logic_error("unreachable");
  }

  ad::Var forward(ad::Tape& tape, const nn::BoundParams& bound, ad::Var x) const {
    switch (kind) {
      case ModelKind::kPaga: {
        AttentionHeads heads = paga->psi(tape, bound, graph, paths);
        return paga_forward_columns(heads, x, bound["mix.weight"]);
      }
      case ModelKind::kGcn:
        return gcn->forward_columns(tape, bound, x);
      case ModelKind::kGat:
        return gat_forward_columns(tape, bound, graph, gat_layers, x);
    }
    throw std::logic_error("unreachable");
  }

  Tensor predict(const Tensor& x) {
    ad::Tape tape;
    nn::BoundParams bound = nn::BoundParams::bind(tape, param_store());
    return forward(tape, bound, tape.constant(x)).value();
  }
};

}  // namespace detail

// One seeded training run of the skip experiment: the dataset stream is
// shared across model kinds for a given seed, initialization is per-kind.
inline TrialResult train_skip(ModelKind kind, const SkipDataset& data,
                              const TrainConfig& cfg, std::uint64_t seed) {
  if (cfg.epochs < 1) throw std::invalid_argument("train_skip: epochs must be >= 1");
  if (cfg.batch < 1) throw std::invalid_argument("train_skip: batch must be >= 1");
  Rng init_rng(mix_seed(seed, 0x10 + static_cast<std::uint64_t>(kind)));
  Rng shuffle_rng(mix_seed(seed, 0xdea1));
  detail::SkipModel model = detail::SkipModel::create(kind, cfg, init_rng);

  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  AdamState adam(adam_cfg);

  const std::size_t n = data.x_train.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrialResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      const std::size_t stop = std::min(n, start + cfg.batch);
      std::vector<std::size_t> cols(order.begin() + start, order.begin() + stop);
      Tensor xb = detail::gather_columns(data.x_train, cols);
      Tensor yb = detail::gather_columns(data.y_train, cols);

      ad::Tape tape;
      nn::BoundParams bound = nn::BoundParams::bind(tape, model.param_store());
      ad::Var pred = model.forward(tape, bound, tape.constant(xb));
      ad::Var loss = ad::scale(ad::mse_loss(pred, tape.constant(yb)), 0.5);
      if (!std::isfinite(loss.value().item())) {
        result.diverged = true;
        break;
      }
      tape.backward(loss);
      adam.step(model.param_store(), bound.grads());
    }
    if (result.diverged) break;

    Tensor train_pred = model.predict(data.x_train);
    Tensor eval_pred = model.predict(data.x_eval);
    result.train_curve.push_back(half_mse(train_pred, data.y_train));
    result.eval_curve.push_back(2.0 * half_mse(eval_pred, data.y_eval));
  }

  if (!result.diverged) {
    Tensor eval_pred = model.predict(data.x_eval);
    result.final_eval_mse = result.eval_curve.back();
    const std::size_t m = data.x_eval.cols();
    for (std::size_t v = 0; v < 3; ++v) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = eval_pred.at(v, i) - data.y_eval.at(v, i);
        s += d * d;
      }
      result.mse_vertex[v] = s / static_cast<double>(m);
    }
  } else {
    result.final_eval_mse = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

struct TrialSummary {
  ModelKind kind = ModelKind::kPaga;
  int n_trials = 0;
  int n_diverged = 0;
  double mean_final_loss = 0.0;
  double std_final_loss = 0.0;
  double min_final_loss = 0.0;
  double max_final_loss = 0.0;
  double mean_eval_mse = 0.0;
  double mean_mse_vertex[3] = {0, 0, 0};
};

struct TrialsOutput {
  std::vector<TrialResult> trials;
  TrialSummary summary;
};

inline TrialSummary summarize(ModelKind kind,
                              const std::vector<TrialResult>& trials) {
  TrialSummary s;
  s.kind = kind;
  s.n_trials = static_cast<int>(trials.size());
  std::vector<double> losses;
  for (const TrialResult& t : trials) {
    if (t.diverged) {
      ++s.n_diverged;
      continue;
    }
    losses.push_back(t.final_train_loss());
    s.mean_eval_mse += t.final_eval_mse;
    for (int v = 0; v < 3; ++v) s.mean_mse_vertex[v] += t.mse_vertex[v];
  }
  if (!losses.empty()) {
    const double n = static_cast<double>(losses.size());
    s.mean_final_loss = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
    double var = 0.0;
    for (double l : losses) var += (l - s.mean_final_loss) * (l - s.mean_final_loss);
    s.std_final_loss = std::sqrt(var / n);
    s.min_final_loss = *std::min_element(losses.begin(), losses.end());
    s.max_final_loss = *std::max_element(losses.begin(), losses.end());
    s.mean_eval_mse /= n;
    for (int v = 0; v < 3; ++v) s.mean_mse_vertex[v] /= n;
  }
  return s;
}

// n_trials independent runs with distinct seeds base_seed + i. Trials may run
// on a worker pool; aggregation order is by trial index, so results do not
// depend on the job count.
inline TrialsOutput run_trials(ModelKind kind, int n_trials,
                               std::uint64_t base_seed, const TrainConfig& cfg,
                               int jobs = 1) {
  TrialsOutput out;
  out.trials.resize(n_trials);
  auto run_one = [&](int i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    SkipDatasetConfig dcfg;
    dcfg.seed = seed;
    SkipDataset data = gen_skip_dataset(dcfg);
    out.trials[i] = train_skip(kind, data, cfg, seed);
  };
  if (jobs <= 1 || n_trials <= 1) {
    for (int i = 0; i < n_trials; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, n_trials);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n_trials; i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  out.summary = summarize(kind, out.trials);
  return out;
}

// Exact least-squares floor of the linear GCN class: fits y against the
// feature family {L^k x : 0 <= k <= depth} with coefficients shared across
// vertices (one row per vertex output), via the pseudo-inverse of the normal
// equations. Returns the plain residual MSE on the given dataset.
inline double linear_gcn_oracle(const Tensor& x, const Tensor& y,
                                const Tensor& laplacian, int depth) {
  const std::size_t V = x.rows();
  const std::size_t n = x.cols();
  const std::size_t k = static_cast<std::size_t>(depth) + 1;

  // Features per example column, stacked per vertex row.
  std::vector<Tensor> feats;  // each [V, n]
  Tensor p = Tensor::identity(V);
  for (std::size_t i = 0; i < k; ++i) {
    feats.push_back(matmul_values(p, x));
    p = matmul_values(p, laplacian);
  }

  // Normal equations A beta = b over the k coefficients.
  Tensor a = Tensor::zeros({k, k});
  std::vector<double> b(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double s = 0.0;
      for (std::size_t e = 0; e < feats[i].size(); ++e) s += feats[i][e] * feats[j][e];
      a.at(i, j) = a.at(j, i) = s;
    }
    double s = 0.0;
    for (std::size_t e = 0; e < feats[i].size(); ++e) s += feats[i][e] * y[e];
    b[i] = s;
  }

  // Jacobi eigendecomposition of the small symmetric normal matrix; rank
  // deficiency handled by zeroing small eigenvalues (pseudo-inverse).
  Tensor q = Tensor::identity(k);
  Tensor d = a;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) off += d.at(i, j) * d.at(i, j);
    }
    if (off < 1e-24) break;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        if (std::abs(d.at(i, j)) < 1e-300) continue;
        const double theta = (d.at(j, j) - d.at(i, i)) / (2.0 * d.at(i, j));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < k; ++r) {
          const double dri = d.at(r, i), drj = d.at(r, j);
          d.at(r, i) = c * dri - s * drj;
          d.at(r, j) = s * dri + c * drj;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double dir = d.at(i, r), djr = d.at(j, r);
          d.at(i, r) = c * dir - s * djr;
          d.at(j, r) = s * dir + c * djr;
          const double qri = q.at(r, i), qrj = q.at(r, j);
          q.at(r, i) = c * qri - s * qrj;
          q.at(r, j) = s * qri + c * qrj;
        }
      }
    }
  }
  double max_eig = 0.0;
  for (std::size_t i = 0; i < k; ++i) max_eig = std::max(max_eig, std::abs(d.at(i, i)));
  const double tol = max_eig * 1e-12;
  std::vector<double> beta(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double eig = d.at(i, i);
    if (std::abs(eig) <= tol) continue;
    double qb = 0.0;
    for (std::size_t r = 0; r < k; ++r) qb += q.at(r, i) * b[r];
    for (std::size_t r = 0; r < k; ++r) beta[r] += q.at(r, i) * qb / eig;
  }

  double rss = 0.0;
  for (std::size_t e = 0; e < V * n; ++e) {
    double pred = 0.0;
    for (std::size_t i = 0; i < k; ++i) pred += beta[i] * feats[i][e];
    const double r = pred - y[e];
    rss += r * r;
  }
  return rss / static_cast<double>(V * n);
}

}  // namespace paga
