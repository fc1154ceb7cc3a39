#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "paga/ablation.hpp"
#include "paga/csv.hpp"
#include "paga/graph_io.hpp"
#include "paga/skip_experiment.hpp"
#include "paga/thresholds.hpp"

#include "json.hpp"

namespace paga::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Effective configuration for one command invocation. Defaults equal the
// skip experiment settings; a config file may supply values and flags
// override them.
struct RunConfig {
  std::string command;
  std::string graph_path;
  std::string model = "both";  // paga | gcn | gat | both
  int trials = 100;
  std::uint64_t seed = 0;
  int epochs = 50;
  double lr = 0.01;
  int batch = 64;
  int lambda = 2;
  int heads = 1;
  int ce = 1;
  std::string phi = "concat";
  std::optional<double> gamma;
  int depth = 2;
  std::string out_dir = "out";
  int jobs = 1;
  bool check = false;
  std::string ablation = "phi_form";
  std::vector<std::uint64_t> seed_list;
  int ablation_epochs = 400;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    if (!graph_path.empty()) j["graph"] = graph_path;
    j["model"] = model;
    j["trials"] = trials;
    j["seed"] = seed;
    j["epochs"] = epochs;
    j["lr"] = lr;
    j["batch"] = batch;
    j["lambda"] = lambda;
    j["heads"] = heads;
    j["ce"] = ce;
    j["phi"] = phi;
    if (gamma) j["gamma"] = *gamma;
    j["depth"] = depth;
    j["out"] = out_dir;
    j["jobs"] = jobs;
    j["check"] = check;
    j["ablation"] = ablation;
    j["seeds"] = seed_list;
    j["ablation_epochs"] = ablation_epochs;
    return j;
  }

  // Applies a config file; unknown keys are rejected.
  void apply_json(const nlohmann::json& j) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k == "graph") graph_path = it->get<std::string>();
      else if (k == "model") model = it->get<std::string>();
      else if (k == "trials") trials = it->get<int>();
      else if (k == "seed") seed = it->get<std::uint64_t>();
      else if (k == "epochs") epochs = it->get<int>();
      else if (k == "lr") lr = it->get<double>();
      else if (k == "batch") batch = it->get<int>();
      else if (k == "lambda") lambda = it->get<int>();
      else if (k == "heads") heads = it->get<int>();
      else if (k == "ce") ce = it->get<int>();
      else if (k == "phi") phi = it->get<std::string>();
      else if (k == "gamma") gamma = it->get<double>();
      else if (k == "depth") depth = it->get<int>();
      else if (k == "out") out_dir = it->get<std::string>();
      else if (k == "jobs") jobs = it->get<int>();
      else if (k == "check") check = it->get<bool>();
      else if (k == "ablation") ablation = it->get<std::string>();
      else if (k == "seeds") seed_list = it->get<std::vector<std::uint64_t>>();
      else if (k == "ablation_epochs") ablation_epochs = it->get<int>();
      else if (k == "command") { /* informational */ }
      else throw UsageError("unknown config key: " + k);
    }
  }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw UsageError(what);
    };
    require(trials >= 1, "trials must be >= 1");
    require(epochs >= 1, "epochs must be >= 1");
    require(batch >= 1, "batch must be >= 1");
    require(lr > 0.0, "lr must be positive");
    require(lambda >= 1, "lambda must be >= 1");
    require(heads >= 1, "heads must be >= 1");
    require(ce >= 1, "ce must be >= 1");
    require(depth >= 0, "depth must be >= 0");
    require(jobs >= 1, "jobs must be >= 1");
    require(ablation_epochs >= 1, "ablation epochs must be >= 1");
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.lr = lr;
    t.batch = static_cast<std::size_t>(batch);
    t.gcn_depth = depth;
    t.paga.lambda = lambda;
    t.paga.n_head = static_cast<std::size_t>(heads);
    t.paga.c_e = static_cast<std::size_t>(ce);
    t.paga.embed_width = static_cast<std::size_t>(ce);
    t.paga.phi_kind = phi_kind_from_name(phi);
    t.paga.gamma = gamma;
    return t;
  }
};

inline std::uint64_t default_seed_from_env() {
  if (const char* env = std::getenv("PAGA_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

namespace detail {

inline void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);
  // Probe writability now so failures map to the I/O exit code.
  const std::string probe = dir + "/.write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw std::runtime_error("output directory not writable: " + dir);
  }
  std::filesystem::remove(probe, ec);
}

inline std::string curves_csv(const std::vector<TrialResult>& trials,
                              bool eval_curve) {
  std::string s = "trial,epoch,loss\n";
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const auto& curve = eval_curve ? trials[t].eval_curve : trials[t].train_curve;
    for (std::size_t e = 0; e < curve.size(); ++e) {
      s += std::to_string(t);
      s += ',';
      s += std::to_string(e);
      s += ',';
      s += csv::format_double(curve[e]);
      s += '\n';
    }
  }
  return s;
}

inline std::string summary_csv(const std::vector<TrialSummary>& summaries,
                               const std::vector<double>& oracle_floor_half) {
  std::string s =
      "model,trials,diverged,mean_final_loss,std_final_loss,min_final_loss,"
      "max_final_loss,mean_eval_mse,mse_a,mse_b,mse_c,oracle_floor\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const TrialSummary& m = summaries[i];
    s += model_kind_name(m.kind);
    s += ',' + std::to_string(m.n_trials);
    s += ',' + std::to_string(m.n_diverged);
    s += ',' + csv::format_double(m.mean_final_loss);
    s += ',' + csv::format_double(m.std_final_loss);
    s += ',' + csv::format_double(m.min_final_loss);
    s += ',' + csv::format_double(m.max_final_loss);
    s += ',' + csv::format_double(m.mean_eval_mse);
    s += ',' + csv::format_double(m.mean_mse_vertex[0]);
    s += ',' + csv::format_double(m.mean_mse_vertex[1]);
    s += ',' + csv::format_double(m.mean_mse_vertex[2]);
    s += ',' + (i < oracle_floor_half.size() && oracle_floor_half[i] >= 0.0
                    ? csv::format_double(oracle_floor_half[i])
                    : std::string(""));
    s += '\n';
  }
  return s;
}

inline std::string ablation_csv(const AblationTable& table) {
  std::string s = "ablation,variant,seeds,mean_mse,std_mse\n";
  for (const AblationRow& r : table.rows) {
    s += ablation_kind_name(table.kind);
    s += ',' + r.variant;
    s += ',' + std::to_string(r.n_seeds);
    s += ',' + csv::format_double(r.mean_mse);
    s += ',' + csv::format_double(r.std_mse);
    s += '\n';
  }
  return s;
}

}  // namespace detail

// Result bundle so tests can check the skip experiment without touching the
// filesystem twice.
struct SkipExperimentReport {
  std::vector<TrialsOutput> runs;
  std::vector<double> oracle_floor_half;  // per run; -1 when not applicable
  bool check_passed = true;
  std::string comparison_text;
};

inline SkipExperimentReport run_skip_experiment(const RunConfig& cfg) {
  SkipExperimentReport report;
  std::vector<ModelKind> kinds;
  if (cfg.model == "both") {
    kinds = {ModelKind::kPaga, ModelKind::kGcn};
  } else {
    kinds = {model_kind_from_name(cfg.model)};
  }
  const TrainConfig tcfg = cfg.train_config();
  const Tensor laplacian = gcn_laplacian(skip_graph());

  std::ostringstream text;
  for (ModelKind kind : kinds) {
    TrialsOutput run = run_trials(kind, cfg.trials, cfg.seed, tcfg, cfg.jobs);
    double floor_half = -1.0;
    if (kind == ModelKind::kGcn) {
      // Mean train-set floor across trials, in the training objective's
      // half-MSE convention.
      double acc = 0.0;
      int n = 0;
      for (int i = 0; i < cfg.trials; ++i) {
        SkipDatasetConfig dcfg;
        dcfg.seed = cfg.seed + static_cast<std::uint64_t>(i);
        SkipDataset data = gen_skip_dataset(dcfg);
        acc += 0.5 * linear_gcn_oracle(data.x_train, data.y_train, laplacian,
                                       tcfg.gcn_depth);
        ++n;
      }
      floor_half = acc / n;
    }
    report.oracle_floor_half.push_back(floor_half);

    const TrialSummary& s = run.summary;
    text << model_kind_name(kind) << ": mean final loss "
         << csv::format_double(s.mean_final_loss) << " (min "
         << csv::format_double(s.min_final_loss) << ", max "
         << csv::format_double(s.max_final_loss) << "), mean eval MSE "
         << csv::format_double(s.mean_eval_mse) << ", MSE on a "
         << csv::format_double(s.mean_mse_vertex[0]);
    if (floor_half >= 0.0) {
      text << ", least-squares floor " << csv::format_double(floor_half);
    }
    text << "\n";

    if (cfg.check) {
      if (kind == ModelKind::kPaga) {
        int passed = 0;
        for (const TrialResult& t : run.trials) {
          if (!t.diverged && t.final_eval_mse < thresholds::kPagaEvalMse) ++passed;
        }
        const double frac = static_cast<double>(passed) / cfg.trials;
        if (frac < thresholds::kPagaPassFraction) report.check_passed = false;
        text << "  check: " << passed << "/" << cfg.trials << " trials below "
             << thresholds::kPagaEvalMse << "\n";
      }
      if (kind == ModelKind::kGcn) {
        bool ok = s.mean_final_loss >= thresholds::kGcnMeanLossLo &&
                  s.mean_final_loss <= thresholds::kGcnMeanLossHi &&
                  s.mean_mse_vertex[0] >= thresholds::kGcnMseVertexALo &&
                  s.mean_mse_vertex[0] <= thresholds::kGcnMseVertexAHi &&
                  s.mean_final_loss - floor_half <= thresholds::kGcnOracleGapMax &&
                  s.mean_final_loss >= floor_half - thresholds::kGcnOracleUndershoot;
        if (!ok) report.check_passed = false;
        text << "  check: band [" << thresholds::kGcnMeanLossLo << ", "
             << thresholds::kGcnMeanLossHi << "], floor gap "
             << csv::format_double(s.mean_final_loss - floor_half) << "\n";
      }
    }
    report.runs.push_back(std::move(run));
  }
  report.comparison_text = text.str();
  return report;
}

// Writes curves, summary and comparison artifacts. Returns the exit code.
inline int cmd_skip_experiment(const RunConfig& cfg, std::ostream& out) {
  try {
    cfg.validate();
  } catch (const UsageError& e) {
    out << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    detail::ensure_out_dir(cfg.out_dir);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitIo;
  }
  SkipExperimentReport report;
  try {
    report = run_skip_experiment(cfg);
  } catch (const std::invalid_argument& e) {
    out << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    csv::write_file(cfg.out_dir + "/effective_config.json",
                    cfg.to_json().dump(2) + "\n");
    std::vector<TrialSummary> summaries;
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
      const std::string name = model_kind_name(report.runs[i].summary.kind);
      csv::write_file(cfg.out_dir + "/" + name + "_curves.csv",
                      detail::curves_csv(report.runs[i].trials, false));
      csv::write_file(cfg.out_dir + "/" + name + "_eval_curves.csv",
                      detail::curves_csv(report.runs[i].trials, true));
      summaries.push_back(report.runs[i].summary);
    }
    csv::write_file(cfg.out_dir + "/summary.csv",
                    detail::summary_csv(summaries, report.oracle_floor_half));
    csv::write_file(cfg.out_dir + "/comparison.txt", report.comparison_text);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitIo;
  }
  out << report.comparison_text;
  if (cfg.check && !report.check_passed) {
    out << "acceptance thresholds NOT met\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

inline int cmd_validate_graph(const std::string& path, std::ostream& out) {
  if (!std::filesystem::exists(path)) {
    out << "error: no such file: " << path << "\n";
    return kExitIo;
  }
  const std::string verdict = validate_graph_file(path);
  out << verdict << "\n";
  return kExitOk;
}

inline int cmd_ablation(const RunConfig& cfg, std::ostream& out) {
  if (cfg.seed_list.empty()) {
    out << "usage error: empty seed list\n";
    return kExitUsage;
  }
  try {
    cfg.validate();
  } catch (const UsageError& e) {
    out << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    detail::ensure_out_dir(cfg.out_dir);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitIo;
  }
  AblationTable table;
  try {
    AblationTaskConfig task;
    task.epochs = cfg.ablation_epochs;
    table = run_ablation(ablation_kind_from_name(cfg.ablation), task,
                         cfg.seed_list, cfg.jobs);
  } catch (const std::invalid_argument& e) {
    out << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    csv::write_file(cfg.out_dir + "/effective_config.json",
                    cfg.to_json().dump(2) + "\n");
    csv::write_file(cfg.out_dir + "/ablation_" + cfg.ablation + ".csv",
                    detail::ablation_csv(table));
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitIo;
  }
  for (const AblationRow& r : table.rows) {
    out << ablation_kind_name(table.kind) << " " << r.variant << ": "
        << csv::format_double(r.mean_mse) << " +- "
        << csv::format_double(r.std_mse) << " (" << r.n_seeds << " seeds)\n";
  }
  return kExitOk;
}

}  // namespace paga::cli
