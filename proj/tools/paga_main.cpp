// Command-line front end: skip-interaction experiment, graph validation and
// ablation tables. Exit codes: 0 success, 1 acceptance-check failure,
// 2 usage error, 3 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "paga/cli.hpp"

#include "CLI11.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::strtoull(item.c_str(), nullptr, 10));
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  using paga::cli::RunConfig;

  CLI::App app{"Path-aware graph attention: experiments and graph tools"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.seed = paga::cli::default_seed_from_env();
  std::string config_path;
  std::string seeds_csv;
  bool seeds_given = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags override");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--jobs", cfg.jobs, "worker pool size");
    cmd->add_option("--seed", cfg.seed, "base seed (default from PAGA_SEED)");
  };

  CLI::App* skip = app.add_subcommand("skip", "run the skip-interaction experiment");
  add_common(skip);
  skip->add_option("--model", cfg.model, "paga | gcn | gat | both");
  skip->add_option("--trials", cfg.trials, "number of trials");
  skip->add_option("--epochs", cfg.epochs, "training epochs");
  skip->add_option("--lr", cfg.lr, "Adam learning rate");
  skip->add_option("--batch", cfg.batch, "minibatch size");
  skip->add_option("--lambda", cfg.lambda, "max path length");
  skip->add_option("--heads", cfg.heads, "attention heads");
  skip->add_option("--ce", cfg.ce, "edge feature channels");
  skip->add_option("--phi", cfg.phi, "lstm | sum | concat");
  double gamma_value = -1.0;
  CLI::Option* gamma_opt =
      skip->add_option("--gamma", gamma_value, "explicit per-length decay in (0,1)");
  skip->add_option("--depth", cfg.depth, "GCN depth");
  skip->add_flag("--check", cfg.check, "exit nonzero unless thresholds pass");

  CLI::App* validate =
      app.add_subcommand("validate-graph", "check a graph file's invariants");
  std::string graph_positional;
  validate->add_option("path", graph_positional, "graph JSON file");
  validate->add_option("--graph", cfg.graph_path, "graph JSON file");

  CLI::App* ablation = app.add_subcommand("ablation", "run an ablation table");
  add_common(ablation);
  ablation->add_option("--which", cfg.ablation,
                       "phi_form | edge_features | capacity");
  CLI::Option* seeds_opt = ablation->add_option(
      "--seeds", seeds_csv, "comma-separated seed list");
  ablation->add_option("--trials", cfg.trials,
                       "seed count when --seeds is absent");
  ablation->add_option("--epochs", cfg.ablation_epochs, "training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return paga::cli::kExitUsage;
  }
  seeds_given = seeds_opt->count() > 0;

  // Config file values sit between defaults and flags: re-parse flags on top.
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return paga::cli::kExitIo;
    }
    try {
      nlohmann::json j;
      in >> j;
      RunConfig file_cfg;
      file_cfg.seed = cfg.seed;
      file_cfg.apply_json(j);
      // Flags win: apply file first, then replay the command line.
      std::swap(cfg, file_cfg);
      app.clear();
      app.parse(argc, argv);
    } catch (const paga::cli::UsageError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return paga::cli::kExitUsage;
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return paga::cli::kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "error: bad config file: " << e.what() << "\n";
      return paga::cli::kExitUsage;
    }
  }

  if (gamma_opt->count() > 0) cfg.gamma = gamma_value;

  if (skip->parsed()) {
    cfg.command = "skip";
    try {
      return paga::cli::cmd_skip_experiment(cfg, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return paga::cli::kExitUsage;
    }
  }

  if (validate->parsed()) {
    cfg.command = "validate-graph";
    std::string path = !graph_positional.empty() ? graph_positional : cfg.graph_path;
    if (path.empty()) {
      std::cerr << "usage error: validate-graph needs a file path\n";
      return paga::cli::kExitUsage;
    }
    return paga::cli::cmd_validate_graph(path, std::cout);
  }

  if (ablation->parsed()) {
    cfg.command = "ablation";
    if (seeds_given) {
      cfg.seed_list = parse_seed_list(seeds_csv);
    } else if (cfg.seed_list.empty()) {
      for (int i = 0; i < cfg.trials; ++i) {
        cfg.seed_list.push_back(cfg.seed + static_cast<std::uint64_t>(i));
      }
    }
    try {
      return paga::cli::cmd_ablation(cfg, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return paga::cli::kExitUsage;
    }
  }

  return paga::cli::kExitUsage;
}
