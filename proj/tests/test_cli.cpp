#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "paga/cli.hpp"

using namespace paga;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config files reject unknown keys") {
  cli::RunConfig cfg;
  CHECK_NOTHROW(cfg.apply_json({{"trials", 5}, {"lr", 0.02}}));
  CHECK(cfg.trials == 5);
  CHECK(cfg.lr == 0.02);
  CHECK_THROWS_AS(cfg.apply_json({{"leraning_rate", 0.1}}), cli::UsageError);
}

TEST_CASE("validate-graph command") {
  const fs::path dir = fs::temp_directory_path() / "paga_cli_validate";
  fs::create_directories(dir);
  SUBCASE("valid graph file") {
    const fs::path p = dir / "ok.json";
    save_graph(skip_graph(), p.string());
    std::ostringstream out;
    CHECK(cli::cmd_validate_graph(p.string(), out) == cli::kExitOk);
    CHECK(out.str() == "valid\n");
  }
  SUBCASE("missing file is an io error") {
    std::ostringstream out;
    CHECK(cli::cmd_validate_graph((dir / "nope.json").string(), out) ==
          cli::kExitIo);
  }
  SUBCASE("corrupted edge is reported with its index") {
    nlohmann::json j = graph_to_json(skip_graph());
    j["edges"][0]["source"] = 42;
    const fs::path p = dir / "corrupt.json";
    csv::write_file(p.string(), j.dump());
    std::ostringstream out;
    CHECK(cli::cmd_validate_graph(p.string(), out) == cli::kExitOk);
    CHECK(out.str().find("edge 0") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("skip experiment command writes deterministic csv artifacts") {
  const fs::path dir_a = fs::temp_directory_path() / "paga_cli_skip_a";
  const fs::path dir_b = fs::temp_directory_path() / "paga_cli_skip_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  cli::RunConfig cfg;
  cfg.command = "skip";
  cfg.trials = 2;
  cfg.seed = 7;
  cfg.epochs = 3;
  cfg.jobs = 2;
  std::ostringstream out_a, out_b;
  cfg.out_dir = dir_a.string();
  REQUIRE(cli::cmd_skip_experiment(cfg, out_a) == cli::kExitOk);
  cfg.out_dir = dir_b.string();
  REQUIRE(cli::cmd_skip_experiment(cfg, out_b) == cli::kExitOk);

  for (const char* name :
       {"paga_curves.csv", "paga_eval_curves.csv", "gcn_curves.csv",
        "gcn_eval_curves.csv", "summary.csv", "comparison.txt"}) {
    CAPTURE(name);
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }
  CHECK(out_a.str() == out_b.str());

  // Effective config echo lands in the output directory.
  CHECK(fs::exists(dir_a / "effective_config.json"));
  nlohmann::json echoed;
  std::ifstream(dir_a / "effective_config.json") >> echoed;
  CHECK(echoed.at("trials") == 2);
  CHECK(echoed.at("seed") == 7);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("skip experiment reports io failures with the io exit code") {
  cli::RunConfig cfg;
  cfg.command = "skip";
  cfg.trials = 1;
  cfg.epochs = 1;
  cfg.out_dir = "/proc/paga_not_writable";
  std::ostringstream out;
  CHECK(cli::cmd_skip_experiment(cfg, out) == cli::kExitIo);
}

TEST_CASE("out-of-range settings are usage errors") {
  cli::RunConfig cfg;
  cfg.command = "skip";
  cfg.trials = 0;
  std::ostringstream out;
  CHECK(cli::cmd_skip_experiment(cfg, out) == cli::kExitUsage);
  CHECK(out.str().find("trials") != std::string::npos);

  cli::RunConfig bad_batch;
  bad_batch.command = "skip";
  bad_batch.batch = 0;
  std::ostringstream out2;
  CHECK(cli::cmd_skip_experiment(bad_batch, out2) == cli::kExitUsage);
}

TEST_CASE("ablation command validates its seed list") {
  cli::RunConfig cfg;
  cfg.command = "ablation";
  cfg.seed_list = {};
  std::ostringstream out;
  CHECK(cli::cmd_ablation(cfg, out) == cli::kExitUsage);
  CHECK(out.str().find("empty seed list") != std::string::npos);
}

TEST_CASE("check mode fails fast when thresholds cannot be met") {
  const fs::path dir = fs::temp_directory_path() / "paga_cli_checkfail";
  fs::remove_all(dir);
  cli::RunConfig cfg;
  cfg.command = "skip";
  cfg.model = "paga";
  cfg.trials = 2;
  cfg.epochs = 1;  // far too few to reach the convergence threshold
  cfg.check = true;
  cfg.out_dir = dir.string();
  std::ostringstream out;
  CHECK(cli::cmd_skip_experiment(cfg, out) == cli::kExitCheckFailed);
  fs::remove_all(dir);
}

TEST_CASE("PAGA_SEED provides the default seed") {
  setenv("PAGA_SEED", "4711", 1);
  CHECK(cli::default_seed_from_env() == 4711);
  unsetenv("PAGA_SEED");
  CHECK(cli::default_seed_from_env() == 0);
}

TEST_CASE("gcn runs report the oracle floor for the configured depth") {
  const fs::path dir = fs::temp_directory_path() / "paga_cli_depth4";
  fs::remove_all(dir);
  cli::RunConfig cfg;
  cfg.command = "skip";
  cfg.model = "gcn";
  cfg.trials = 1;
  cfg.epochs = 2;
  cfg.depth = 4;
  cfg.out_dir = dir.string();
  std::ostringstream out;
  REQUIRE(cli::cmd_skip_experiment(cfg, out) == cli::kExitOk);
  CHECK(out.str().find("least-squares floor") != std::string::npos);
  const std::string summary = slurp(dir / "summary.csv");
  // The oracle column of the gcn row is populated.
  const auto last_comma = summary.rfind(',');
  REQUIRE(last_comma != std::string::npos);
  CHECK(summary.substr(last_comma + 1).find_first_not_of("\n") !=
        std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("model kind and phi kind names parse") {
  CHECK(model_kind_from_name("paga") == ModelKind::kPaga);
  CHECK(model_kind_from_name("gcn") == ModelKind::kGcn);
  CHECK(model_kind_from_name("gat") == ModelKind::kGat);
  CHECK_THROWS_AS(model_kind_from_name("mlp"), std::invalid_argument);
  CHECK(phi_kind_from_name("lstm") == PhiKind::kRecurrent);
  CHECK(phi_kind_from_name("sum") == PhiKind::kSummation);
  CHECK(phi_kind_from_name("concat") == PhiKind::kConcatenation);
}

TEST_CASE("gat model trains through the skip pipeline") {
  SkipDatasetConfig dcfg;
  dcfg.seed = 3;
  dcfg.n_train = 96;
  dcfg.n_eval = 32;
  SkipDataset d = gen_skip_dataset(dcfg);
  TrainConfig tcfg;
  tcfg.epochs = 2;
  tcfg.batch = 32;
  TrialResult r = train_skip(ModelKind::kGat, d, tcfg, 3);
  CHECK(!r.diverged);
  CHECK(r.train_curve.size() == 2);
  CHECK(std::isfinite(r.final_eval_mse));
}
