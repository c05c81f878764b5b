#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dsgd/config.hpp"
#include "dsgd/harness.hpp"

using namespace dsgd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dsgd_test_" + name);
  fs::remove_all(dir);
  return dir;
}

// A few-second version of the preset.
RunConfig tiny() {
  RunConfig c = desk_preset();
  c.data.classes = 4;
  c.data.per_class = 40;
  c.data.dim = 4;
  c.hidden = 6;
  c.topology.agents = 4;
  c.epochs = 3;
  c.batch_size = 8;
  c.eval_every = 2;
  c.seeds = {1, 2};
  c.schedule.growth = 1.5;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DSGD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("preset values") {
  const auto c = desk_preset();
  CHECK(c.model_kind == ModelKind::mlp);
  CHECK(c.hidden == 64);
  CHECK(c.data.classes == 10);
  CHECK(c.data.per_class == 200);
  CHECK(c.data.dim == 32);
  CHECK(c.data.alpha == 0.01);
  CHECK(c.topology.kind == TopologyKind::ring);
  CHECK(c.topology.agents == 16);
  CHECK(c.epochs == 100);
  CHECK(c.batch_size == 32);
  CHECK(c.optimizer.base_lr == 0.01);
  CHECK(c.optimizer.milestones == std::vector<int>{50, 75});
  CHECK(c.optimizer.momentum == 0.9);
  CHECK(c.optimizer.weight_decay == 1e-4);
  CHECK(c.schedule.kind == ScheduleKind::exponential);
  CHECK(c.schedule.initial == 0.1);
  CHECK(gamma_at(c.schedule, 84) < 1.0);
  CHECK(gamma_at(c.schedule, 85) == 1.0);
  CHECK(c.seeds.size() == 3);
  CHECK(config_problems(c).empty());
}

TEST_CASE("config text round trip") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    RunConfig c = desk_preset();
    std::uniform_real_distribution<double> u(0.001, 1.0);
    c.schedule.kind = static_cast<ScheduleKind>(trial % 4);
    c.schedule.initial = u(rng);
    c.schedule.growth = 1.0 + u(rng);
    c.optimizer.base_lr = u(rng);
    c.optimizer.milestones = {static_cast<int>(trial), static_cast<int>(trial + 7)};
    c.data.spread = u(rng) * 10;
    c.seeds = {rng() % 1000, 1000 + rng() % 1000};
    c.verbose = trial % 2 == 0;
    c.output = "out/run_" + std::to_string(trial);
    const std::string text = serialize_config(c);
    REQUIRE(parse_config(text) == c);
    REQUIRE(serialize_config(parse_config(text)) == text);
  }
}

TEST_CASE("config parsing") {
  const auto c = parse_config("# comment\n[schedule]\nkind = cosine\n t_max=50 \n; other\n[run]\nseeds = 4, 5\n");
  CHECK(c.schedule.kind == ScheduleKind::cosine);
  CHECK(c.schedule.t_max == 50);
  CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(c.epochs == desk_preset().epochs);

  CHECK_THROWS_AS(parse_config("[schedule]\nwhat = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nepochs = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nepochs\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\nkind = cnn\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[optimizer]\nlr = 0.1x\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);

  RunConfig o = desk_preset();
  set_config_value(o, "optimizer.milestones", "");
  CHECK(o.optimizer.milestones.empty());
  set_config_value(o, "run.verbose", "yes");
  CHECK(o.verbose);
  CHECK(get_config_value(o, "topology.kind") == "ring");
}

TEST_CASE("config validation") {
  RunConfig c = desk_preset();
  c.seeds.clear();
  c.schedule.initial = 0.0;
  c.data.alpha = -1.0;
  const auto problems = config_problems(c);
  CHECK(problems.size() == 3);
  CHECK_THROWS_AS(check_config(c), ConfigError);

  RunConfig dup = desk_preset();
  dup.seeds = {1, 1};
  CHECK_FALSE(config_problems(dup).empty());

  RunConfig file = desk_preset();
  file.topology.kind = TopologyKind::file;
  CHECK_FALSE(config_problems(file).empty());
}

TEST_CASE("prepare validates custom topologies") {
  const auto dir = scratch("topology");
  fs::create_directories(dir);
  RunConfig c = tiny();
  c.topology.kind = TopologyKind::file;
  c.topology.path = (dir / "w.txt").string();
  std::ofstream(dir / "w.txt") << "4\n0.5 0.5 0 0\n0.5 0.5 0 0\n0 0 0.5 0.5\n0 0 0.5 0.5\n";
  CHECK_THROWS_AS(prepare(c), ConfigError);  // two components
  std::ofstream(dir / "w.txt", std::ios::trunc) << "4\n0.5 0.25 0 0.25\n0.25 0.5 0.25 0\n0 0.25 0.5 0.25\n0.25 0 0.25 0.5\n";
  CHECK(prepare(c).mixing.size() == 4);
  c.topology.agents = 5;
  CHECK_THROWS_AS(prepare(c), ConfigError);
}

TEST_CASE("csv datasets feed the same pipeline") {
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "data.csv");
    out << "a,b,label\n";
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 60; ++i) out << n(rng) + (i % 3) << "," << n(rng) << "," << i % 3 << "\n";
  }
  RunConfig c = tiny();
  c.data.source = DataSource::csv;
  c.data.csv_path = (dir / "data.csv").string();
  const auto w = prepare(c);
  CHECK(w.data.num_classes == 3);
  CHECK(w.model.input_dim == 2);
  CHECK(w.data.train.size() == 48);
  const auto summary = run_experiment(c, dir / "out");
  CHECK(summary.runs.size() == 2);
}

TEST_CASE("run_experiment writes reproducible outputs") {
  const auto dir = scratch("run");
  RunConfig c = tiny();
  c.verbose = true;
  const auto first = run_experiment(c, dir);
  REQUIRE(first.runs.size() == 2);
  CHECK(fs::exists(dir / "config.ini"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "seed_1" / "metrics.csv"));
  CHECK(fs::exists(dir / "seed_2" / "gossip_norms.csv"));
  CHECK(first.runs[0].metrics_path == fs::path("seed_1") / "metrics.csv");

  const auto [m, s] = mean_std({first.runs[0].result.final_accuracy, first.runs[1].result.final_accuracy});
  CHECK(first.mean_accuracy == m);
  CHECK(first.std_accuracy == s);

  const std::string summary = slurp(dir / "summary.csv");
  const std::string metrics = slurp(dir / "seed_2" / "metrics.csv");
  CHECK(summary.find("population") != std::string::npos);

  // Re-run from the persisted config alone.
  const auto persisted = load_config((dir / "config.ini").string());
  CHECK(persisted.output == dir.string());
  run_experiment(persisted, dir);
  CHECK(slurp(dir / "summary.csv") == summary);
  CHECK(slurp(dir / "seed_2" / "metrics.csv") == metrics);

  RunConfig parallel = c;
  parallel.jobs = 2;
  parallel.threads = 2;
  const auto pdir = scratch("run_parallel");
  run_experiment(parallel, pdir);
  CHECK(slurp(pdir / "seed_2" / "metrics.csv") == metrics);
}

TEST_CASE("single seed has zero spread") {
  RunConfig c = tiny();
  c.seeds = {9};
  const auto s = run_experiment(c, scratch("single"));
  CHECK(s.std_accuracy == 0.0);
  CHECK(s.mean_accuracy == s.runs[0].result.final_accuracy);
  CHECK(mean_std({0.5, 0.7, 0.9}).second == doctest::Approx(std::sqrt(0.08 / 3.0)).epsilon(1e-14));
}

TEST_CASE("sweep_gamma") {
  const auto dir = scratch("sweep");
  RunConfig c = tiny();
  std::ostringstream warn;
  const auto rows = sweep_gamma(c, {1.0, 0.5, 1.0}, dir, warn);
  REQUIRE(rows.size() == 2);
  CHECK(warn.str().find("duplicate gamma 1") != std::string::npos);
  CHECK(fs::exists(dir / "sweep_gamma.csv"));
  CHECK(fs::exists(dir / "gamma_0.5" / "summary.csv"));

  RunConfig baseline = c;
  baseline.schedule = ScheduleSpec::constant(1.0);
  const auto reference = run_experiment(baseline, scratch("sweep_baseline"));
  CHECK(rows[0].gamma == 1.0);
  CHECK(rows[0].mean_accuracy == reference.mean_accuracy);
  CHECK(rows[0].std_accuracy == reference.std_accuracy);

  std::ostringstream quiet;
  CHECK_THROWS_AS(sweep_gamma(c, {}, dir, quiet), ConfigError);
  CHECK_THROWS_AS(sweep_gamma(c, {0.0}, dir, quiet), ConfigError);
  CHECK_THROWS_AS(sweep_gamma(c, {1.2}, dir, quiet), ConfigError);
  CHECK(default_gamma_grid().size() == 10);
  CHECK(default_gamma_grid().back() == 1.0);
}

TEST_CASE("compare_ars") {
  SUBCASE("constant 1 in both arms gives identical rows") {
    RunConfig c = tiny();
    c.schedule = ScheduleSpec::constant(1.0);
    const auto dir = scratch("compare_same");
    const auto r = compare_ars(c, dir);
    CHECK(r.with_ars.mean_accuracy == r.without_ars.mean_accuracy);
    CHECK(slurp(dir / "with_ars" / "seed_1" / "metrics.csv") == slurp(dir / "without_ars" / "seed_1" / "metrics.csv"));
  }
  SUBCASE("arms differ only in the schedule") {
    const auto dir = scratch("compare");
    const auto r = compare_ars(tiny(), dir);
    CHECK(fs::exists(dir / "compare_ars.csv"));
    CHECK(fs::exists(dir / "fig2_consensus_error.csv"));
    CHECK(fs::exists(dir / "fig3_val_loss.csv"));
    auto with_cfg = load_config((dir / "with_ars" / "config.ini").string());
    auto without_cfg = load_config((dir / "without_ars" / "config.ini").string());
    CHECK(with_cfg.schedule == tiny().schedule);
    CHECK(without_cfg.schedule == ScheduleSpec::constant(1.0));
    with_cfg.schedule = without_cfg.schedule;
    with_cfg.output = without_cfg.output;
    CHECK(with_cfg == without_cfg);
    // Shared seeds, partitions and initial weights: the first round's local
    // step is identical, so gamma-1 epoch 0 differs only through gossip.
    CHECK(r.with_ars.runs[0].seed == r.without_ars.runs[0].seed);
    CHECK(r.with_ars.runs[0].result.epochs[0].gamma < r.without_ars.runs[0].result.epochs[0].gamma);
    const std::string fig2 = slurp(dir / "fig2_consensus_error.csv");
    CHECK(fig2.rfind("arm,seed,epoch,consensus_error\n", 0) == 0);
    CHECK(std::count(fig2.begin(), fig2.end(), '\n') == 1 + 2 * 2 * 3);
  }
}

TEST_CASE("output root override") {
  RunConfig c = desk_preset();
  c.output = "results/x";
  ::setenv(kOutputRootEnv, "/tmp/root", 1);
  CHECK(resolve_output(c) == fs::path("/tmp/root/results/x"));
  c.output = "/abs/path";
  CHECK(resolve_output(c) == fs::path("/abs/path"));
  ::unsetenv(kOutputRootEnv);
  c.output = "results/x";
  CHECK(resolve_output(c) == fs::path("results/x"));
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("cli");
  const std::string small =
      " --data.classes=3 --data.per_class=20 --data.dim=3 --model.hidden=4 --topology.agents=3 --run.epochs=2"
      " --run.seeds=1 --run.output=" + dir.string();
  CHECK(run_cli("validate-config" + small) == 0);
  CHECK(run_cli("validate-config --bogus.key=1") == 1);
  fs::create_directories(dir);
  const std::string printed = (dir / "printed.ini").string();
  REQUIRE(std::system((std::string(DSGD_CLI_PATH) + " validate-config --print" + small + " >" + printed + " 2>/dev/null").c_str()) == 0);
  CHECK(load_config(printed).topology.agents == 3);
  CHECK(run_cli("validate-config --run.epochs=0") == 1);
  CHECK(run_cli("nonsense") == 1);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("run" + small) == 0);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(run_cli("run" + small + " --optimizer.lr=1e300 --optimizer.milestones=") == 2);
  CHECK(fs::exists(dir / "seed_1" / "metrics.csv"));
  CHECK(run_cli("sweep-gamma" + small + " --gammas=0.5,1") == 0);
  CHECK(fs::exists(dir / "sweep_gamma.csv"));
  CHECK(run_cli("sweep-gamma" + small + " --gammas=1.5") == 1);
  CHECK(run_cli("compare-ars" + small) == 0);
  CHECK(fs::exists(dir / "compare_ars.csv"));
  CHECK(run_cli("run -c " + (dir / "config.ini").string()) == 0);
}
