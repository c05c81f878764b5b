#include "dsgd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace dsgd {
namespace {

constexpr const char* kStdNote = "# std: population standard deviation over seeds (divides by the seed count)\n";

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string metrics_text(std::span<const EpochMetrics> rows) {
  std::ostringstream out;
  write_metrics_csv(out, rows);
  return out.str();
}

std::string gossip_norms_text(const std::vector<std::vector<double>>& norms) {
  std::string out = "epoch,agent,gossip_error_norm\n";
  for (std::size_t e = 0; e < norms.size(); ++e) {
    for (std::size_t a = 0; a < norms[e].size(); ++a) {
      out += std::to_string(e) + "," + std::to_string(a) + "," + format_real(norms[e][a]) + "\n";
    }
  }
  return out;
}

std::string gamma_dir_name(double gamma) { return "gamma_" + format_real(gamma); }

}  // namespace

Workload prepare(const RunConfig& config) {
  check_config(config);
  Dataset data;
  try {
    if (config.data.source == DataSource::blobs) {
      data = generate_blobs(config.data.classes, config.data.per_class, config.data.dim, config.data.spread, config.data.seed);
    } else {
      const Samples all = load_csv(config.data.csv_path);
      int classes = 0;
      for (int c : all.labels) classes = std::max(classes, c + 1);
      if (classes < 2) throw ConfigError("dataset csv needs at least two classes");
      data = split_stratified(all, classes, config.data.seed);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (data.test.size() == 0) throw ConfigError("test split is empty; need at least 10 samples per class");

  std::optional<MixingMatrix> w;
  try {
    switch (config.topology.kind) {
      case TopologyKind::ring: w = build_ring(config.topology.agents); break;
      case TopologyKind::complete: w = build_complete(config.topology.agents); break;
      case TopologyKind::file: w = load_mixing_matrix(config.topology.path); break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (w->size() != config.topology.agents) {
    throw ConfigError("mixing matrix has " + std::to_string(w->size()) + " agents but topology.agents = " +
                      std::to_string(config.topology.agents));
  }
  const auto report = validate(*w);
  if (!report.ok()) {
    std::string msg = "mixing matrix rejected:";
    for (const auto& d : report.details) msg += "\n  - " + d;
    throw ConfigError(msg);
  }
  if (config.topology.agents > data.train.size()) {
    throw ConfigError("more agents than training samples");
  }
  ModelSpec model = model_spec(config, data.train.dim, data.num_classes);
  return Workload{std::move(data), std::move(*w), model};
}

TrainingConfig training_config(const RunConfig& config, const ModelSpec& model) {
  TrainingConfig t;
  t.model = model;
  t.optimizer = config.optimizer;
  t.schedule = config.schedule;
  t.epochs = config.epochs;
  t.batch_size = config.batch_size;
  t.eval_every = config.eval_every;
  t.threads = config.threads;
  t.verbose = config.verbose;
  return t;
}

Partition seed_partition(const RunConfig& config, const Dataset& data, std::uint64_t seed) {
  return dirichlet_partition(data.train.labels, config.topology.agents, config.data.alpha, seed);
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

ExperimentSummary run_experiment(const RunConfig& config, const fs::path& dir) {
  RunConfig resolved = config;
  resolved.output = dir.string();
  const Workload work = prepare(resolved);
  const TrainingConfig tc = training_config(resolved, work.model);
  write_file(dir / "config.ini", serialize_config(resolved));

  const std::size_t count = resolved.seeds.size();
  ExperimentSummary summary;
  summary.runs.resize(count);
  std::vector<std::exception_ptr> errors(count);

  auto train_one = [&](std::size_t k) {
    const std::uint64_t seed = resolved.seeds[k];
    SeedRun& run = summary.runs[k];
    run.seed = seed;
    run.metrics_path = fs::path("seed_" + std::to_string(seed)) / "metrics.csv";
    try {
      const Partition partition = seed_partition(resolved, work.data, seed);
      run.result = run_training(tc, work.data, partition, work.mixing, seed);
    } catch (const TrainingAbort& abort) {
      write_file(dir / run.metrics_path, metrics_text(abort.completed()));
      errors[k] = std::make_exception_ptr(SeedAbort(seed, abort.what()));
      return;
    } catch (...) {
      errors[k] = std::current_exception();
      return;
    }
    write_file(dir / run.metrics_path, metrics_text(run.result.epochs));
    if (resolved.verbose) {
      write_file(dir / run.metrics_path.parent_path() / "gossip_norms.csv", gossip_norms_text(run.result.gossip_norms));
    }
  };

  const std::size_t jobs = std::min(resolved.jobs, count);
  if (jobs <= 1) {
    for (std::size_t k = 0; k < count; ++k) train_one(k);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] {
        for (std::size_t k = j; k < count; k += jobs) train_one(k);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> accs;
  std::string text = kStdNote;
  text += "seed,test_acc_consensus,metrics\n";
  for (const auto& run : summary.runs) {
    accs.push_back(run.result.final_accuracy);
    text += std::to_string(run.seed) + "," + format_real(run.result.final_accuracy) + "," +
            run.metrics_path.generic_string() + "\n";
  }
  std::tie(summary.mean_accuracy, summary.std_accuracy) = mean_std(accs);
  text += "mean," + format_real(summary.mean_accuracy) + ",\n";
  text += "std," + format_real(summary.std_accuracy) + ",\n";
  write_file(dir / "summary.csv", text);
  return summary;
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<SweepRow> sweep_gamma(const RunConfig& config, std::vector<double> gammas, const fs::path& dir,
                                  std::ostream& warn) {
  if (gammas.empty()) throw ConfigError("sweep-gamma: empty gamma list");
  std::vector<double> unique;
  for (double g : gammas) {
    if (!(g > 0.0 && g <= 1.0)) throw ConfigError("sweep-gamma: gamma " + format_real(g) + " outside (0, 1]");
    if (std::find(unique.begin(), unique.end(), g) != unique.end()) {
      warn << "warning: duplicate gamma " << format_real(g) << " ignored\n";
      continue;
    }
    unique.push_back(g);
  }
  check_config(config);

  RunConfig base = config;
  base.output = dir.string();
  write_file(dir / "config.ini", serialize_config(base));

  std::vector<SweepRow> rows;
  std::string table = kStdNote;
  table += "gamma,mean_acc,std_acc\n";
  for (double g : unique) {
    RunConfig arm = base;
    arm.schedule = ScheduleSpec::constant(g);
    const auto summary = run_experiment(arm, dir / gamma_dir_name(g));
    rows.push_back({g, summary.mean_accuracy, summary.std_accuracy});
    table += format_real(g) + "," + format_real(summary.mean_accuracy) + "," + format_real(summary.std_accuracy) + "\n";
  }
  write_file(dir / "sweep_gamma.csv", table);
  return rows;
}

ArsComparison compare_ars(const RunConfig& config, const fs::path& dir) {
  check_config(config);
  RunConfig base = config;
  base.output = dir.string();
  write_file(dir / "config.ini", serialize_config(base));

  RunConfig baseline = base;
  baseline.schedule = ScheduleSpec::constant(1.0);
  ArsComparison out;
  out.without_ars = run_experiment(baseline, dir / "without_ars");
  out.with_ars = run_experiment(base, dir / "with_ars");

  std::string table = kStdNote;
  table += "arm,schedule,mean_acc,std_acc\n";
  table += "without_ars," + describe(baseline.schedule) + "," + format_real(out.without_ars.mean_accuracy) + "," +
           format_real(out.without_ars.std_accuracy) + "\n";
  table += "with_ars," + describe(base.schedule) + "," + format_real(out.with_ars.mean_accuracy) + "," +
           format_real(out.with_ars.std_accuracy) + "\n";
  write_file(dir / "compare_ars.csv", table);

  std::string fig2 = "arm,seed,epoch,consensus_error\n";
  std::string fig3 = "arm,seed,epoch,val_loss_mean\n";
  for (const auto& [name, summary] : {std::pair<const char*, const ExperimentSummary*>{"without_ars", &out.without_ars},
                                      {"with_ars", &out.with_ars}}) {
    for (const auto& run : summary->runs) {
      for (const auto& row : run.result.epochs) {
        const std::string prefix = std::string(name) + "," + std::to_string(run.seed) + "," + std::to_string(row.epoch) + ",";
        fig2 += prefix + format_real(row.consensus_error) + "\n";
        fig3 += prefix + (row.val_loss_mean ? format_real(*row.val_loss_mean) : "") + "\n";
      }
    }
  }
  write_file(dir / "fig2_consensus_error.csv", fig2);
  write_file(dir / "fig3_val_loss.csv", fig3);
  return out;
}

fs::path resolve_output(const RunConfig& config) {
  fs::path out(config.output);
  const char* root = std::getenv(kOutputRootEnv);
  if (root != nullptr && *root != '\0' && out.is_relative()) return fs::path(root) / out;
  return out;
}

std::string describe(const ScheduleSpec& s) {
  switch (s.kind) {
    case ScheduleKind::constant: return "constant(" + format_real(s.initial) + ")";
    case ScheduleKind::exponential:
    case ScheduleKind::step:
      return to_string(s.kind) + "(initial=" + format_real(s.initial) + " growth=" + format_real(s.growth) +
             " period=" + std::to_string(s.period) + ")";
    case ScheduleKind::cosine:
      return "cosine(initial=" + format_real(s.initial) + " t_max=" + std::to_string(s.t_max) + " period=" +
             std::to_string(s.period) + ")";
  }
  return "";
}

}  // namespace dsgd
