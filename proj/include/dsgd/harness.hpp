#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsgd/config.hpp"
#include "dsgd/data.hpp"
#include "dsgd/topology.hpp"
#include "dsgd/trainer.hpp"

namespace dsgd {

/// A training run died (non-finite loss). Maps to exit code 2.
class SeedAbort : public std::runtime_error {
 public:
  SeedAbort(std::uint64_t seed, const std::string& what)
      : std::runtime_error("seed " + std::to_string(seed) + ": " + what), seed_(seed) {}
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Inputs shared by every seed of an experiment.
struct Workload {
  Dataset data;
  MixingMatrix mixing;
  ModelSpec model;
};

/// Builds the dataset and mixing matrix; throws ConfigError when the config
/// is invalid or the matrix fails validate().
Workload prepare(const RunConfig& config);

TrainingConfig training_config(const RunConfig& config, const ModelSpec& model);

/// Partition used for one seed. Shared by every arm that runs that seed.
Partition seed_partition(const RunConfig& config, const Dataset& data, std::uint64_t seed);

struct SeedRun {
  std::uint64_t seed = 0;
  TrainingResult result;
  std::filesystem::path metrics_path;  // relative to the experiment directory
};

struct ExperimentSummary {
  std::vector<SeedRun> runs;  // in configured seed order
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std: divides by the seed count
};

/// Mean and population standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs);

/// Trains once per seed and writes, under `dir`:
///   config.ini           resolved config (run.output = dir)
///   seed_<s>/metrics.csv per-epoch log
///   seed_<s>/gossip_norms.csv  when run.verbose
///   summary.csv
ExperimentSummary run_experiment(const RunConfig& config, const std::filesystem::path& dir);

struct SweepRow {
  double gamma = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

/// Default grid 0.1, 0.2, ..., 1.0.
std::vector<double> default_gamma_grid();

/// Runs a constant-gamma experiment per value under dir/gamma_<g>/ and writes
/// dir/sweep_gamma.csv. Duplicates are dropped with a warning on `warn`.
std::vector<SweepRow> sweep_gamma(const RunConfig& config, std::vector<double> gammas, const std::filesystem::path& dir,
                                  std::ostream& warn);

struct ArsComparison {
  ExperimentSummary without_ars;  // constant gamma = 1
  ExperimentSummary with_ars;     // the configured schedule
};

/// Baseline vs scheduled arms on identical seeds, partitions and initial
/// weights. Writes dir/{without_ars,with_ars}/, dir/compare_ars.csv,
/// dir/fig2_consensus_error.csv and dir/fig3_val_loss.csv.
ArsComparison compare_ars(const RunConfig& config, const std::filesystem::path& dir);

/// Applies the output-root environment override to a relative run.output.
std::filesystem::path resolve_output(const RunConfig& config);

inline constexpr const char* kOutputRootEnv = "DSGD_OUTPUT_ROOT";

std::string describe(const ScheduleSpec& schedule);

}  // namespace dsgd
