#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsgd/model.hpp"
#include "dsgd/optimizer.hpp"
#include "dsgd/schedule.hpp"

namespace dsgd {

/// Bad configuration or command line. Maps to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DataSource { blobs, csv };
enum class TopologyKind { ring, complete, file };

struct DataConfig {
  DataSource source = DataSource::blobs;
  int classes = 10;
  std::size_t per_class = 200;
  std::size_t dim = 32;
  double spread = 2.0;
  std::uint64_t seed = 7;  // dataset generation and train/val/test split
  std::string csv_path;
  double alpha = 0.01;

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct TopologyConfig {
  TopologyKind kind = TopologyKind::ring;
  std::size_t agents = 16;
  std::string path;  // TopologyKind::file

  friend bool operator==(const TopologyConfig&, const TopologyConfig&) = default;
};

struct RunConfig {
  ModelKind model_kind = ModelKind::mlp;
  std::size_t hidden = 64;
  DataConfig data;
  TopologyConfig topology;
  OptimizerConfig optimizer;
  ScheduleSpec schedule;
  int epochs = 100;
  std::size_t batch_size = 32;
  int eval_every = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t threads = 1;  // workers per training run
  std::size_t jobs = 1;     // seeds trained concurrently
  bool verbose = false;
  std::string output = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Frozen desk-scale experiment: 10 Gaussian blobs (p = 32, 200 per class,
/// spread 2), tanh MLP with 64 hidden units, 16-agent ring, Dirichlet
/// alpha = 0.01, 100 epochs of batch 32, lr 0.01 decayed 10x at epochs 50 and
/// 75, Nesterov momentum 0.9, weight decay 1e-4, exponential averaging-rate
/// schedule from 0.1 with growth 1.0275 per epoch (reaches 1 at epoch 85),
/// seeds 1, 2, 3.
RunConfig desk_preset();

/// Every settable key, as "section.key".
const std::vector<std::string>& config_keys();

/// Sets one key from its text form. Throws ConfigError for unknown keys or
/// unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// INI text: [section] headers, `key = value` lines, `#` or `;` comments.
/// Keys not mentioned keep their value from `base`.
RunConfig parse_config(const std::string& text, RunConfig base = desk_preset());
RunConfig load_config(const std::string& path, RunConfig base = desk_preset());

/// Canonical INI rendering; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Cross-field checks. Returns human-readable problems; empty when valid.
std::vector<std::string> config_problems(const RunConfig& config);

/// Throws ConfigError listing every problem.
void check_config(const RunConfig& config);

ModelSpec model_spec(const RunConfig& config, std::size_t input_dim, int num_classes);

}  // namespace dsgd
