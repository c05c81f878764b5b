#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dsgd/data.hpp"
#include "dsgd/model.hpp"
#include "dsgd/numerics.hpp"
#include "dsgd/optimizer.hpp"
#include "dsgd/schedule.hpp"
#include "dsgd/topology.hpp"

namespace dsgd {

struct AgentState {
  std::size_t id = 0;
  ParamVector params;
  NesterovSgd opt;
  std::vector<std::size_t> shard;
  std::uint64_t seed = 0;  // batch stream key, derived from (run seed, id)
};

/// Seed of agent i's batch stream.
std::uint64_t agent_seed(std::uint64_t run_seed, std::size_t agent);

/// Builds one agent per shard, all starting from the same parameters.
std::vector<AgentState> make_agents(const ModelSpec& spec, const OptimizerConfig& opt, const Partition& partition,
                                    std::uint64_t run_seed);

/// Gradient on the batch followed by one Nesterov step. Returns the batch loss.
double local_step(const ModelSpec& spec, AgentState& agent, const Batch& batch, double lr);

/// Read-only copies of neighbor parameters taken at the round barrier.
/// Holds only foreign agents; the owner's own value is read from its state.
struct Inbox {
  std::size_t owner = 0;
  std::vector<std::pair<std::size_t, std::shared_ptr<const ParamVector>>> messages;

  const ParamVector* find(std::size_t from) const noexcept;
};

/// Publishes every agent's post-local-step parameters and delivers them to
/// the agents that weight them. inboxes[i].owner == states[i].id.
std::vector<Inbox> exchange(std::span<const AgentState> states, const MixingMatrix& w);

/// sum over j in N_i of w_ij (x_j - x_i). Throws ProtocolError when the inbox
/// lacks a neighbor.
ParamVector gossip_error(const AgentState& agent, const Inbox& inbox, const MixingMatrix& w);

/// x_i += gamma * gossip_error. Momentum buffers are left untouched. Returns
/// the gossip error that was applied.
ParamVector gossip_average(AgentState& agent, const Inbox& inbox, const MixingMatrix& w, double gamma);

/// Mean of all agents' parameters, summed in ascending agent id order.
ParamVector consensus_model(std::span<const AgentState> states);

/// (1/n) sum_i ||x_i - xbar||^2.
double consensus_error(std::span<const AgentState> states);

struct TrainingConfig {
  ModelSpec model;
  OptimizerConfig optimizer;
  ScheduleSpec schedule;
  int epochs = 1;
  std::size_t batch_size = 32;
  int eval_every = 10;  // consensus-model test accuracy cadence; final epoch always evaluated
  std::size_t threads = 1;
  bool verbose = false;  // record per-agent gossip-error norms
};

struct EpochMetrics {
  int epoch = 0;
  long long iteration = 0;  // rounds completed at the end of this epoch
  double gamma = 0.0;
  double lr = 0.0;
  double agent_loss_mean = 0.0;
  double agent_loss_std = 0.0;
  double consensus_error = 0.0;
  std::optional<double> val_loss_mean;
  std::optional<double> test_acc_consensus;
};

struct TrainingResult {
  std::vector<EpochMetrics> epochs;
  ParamVector consensus;
  double final_accuracy = 0.0;
  /// gossip_norms[epoch][agent]: mean ||gossip error|| over the epoch (verbose only).
  std::vector<std::vector<double>> gossip_norms;
};

/// Raised when a loss or parameter goes non-finite. Carries every completed
/// epoch row.
class TrainingAbort : public std::runtime_error {
 public:
  TrainingAbort(const std::string& what, std::vector<EpochMetrics> completed)
      : std::runtime_error(what), completed_(std::move(completed)) {}
  const std::vector<EpochMetrics>& completed() const noexcept { return completed_; }

 private:
  std::vector<EpochMetrics> completed_;
};

/// Rounds per epoch: ceil(largest shard / batch size).
std::size_t rounds_per_epoch(const Partition& partition, std::size_t batch_size);

/// The batches agent `agent` trains on during `epoch`. Agents whose shard
/// runs out before `rounds` wrap into a freshly shuffled pass.
std::vector<std::vector<std::size_t>> agent_epoch_schedule(const AgentState& agent, std::size_t batch_size,
                                                           std::size_t rounds, int epoch);

/// Decentralized SGD over W: each round every agent takes a local step, the
/// parameters are exchanged, then each agent adds gamma(epoch) times its
/// gossip error. Results do not depend on `threads`.
TrainingResult run_training(const TrainingConfig& config, const Dataset& data, const Partition& partition,
                            const MixingMatrix& w, std::uint64_t run_seed);

inline constexpr const char* kMetricsHeader =
    "epoch,iter,gamma,lr,agent_loss_mean,agent_loss_std,consensus_error,val_loss_mean,test_acc_consensus";

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> rows);

/// Shortest round-trip-safe decimal rendering used in every output file.
std::string format_real(double x);

}  // namespace dsgd
