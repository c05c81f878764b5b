#include "dsgd/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "dsgd/errors.hpp"
#include "dsgd/rng.hpp"

namespace dsgd {
namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers with static chunks.
// Each index is touched by exactly one worker, so results match the serial
// loop as long as fn(i) only writes state owned by i.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w * n / workers; i < (w + 1) * n / workers; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::pair<double, double> mean_and_std(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

std::uint64_t agent_seed(std::uint64_t run_seed, std::size_t agent) {
  return derive_seed({run_seed, tag(Stream::batches), agent});
}

std::vector<AgentState> make_agents(const ModelSpec& spec, const OptimizerConfig& opt, const Partition& partition,
                                    std::uint64_t run_seed) {
  const ParamVector init = init_params(spec, run_seed);
  const auto mask = bias_mask(spec);
  std::vector<AgentState> agents;
  agents.reserve(partition.agents());
  for (std::size_t i = 0; i < partition.agents(); ++i) {
    agents.push_back(AgentState{i, init, NesterovSgd(opt, init.size(), mask), partition.shards[i], agent_seed(run_seed, i)});
  }
  return agents;
}

double local_step(const ModelSpec& spec, AgentState& agent, const Batch& batch, double lr) {
  auto [loss, grad] = loss_and_grad(spec, agent.params, batch);
  agent.opt.step(agent.params, grad, lr);
  return loss;
}

const ParamVector* Inbox::find(std::size_t from) const noexcept {
  for (const auto& [id, value] : messages) {
    if (id == from) return value.get();
  }
  return nullptr;
}

std::vector<Inbox> exchange(std::span<const AgentState> states, const MixingMatrix& w) {
  if (states.size() != w.size()) throw DimensionError("exchange: agent count does not match mixing matrix");
  std::vector<std::shared_ptr<const ParamVector>> published(states.size());
  for (const auto& s : states) {
    if (s.id >= states.size()) throw ProtocolError("exchange: agent id out of range");
    published[s.id] = std::make_shared<const ParamVector>(s.params);
  }
  std::vector<Inbox> inboxes(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    const std::size_t i = states[k].id;
    inboxes[k].owner = i;
    for (std::size_t j : w.neighbors(i)) {
      if (j != i) inboxes[k].messages.emplace_back(j, published[j]);
    }
  }
  return inboxes;
}

ParamVector gossip_error(const AgentState& agent, const Inbox& inbox, const MixingMatrix& w) {
  const std::size_t i = agent.id;
  if (inbox.owner != i) throw ProtocolError("gossip: inbox belongs to agent " + std::to_string(inbox.owner));
  if (i >= w.size()) throw ProtocolError("gossip: agent id outside mixing matrix");
  const ParamVector& own = agent.params;
  ParamVector err(own.size(), 0.0);
  for (std::size_t j : w.neighbors(i)) {
    if (j == i) continue;  // w_ii (x_i - x_i) contributes nothing
    const ParamVector* other = inbox.find(j);
    if (other == nullptr) {
      throw ProtocolError("gossip: agent " + std::to_string(i) + " has no snapshot from neighbor " + std::to_string(j));
    }
    if (other->size() != own.size()) throw DimensionError("gossip: neighbor parameter length mismatch");
    const double wij = w.weight(i, j);
    for (std::size_t k = 0; k < own.size(); ++k) err[k] += wij * ((*other)[k] - own[k]);
  }
  return err;
}

ParamVector gossip_average(AgentState& agent, const Inbox& inbox, const MixingMatrix& w, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gossip_average: gamma must lie in [0, 1]");
  ParamVector err = gossip_error(agent, inbox, w);
  add_scaled_inplace(agent.params, err, gamma);
  return err;
}

ParamVector consensus_model(std::span<const AgentState> states) {
  if (states.empty()) throw std::invalid_argument("consensus_model: no agents");
  std::vector<const AgentState*> order;
  order.reserve(states.size());
  for (const auto& s : states) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
  ParamVector sum(order.front()->params.size(), 0.0);
  for (const auto* s : order) add_scaled_inplace(sum, s->params, 1.0);
  const double inv = 1.0 / static_cast<double>(order.size());
  for (double& x : sum) x *= inv;
  return sum;
}

double consensus_error(std::span<const AgentState> states) {
  const ParamVector mean = consensus_model(states);
  std::vector<const AgentState*> order;
  for (const auto& s : states) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
  double total = 0.0;
  for (const auto* s : order) total += distance_sq(s->params, mean);
  return total / static_cast<double>(states.size());
}

std::size_t rounds_per_epoch(const Partition& partition, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  std::size_t largest = 0;
  for (const auto& s : partition.shards) largest = std::max(largest, s.size());
  return (largest + batch_size - 1) / batch_size;
}

std::vector<std::vector<std::size_t>> agent_epoch_schedule(const AgentState& agent, std::size_t batch_size,
                                                           std::size_t rounds, int epoch) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(rounds);
  for (std::uint64_t pass = 0; out.size() < rounds; ++pass) {
    // Pass 0 is the plain per-epoch shuffle; later passes are the wrap-around.
    const std::uint64_t key = (static_cast<std::uint64_t>(epoch) << 20) + pass;
    for (auto& b : epoch_batches(agent.shard, batch_size, key, agent.seed)) {
      if (out.size() == rounds) break;
      out.push_back(std::move(b));
    }
  }
  return out;
}

TrainingResult run_training(const TrainingConfig& config, const Dataset& data, const Partition& partition,
                            const MixingMatrix& w, std::uint64_t run_seed) {
  config.model.check();
  config.optimizer.check();
  config.schedule.check();
  if (config.epochs < 1) throw std::invalid_argument("run_training: epochs must be >= 1");
  if (config.eval_every < 1) throw std::invalid_argument("run_training: eval_every must be >= 1");
  if (partition.agents() != w.size()) throw DimensionError("run_training: partition and mixing matrix disagree on agent count");
  if (data.train.dim != config.model.input_dim) throw DimensionError("run_training: dataset width does not match model");
  if (data.test.size() == 0) throw std::invalid_argument("run_training: empty test split");
  for (const auto& s : partition.shards) {
    if (s.empty()) throw std::invalid_argument("run_training: empty shard");
    for (auto i : s) {
      if (i >= data.train.size()) throw std::out_of_range("run_training: shard index outside training split");
    }
  }

  auto agents = make_agents(config.model, config.optimizer, partition, run_seed);
  const std::size_t n = agents.size();
  const std::size_t rounds = rounds_per_epoch(partition, config.batch_size);

  TrainingResult result;
  long long iteration = 0;
  std::vector<std::vector<std::vector<std::size_t>>> schedules(n);
  std::vector<double> loss_sum(n), norm_sum(n), val_loss(n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double gamma = gamma_at(config.schedule, epoch);
    const double lr = lr_at(config.optimizer, epoch);
    parallel_for(n, config.threads, [&](std::size_t i) {
      schedules[i] = agent_epoch_schedule(agents[i], config.batch_size, rounds, epoch);
      loss_sum[i] = 0.0;
      norm_sum[i] = 0.0;
    });

    for (std::size_t r = 0; r < rounds; ++r) {
      parallel_for(n, config.threads, [&](std::size_t i) {
        const double loss = local_step(config.model, agents[i], Batch{&data.train, schedules[i][r]}, lr);
        loss_sum[i] += loss;
      });
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(loss_sum[i]) || !all_finite(agents[i].params)) {
          throw TrainingAbort("non-finite loss or parameters at agent " + std::to_string(i) + ", epoch " +
                                  std::to_string(epoch) + ", round " + std::to_string(r),
                              result.epochs);
        }
      }
      const auto inboxes = dsgd::exchange(agents, w);
      parallel_for(n, config.threads, [&](std::size_t i) {
        const ParamVector err = gossip_average(agents[i], inboxes[i], w, gamma);
        if (config.verbose) norm_sum[i] += std::sqrt(norm_sq(err));
      });
      ++iteration;
    }

    EpochMetrics row;
    row.epoch = epoch;
    row.iteration = iteration;
    row.gamma = gamma;
    row.lr = lr;
    std::vector<double> mean_losses(n);
    for (std::size_t i = 0; i < n; ++i) mean_losses[i] = loss_sum[i] / static_cast<double>(rounds);
    std::tie(row.agent_loss_mean, row.agent_loss_std) = mean_and_std(mean_losses);
    row.consensus_error = consensus_error(agents);
    if (data.validation.size() > 0) {
      parallel_for(n, config.threads, [&](std::size_t i) { val_loss[i] = mean_loss(config.model, agents[i].params, data.validation); });
      row.val_loss_mean = mean_and_std(val_loss).first;
    }
    const bool last = epoch + 1 == config.epochs;
    if (last || (epoch + 1) % config.eval_every == 0) {
      result.consensus = consensus_model(agents);
      row.test_acc_consensus = accuracy(config.model, result.consensus, data.test);
    }
    if (config.verbose) {
      std::vector<double> norms(n);
      for (std::size_t i = 0; i < n; ++i) norms[i] = norm_sum[i] / static_cast<double>(rounds);
      result.gossip_norms.push_back(std::move(norms));
    }
    result.epochs.push_back(row);
  }
  result.final_accuracy = *result.epochs.back().test_acc_consensus;
  return result;
}

std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.iteration << ',' << format_real(r.gamma) << ',' << format_real(r.lr) << ','
        << format_real(r.agent_loss_mean) << ',' << format_real(r.agent_loss_std) << ','
        << format_real(r.consensus_error) << ',' << (r.val_loss_mean ? format_real(*r.val_loss_mean) : "") << ','
        << (r.test_acc_consensus ? format_real(*r.test_acc_consensus) : "") << '\n';
  }
}

}  // namespace dsgd
