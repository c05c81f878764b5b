#pragma once

#include <vector>

#include "dsgd/numerics.hpp"

namespace dsgd {

struct OptimizerConfig {
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<int> milestones;  // epochs at which lr is multiplied by decay_factor
  double decay_factor = 0.1;
  bool decay_biases = true;

  void check() const;
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// base_lr * decay_factor^(number of milestones <= epoch).
double lr_at(const OptimizerConfig& config, int epoch);

/// Local SGD with Nesterov momentum and coupled weight decay:
///   g' = grad + wd * x      (wd skipped on masked-out biases)
///   u  = momentum * u + g'
///   x  = x - lr * (g' + momentum * u)
/// The buffer is owned by one agent and never communicated.
class NesterovSgd {
 public:
  NesterovSgd(OptimizerConfig config, std::size_t dim, std::vector<bool> bias_mask = {});

  void step(ParamVector& params, const ParamVector& grad, double lr);

  const ParamVector& buffer() const noexcept { return buffer_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  ParamVector buffer_;
  std::vector<bool> bias_mask_;
};

}  // namespace dsgd
