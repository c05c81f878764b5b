#include "dsgd/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "dsgd/errors.hpp"

namespace dsgd {

void OptimizerConfig::check() const {
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw std::invalid_argument("optimizer: base_lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("optimizer: momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw std::invalid_argument("optimizer: weight_decay must be >= 0");
  if (!(decay_factor > 0.0) || !std::isfinite(decay_factor)) throw std::invalid_argument("optimizer: decay_factor must be positive");
  for (int m : milestones) {
    if (m < 0) throw std::invalid_argument("optimizer: milestones must be >= 0");
  }
}

double lr_at(const OptimizerConfig& config, int epoch) {
  if (epoch < 0) throw std::invalid_argument("lr_at: negative epoch");
  double lr = config.base_lr;
  for (int m : config.milestones) {
    if (m <= epoch) lr *= config.decay_factor;
  }
  return lr;
}

NesterovSgd::NesterovSgd(OptimizerConfig config, std::size_t dim, std::vector<bool> bias_mask)
    : config_(std::move(config)), buffer_(dim, 0.0), bias_mask_(std::move(bias_mask)) {
  config_.check();
  if (!bias_mask_.empty() && bias_mask_.size() != dim) throw DimensionError("bias mask length does not match model dimension");
}

void NesterovSgd::step(ParamVector& params, const ParamVector& grad, double lr) {
  if (params.size() != buffer_.size() || grad.size() != buffer_.size()) {
    throw DimensionError("optimizer step: params/grad length does not match state");
  }
  const double beta = config_.momentum;
  const double wd = config_.weight_decay;
  const bool skip_biases = !config_.decay_biases && !bias_mask_.empty();
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grad[i];
    if (wd != 0.0 && !(skip_biases && bias_mask_[i])) g += wd * params[i];
    buffer_[i] = beta * buffer_[i] + g;
    params[i] -= lr * (g + beta * buffer_[i]);
  }
}

}  // namespace dsgd
