#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsgd/data.hpp"
#include "dsgd/numerics.hpp"

namespace dsgd {

enum class ModelKind { softmax_linear, mlp };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Parameter layout, row-major:
///   softmax_linear: W[C][p], b[C]
///   mlp:            W1[h][p], b1[h], W2[C][h], b2[C]   (tanh hidden layer)
struct ModelSpec {
  ModelKind kind = ModelKind::softmax_linear;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  int num_classes = 0;

  /// d = (p+1)C for softmax_linear, (p+1)h + (h+1)C for mlp.
  std::size_t param_count() const;
  void check() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Rows of a Samples split. The loss sums rows in ascending index order, so a
/// batch's loss does not depend on the order its indices were drawn in.
struct Batch {
  const Samples* source = nullptr;
  std::vector<std::size_t> rows;

  std::size_t size() const noexcept { return rows.size(); }
};

struct LossAndGrad {
  double loss = 0.0;
  ParamVector grad;
};

/// Glorot-uniform weights, zero biases. One draw per seed; every agent in a
/// run starts from the same vector.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

/// Mean cross-entropy over the batch and its exact gradient.
LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

/// Mean cross-entropy over a whole split, no gradient.
double mean_loss(const ModelSpec& spec, const ParamVector& params, const Samples& data);

/// Fraction of rows whose argmax logit (lowest index on ties) equals the label.
double accuracy(const ModelSpec& spec, const ParamVector& params, const Samples& data);

/// Class logits for one feature row.
std::vector<double> logits(const ModelSpec& spec, const ParamVector& params, std::span<const double> x);

/// true at bias coordinates.
std::vector<bool> bias_mask(const ModelSpec& spec);

}  // namespace dsgd
