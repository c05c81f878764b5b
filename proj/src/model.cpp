#include "dsgd/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dsgd/errors.hpp"
#include "dsgd/rng.hpp"

namespace dsgd {
namespace {

// Offsets of each block inside the flat parameter vector.
struct Layout {
  std::size_t p, h, c;
  std::size_t w1, b1, w2, b2;  // w2/b2 unused for softmax_linear

  explicit Layout(const ModelSpec& s)
      : p(s.input_dim), h(s.hidden), c(static_cast<std::size_t>(s.num_classes)) {
    if (s.kind == ModelKind::softmax_linear) {
      w1 = 0;
      b1 = c * p;
      w2 = b2 = b1 + c;
    } else {
      w1 = 0;
      b1 = h * p;
      w2 = b1 + h;
      b2 = w2 + c * h;
    }
  }
};

void require_dims(const ModelSpec& spec, const ParamVector& params) {
  spec.check();
  if (params.size() != spec.param_count()) {
    throw DimensionError("model expects " + std::to_string(spec.param_count()) + " parameters, got " +
                         std::to_string(params.size()));
  }
}

// Forward pass for one row. Fills hidden activations (mlp) and logits.
void forward(const ModelSpec& spec, const Layout& L, const double* w, std::span<const double> x,
             std::vector<double>& hidden, std::vector<double>& out) {
  if (spec.kind == ModelKind::softmax_linear) {
    for (std::size_t k = 0; k < L.c; ++k) {
      const double* row = w + L.w1 + k * L.p;
      double acc = w[L.b1 + k];
      for (std::size_t j = 0; j < L.p; ++j) acc += row[j] * x[j];
      out[k] = acc;
    }
    return;
  }
  for (std::size_t u = 0; u < L.h; ++u) {
    const double* row = w + L.w1 + u * L.p;
    double acc = w[L.b1 + u];
    for (std::size_t j = 0; j < L.p; ++j) acc += row[j] * x[j];
    hidden[u] = std::tanh(acc);
  }
  for (std::size_t k = 0; k < L.c; ++k) {
    const double* row = w + L.w2 + k * L.h;
    double acc = w[L.b2 + k];
    for (std::size_t u = 0; u < L.h; ++u) acc += row[u] * hidden[u];
    out[k] = acc;
  }
}

// Replaces logits with softmax probabilities; returns log-sum-exp.
double softmax_inplace(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : z) v /= total;
  return top + std::log(total);
}

double cross_entropy(std::vector<double>& z, int label) {
  const double target = z[static_cast<std::size_t>(label)];
  return softmax_inplace(z) - target;
}

void check_label(int label, int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) + ")");
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  return kind == ModelKind::mlp ? "mlp" : "softmax_linear";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "softmax_linear") return ModelKind::softmax_linear;
  if (name == "mlp") return ModelKind::mlp;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected softmax_linear or mlp)");
}

std::size_t ModelSpec::param_count() const {
  const auto c = static_cast<std::size_t>(num_classes);
  if (kind == ModelKind::softmax_linear) return (input_dim + 1) * c;
  return (input_dim + 1) * hidden + (hidden + 1) * c;
}

void ModelSpec::check() const {
  if (input_dim == 0) throw std::invalid_argument("model: input_dim must be positive");
  if (num_classes < 2) throw std::invalid_argument("model: need at least 2 classes");
  if (kind == ModelKind::mlp && hidden == 0) throw std::invalid_argument("model: mlp needs a positive hidden width");
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.check();
  const Layout L(spec);
  ParamVector params(spec.param_count(), 0.0);
  Engine rng = make_engine({seed, tag(Stream::init)});
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < count; ++i) params[offset + i] = dist(rng);
  };
  if (spec.kind == ModelKind::softmax_linear) {
    fill(L.w1, L.c * L.p, L.p, L.c);
  } else {
    fill(L.w1, L.h * L.p, L.p, L.h);
    fill(L.w2, L.c * L.h, L.h, L.c);
  }
  return params;
}

LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  require_dims(spec, params);
  if (batch.source == nullptr || batch.rows.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  const Samples& data = *batch.source;
  if (data.dim != spec.input_dim) throw DimensionError("batch feature width does not match model input_dim");

  const Layout L(spec);
  const double* w = params.values().data();
  LossAndGrad out{0.0, ParamVector(params.size(), 0.0)};
  double* g = out.grad.values().data();

  std::vector<std::size_t> rows = batch.rows;
  std::sort(rows.begin(), rows.end());

  std::vector<double> hidden(L.h), z(L.c), dhidden(L.h);
  for (std::size_t r : rows) {
    if (r >= data.size()) throw std::out_of_range("batch row " + std::to_string(r) + " out of range");
    const auto x = data.row(r);
    const int y = data.labels[r];
    check_label(y, spec.num_classes);
    forward(spec, L, w, x, hidden, z);
    out.loss += cross_entropy(z, y);
    z[static_cast<std::size_t>(y)] -= 1.0;  // dL/dlogits

    if (spec.kind == ModelKind::softmax_linear) {
      for (std::size_t k = 0; k < L.c; ++k) {
        double* row = g + L.w1 + k * L.p;
        for (std::size_t j = 0; j < L.p; ++j) row[j] += z[k] * x[j];
        g[L.b1 + k] += z[k];
      }
      continue;
    }
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t k = 0; k < L.c; ++k) {
      double* grow = g + L.w2 + k * L.h;
      const double* wrow = w + L.w2 + k * L.h;
      for (std::size_t u = 0; u < L.h; ++u) {
        grow[u] += z[k] * hidden[u];
        dhidden[u] += z[k] * wrow[u];
      }
      g[L.b2 + k] += z[k];
    }
    for (std::size_t u = 0; u < L.h; ++u) {
      const double da = dhidden[u] * (1.0 - hidden[u] * hidden[u]);
      double* row = g + L.w1 + u * L.p;
      for (std::size_t j = 0; j < L.p; ++j) row[j] += da * x[j];
      g[L.b1 + u] += da;
    }
  }

  const double inv = 1.0 / static_cast<double>(rows.size());
  out.loss *= inv;
  for (double& v : out.grad) v *= inv;
  return out;
}

double mean_loss(const ModelSpec& spec, const ParamVector& params, const Samples& data) {
  require_dims(spec, params);
  if (data.size() == 0) throw std::invalid_argument("mean_loss: empty split");
  const Layout L(spec);
  std::vector<double> hidden(L.h), z(L.c);
  double total = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    check_label(data.labels[r], spec.num_classes);
    forward(spec, L, params.values().data(), data.row(r), hidden, z);
    total += cross_entropy(z, data.labels[r]);
  }
  return total / static_cast<double>(data.size());
}

double accuracy(const ModelSpec& spec, const ParamVector& params, const Samples& data) {
  require_dims(spec, params);
  if (data.size() == 0) throw std::invalid_argument("accuracy: empty split");
  if (data.dim != spec.input_dim) throw DimensionError("split feature width does not match model input_dim");
  const Layout L(spec);
  std::vector<double> hidden(L.h), z(L.c);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    forward(spec, L, params.values().data(), data.row(r), hidden, z);
    const auto best = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == data.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<double> logits(const ModelSpec& spec, const ParamVector& params, std::span<const double> x) {
  require_dims(spec, params);
  if (x.size() != spec.input_dim) throw DimensionError("feature row width does not match model input_dim");
  const Layout L(spec);
  std::vector<double> hidden(L.h), z(L.c);
  forward(spec, L, params.values().data(), x, hidden, z);
  return z;
}

std::vector<bool> bias_mask(const ModelSpec& spec) {
  spec.check();
  const Layout L(spec);
  std::vector<bool> mask(spec.param_count(), false);
  if (spec.kind == ModelKind::softmax_linear) {
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(L.b1), mask.end(), true);
  } else {
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(L.b1), mask.begin() + static_cast<std::ptrdiff_t>(L.w2), true);
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(L.b2), mask.end(), true);
  }
  return mask;
}

}  // namespace dsgd
