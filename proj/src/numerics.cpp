#include "dsgd/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dsgd/errors.hpp"

namespace dsgd {
namespace {

void require_same_length(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("parameter length mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

}  // namespace

ParamVector add_scaled(const ParamVector& dst, const ParamVector& src, double s) {
  ParamVector out = dst;
  add_scaled_inplace(out, src, s);
  return out;
}

void add_scaled_inplace(ParamVector& dst, const ParamVector& src, double s) {
  require_same_length(dst, src);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
}

double norm_sq(const ParamVector& v) noexcept {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

ParamVector mean_of(std::span<const ParamVector> vs) {
  if (vs.empty()) throw std::invalid_argument("mean_of: empty list");
  ParamVector out(vs.front().size(), 0.0);
  for (const auto& v : vs) {
    require_same_length(out, v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (double& x : out) x *= inv;
  return out;
}

double distance_sq(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

bool all_finite(const ParamVector& v) noexcept {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace dsgd
