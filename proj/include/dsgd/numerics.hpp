#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dsgd {

/// One agent's flat model parameters (or a gradient of the same shape).
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t length, double fill = 0.0) : values_(length, fill) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

/// Returns dst + s * src. Throws DimensionError on length mismatch.
ParamVector add_scaled(const ParamVector& dst, const ParamVector& src, double s);

/// In-place dst += s * src.
void add_scaled_inplace(ParamVector& dst, const ParamVector& src, double s);

/// Sum of squares.
double norm_sq(const ParamVector& v) noexcept;

/// Element-wise arithmetic mean. Summation runs left to right over the list,
/// so the result depends only on the list order, never on threading.
ParamVector mean_of(std::span<const ParamVector> vs);

/// Squared distance ||a - b||^2.
double distance_sq(const ParamVector& a, const ParamVector& b);

bool all_finite(const ParamVector& v) noexcept;

}  // namespace dsgd
