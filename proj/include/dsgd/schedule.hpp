#pragma once

#include <string>

namespace dsgd {

enum class ScheduleKind { constant, exponential, step, cosine };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& name);

/// Averaging-rate schedule: gamma starts at initial and rises toward 1.
///
///   constant     gamma0
///   exponential  min(1, gamma0 * growth^floor(t / period))
///   step         same closed form; by convention period > 1
///   cosine       gamma0 + (1 - gamma0)/2 * (1 - cos(pi * t' / t_max)),
///                t' = floor(t / period) * period, and 1 once t' >= t_max
///
/// Cosine with period != 1 is a local generalization; the reference
/// setting updates every epoch.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;
  double initial = 1.0;
  double growth = 1.0;
  int period = 1;
  int t_max = 1;

  void check() const;
  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;

  static ScheduleSpec constant(double gamma);
};

/// Averaging rate for an epoch; always in [initial, 1] and non-decreasing.
double gamma_at(const ScheduleSpec& spec, int epoch);

}  // namespace dsgd
