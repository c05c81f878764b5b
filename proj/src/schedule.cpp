#include "dsgd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dsgd {

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::exponential: return "exponential";
    case ScheduleKind::step: return "step";
    case ScheduleKind::cosine: return "cosine";
  }
  return "constant";
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "exponential") return ScheduleKind::exponential;
  if (name == "step") return ScheduleKind::step;
  if (name == "cosine") return ScheduleKind::cosine;
  throw std::invalid_argument("unknown schedule kind '" + name + "' (expected constant, exponential, step or cosine)");
}

void ScheduleSpec::check() const {
  if (!(initial > 0.0 && initial <= 1.0)) throw std::invalid_argument("schedule: initial averaging rate must lie in (0, 1]");
  if (period < 1) throw std::invalid_argument("schedule: period must be >= 1");
  if ((kind == ScheduleKind::exponential || kind == ScheduleKind::step) && !(growth >= 1.0 && std::isfinite(growth))) {
    throw std::invalid_argument("schedule: growth rate must be >= 1");
  }
  if (kind == ScheduleKind::cosine && t_max < 1) throw std::invalid_argument("schedule: t_max must be >= 1");
}

ScheduleSpec ScheduleSpec::constant(double gamma) {
  ScheduleSpec s;
  s.kind = ScheduleKind::constant;
  s.initial = gamma;
  return s;
}

double gamma_at(const ScheduleSpec& spec, int epoch) {
  spec.check();
  if (epoch < 0) throw std::invalid_argument("gamma_at: negative epoch");
  const int stage = epoch / spec.period;
  switch (spec.kind) {
    case ScheduleKind::constant:
      return spec.initial;
    case ScheduleKind::exponential:
    case ScheduleKind::step:
      return std::min(1.0, spec.initial * std::pow(spec.growth, stage));
    case ScheduleKind::cosine: {
      const int t = stage * spec.period;
      if (t >= spec.t_max) return 1.0;
      const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(spec.t_max);
      const double g = spec.initial + 0.5 * (1.0 - spec.initial) * (1.0 - std::cos(phase));
      return std::clamp(g, spec.initial, 1.0);
    }
  }
  return spec.initial;
}

}  // namespace dsgd
