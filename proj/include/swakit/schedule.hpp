#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "swakit/errors.hpp"

namespace swakit {

enum class ScheduleKind { constant, high_constant, cyclical, linear_decay };

inline std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::high_constant: return "high-constant";
    case ScheduleKind::cyclical: return "cyclical";
    case ScheduleKind::linear_decay: return "linear-decay";
  }
  return "?";
}

inline ScheduleKind schedule_kind_from(std::string_view s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "high-constant") return ScheduleKind::high_constant;
  if (s == "cyclical") return ScheduleKind::cyclical;
  if (s == "linear-decay") return ScheduleKind::linear_decay;
  throw ConfigError("unknown schedule kind '" + std::string(s) + "'");
}

/// Learning rate as a pure function of the 1-based step index.
///
/// The cyclical kind anneals linearly from eta_max to eta_min over each
/// cycle of length K:
///
///   t_i  = mod(i-1, K) + 1
///   eta_i = (1 - t_i/K) * eta_max + (t_i/K) * eta_min
///
/// constant and high-constant hold eta_max at every step (the degenerate
/// cycle with eta_max == eta_min); linear-decay runs eta_max down to zero
/// over the full budget.
struct Schedule {
  ScheduleKind kind = ScheduleKind::constant;
  double eta_max = 0.0;
  double eta_min = 0.0;        // cyclical only
  std::size_t cycle_len = 0;   // K, cyclical only
  std::size_t total_steps = 0; // N

  static Schedule constant(double eta, std::size_t total_steps) {
    Schedule s{ScheduleKind::constant, eta, eta, 0, total_steps};
    s.validate();
    return s;
  }

  static Schedule high_constant(double eta, std::size_t total_steps) {
    Schedule s{ScheduleKind::high_constant, eta, eta, 0, total_steps};
    s.validate();
    return s;
  }

  static Schedule cyclical(double eta_max, double eta_min, std::size_t cycle_len,
                           std::size_t total_steps) {
    Schedule s{ScheduleKind::cyclical, eta_max, eta_min, cycle_len, total_steps};
    s.validate();
    return s;
  }

  static Schedule linear_decay(double eta_max, std::size_t total_steps) {
    Schedule s{ScheduleKind::linear_decay, eta_max, 0.0, 0, total_steps};
    s.validate();
    return s;
  }

  void validate() const {
    if (total_steps == 0) {
      throw ConfigError("schedule: total_steps must be >= 1");
    }
    if (!(eta_max >= 0.0)) {
      throw ConfigError("schedule: eta_max must be >= 0");
    }
    if (kind == ScheduleKind::cyclical) {
      if (!(eta_min >= 0.0)) {
        throw ConfigError("schedule: eta_min must be >= 0");
      }
      if (eta_max < eta_min) {
        throw ConfigError("schedule: eta_max must be >= eta_min");
      }
      if (cycle_len == 0) {
        throw ConfigError("schedule: cycle_len must be >= 1");
      }
      if (cycle_len > total_steps) {
        throw ConfigError("schedule: cycle_len must be <= total_steps");
      }
    }
  }
};

/// Learning rate at step i (1-based, 1 <= i <= total_steps).
inline double lr_at(const Schedule& s, std::size_t i) {
  if (i < 1 || i > s.total_steps) {
    throw ConfigError("lr_at: step " + std::to_string(i) + " outside [1, " +
                      std::to_string(s.total_steps) + "]");
  }
  switch (s.kind) {
    case ScheduleKind::constant:
    case ScheduleKind::high_constant:
      return s.eta_max;
    case ScheduleKind::cyclical: {
      const std::size_t t = (i - 1) % s.cycle_len + 1;
      const double frac = static_cast<double>(t) / static_cast<double>(s.cycle_len);
      return (1.0 - frac) * s.eta_max + frac * s.eta_min;
    }
    case ScheduleKind::linear_decay: {
      const double frac =
          static_cast<double>(i - 1) / static_cast<double>(s.total_steps);
      return s.eta_max * (1.0 - frac);
    }
  }
  throw ConfigError("lr_at: unknown schedule kind");
}

}  // namespace swakit
