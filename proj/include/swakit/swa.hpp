#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "swakit/checkpoint.hpp"
#include "swakit/errors.hpp"
#include "swakit/param_vector.hpp"
#include "swakit/schedule.hpp"

namespace swakit {

/// When and how weights are absorbed into the running average.
///
/// Averaging starts after start_fraction of the step budget (stage 2) and
/// collects the current weights every `interval` optimizer steps, counted
/// with a stage-2-local index that restarts at 1. The stage-2 schedule is a
/// high constant rate by default; a cyclical schedule aligns its cycles with
/// the collection interval.
struct SwaPolicy {
  std::size_t interval = 10;     // K, in optimizer steps
  double start_fraction = 0.5;   // stage 2 begins after this share of steps
  Schedule stage2_schedule;

  std::size_t stage1_steps(std::size_t total_steps) const {
    return static_cast<std::size_t>(
        std::ceil(start_fraction * static_cast<double>(total_steps)));
  }

  void validate(std::size_t total_steps) const {
    if (interval == 0) throw ConfigError("swa: interval must be >= 1");
    if (!(start_fraction >= 0.0 && start_fraction < 1.0)) {
      throw ConfigError("swa: start_fraction must be in [0, 1)");
    }
    const std::size_t s1 = stage1_steps(total_steps);
    if (total_steps < s1 + interval) {
      throw ConfigError("swa: stage-2 budget is shorter than one collection interval");
    }
    stage2_schedule.validate();
  }
};

/// Running average of collected weights. The stage-2 starting weights are
/// the first component; after that the state holds the exact arithmetic mean
/// of everything absorbed so far.
struct SwaState {
  ParamVector w_swa;
  std::size_t components = 0;      // vectors absorbed, including the start
  std::size_t steps_in_stage2 = 0;

  const ParamVector& average() const noexcept { return w_swa; }
};

/// Starts the average at the current weights (one component).
inline SwaState swa_init(const ParamVector& w) {
  if (!w.all_finite()) throw NumericError("swa_init: non-finite weights");
  SwaState st;
  st.w_swa = w;
  st.components = 1;
  return st;
}

/// Feeds the post-update weights of stage-2 step i (1-based, local to
/// stage 2). Off-interval steps leave the average untouched; at every
/// multiple of `interval` the running mean absorbs one more component:
///
///   w_swa <- (w_swa * n + w) / (n + 1)
///
/// where n is the number of components already averaged.
inline void swa_observe(SwaState& st, const ParamVector& w, std::size_t i,
                        std::size_t interval) {
  if (interval == 0) throw ConfigError("swa_observe: interval must be >= 1");
  if (st.components == 0) throw ConfigError("swa_observe: state not initialized");
  st.steps_in_stage2 = i;
  if (i % interval != 0) return;
  running_mean_update(st.w_swa, w, st.components);
  ++st.components;
}

/// Offline checkpoint soup: the arithmetic mean of the stored vectors.
/// All files must share one layout.
inline ParamVector soup_average(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ConfigError("soup_average: need at least one checkpoint");

  ParamVector sum = read_checkpoint(paths.front());
  for (std::size_t k = 1; k < paths.size(); ++k) {
    const ParamVector next = read_checkpoint(paths[k]);
    if (!sum.same_layout(next)) {
      throw LayoutError("soup_average: '" + paths[k].string() +
                        "' has a different layout than '" + paths.front().string() + "'");
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += next[i];
  }
  const double inv = 1.0 / static_cast<double>(paths.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] *= inv;
  return sum;
}

}  // namespace swakit
