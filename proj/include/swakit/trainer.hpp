#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swakit/dataset.hpp"
#include "swakit/errors.hpp"
#include "swakit/model.hpp"
#include "swakit/optimizer.hpp"
#include "swakit/param_vector.hpp"
#include "swakit/rng.hpp"
#include "swakit/schedule.hpp"
#include "swakit/swa.hpp"

namespace swakit {

struct StepRecord {
  std::size_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
};

struct EvalRecord {
  std::size_t step = 0;
  std::string split;
  double loss = 0.0;
  double metric = 0.0;  // accuracy (classification) or rmse (regression)
};

/// Per-run measurements. Wall clock covers the optimizer work only (gradient,
/// update, averaging); evaluation and I/O are excluded so that run timings
/// stay comparable.
struct MetricsLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;

  double optimizer_seconds() const noexcept { return stage1_seconds + stage2_seconds; }
};

struct TrainOptions {
  std::size_t total_steps = 0;
  std::size_t batch_size = 32;
  std::size_t eval_every = 0;  // 0: evaluate only after the last step

  void validate() const {
    if (total_steps == 0) throw ConfigError("train: total_steps must be >= 1");
    if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  }
};

struct TrainResult {
  ParamVector final_weights;
  std::optional<ParamVector> swa_weights;
  /// Stage-2 start followed by each collected iterate (SWA runs only).
  std::vector<ParamVector> collected;
  MetricsLog log;
};

/// Two-stage training loop. Stage 1 covers steps 1..ceil(start_fraction*N)
/// under pre_schedule; stage 2 covers the remainder under the policy's
/// schedule with a local step index that restarts at 1, feeding every
/// post-update iterate to the running average. Without a policy the whole
/// budget runs as stage 1; the code path is identical minus the averaging,
/// which keeps plain and SWA timings comparable.
///
/// All randomness (init, batch order) derives from `seed`; reruns are
/// bitwise identical.
inline TrainResult train_run(const ModelSpec& spec, const Dataset& data,
                             const OptimizerOptions& opt_options, const Schedule& pre_schedule,
                             const std::optional<SwaPolicy>& policy, const TrainOptions& options,
                             std::uint64_t seed) {
  spec.validate();
  options.validate();
  pre_schedule.validate();
  if (policy) policy->validate(options.total_steps);

  const std::size_t total = options.total_steps;
  const std::size_t stage1_end = policy ? policy->stage1_steps(total) : total;

  CounterRng init_rng = CounterRng::stream(seed, "init");
  ParamVector w = init_params(spec, init_rng);
  OptimizerState opt(opt_options, w);
  BatchStream stream(data, options.batch_size, CounterRng::stream(seed, "data"));

  TrainResult result;
  result.log.steps.reserve(total);

  const Batch train_eval = train_batch(data);
  const Batch test_eval = data.test_indices.empty() ? Batch{} : test_batch(data);
  auto record_eval = [&](std::size_t step, const ParamVector& weights) {
    const bool cls = data.is_classification();
    Evaluation tr = evaluate(spec, weights, train_eval);
    result.log.evals.push_back(
        {step, "train", tr.loss, cls ? tr.accuracy : tr.rmse});
    if (!data.test_indices.empty()) {
      Evaluation te = evaluate(spec, weights, test_eval);
      result.log.evals.push_back(
          {step, "test", te.loss, cls ? te.accuracy : te.rmse});
    }
  };

  std::optional<SwaState> swa;
  if (policy && stage1_end == 0) {
    swa = swa_init(w);
    result.collected.push_back(w);
  }

  using clock = std::chrono::steady_clock;
  for (std::size_t i = 1; i <= total; ++i) {
    const bool stage2 = i > stage1_end;
    const double lr = stage2 ? lr_at(policy->stage2_schedule, i - stage1_end)
                             : lr_at(pre_schedule, i);

    const Batch& batch = stream.next();
    const auto t0 = clock::now();

    double train_loss = 0.0;
    const ParamVector g = loss_and_grad(spec, w, batch, &train_loss);
    opt.step(w, g, lr);

    if (stage2 && swa) {
      const std::size_t local = i - stage1_end;
      swa_observe(*swa, w, local, policy->interval);
      if (local % policy->interval == 0) result.collected.push_back(w);
    }

    const double elapsed = std::chrono::duration<double>(clock::now() - t0).count();
    (stage2 ? result.log.stage2_seconds : result.log.stage1_seconds) += elapsed;

    result.log.steps.push_back({i, lr, train_loss});

    // Stage 2 starts from the weights this stage-1 pass ends on.
    if (policy && i == stage1_end) {
      swa = swa_init(w);
      result.collected.push_back(w);
    }

    if (options.eval_every != 0 && i % options.eval_every == 0 && i != total) {
      record_eval(i, w);
    }
  }

  record_eval(total, w);
  result.final_weights = std::move(w);
  if (swa) {
    result.swa_weights = swa->w_swa;
  }
  return result;
}

}  // namespace swakit
