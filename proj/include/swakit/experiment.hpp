#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swakit/checkpoint.hpp"
#include "swakit/config.hpp"
#include "swakit/errors.hpp"
#include "swakit/flatness.hpp"
#include "swakit/swa.hpp"
#include "swakit/trainer.hpp"
#include "swakit/version.hpp"

namespace swakit {

namespace detail {

inline std::string now_iso8601_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return j;
}

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  double sum = 0.0;
  for (double x : xs) sum += x;
  ms.mean = sum / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double sq = 0.0;
    for (double x : xs) sq += (x - ms.mean) * (x - ms.mean);
    ms.std_dev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return ms;
}

}  // namespace detail

/// Step and eval records only; wall-clock goes to a separate timing file so
/// that reruns of one config stay byte-identical.
inline nlohmann::json metrics_to_json(const MetricsLog& log) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepRecord& s : log.steps) {
    steps.push_back({{"step", s.step}, {"lr", s.lr}, {"train_loss", s.train_loss}});
  }
  nlohmann::json evals = nlohmann::json::array();
  for (const EvalRecord& e : log.evals) {
    evals.push_back(
        {{"step", e.step}, {"split", e.split}, {"loss", e.loss}, {"metric", e.metric}});
  }
  return nlohmann::json{{"steps", steps}, {"evals", evals}};
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::uint64_t dataset_seed = 0;
  Evaluation final_train;
  Evaluation final_test;
  std::optional<Evaluation> swa_train;
  std::optional<Evaluation> swa_test;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  std::filesystem::path seed_dir;
};

struct RunOutput {
  std::filesystem::path dir;
  std::vector<SeedOutcome> outcomes;
  bool classification = true;
};

/// Runs one config end to end: per seed, trains (optionally with SWA),
/// writes SWCK checkpoints, metrics and timing, then aggregates a summary.
/// The run directory is self-describing (config copy, digest, versions),
/// and reruns with the same config are byte-identical apart from timing
/// files and checkpoint sidecar timestamps.
inline RunOutput run_training_command(const ExperimentConfig& cfg, bool with_swa,
                                      const std::filesystem::path& out_dir, bool quiet) {
  namespace fs = std::filesystem;
  RunOutput output;
  output.dir = out_dir;
  fs::create_directories(out_dir);
  detail::write_json_file(out_dir / "config.json", cfg.canonical);

  const Schedule pre = cfg.schedule.realize(cfg.train.total_steps);
  std::optional<SwaPolicy> policy;
  if (with_swa) policy = cfg.swa.realize(cfg.train.total_steps);

  nlohmann::json results = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  std::vector<double> final_metrics;
  std::vector<double> swa_metrics;

  for (const std::uint64_t seed : cfg.seeds) {
    const Dataset dataset = cfg.data.build(seed);
    output.classification = dataset.is_classification();

    TrainResult tr = train_run(cfg.model, dataset, cfg.optimizer, pre, policy, cfg.train, seed);

    const fs::path seed_dir = out_dir / ("seed-" + std::to_string(seed));
    fs::create_directories(seed_dir);

    const std::string created = detail::now_iso8601_utc();
    const CheckpointMeta base_meta{cfg.train.total_steps, seed, cfg.digest, created};
    write_checkpoint(seed_dir / "final.swck", tr.final_weights);
    write_checkpoint_meta(seed_dir / "final.swck", base_meta);

    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.dataset_seed = cfg.data.resolve_seed(seed);
    outcome.seed_dir = seed_dir;
    outcome.stage1_seconds = tr.log.stage1_seconds;
    outcome.stage2_seconds = tr.log.stage2_seconds;

    const Batch train_rows = train_batch(dataset);
    const Batch test_rows = dataset.test_indices.empty() ? Batch{} : test_batch(dataset);
    outcome.final_train = evaluate(cfg.model, tr.final_weights, train_rows);
    if (!dataset.test_indices.empty()) {
      outcome.final_test = evaluate(cfg.model, tr.final_weights, test_rows);
    }

    if (with_swa && tr.swa_weights) {
      write_checkpoint(seed_dir / "swa.swck", *tr.swa_weights);
      write_checkpoint_meta(seed_dir / "swa.swck", base_meta);

      const fs::path collected_dir = seed_dir / "collected";
      fs::create_directories(collected_dir);
      const std::size_t stage1 = policy->stage1_steps(cfg.train.total_steps);
      for (std::size_t k = 0; k < tr.collected.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "collect-%04zu.swck", k);
        const fs::path p = collected_dir / name;
        write_checkpoint(p, tr.collected[k]);
        write_checkpoint_meta(p, {stage1 + k * policy->interval, seed, cfg.digest, created});
      }

      outcome.swa_train = evaluate(cfg.model, *tr.swa_weights, train_rows);
      if (!dataset.test_indices.empty()) {
        outcome.swa_test = evaluate(cfg.model, *tr.swa_weights, test_rows);
      }
    }

    nlohmann::json metrics = metrics_to_json(tr.log);
    metrics["config_digest"] = cfg.digest;
    detail::write_json_file(seed_dir / "metrics.json", metrics);
    timing.push_back({{"seed", seed},
                      {"stage1_seconds", tr.log.stage1_seconds},
                      {"stage2_seconds", tr.log.stage2_seconds},
                      {"optimizer_seconds", tr.log.optimizer_seconds()}});

    const bool cls = dataset.is_classification();
    nlohmann::json entry{
        {"seed", seed},
        {"dataset_seed", outcome.dataset_seed},
        {"final",
         {{"train_loss", outcome.final_train.loss},
          {"train_metric", outcome.final_train.metric(cls)},
          {"test_loss", outcome.final_test.loss},
          {"test_metric", outcome.final_test.metric(cls)}}}};
    final_metrics.push_back(outcome.final_test.metric(cls));
    if (outcome.swa_test) {
      entry["swa"] = {{"train_loss", outcome.swa_train->loss},
                      {"train_metric", outcome.swa_train->metric(cls)},
                      {"test_loss", outcome.swa_test->loss},
                      {"test_metric", outcome.swa_test->metric(cls)}};
      swa_metrics.push_back(outcome.swa_test->metric(cls));
    }
    results.push_back(std::move(entry));

    if (!quiet) {
      std::printf("seed %llu: final test metric %.4f", static_cast<unsigned long long>(seed),
                  outcome.final_test.metric(cls));
      if (outcome.swa_test) std::printf(", swa test metric %.4f", outcome.swa_test->metric(cls));
      std::printf("\n");
    }
    output.outcomes.push_back(std::move(outcome));
  }

  const detail::MeanStd final_ms = detail::mean_std(final_metrics);
  nlohmann::json summary{{"command", with_swa ? "swa-train" : "train"},
                         {"config_digest", cfg.digest},
                         {"library_version", kVersion},
                         {"checkpoint_format_version", kCheckpointVersion},
                         {"metric_kind", output.classification ? "accuracy" : "neg_rmse"},
                         {"results", results},
                         {"aggregate",
                          {{"final_test_metric",
                            {{"mean", final_ms.mean}, {"std", final_ms.std_dev}}}}}};
  if (!swa_metrics.empty()) {
    const detail::MeanStd swa_ms = detail::mean_std(swa_metrics);
    summary["aggregate"]["swa_test_metric"] = {{"mean", swa_ms.mean}, {"std", swa_ms.std_dev}};
  }
  detail::write_json_file(out_dir / "summary.json", summary);
  detail::write_json_file(out_dir / "timing.json", timing);
  return output;
}

/// Flatness audit of a stored checkpoint. The dataset is rebuilt from the
/// config; the run seed is taken from --seed, else from the checkpoint's
/// sidecar metadata, else from the first configured seed.
inline nlohmann::json run_flatness_command(const ExperimentConfig& cfg,
                                           const std::filesystem::path& checkpoint_path,
                                           std::optional<std::uint64_t> seed_override) {
  const ParamVector w = read_checkpoint(checkpoint_path);

  std::uint64_t seed = cfg.seeds.front();
  if (seed_override) {
    seed = *seed_override;
  } else if (std::filesystem::exists(checkpoint_meta_path(checkpoint_path))) {
    seed = read_checkpoint_meta(checkpoint_path).seed;
  }

  const Dataset dataset = cfg.data.build(seed);
  if (w.size() != cfg.model.param_count()) {
    throw LayoutError("flatness: checkpoint has " + std::to_string(w.size()) +
                      " parameters, configured model needs " +
                      std::to_string(cfg.model.param_count()));
  }
  const FlatnessReport report = flatness_report(cfg.model, w, dataset, cfg.flatness, seed);

  nlohmann::json j = to_json(report);
  j["checkpoint"] = checkpoint_path.string();
  j["config_digest"] = cfg.digest;
  j["seed"] = seed;
  return j;
}

/// Offline checkpoint soup; writes the averaged vector as a new checkpoint.
inline void run_soup_command(const std::vector<std::filesystem::path>& inputs,
                             const std::filesystem::path& out_path) {
  const ParamVector avg = soup_average(inputs);
  write_checkpoint(out_path, avg);
  write_checkpoint_meta(out_path, {0, 0, "soup", detail::now_iso8601_utc()});
}

/// Schedule comparison: every variant becomes the stage-2 schedule of a full
/// SWA run over all seeds; the report carries per-variant mean and sample
/// standard deviation of the final SWA test metric plus the per-seed values.
inline nlohmann::json run_compare_command(const ExperimentConfig& cfg,
                                          const std::filesystem::path& out_dir, bool quiet) {
  if (cfg.variants.size() < 2) {
    throw ConfigError("compare-schedules: need at least 2 variants in 'compare.variants'");
  }
  if (cfg.seeds.size() < 3) {
    throw ConfigError("compare-schedules: need at least 3 seeds");
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  detail::write_json_file(out_dir / "config.json", cfg.canonical);

  nlohmann::json variants = nlohmann::json::array();
  std::vector<std::string> table_rows;
  for (const VariantSpec& variant : cfg.variants) {
    ExperimentConfig variant_cfg = cfg;
    variant_cfg.swa.schedule = variant.schedule;
    variant_cfg.rebuild_canonical();

    const fs::path variant_dir = out_dir / "variants" / variant.name;
    const RunOutput run = run_training_command(variant_cfg, true, variant_dir, true);

    std::vector<double> metrics;
    nlohmann::json per_seed = nlohmann::json::array();
    for (const SeedOutcome& o : run.outcomes) {
      const double m = o.swa_test ? o.swa_test->metric(run.classification) : 0.0;
      metrics.push_back(m);
      per_seed.push_back({{"seed", o.seed}, {"metric", m}});
    }
    const detail::MeanStd ms = detail::mean_std(metrics);
    variants.push_back({{"name", variant.name},
                        {"schedule",
                         {{"kind", to_string(variant.schedule.kind)},
                          {"eta_max", variant.schedule.eta_max},
                          {"eta_min", variant.schedule.eta_min},
                          {"cycle_len", variant.schedule.cycle_len}}},
                        {"mean", ms.mean},
                        {"std", ms.std_dev},
                        {"per_seed", per_seed}});

    char row[160];
    std::snprintf(row, sizeof(row), "%-24s %-14s %12.6f %12.6f", variant.name.c_str(),
                  to_string(variant.schedule.kind).c_str(), ms.mean, ms.std_dev);
    table_rows.push_back(row);
    if (!quiet) std::printf("%s\n", row);
  }

  nlohmann::json report{{"command", "compare-schedules"},
                        {"config_digest", cfg.digest},
                        {"library_version", kVersion},
                        {"seeds", cfg.seeds},
                        {"variants", variants}};
  detail::write_json_file(out_dir / "comparison.json", report);

  std::ofstream table(out_dir / "comparison.txt", std::ios::trunc);
  if (!table) throw IoError("cannot write comparison table");
  char header[160];
  std::snprintf(header, sizeof(header), "%-24s %-14s %12s %12s", "variant", "kind", "mean",
                "std");
  table << header << '\n';
  for (const std::string& row : table_rows) table << row << '\n';
  return report;
}

}  // namespace swakit
