#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swakit/dataset.hpp"
#include "swakit/errors.hpp"
#include "swakit/flatness.hpp"
#include "swakit/model.hpp"
#include "swakit/optimizer.hpp"
#include "swakit/rng.hpp"
#include "swakit/schedule.hpp"
#include "swakit/swa.hpp"
#include "swakit/trainer.hpp"

namespace swakit {

enum class DataKind { two_moons, blobs, csv };

inline std::string to_string(DataKind k) {
  switch (k) {
    case DataKind::two_moons: return "two-moons";
    case DataKind::blobs: return "blobs";
    case DataKind::csv: return "csv";
  }
  return "?";
}

inline DataKind data_kind_from(std::string_view s) {
  if (s == "two-moons") return DataKind::two_moons;
  if (s == "blobs") return DataKind::blobs;
  if (s == "csv") return DataKind::csv;
  throw ConfigError("unknown data kind '" + std::string(s) + "'");
}

/// Dataset recipe. When no explicit seed is configured the dataset seed is
/// derived from the run seed, so different run seeds are fully independent
/// trials; pinning data.seed shares one dataset across all run seeds.
struct DataSpec {
  DataKind kind = DataKind::two_moons;
  std::size_t n = 1000;
  double noise_sd = 0.2;
  double sd = 0.5;
  std::vector<std::vector<double>> centers{{-1.0, -1.0}, {1.0, 1.0}};
  std::string csv_path;
  double test_fraction = 0.2;
  std::optional<std::uint64_t> seed;

  std::uint64_t resolve_seed(std::uint64_t run_seed) const {
    return seed ? *seed : CounterRng::stream(run_seed, "dataset").key();
  }

  Dataset build(std::uint64_t run_seed) const {
    switch (kind) {
      case DataKind::two_moons:
        return two_moons(n, noise_sd, resolve_seed(run_seed), test_fraction);
      case DataKind::blobs:
        return gaussian_blobs(n, centers, sd, resolve_seed(run_seed), test_fraction);
      case DataKind::csv:
        return load_csv(csv_path, test_fraction, resolve_seed(run_seed));
    }
    throw ConfigError("unknown data kind");
  }
};

/// Schedule parameters without the step budget, which is only known once
/// train.total_steps (and, for stage 2, the SWA split) is fixed.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;
  double eta_max = 0.0;
  double eta_min = 0.0;
  std::size_t cycle_len = 0;

  Schedule realize(std::size_t total_steps) const {
    Schedule s{kind, eta_max, eta_min, cycle_len, total_steps};
    if (kind != ScheduleKind::cyclical) {
      s.eta_min = (kind == ScheduleKind::linear_decay) ? 0.0 : eta_max;
      s.cycle_len = 0;
    }
    s.validate();
    return s;
  }
};

struct SwaSpec {
  double start_fraction = 0.5;
  std::size_t interval = 10;
  ScheduleSpec schedule{ScheduleKind::high_constant, 0.0, 0.0, 0};

  SwaPolicy realize(std::size_t total_steps) const {
    SwaPolicy policy;
    policy.interval = interval;
    policy.start_fraction = start_fraction;
    const std::size_t stage1 = policy.stage1_steps(total_steps);
    if (stage1 >= total_steps) {
      throw ConfigError("swa: start_fraction leaves no stage-2 steps");
    }
    policy.stage2_schedule = schedule.realize(total_steps - stage1);
    policy.validate(total_steps);
    return policy;
  }
};

struct VariantSpec {
  std::string name;
  ScheduleSpec schedule;
};

namespace detail {

/// Tracks which keys of a flat config object were consumed so that unknown
/// keys can be rejected with their exact name.
class ConfigReader {
public:
  explicit ConfigReader(const nlohmann::json& j) : j_(j) {
    if (!j_.is_object()) throw ConfigError("config: top level must be a JSON object");
  }

  bool has(const std::string& key) {
    if (j_.contains(key)) {
      consumed_.insert(key);
      return true;
    }
    return false;
  }

  const nlohmann::json& raw(const std::string& key) {
    consumed_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError("config: '" + key + "' must be a number");
    return v.get<double>();
  }

  std::size_t uinteger(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError("config: '" + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError("config: '" + key + "' must be a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!consumed_.contains(key)) {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
  }

private:
  const nlohmann::json& j_;
  std::set<std::string> consumed_;
};

inline std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace detail

/// Parsed, validated experiment configuration. The on-disk form is a flat
/// JSON object with dotted keys (one nesting exception: compare.variants is
/// an array of small schedule objects). Unknown keys are rejected. The
/// digest is a stable hash of the canonicalized effective config (defaults
/// applied, keys sorted) and is stamped into every output.
struct ExperimentConfig {
  ModelSpec model;
  DataSpec data;
  OptimizerOptions optimizer;
  ScheduleSpec schedule;            // stage 1 / plain training
  SwaSpec swa;
  TrainOptions train;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "runs";
  FlatnessOptions flatness;
  std::vector<VariantSpec> variants;

  nlohmann::json canonical;
  std::string digest;

  static ExperimentConfig from_json(const nlohmann::json& j);

  static ExperimentConfig from_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
  }

  /// Replaces the seed list (the --seed flag) and refreshes the canonical
  /// form and digest.
  void override_seeds(std::vector<std::uint64_t> new_seeds) {
    if (new_seeds.empty()) throw ConfigError("config: seed list must not be empty");
    seeds = std::move(new_seeds);
    rebuild_canonical();
  }

  void rebuild_canonical() {
    nlohmann::json c;
    c["model.layers"] = model.layer_sizes;
    c["model.activation"] = to_string(model.activation);
    c["model.loss"] = to_string(model.loss);
    c["data.kind"] = to_string(data.kind);
    c["data.n"] = data.n;
    c["data.noise_sd"] = data.noise_sd;
    c["data.sd"] = data.sd;
    c["data.centers"] = data.centers;
    c["data.csv_path"] = data.csv_path;
    c["data.test_fraction"] = data.test_fraction;
    if (data.seed) c["data.seed"] = *data.seed;
    c["optimizer.kind"] = to_string(optimizer.kind);
    c["optimizer.momentum"] = optimizer.momentum;
    c["optimizer.beta1"] = optimizer.beta1;
    c["optimizer.beta2"] = optimizer.beta2;
    c["optimizer.eps"] = optimizer.eps;
    c["optimizer.weight_decay"] = optimizer.weight_decay;
    c["optimizer.clip_norm"] = optimizer.clip_norm;
    c["schedule.kind"] = to_string(schedule.kind);
    c["schedule.eta_max"] = schedule.eta_max;
    c["schedule.eta_min"] = schedule.eta_min;
    c["schedule.cycle_len"] = schedule.cycle_len;
    c["swa.start_fraction"] = swa.start_fraction;
    c["swa.interval"] = swa.interval;
    c["swa.schedule.kind"] = to_string(swa.schedule.kind);
    c["swa.schedule.eta_max"] = swa.schedule.eta_max;
    c["swa.schedule.eta_min"] = swa.schedule.eta_min;
    c["swa.schedule.cycle_len"] = swa.schedule.cycle_len;
    c["train.total_steps"] = train.total_steps;
    c["train.batch_size"] = train.batch_size;
    c["train.eval_every"] = train.eval_every;
    c["run.seeds"] = seeds;
    c["run.output_dir"] = output_dir;
    c["flatness.tol"] = flatness.tol;
    c["flatness.max_iter"] = flatness.max_iter;
    c["flatness.samples"] = flatness.trace_samples;
    c["flatness.eps0"] = flatness.hvp_eps0;
    c["flatness.exclude_groups"] = flatness.exclude_groups;
    if (!variants.empty()) {
      nlohmann::json arr = nlohmann::json::array();
      for (const VariantSpec& v : variants) {
        arr.push_back({{"name", v.name},
                       {"kind", to_string(v.schedule.kind)},
                       {"eta_max", v.schedule.eta_max},
                       {"eta_min", v.schedule.eta_min},
                       {"cycle_len", v.schedule.cycle_len}});
      }
      c["compare.variants"] = arr;
    }
    canonical = std::move(c);
    digest = detail::hex16(fnv1a64(canonical.dump()));
  }
};

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  detail::ConfigReader r(j);
  ExperimentConfig cfg;

  // model
  {
    if (!r.has("model.layers")) throw ConfigError("config: 'model.layers' is required");
    const auto& layers = r.raw("model.layers");
    if (!layers.is_array() || layers.size() < 2) {
      throw ConfigError("config: 'model.layers' must be an array of at least two sizes");
    }
    cfg.model.layer_sizes.clear();
    for (const auto& v : layers) {
      if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
        throw ConfigError("config: 'model.layers' entries must be positive integers");
      }
      cfg.model.layer_sizes.push_back(v.get<std::size_t>());
    }
    cfg.model.activation = activation_from(r.text("model.activation", "tanh"));
    cfg.model.loss = loss_kind_from(r.text("model.loss", "softmax-ce"));
    cfg.model.validate();
  }

  // data
  {
    cfg.data.kind = data_kind_from(r.text("data.kind", "two-moons"));
    cfg.data.n = r.uinteger("data.n", cfg.data.n);
    cfg.data.noise_sd = r.number("data.noise_sd", cfg.data.noise_sd);
    cfg.data.sd = r.number("data.sd", cfg.data.sd);
    if (r.has("data.centers")) {
      const auto& centers = r.raw("data.centers");
      if (!centers.is_array() || centers.empty()) {
        throw ConfigError("config: 'data.centers' must be a non-empty array of points");
      }
      cfg.data.centers.clear();
      for (const auto& point : centers) {
        if (!point.is_array() || point.empty()) {
          throw ConfigError("config: 'data.centers' entries must be coordinate arrays");
        }
        std::vector<double> coords;
        for (const auto& x : point) {
          if (!x.is_number()) throw ConfigError("config: 'data.centers' coordinates must be numbers");
          coords.push_back(x.get<double>());
        }
        cfg.data.centers.push_back(std::move(coords));
      }
    }
    cfg.data.csv_path = r.text("data.csv_path", "");
    cfg.data.test_fraction = r.number("data.test_fraction", cfg.data.test_fraction);
    if (r.has("data.seed")) {
      cfg.data.seed = r.uinteger("data.seed", 0);
    }
    if (cfg.data.kind == DataKind::csv && cfg.data.csv_path.empty()) {
      throw ConfigError("config: 'data.csv_path' is required when data.kind is 'csv'");
    }
    if (cfg.data.kind != DataKind::csv && cfg.data.n < 2) {
      throw ConfigError("config: 'data.n' must be >= 2");
    }
    if (!(cfg.data.test_fraction >= 0.0 && cfg.data.test_fraction < 1.0)) {
      throw ConfigError("config: 'data.test_fraction' must be in [0, 1)");
    }
  }

  // optimizer
  {
    const std::string kind = r.text("optimizer.kind", "adamw");
    cfg.optimizer = (kind == "adamw") ? OptimizerOptions::adamw_defaults() : OptimizerOptions{};
    cfg.optimizer.kind = optimizer_kind_from(kind);
    cfg.optimizer.momentum = r.number("optimizer.momentum", cfg.optimizer.momentum);
    cfg.optimizer.beta1 = r.number("optimizer.beta1", cfg.optimizer.beta1);
    cfg.optimizer.beta2 = r.number("optimizer.beta2", cfg.optimizer.beta2);
    cfg.optimizer.eps = r.number("optimizer.eps", cfg.optimizer.eps);
    cfg.optimizer.weight_decay = r.number("optimizer.weight_decay", cfg.optimizer.weight_decay);
    cfg.optimizer.clip_norm = r.number("optimizer.clip_norm", cfg.optimizer.clip_norm);
    cfg.optimizer.validate();
    cfg.model.l2_coeff = cfg.optimizer.weight_decay;  // single decay knob
  }

  // stage-1 schedule
  {
    cfg.schedule.kind = schedule_kind_from(r.text("schedule.kind", "constant"));
    if (!r.has("schedule.eta_max")) throw ConfigError("config: 'schedule.eta_max' is required");
    cfg.schedule.eta_max = r.number("schedule.eta_max", 0.0);
    cfg.schedule.eta_min = r.number("schedule.eta_min", 0.0);
    cfg.schedule.cycle_len = r.uinteger("schedule.cycle_len", 0);
  }

  // swa policy
  {
    cfg.swa.start_fraction = r.number("swa.start_fraction", 0.5);
    cfg.swa.interval = r.uinteger("swa.interval", 10);
    cfg.swa.schedule.kind = schedule_kind_from(r.text("swa.schedule.kind", "high-constant"));
    cfg.swa.schedule.eta_max = r.number("swa.schedule.eta_max", cfg.schedule.eta_max);
    cfg.swa.schedule.eta_min = r.number("swa.schedule.eta_min", 0.0);
    cfg.swa.schedule.cycle_len = r.uinteger("swa.schedule.cycle_len", cfg.swa.interval);
  }

  // train
  {
    cfg.train.total_steps = r.uinteger("train.total_steps", 0);
    if (cfg.train.total_steps == 0) {
      throw ConfigError("config: 'train.total_steps' is required and must be >= 1");
    }
    cfg.train.batch_size = r.uinteger("train.batch_size", 32);
    cfg.train.eval_every = r.uinteger("train.eval_every", 0);
    cfg.train.validate();
  }

  // run
  {
    if (r.has("run.seeds")) {
      const auto& seeds = r.raw("run.seeds");
      if (!seeds.is_array() || seeds.empty()) {
        throw ConfigError("config: 'run.seeds' must be a non-empty array of integers");
      }
      cfg.seeds.clear();
      for (const auto& v : seeds) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
          throw ConfigError("config: 'run.seeds' entries must be non-negative integers");
        }
        cfg.seeds.push_back(v.get<std::uint64_t>());
      }
    }
    cfg.output_dir = r.text("run.output_dir", cfg.output_dir);
  }

  // flatness
  {
    cfg.flatness.tol = r.number("flatness.tol", cfg.flatness.tol);
    cfg.flatness.max_iter = r.uinteger("flatness.max_iter", cfg.flatness.max_iter);
    cfg.flatness.trace_samples = r.uinteger("flatness.samples", cfg.flatness.trace_samples);
    cfg.flatness.hvp_eps0 = r.number("flatness.eps0", cfg.flatness.hvp_eps0);
    if (r.has("flatness.exclude_groups")) {
      const auto& ex = r.raw("flatness.exclude_groups");
      if (!ex.is_array()) throw ConfigError("config: 'flatness.exclude_groups' must be an array");
      cfg.flatness.exclude_groups.clear();
      for (const auto& v : ex) {
        if (!v.is_string()) {
          throw ConfigError("config: 'flatness.exclude_groups' entries must be strings");
        }
        cfg.flatness.exclude_groups.push_back(v.get<std::string>());
      }
    }
    if (!(cfg.flatness.tol > 0.0)) throw ConfigError("config: 'flatness.tol' must be > 0");
    if (cfg.flatness.max_iter == 0) throw ConfigError("config: 'flatness.max_iter' must be >= 1");
    if (cfg.flatness.trace_samples == 0) {
      throw ConfigError("config: 'flatness.samples' must be >= 1");
    }
    if (!(cfg.flatness.hvp_eps0 > 0.0)) throw ConfigError("config: 'flatness.eps0' must be > 0");
  }

  // compare grid
  if (r.has("compare.variants")) {
    const auto& arr = r.raw("compare.variants");
    if (!arr.is_array()) throw ConfigError("config: 'compare.variants' must be an array");
    for (const auto& v : arr) {
      if (!v.is_object()) throw ConfigError("config: 'compare.variants' entries must be objects");
      VariantSpec variant;
      for (const auto& [key, value] : v.items()) {
        if (key == "name") {
          variant.name = value.get<std::string>();
        } else if (key == "kind") {
          variant.schedule.kind = schedule_kind_from(value.get<std::string>());
        } else if (key == "eta_max") {
          variant.schedule.eta_max = value.get<double>();
        } else if (key == "eta_min") {
          variant.schedule.eta_min = value.get<double>();
        } else if (key == "cycle_len") {
          variant.schedule.cycle_len = value.get<std::size_t>();
        } else {
          throw ConfigError("config: unknown variant key '" + key + "'");
        }
      }
      if (variant.name.empty()) {
        throw ConfigError("config: every compare variant needs a 'name'");
      }
      if (variant.schedule.kind == ScheduleKind::cyclical && variant.schedule.cycle_len == 0) {
        variant.schedule.cycle_len = cfg.swa.interval;
      }
      cfg.variants.push_back(std::move(variant));
    }
    for (std::size_t a = 0; a < cfg.variants.size(); ++a) {
      for (std::size_t b = a + 1; b < cfg.variants.size(); ++b) {
        if (cfg.variants[a].name == cfg.variants[b].name) {
          throw ConfigError("config: duplicate variant name '" + cfg.variants[a].name + "'");
        }
      }
    }
  }

  r.finish();
  cfg.rebuild_canonical();
  return cfg;
}

}  // namespace swakit
