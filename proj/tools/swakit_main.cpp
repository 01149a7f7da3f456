// swakit command line: seeded training runs, stochastic weight averaging,
// checkpoint soup, curvature audits and schedule comparisons, all driven by
// a flat JSON config.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swakit/swakit.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* config = cmd->add_option("--config", args.config_path, "Path to the JSON config file");
  if (config_required) config->required();
  cmd->add_option("--seed", args.seed, "Override the configured seed list with one seed");
  cmd->add_option("--out", args.out, "Output directory (default: derived from the config)");
  cmd->add_flag("--quiet", args.quiet, "Suppress progress output");
}

swakit::ExperimentConfig load_config(const CommonArgs& args) {
  swakit::ExperimentConfig cfg = swakit::ExperimentConfig::from_file(args.config_path);
  if (args.seed) cfg.override_seeds({*args.seed});
  return cfg;
}

fs::path resolve_out(const CommonArgs& args, const swakit::ExperimentConfig& cfg,
                     const std::string& command) {
  if (!args.out.empty()) return fs::path(args.out);
  return fs::path(cfg.output_dir) / (command + "-" + cfg.digest);
}

int run(int argc, char** argv) {
  CLI::App app{"stochastic weight averaging experiments on small differentiable models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(swakit::kVersion));

  CommonArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Plain training run per configured seed");
  add_common(train, train_args);

  CommonArgs swa_args;
  CLI::App* swa_train =
      app.add_subcommand("swa-train", "Two-stage run with weight averaging in stage 2");
  add_common(swa_train, swa_args);

  CommonArgs flat_args;
  std::string flatness_checkpoint;
  CLI::App* flatness = app.add_subcommand(
      "flatness", "Largest Hessian eigenvalue and trace estimate for a checkpoint");
  flatness->add_option("checkpoint", flatness_checkpoint, "SWCK checkpoint to audit")->required();
  add_common(flatness, flat_args);

  CommonArgs soup_args;
  std::vector<std::string> soup_inputs;
  CLI::App* soup = app.add_subcommand("soup", "Average checkpoint files into one checkpoint");
  soup->add_option("inputs", soup_inputs, "SWCK checkpoints to average")->required();
  soup->add_option("--out", soup_args.out, "Output checkpoint path")->required();
  soup->add_flag("--quiet", soup_args.quiet, "Suppress progress output");

  CommonArgs compare_args;
  CLI::App* compare = app.add_subcommand(
      "compare-schedules", "Run every stage-2 schedule variant over all seeds and aggregate");
  add_common(compare, compare_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad flags are config errors
  }

  if (train->parsed()) {
    const auto cfg = load_config(train_args);
    const fs::path out = resolve_out(train_args, cfg, "train");
    swakit::run_training_command(cfg, false, out, train_args.quiet);
    if (!train_args.quiet) std::printf("run directory: %s\n", out.string().c_str());
  } else if (swa_train->parsed()) {
    const auto cfg = load_config(swa_args);
    const fs::path out = resolve_out(swa_args, cfg, "swa-train");
    swakit::run_training_command(cfg, true, out, swa_args.quiet);
    if (!swa_args.quiet) std::printf("run directory: %s\n", out.string().c_str());
  } else if (flatness->parsed()) {
    const auto cfg = load_config(flat_args);
    const nlohmann::json report =
        swakit::run_flatness_command(cfg, flatness_checkpoint, flat_args.seed);
    if (!flat_args.out.empty()) {
      swakit::detail::write_json_file(flat_args.out, report);
      if (!flat_args.quiet) std::printf("report written to %s\n", flat_args.out.c_str());
    } else {
      std::cout << report.dump(2) << '\n';
    }
  } else if (soup->parsed()) {
    std::vector<fs::path> inputs(soup_inputs.begin(), soup_inputs.end());
    swakit::run_soup_command(inputs, soup_args.out);
    if (!soup_args.quiet) {
      std::printf("averaged %zu checkpoints into %s\n", inputs.size(), soup_args.out.c_str());
    }
  } else if (compare->parsed()) {
    const auto cfg = load_config(compare_args);
    const fs::path out = resolve_out(compare_args, cfg, "compare");
    swakit::run_compare_command(cfg, out, compare_args.quiet);
    if (!compare_args.quiet) std::printf("comparison directory: %s\n", out.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const swakit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const swakit::LayoutError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const swakit::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const swakit::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
