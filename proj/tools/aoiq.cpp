// aoiq: batch experiment runner for the power-cycled status-update pipeline.
// Reads a JSON experiment config (or a built-in preset), runs it, and writes
// CSV data files; see README.md for the config schema.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoi/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"aoiq: age-of-information analysis, simulation, and "
               "optimization for a power-cycled compute/transmit pipeline"};
  std::string config_path;
  std::string mode_s;
  std::string out_path;
  std::string preset;
  std::uint64_t seed = 0;
  double tolerance = 0.0;

  auto* opt_config =
      app.add_option("--config", config_path, "experiment configuration (JSON)")
          ->check(CLI::ExistingFile);
  auto* opt_mode = app.add_option(
      "--mode", mode_s,
      "override mode: evaluate|simulate|validate|sweep|optimize|pareto");
  auto* opt_seed = app.add_option(
      "--seed", seed, "override master seed (AOIQ_SEED env var sets the "
                      "default; this flag wins)");
  auto* opt_out = app.add_option("--out", out_path, "override output path");
  auto* opt_preset =
      app.add_option("--preset", preset, "built-in experiment preset")
          ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));
  auto* opt_tol = app.add_option("--tolerance", tolerance,
                                 "override validate-mode relative tolerance");
  opt_config->excludes(opt_preset);
  opt_preset->excludes(opt_config);
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json cfg;
    if (opt_preset->count() > 0) {
      cfg = nlohmann::json::parse(aoi::preset_config(preset));
    } else if (opt_config->count() > 0) {
      std::ifstream in(config_path);
      if (!in) {
        std::fprintf(stderr, "aoiq: cannot read %s\n", config_path.c_str());
        return 1;
      }
      cfg = nlohmann::json::parse(in);
    } else {
      std::fprintf(stderr, "aoiq: need --config <path> or --preset <name>\n");
      return 1;
    }

    if (opt_mode->count() > 0) cfg["mode"] = mode_s;
    if (opt_out->count() > 0) cfg["out"] = out_path;
    if (opt_tol->count() > 0) cfg["validate"]["tolerance"] = tolerance;
    if (opt_seed->count() > 0) {
      cfg["sim"]["seed"] = seed;
    } else if (const char* env = std::getenv("AOIQ_SEED")) {
      if (!cfg.contains("sim") || !cfg["sim"].contains("seed"))
        cfg["sim"]["seed"] = std::strtoull(env, nullptr, 10);
    }

    const aoi::ExperimentResult res = aoi::run_experiment(cfg);
    for (const std::string& f : res.files)
      std::printf("wrote %s\n", f.c_str());
    if (!res.report.empty()) std::printf("%s\n", res.report.c_str());
    return res.exit_code;
  } catch (const aoi::ConfigError& e) {
    std::fprintf(stderr, "aoiq: config error: %s\n", e.what());
    return 1;
  } catch (const nlohmann::json::parse_error& e) {
    std::fprintf(stderr, "aoiq: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "aoiq: %s\n", e.what());
    return 1;
  }
}
