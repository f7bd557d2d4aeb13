// rpkf: random-parameter Kalman filtering experiments from YAML configs.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rpkf/cli/config.hpp"
#include "rpkf/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random-parameter Kalman filter: filter, simulate, montecarlo, sweep"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string measurements;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;

  for (const char* name : {"filter", "simulate", "montecarlo", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Experiment config (YAML)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Base seed (overrides seed)");
    sub->add_option("--runs", runs, "Monte-Carlo runs (overrides runs)")->check(CLI::PositiveNumber);
    if (std::string(name) == "filter") {
      sub->add_option("--measurements", measurements,
                      "Measurement CSV (overrides input.measurements)");
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = rpkf::cli::load_config(config_path);
    cfg.mode = rpkf::cli::parse_mode(app.get_subcommands().front()->get_name());
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!measurements.empty()) cfg.measurements_path = measurements;
    if (seed) cfg.seed = *seed;
    if (runs) cfg.runs = *runs;
    return rpkf::cli::run(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
