#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crbkit/config.hpp"
#include "crbkit/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"crbkit: Fisher information, CRLB and training-sequence experiments"};
  app.set_version_flag("--version", std::string(crbkit::kToolVersion));

  crbkit::RunRequest req;
  std::string config, preset, out, format;
  std::uint64_t seed = 0;
  int workers = 0;
  double tolerance_scale = 1.0;
  auto* o_config = app.add_option("--config", config, "Experiment config (JSON)");
  auto* o_preset = app.add_option("--preset", preset, "Bundled preset name (see `crbkit list`)");
  o_config->excludes(o_preset);
  auto* o_seed = app.add_option("--seed", seed, "Master seed (u64)");
  auto* o_workers = app.add_option("--workers", workers, "OpenMP worker count (0 = runtime default)")
                        ->check(CLI::NonNegativeNumber);
  auto* o_out = app.add_option("--out", out, "Results file (default $CRBKIT_OUT_DIR/<name>.<format>)");
  auto* o_format = app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* o_tol = app.add_option("--tolerance-scale", tolerance_scale, "Multiplier on every 4-sigma tolerance")
                    ->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "List bundled presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    for (const auto& name : crbkit::preset_names()) {
      std::string summary;
      try {
        const auto cfg = crbkit::load_preset(name);
        summary = cfg.resolved.at("experiment").get<std::string>();
      } catch (const std::exception& e) {
        summary = std::string("invalid: ") + e.what();
      }
      std::cout << name << "\t" << summary << "\n";
    }
    return 0;
  }

  if (*o_config) req.config_path = config;
  if (*o_preset) req.preset = preset;
  if (*o_seed) req.overrides.seed = seed;
  if (*o_workers) req.overrides.workers = workers;
  if (*o_out) req.overrides.out = out;
  if (*o_format) req.overrides.format = format;
  if (*o_tol) req.overrides.tolerance_scale = tolerance_scale;

  std::string err, written;
  const int code = crbkit::run_command(req, err, &written);
  if (code == 1) {
    std::cerr << "crbkit: " << err << "\n";
  } else {
    std::cerr << "wrote " << written << (code == 2 ? " (some verdicts: violated)" : "") << "\n";
  }
  return code;
}
