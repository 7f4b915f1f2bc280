#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crbkit/channel_model.hpp"
#include "crbkit/config.hpp"
#include "crbkit/inequalities.hpp"
#include "crbkit/result_sink.hpp"
#include "crbkit/seq_design.hpp"

namespace crbkit {

// Builders from validated config blocks.
MatrixXd lower_triangular_shaping(Index n);
NoiseModel noise_from_json(const json& block);
/// Complex covariance of a channel noise block; snr_db rescales it against
/// `signal_power` (mean |xi|^2 per complex sample).
MatrixXcd complex_covariance_from_json(const json& block, Index n, double signal_power);
NoiseModel channel_noise_from_json(const json& block, Index n, double signal_power);
TrainingSequence sequence_from_json(const json& block, Index n, Index m);
ChannelSpec channel_from_json(const json& channel, const json& noise);

struct RunResult {
  Table table;
  std::vector<InequalityReport> reports;  // every verdict-bearing check
  json details;
  bool violated() const;
};

/// Runs a resolved config; does no I/O.
RunResult run_experiment(const Config& cfg);

/// Where results go: explicit path, else $CRBKIT_OUT_DIR (default
/// ./crbkit_out) joined with <name>.<format>.
std::string output_path(const Config& cfg);
/// <results stem>.resolved.json next to the results file.
std::string echo_path(const std::string& results_path);

struct RunRequest {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  Overrides overrides;
};

/// Full command: load, run, write results and echo. Returns the exit code
/// (0 ok, 2 some verdict violated, 1 error; errors go to `err`).
int run_command(const RunRequest& req, std::string& err, std::string* written = nullptr);

}  // namespace crbkit
