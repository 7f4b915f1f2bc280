#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace crbkit {

using json = nlohmann::ordered_json;

/// Schema violation; names the offending field and its line in the source.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class ExperimentKind { fim, inequalities, crlb, design, mse };
std::string to_string(ExperimentKind k);

struct Config {
  json input;     // as written, before defaults
  std::string text;
  json resolved;  // validated, every default spelled out
  std::string source;
  ExperimentKind kind() const;
};

/// Validates `text` and fills defaults. Unknown keys are errors.
Config parse_config(const std::string& text, const std::string& source);
Config load_config(const std::string& path);

/// Directory holding the bundled presets (env CRBKIT_PRESET_DIR overrides).
std::string preset_dir();
std::vector<std::string> preset_names();
std::string preset_path(const std::string& name);
Config load_preset(const std::string& name);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<double> tolerance_scale;
};

/// Applies command-line overrides to the input and resolves again.
void apply_overrides(Config& cfg, const Overrides& o);

/// FNV-1a of the compact resolved config.
std::uint64_t config_hash(const Config& cfg);

}  // namespace crbkit
