#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "crbkit/config.hpp"

namespace crbkit {

inline constexpr const char* kToolVersion = "0.1.0";

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

struct Metadata {
  std::string experiment;
  std::string name;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

/// Shortest round-trip text for doubles; nan, inf and -inf spelled out.
std::string format_cell(const Cell& c);

/// Comment lines with the metadata, a header row and RFC 4180 quoting.
std::string render_csv(const Table& t, const Metadata& meta);
/// {"metadata": ..., "columns": [...], "rows": [{...}], "details": ...}
std::string render_json(const Table& t, const Metadata& meta, const json& details);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace crbkit
