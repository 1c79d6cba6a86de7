#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace oqs::cli {

struct Overrides {
  std::optional<unsigned long long> seed;
  std::optional<int> threads;
  std::string out_dir = ".";
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Validated config with defaults filled in and command-line overrides applied.
nlohmann::json resolve_config(const nlohmann::json& config, const Overrides& ov);

/// Computes the table for a resolved config. Pure: no files touched.
Table execute(const nlohmann::json& resolved);

/// Writes the data file and manifest.json into out_dir (both atomically). Returns the data path.
std::string run(const nlohmann::json& config, const Overrides& ov);

std::string sha256_hex(const std::string& bytes);
void write_atomic(const std::string& path, const std::string& content);

}  // namespace oqs::cli
