#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace gravnet::cli {

std::string sha256_hex(std::string_view bytes);

// Throws IoError when the file cannot be read.
std::string file_sha256(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config_hash;  // SHA-256 of the canonical option/config text
  std::map<std::string, std::string> input_digests;  // path -> SHA-256
  std::string tool_version;
  std::string timestamp;  // UTC ISO-8601

  void add_input(const std::filesystem::path& path);
  std::string to_json() const;
  // Writes manifest.json into `dir`.
  void write(const std::filesystem::path& dir) const;
};

// Current UTC time, or SOURCE_DATE_EPOCH when that is set, so that
// reproducible builds of an output directory stay byte-identical.
std::string utc_timestamp();

std::string tool_version();

}  // namespace gravnet::cli
