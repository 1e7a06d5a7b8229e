#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dlab::cli {

inline constexpr char kToolVersion[] = "1.0.0";
inline constexpr char kManifestName[] = "manifest.tsv";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance record written next to every command's outputs as
/// tab-separated key/value lines.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;   // resolved options
  std::vector<std::pair<std::string, std::string>> inputs;   // path -> sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // file name -> sha256
  double wall_clock_seconds = 0.0;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void write(const std::filesystem::path& directory) const;

  /// Output digests keyed by file name, as read back from a manifest file.
  static std::map<std::string, std::string> read_outputs(const std::filesystem::path& manifest);
};

}  // namespace dlab::cli
