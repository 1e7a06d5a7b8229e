#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/format.hpp"

namespace dlab::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

void RunManifest::add_input(const std::filesystem::path& path) { inputs.emplace_back(path.string(), sha256_file(path)); }

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.emplace_back(path.filename().string(), sha256_file(path));
}

void RunManifest::write(const std::filesystem::path& directory) const {
  std::ofstream out(directory / kManifestName, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + directory.string());
  out << "command\t" << command << '\n';
  out << "tool_version\t" << kToolVersion << '\n';
  for (const auto& [k, v] : config) out << "config." << k << '\t' << v << '\n';
  for (const auto& [k, v] : inputs) out << "input." << k << '\t' << v << '\n';
  for (const auto& [k, v] : outputs) out << "output." << k << '\t' << v << '\n';
  out << "wall_clock_seconds\t" << format_double(wall_clock_seconds) << '\n';
  if (!out) throw IoError("manifest write failed");
}

std::map<std::string, std::string> RunManifest::read_outputs(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open " + manifest.string());
  std::map<std::string, std::string> outputs;
  std::string line;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.rfind("output.", 0) != 0) continue;
    outputs[line.substr(7, tab - 7)] = line.substr(tab + 1);
  }
  return outputs;
}

}  // namespace dlab::cli
