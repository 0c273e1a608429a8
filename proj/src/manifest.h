#ifndef NWSIL_MANIFEST_H_
#define NWSIL_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace nwsil {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to reproduce an output: command, effective settings,
// input digests, seed and tool version. Embedded in every CLI artifact.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> input_sha256;  // path -> hex digest
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;

  void add_input(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
};

// Lowercase hex SHA-256 of a file's bytes; throws Error(kIo).
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace nwsil

#endif  // NWSIL_MANIFEST_H_
