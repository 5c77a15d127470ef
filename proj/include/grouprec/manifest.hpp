#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace grouprec {

// FNV-1a over the file bytes; streams the file so large inputs are fine.
std::string file_hash_hex(const std::string& path);

// Everything needed to rerun a command: the full effective configuration,
// input file hashes, produced artifact paths, and timings. One manifest per
// emitted metric file.
struct RunManifest {
  std::string command;
  std::string version_tag;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> input_hashes;   // path -> fnv1a64
  std::map<std::string, std::string> artifacts;      // name -> path
  std::map<std::string, double> timings_ms;

  void add_input(const std::string& path);
  std::string to_json() const;
  void write(const std::string& path) const;
};

}  // namespace grouprec
