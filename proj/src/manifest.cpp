#include "grouprec/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "grouprec/types.hpp"

namespace grouprec {

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot hash missing file: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void RunManifest::add_input(const std::string& path) {
  if (!path.empty()) input_hashes[path] = file_hash_hex(path);
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["manifest_version"] = "1";
  j["command"] = command;
  j["version_tag"] = version_tag;
  j["config"] = config;
  j["inputs"] = input_hashes;
  j["artifacts"] = artifacts;
  j["timings_ms"] = timings_ms;
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write manifest: " + path);
  out << to_json();
}

}  // namespace grouprec
