#pragma once

#include <map>
#include <string>
#include <vector>

#include "grouprec/dataset.hpp"
#include "grouprec/trainer.hpp"

namespace grouprec {

// Flat `key = value` configuration; '#' starts a comment. Every key can also
// be supplied or overridden on the command line as --set key=value.
struct KeyValueConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values[key] = value; }
};

KeyValueConfig parse_config_file(const std::string& path);
void apply_override(KeyValueConfig& cfg, const std::string& key_equals_value);

// Binds the flat keys to the typed config, rejecting unknown keys.
TrainConfig to_train_config(const KeyValueConfig& cfg);
DatasetPaths to_dataset_paths(const KeyValueConfig& cfg);

// Canonical snapshot of the effective configuration: every supported key with
// its effective value, suitable for manifests and reruns.
std::map<std::string, std::string> config_snapshot(const TrainConfig& cfg,
                                                   const DatasetPaths& paths);

std::vector<Real> parse_real_list(const std::string& csv, const std::string& what);
std::vector<int> parse_int_list(const std::string& csv, const std::string& what);

}  // namespace grouprec
