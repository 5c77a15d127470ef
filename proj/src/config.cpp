#include "grouprec/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace grouprec {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "data.train",          "data.user_test",    "data.user_negatives",
      "data.group_train",    "data.group_test",   "data.group_negatives",
      "data.group_members",  "model.dim",         "loss.a",
      "loss.b",              "loss.pull_assigned_only", "loss.binarize_q_prime",
      "opt.lr",              "train.epochs",      "train.gid_epoch",
      "train.negatives",     "train.batch_size",  "train.seed",
      "train.reidentify_every", "gim.quantiles",  "gim.explore_budget",
  };
  return keys;
}

Real parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const Real r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw UserError("config: bad numeric value '" + v + "' for " + key);
  }
}

long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long r = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw UserError("config: bad integer value '" + v + "' for " + key);
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw UserError("config: bad boolean value '" + v + "' for " + key);
}

std::string format_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

KeyValueConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open config file: " + path);
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UserError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw UserError(path + ":" + std::to_string(line_no) + ": empty key");
    }
    if (known_keys().count(key) == 0) {
      throw UserError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    cfg.values[key] = value;
  }
  return cfg;
}

void apply_override(KeyValueConfig& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw UserError("--set expects key=value, got '" + kv + "'");
  const std::string key = trim(kv.substr(0, eq));
  const std::string value = trim(kv.substr(eq + 1));
  if (known_keys().count(key) == 0) throw UserError("--set: unknown key '" + key + "'");
  cfg.values[key] = value;
}

std::vector<Real> parse_real_list(const std::string& csv, const std::string& what) {
  std::vector<Real> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    out.push_back(parse_real(t, what));
  }
  if (out.empty()) throw UserError("empty list for " + what);
  return out;
}

std::vector<int> parse_int_list(const std::string& csv, const std::string& what) {
  std::vector<int> out;
  for (Real v : parse_real_list(csv, what)) out.push_back(static_cast<int>(v));
  return out;
}

TrainConfig to_train_config(const KeyValueConfig& cfg) {
  TrainConfig tc;
  for (const auto& [key, value] : cfg.values) {
    if (key == "model.dim") tc.dim = parse_long(value, key);
    else if (key == "loss.a") tc.weights.a = parse_real(value, key);
    else if (key == "loss.b") tc.weights.b = parse_real(value, key);
    else if (key == "loss.pull_assigned_only") tc.pull_assigned_only = parse_bool(value, key);
    else if (key == "loss.binarize_q_prime") tc.binarize_q_prime = parse_bool(value, key);
    else if (key == "opt.lr") tc.lr = parse_real(value, key);
    else if (key == "train.epochs") tc.epochs = static_cast<int>(parse_long(value, key));
    else if (key == "train.gid_epoch") tc.gid_epoch = static_cast<int>(parse_long(value, key));
    else if (key == "train.negatives") tc.negatives_per_positive = static_cast<int>(parse_long(value, key));
    else if (key == "train.batch_size") tc.batch_size = static_cast<int>(parse_long(value, key));
    else if (key == "train.seed") tc.seed = static_cast<std::uint64_t>(parse_long(value, key));
    else if (key == "train.reidentify_every") tc.reidentify_every = static_cast<int>(parse_long(value, key));
    else if (key == "gim.quantiles") tc.quantiles.values = parse_real_list(value, key);
    else if (key == "gim.explore_budget") tc.explore_budget = parse_long(value, key);
  }
  tc.validate();
  return tc;
}

DatasetPaths to_dataset_paths(const KeyValueConfig& cfg) {
  DatasetPaths p;
  auto pick = [&](const char* key) {
    auto it = cfg.values.find(key);
    return it == cfg.values.end() ? std::string() : it->second;
  };
  p.train = pick("data.train");
  p.user_test = pick("data.user_test");
  p.user_negatives = pick("data.user_negatives");
  p.group_train = pick("data.group_train");
  p.group_test = pick("data.group_test");
  p.group_negatives = pick("data.group_negatives");
  p.group_members = pick("data.group_members");
  if (p.train.empty()) throw UserError("config: data.train is required");
  if (p.user_negatives.empty()) throw UserError("config: data.user_negatives is required");
  return p;
}

std::map<std::string, std::string> config_snapshot(const TrainConfig& cfg,
                                                   const DatasetPaths& paths) {
  std::map<std::string, std::string> snap;
  snap["data.train"] = paths.train;
  snap["data.user_test"] = paths.user_test;
  snap["data.user_negatives"] = paths.user_negatives;
  snap["data.group_train"] = paths.group_train;
  snap["data.group_test"] = paths.group_test;
  snap["data.group_negatives"] = paths.group_negatives;
  snap["data.group_members"] = paths.group_members;
  snap["model.dim"] = std::to_string(cfg.dim);
  snap["loss.a"] = format_real(cfg.weights.a);
  snap["loss.b"] = format_real(cfg.weights.b);
  snap["loss.pull_assigned_only"] = cfg.pull_assigned_only ? "true" : "false";
  snap["loss.binarize_q_prime"] = cfg.binarize_q_prime ? "true" : "false";
  snap["opt.lr"] = format_real(cfg.lr);
  snap["train.epochs"] = std::to_string(cfg.epochs);
  snap["train.gid_epoch"] = std::to_string(cfg.gid_epoch);
  snap["train.negatives"] = std::to_string(cfg.negatives_per_positive);
  snap["train.batch_size"] = std::to_string(cfg.batch_size);
  snap["train.seed"] = std::to_string(cfg.seed);
  snap["train.reidentify_every"] = std::to_string(cfg.reidentify_every);
  std::string qs;
  for (std::size_t i = 0; i < cfg.quantiles.values.size(); ++i) {
    if (i > 0) qs += ",";
    qs += format_real(cfg.quantiles.values[i]);
  }
  snap["gim.quantiles"] = qs;
  snap["gim.explore_budget"] = std::to_string(cfg.explore_budget);
  return snap;
}

}  // namespace grouprec
