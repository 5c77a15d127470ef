#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "grouprec/types.hpp"

namespace grouprec {

// Maps raw file ids to dense indices in first-appearance order. The mapping
// is a bijection per entity kind and is stable for a fixed file load order.
class IdRegistry {
 public:
  int intern(std::int64_t raw) {
    auto it = to_dense_.find(raw);
    if (it != to_dense_.end()) return it->second;
    const int idx = static_cast<int>(to_raw_.size());
    to_dense_.emplace(raw, idx);
    to_raw_.push_back(raw);
    return idx;
  }

  std::optional<int> lookup(std::int64_t raw) const {
    auto it = to_dense_.find(raw);
    if (it == to_dense_.end()) return std::nullopt;
    return it->second;
  }

  std::int64_t raw(int dense) const { return to_raw_.at(static_cast<std::size_t>(dense)); }
  int size() const { return static_cast<int>(to_raw_.size()); }

 private:
  std::unordered_map<std::int64_t, int> to_dense_;
  std::vector<std::int64_t> to_raw_;
};

// Sparse binary interaction matrix with dense indices and per-row sorted
// adjacency. Immutable once loaded.
struct InteractionMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<std::pair<int, int>> pairs;       // sorted, unique
  std::vector<std::vector<int>> row_index;      // per-row sorted column lists

  bool contains(int row, int col) const;
  void restamp(int rows, int cols);             // grow counts, keep pairs
};

struct GroupMembership {
  int n_groups = 0;
  std::vector<std::vector<int>> members;        // per-group sorted user indices
};

struct EvalCase {
  int subject = 0;
  int positive = 0;
  std::vector<int> negatives;
};

enum class SubjectKind { User, Group };

struct EvalSet {
  SubjectKind subject_kind = SubjectKind::User;
  std::vector<EvalCase> cases;
};

struct LoadContext {
  IdRegistry users;
  IdRegistry items;
  IdRegistry groups;
  std::vector<std::string> warnings;
};

struct Dataset {
  // Model dimensions: registry sizes before the group-side training files
  // are read, so a training run is unaffected by their presence.
  int n_users = 0;
  int n_items = 0;

  InteractionMatrix train;                      // user-item, drives training
  InteractionMatrix group_train;                // group-item, evaluation-side only
  GroupMembership groups;
  EvalSet user_eval;
  EvalSet group_eval;
  bool has_group_side = false;

  LoadContext ctx;
};

struct ValidationReport {
  std::vector<std::string> errors;              // range violations: abort
  std::vector<std::string> warnings;            // cold entities, odd shapes
  std::vector<std::string> info;
  bool group_train_excluded_from_training = true;

  bool ok() const { return errors.empty(); }
  std::string to_string() const;
};

InteractionMatrix load_interactions(const std::string& path, IdRegistry& subjects,
                                    IdRegistry& items,
                                    std::vector<std::string>* warnings = nullptr);

EvalSet load_eval_negatives(const std::string& path, IdRegistry& subjects, IdRegistry& items,
                            SubjectKind kind);

GroupMembership load_group_members(const std::string& path, IdRegistry& groups,
                                   IdRegistry& users, std::vector<std::string>* warnings = nullptr);

void write_interactions(const std::string& path, const InteractionMatrix& m,
                        const IdRegistry& subjects, const IdRegistry& items);

struct DatasetPaths {
  std::string train;
  std::string user_test;
  std::string user_negatives;
  std::string group_train;          // optional
  std::string group_test;           // optional
  std::string group_negatives;      // optional
  std::string group_members;        // optional
};

// Loads the full benchmark layout. User-side files fix the model dimensions;
// group-side files may register extra ids past them, which the validator
// reports. Group files are optional as a set.
Dataset load_dataset(const DatasetPaths& paths);

ValidationReport validate_dataset(const Dataset& ds);

}  // namespace grouprec
