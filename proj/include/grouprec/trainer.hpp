#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grouprec/adam.hpp"
#include "grouprec/bpr.hpp"
#include "grouprec/clustering.hpp"
#include "grouprec/dataset.hpp"
#include "grouprec/embedding.hpp"
#include "grouprec/pretext.hpp"
#include "grouprec/rng.hpp"
#include "grouprec/types.hpp"

namespace grouprec {

struct LossWeights {
  Real a = 0.01;   // pull-and-repulsion weight
  Real b = 10.0;   // pseudo group recommendation weight
};

struct TrainConfig {
  Index dim = 32;
  LossWeights weights;
  Real lr = 1e-4;
  int epochs = 100;
  int gid_epoch = 10;               // identification runs at this epoch
  int negatives_per_positive = 4;
  int batch_size = 256;
  std::uint64_t seed = 1;
  QuantileGridX quantiles{{0.1, 0.2, 0.3}};
  long explore_budget = -1;         // -1: one per initial candidate
  bool pull_assigned_only = false;
  bool binarize_q_prime = false;
  int reidentify_every = 0;         // 0: identify once

  void validate() const;
};

struct EpochReport {
  int epoch = 0;
  Real l_par = 0.0;
  Real l_pgr = 0.0;
  Real l_u2i = 0.0;
  Real l_total = 0.0;
  Index k_prime = 0;
  double wall_ms = 0.0;
};

// Complete training state: model parameters plus everything needed to resume
// a run bit-exactly (optimizer moments and generator state).
struct TrainedModel {
  EmbeddingState emb;
  CandidateSetX groups;
  bool has_groups = false;
  PseudoLabels<Real> labels;
  MatX pseudo_q;
  AdamState opt_users;
  AdamState opt_items;
  AdamState opt_centers;
  Rng rng{0};
  int next_epoch = 0;
  std::vector<EpochReport> history;
};

Real combine_losses(const LossWeights& w, Real l_par, Real l_pgr, Real l_u2i);

// One BPR triple set for an epoch: every training pair paired with
// `count_per_positive` uniform draws from the user's non-interacted items.
BprBatch sample_negatives(const InteractionMatrix& train, int count_per_positive, Rng& rng,
                          std::vector<std::string>* warnings = nullptr);

TrainedModel init_training(const Dataset& ds, const TrainConfig& cfg);

EpochReport train_epoch(TrainedModel& model, const Dataset& ds, const TrainConfig& cfg, int epoch);

using EpochCallback = std::function<void(const EpochReport&)>;

// Runs the full schedule: BPR warm-up, identification at gid_epoch, then the
// combined objective. Deterministic for a fixed config and seed.
TrainedModel run(const TrainConfig& cfg, const Dataset& ds,
                 const EpochCallback& on_epoch = nullptr);

// Continues a resumed model to cfg.epochs, appending to its history.
void run_from(TrainedModel& model, const TrainConfig& cfg, const Dataset& ds,
              const EpochCallback& on_epoch = nullptr);

}  // namespace grouprec
