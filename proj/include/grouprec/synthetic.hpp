#pragma once

#include <string>
#include <vector>

#include "grouprec/dataset.hpp"
#include "grouprec/rng.hpp"
#include "grouprec/types.hpp"

namespace grouprec {

struct BlobData {
  MatX points;                    // (k * per_blob) x dim
  std::vector<Index> labels;      // true blob per point
  MatX means;                     // k x dim placed centers
  Real min_center_distance = 0;
};

// Isotropic Gaussian blobs around centers placed on a circle in the first two
// coordinates (remaining coordinates zero), rotated by a random phase. The
// circle radius is chosen so adjacent centers sit `separation` apart.
BlobData make_blobs(Index k, Index per_blob, Index dim, Real stddev, Real separation, Rng& rng);

// Uniform random interactions, `per_user` distinct items each.
InteractionMatrix make_random_interactions(int n_users, int n_items, int per_user, Rng& rng);

struct BenchmarkSpec {
  int n_users = 1200;
  int latent_clusters = 24;        // preference clusters behind the data
  int pool_per_cluster = 30;       // items owned by each cluster
  int shared_items = 180;          // globally popular tail
  int train_per_user = 15;
  Real pool_affinity = 0.8;        // fraction of a user's items from the own pool
  int groups_per_cluster = 3;      // registered (test-time) groups per cluster
  int group_size = 8;
  int negatives_per_case = 100;
  int reserved_per_cluster = 3;    // pool items held out for group positives
};

// Writes a planted-structure benchmark in the standard file layout (train,
// test, negatives per subject kind, group members) and returns the paths.
// Users inside a latent cluster share an item pool; registered groups are
// small subsets of one cluster, evaluated against held-out pool items.
DatasetPaths make_benchmark_files(const std::string& dir, const BenchmarkSpec& spec,
                                  std::uint64_t seed);

}  // namespace grouprec
