#include "grouprec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

namespace grouprec {

BlobData make_blobs(Index k, Index per_blob, Index dim, Real stddev, Real separation, Rng& rng) {
  if (k < 1 || per_blob < 1 || dim < 2) throw std::invalid_argument("make_blobs: bad shape");
  BlobData out;
  out.means = MatX::Zero(k, dim);
  const Real phase = rng.uniform01() * 2.0 * EIGEN_PI;
  if (k == 1) {
    // single blob at the origin
  } else if (k == 2) {
    const Real r = separation / 2.0;
    for (Index c = 0; c < 2; ++c) {
      const Real angle = phase + EIGEN_PI * static_cast<Real>(c);
      out.means(c, 0) = r * std::cos(angle);
      out.means(c, 1) = r * std::sin(angle);
    }
  } else {
    const Real r = separation / (2.0 * std::sin(EIGEN_PI / static_cast<Real>(k)));
    for (Index c = 0; c < k; ++c) {
      const Real angle = phase + 2.0 * EIGEN_PI * static_cast<Real>(c) / static_cast<Real>(k);
      out.means(c, 0) = r * std::cos(angle);
      out.means(c, 1) = r * std::sin(angle);
    }
  }
  out.min_center_distance = std::numeric_limits<Real>::infinity();
  for (Index a = 0; a < k; ++a) {
    for (Index b = a + 1; b < k; ++b) {
      out.min_center_distance =
          std::min(out.min_center_distance, (out.means.row(a) - out.means.row(b)).norm());
    }
  }
  if (k == 1) out.min_center_distance = 0.0;

  out.points.resize(k * per_blob, dim);
  out.labels.resize(static_cast<std::size_t>(k * per_blob));
  Index row = 0;
  for (Index c = 0; c < k; ++c) {
    for (Index p = 0; p < per_blob; ++p, ++row) {
      for (Index j = 0; j < dim; ++j) {
        out.points(row, j) = out.means(c, j) + rng.gaussian(0.0, stddev);
      }
      out.labels[static_cast<std::size_t>(row)] = c;
    }
  }
  return out;
}

InteractionMatrix make_random_interactions(int n_users, int n_items, int per_user, Rng& rng) {
  if (per_user > n_items) throw std::invalid_argument("make_random_interactions: per_user > items");
  InteractionMatrix m;
  m.n_rows = n_users;
  m.n_cols = n_items;
  m.row_index.resize(static_cast<std::size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    std::set<int> items;
    while (static_cast<int>(items.size()) < per_user) {
      items.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(n_items))));
    }
    for (int t : items) {
      m.pairs.emplace_back(u, t);
      m.row_index[static_cast<std::size_t>(u)].push_back(t);
    }
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  return m;
}

namespace {

std::vector<int> sample_distinct(int count, int bound, Rng& rng,
                                 const std::set<int>& exclude = {}) {
  std::set<int> out;
  while (static_cast<int>(out.size()) < count) {
    const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(bound)));
    if (exclude.count(v) == 0) out.insert(v);
  }
  return {out.begin(), out.end()};
}

}  // namespace

DatasetPaths make_benchmark_files(const std::string& dir, const BenchmarkSpec& spec,
                                  std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Rng rng(seed);

  const int k = spec.latent_clusters;
  const int pool = spec.pool_per_cluster;
  const int n_items = k * pool + spec.shared_items;
  const int usable_pool = pool;
  const int own_train = std::min<int>(
      usable_pool - 1, static_cast<int>(std::lround(spec.pool_affinity * spec.train_per_user)));
  const int shared_train = spec.train_per_user - own_train;
  if (own_train < 1 || shared_train < 0 || spec.shared_items < shared_train) {
    throw std::invalid_argument("make_benchmark_files: inconsistent sizes");
  }

  auto cluster_of = [&](int u) { return u % k; };
  auto pool_item = [&](int cluster, int offset) { return cluster * pool + offset; };
  const int shared_base = k * pool;

  // Train interactions plus one held-out own-pool positive per user.
  std::vector<std::set<int>> train_items(static_cast<std::size_t>(spec.n_users));
  std::vector<int> user_positive(static_cast<std::size_t>(spec.n_users));
  for (int u = 0; u < spec.n_users; ++u) {
    const int c = cluster_of(u);
    const auto own = sample_distinct(own_train + 1, usable_pool, rng);
    auto& items = train_items[static_cast<std::size_t>(u)];
    for (int i = 0; i < own_train; ++i) items.insert(pool_item(c, own[static_cast<std::size_t>(i)]));
    user_positive[static_cast<std::size_t>(u)] =
        pool_item(c, own[static_cast<std::size_t>(own_train)]);
    for (int s : sample_distinct(shared_train, spec.shared_items, rng)) {
      items.insert(shared_base + s);
    }
  }

  DatasetPaths paths;
  paths.train = dir + "/train.txt";
  paths.user_test = dir + "/user_test.txt";
  paths.user_negatives = dir + "/user_negatives.txt";
  paths.group_train = dir + "/group_train.txt";
  paths.group_test = dir + "/group_test.txt";
  paths.group_negatives = dir + "/group_negatives.txt";
  paths.group_members = dir + "/group_members.txt";

  auto open = [](const std::string& p) {
    std::ofstream out(p);
    if (!out) throw UserError("cannot write " + p);
    return out;
  };

  {
    auto out = open(paths.train);
    for (int u = 0; u < spec.n_users; ++u) {
      for (int t : train_items[static_cast<std::size_t>(u)]) out << u + 1 << ' ' << t + 1 << '\n';
    }
  }
  {
    auto out = open(paths.user_test);
    for (int u = 0; u < spec.n_users; ++u) {
      out << u + 1 << ' ' << user_positive[static_cast<std::size_t>(u)] + 1 << '\n';
    }
  }
  {
    auto out = open(paths.user_negatives);
    for (int u = 0; u < spec.n_users; ++u) {
      const int pos = user_positive[static_cast<std::size_t>(u)];
      std::set<int> exclude = train_items[static_cast<std::size_t>(u)];
      exclude.insert(pos);
      out << '(' << u + 1 << ',' << pos + 1 << ')';
      for (int t : sample_distinct(spec.negatives_per_case, n_items, rng, exclude)) {
        out << ' ' << t + 1;
      }
      out << '\n';
    }
  }

  // Registered groups: small same-cluster subsets. The held-out positive is
  // a cluster-pool item, so it carries training signal from other cluster
  // members, matching the leave-one-out convention.
  const int n_groups = k * spec.groups_per_cluster;
  std::vector<std::vector<int>> members(static_cast<std::size_t>(n_groups));
  std::vector<int> group_positive(static_cast<std::size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) {
    const int c = g % k;
    std::vector<int> cluster_users;
    for (int u = c; u < spec.n_users; u += k) cluster_users.push_back(u);
    if (static_cast<int>(cluster_users.size()) < spec.group_size) {
      throw std::invalid_argument("make_benchmark_files: cluster smaller than group size");
    }
    for (int idx : sample_distinct(spec.group_size, static_cast<int>(cluster_users.size()), rng)) {
      members[static_cast<std::size_t>(g)].push_back(cluster_users[static_cast<std::size_t>(idx)]);
    }
    const int offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(usable_pool)));
    group_positive[static_cast<std::size_t>(g)] = pool_item(c, offset);
  }

  {
    auto out = open(paths.group_members);
    for (int g = 0; g < n_groups; ++g) {
      out << g + 1 << ' ';
      const auto& mem = members[static_cast<std::size_t>(g)];
      for (std::size_t i = 0; i < mem.size(); ++i) {
        if (i > 0) out << ',';
        out << mem[i] + 1;
      }
      out << '\n';
    }
  }
  {
    // Group-item interactions: the cluster pool each group draws from. These
    // are never used by training; they complete the benchmark layout.
    auto out = open(paths.group_train);
    for (int g = 0; g < n_groups; ++g) {
      const int c = g % k;
      for (int o = 0; o < usable_pool; ++o) out << g + 1 << ' ' << pool_item(c, o) + 1 << '\n';
    }
  }
  {
    auto out = open(paths.group_test);
    for (int g = 0; g < n_groups; ++g) {
      out << g + 1 << ' ' << group_positive[static_cast<std::size_t>(g)] + 1 << '\n';
    }
  }
  {
    auto out = open(paths.group_negatives);
    for (int g = 0; g < n_groups; ++g) {
      const int c = g % k;
      const int pos = group_positive[static_cast<std::size_t>(g)];
      out << '(' << g + 1 << ',' << pos + 1 << ')';
      int written = 0;
      std::set<int> used;
      while (written < spec.negatives_per_case) {
        const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_items)));
        if (t == pos || t / pool == c || used.count(t) > 0) continue;  // outside own pool
        used.insert(t);
        out << ' ' << t + 1;
        ++written;
      }
      out << '\n';
    }
  }
  return paths;
}

}  // namespace grouprec
