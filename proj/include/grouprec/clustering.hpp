#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "grouprec/rng.hpp"
#include "grouprec/types.hpp"

namespace grouprec {

// Quantiles used to propose candidate radii; strictly increasing, in (0,1).
template <typename Scalar>
struct QuantileGrid {
  std::vector<Scalar> values;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("quantile grid is empty");
    Scalar prev = Scalar(0);
    for (Scalar q : values) {
      if (!(q > Scalar(0) && q < Scalar(1))) {
        throw std::invalid_argument("quantile outside (0,1)");
      }
      if (!(q > prev)) throw std::invalid_argument("quantiles must be strictly increasing");
      prev = q;
    }
  }
};

using QuantileGridX = QuantileGrid<Real>;

// Candidate group centers with their estimated radii and densities. During a
// pass dead (merged-away) candidates keep their slot with live=false;
// identify_groups returns a compacted set holding live candidates only.
template <typename Scalar>
struct CandidateSet {
  Mat<Scalar> centers;        // one row per candidate
  Vec<Scalar> radius;         // radius attaining the density maximum
  Vec<Scalar> density;
  std::vector<char> live;
  std::vector<char> processed;
  Index k_prime = 0;          // live candidate count
  Index total = 0;            // candidates ever created this pass
};

using CandidateSetX = CandidateSet<Real>;

template <typename Scalar>
SquareMat<Scalar> pairwise_distances(const Eigen::Ref<const Mat<Scalar>>& pts) {
  const Index k = pts.rows();
  if (k < 2) throw std::invalid_argument("pairwise_distances: need at least 2 points");
  SquareMat<Scalar> d(k, k);
  for (Index j = 0; j < k; ++j) {
    d(j, j) = Scalar(0);
    if (j + 1 < k) {
      d.col(j).segment(j + 1, k - j - 1) =
          (pts.middleRows(j + 1, k - j - 1).rowwise() - pts.row(j)).rowwise().norm();
      d.row(j).segment(j + 1, k - j - 1) = d.col(j).segment(j + 1, k - j - 1).transpose();
    }
  }
  return d;
}

// Radius proposals r_q = d_min + (d_max - d_min) * q, with the extremes taken
// over live candidates other than i.
template <typename Scalar>
std::vector<Scalar> radius_proposals(Index i, const Eigen::Ref<const SquareMat<Scalar>>& dist,
                                     const std::vector<char>& live,
                                     const QuantileGrid<Scalar>& grid) {
  Scalar d_min = std::numeric_limits<Scalar>::infinity();
  Scalar d_max = -std::numeric_limits<Scalar>::infinity();
  const Index k = dist.rows();
  for (Index j = 0; j < k; ++j) {
    if (j == i || !live[static_cast<std::size_t>(j)]) continue;
    const Scalar d = dist(j, i);
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
  }
  if (!(d_max >= d_min)) {
    throw std::invalid_argument("radius_proposals: no other live candidate");
  }
  std::vector<Scalar> radii;
  radii.reserve(grid.values.size());
  for (Scalar q : grid.values) radii.push_back(d_min + (d_max - d_min) * q);
  return radii;
}

template <typename Scalar>
struct DensityEstimate {
  Scalar density = Scalar(0);
  Scalar radius = Scalar(0);
};

// Adaptive density: the best count-per-circle-area over the proposed radii,
// counting every live candidate including i itself. Ties keep the smallest
// radius. Zero radii (exact duplicates) must be merged away beforehand.
template <typename Scalar>
DensityEstimate<Scalar> adaptive_density(Index i, const Eigen::Ref<const SquareMat<Scalar>>& dist,
                                         const std::vector<char>& live,
                                         const QuantileGrid<Scalar>& grid) {
  const auto radii = radius_proposals<Scalar>(i, dist, live, grid);
  const Index k = dist.rows();
  DensityEstimate<Scalar> best;
  bool found = false;
  for (const Scalar r : radii) {
    if (!(r > Scalar(0))) {
      throw std::invalid_argument("adaptive_density: zero radius proposal (merge duplicates first)");
    }
    Index count = 0;
    for (Index j = 0; j < k; ++j) {
      if (!live[static_cast<std::size_t>(j)]) continue;
      if (dist(j, i) <= r) ++count;
    }
    const Scalar mu = static_cast<Scalar>(count) / (Scalar(EIGEN_PI) * r * r);
    if (!found || mu > best.density) {
      best.density = mu;
      best.radius = r;
      found = true;
    }
  }
  return best;
}

// Exploring rate exp(-s_explore^2 / (s_all + 1)); 1 before any explore and
// decaying quickly with each explore taken.
inline double greedy_alpha(Index s_explore, Index s_all) {
  const double se = static_cast<double>(s_explore);
  return std::exp(-(se * se) / (static_cast<double>(s_all) + 1.0));
}

// New candidate as a random affine blend of the centers examined at the
// current and previous step.
template <typename Scalar>
RowVec<Scalar> explore_blend(const RowVec<Scalar>& current, const RowVec<Scalar>& previous,
                             Scalar sigma) {
  return sigma * current + (Scalar(1) - sigma) * previous;
}

template <typename Scalar>
RowVec<Scalar> explore(const RowVec<Scalar>& current, const RowVec<Scalar>& previous, Rng& rng) {
  return explore_blend<Scalar>(current, previous, static_cast<Scalar>(rng.gaussian(0.5, 0.5)));
}

struct MergeReport {
  Index merge_size = 0;     // |M|, always >= 1
  Index k_prime_after = 0;
};

// Consolidation step for candidate i: absorb every live candidate inside the
// radius-r_i circle whose own radius circle also reaches i, replace i by the
// mean of the absorbed set, and drop the rest.
template <typename Scalar>
MergeReport merge_split(Index i, CandidateSet<Scalar>& set,
                        const Eigen::Ref<const SquareMat<Scalar>>& dist) {
  if (!set.live[static_cast<std::size_t>(i)] || set.processed[static_cast<std::size_t>(i)]) {
    throw std::invalid_argument("merge_split: candidate must be live and unprocessed");
  }
  if (!(set.radius(i) > Scalar(0))) {
    throw std::invalid_argument("merge_split: candidate radius not estimated");
  }
  const Scalar r_i = set.radius(i);
  std::vector<Index> merged;
  for (Index j = 0; j < set.total; ++j) {
    if (!set.live[static_cast<std::size_t>(j)]) continue;
    const Scalar d = dist(j, i);
    if (d <= r_i && d <= set.radius(j)) merged.push_back(j);
  }
  RowVec<Scalar> mean = RowVec<Scalar>::Zero(set.centers.cols());
  for (Index j : merged) mean += set.centers.row(j);
  mean /= static_cast<Scalar>(merged.size());
  set.centers.row(i) = mean;
  for (Index j : merged) {
    if (j != i) set.live[static_cast<std::size_t>(j)] = false;
  }
  set.k_prime -= static_cast<Index>(merged.size()) - 1;
  set.processed[static_cast<std::size_t>(i)] = true;
  return {static_cast<Index>(merged.size()), set.k_prime};
}

struct IdentifyStep {
  enum class Kind { Exploit, Explore };
  Kind kind = Kind::Exploit;
  Index candidate = 0;      // the candidate processed (exploit) or created (explore)
  Index merge_size = 0;
  Index live_before = 0;
  Index live_after = 0;
};

struct IdentifyTrace {
  Index input_points = 0;
  Index premerged_duplicates = 0;
  Index initial_candidates = 0;   // after duplicate collapse
  Index explored = 0;
  Index removed = 0;
  Index final_live = 0;
  std::vector<IdentifyStep> steps;
};

namespace detail {

// Distance buffer with slack so explored candidates rarely force a copy.
template <typename Scalar>
struct DistBuffer {
  SquareMat<Scalar> dist;
  Index capacity = 0;

  void ensure(Index want, Index total) {
    if (want <= capacity) return;
    const Index cap = std::max(want, capacity + capacity / 2 + 8);
    SquareMat<Scalar> d(cap, cap);
    d.topLeftCorner(total, total) = dist.topLeftCorner(total, total);
    dist.swap(d);
    capacity = cap;
  }
};

}  // namespace detail

// Full identification pass: one candidate per distinct input point, densities
// estimated over the quantile grid, then a density-ordered sweep that either
// explores a new candidate or consolidates via merge_split. Deterministic for
// a fixed seed.
template <typename Scalar>
CandidateSet<Scalar> identify_groups(const Eigen::Ref<const Mat<Scalar>>& points,
                                     const QuantileGrid<Scalar>& grid, Rng& rng,
                                     Index explore_budget, IdentifyTrace* trace = nullptr) {
  grid.validate();
  const Index n = points.rows();
  if (n < 2) throw std::invalid_argument("identify_groups: need at least 2 points");

  IdentifyTrace local_trace;
  IdentifyTrace& tr = trace != nullptr ? *trace : local_trace;
  tr = IdentifyTrace{};
  tr.input_points = n;

  // Exact duplicates collapse to their first occurrence so every surviving
  // candidate has a positive minimum distance.
  const SquareMat<Scalar> point_dist = pairwise_distances<Scalar>(points);
  std::vector<Index> reps;
  reps.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    bool dup = false;
    for (Index j = 0; j < i; ++j) {
      if (point_dist(j, i) == Scalar(0)) {
        dup = true;
        break;
      }
    }
    if (!dup) reps.push_back(i);
  }
  const Index k0 = static_cast<Index>(reps.size());
  tr.premerged_duplicates = n - k0;
  tr.initial_candidates = k0;

  CandidateSet<Scalar> set;
  if (k0 == 1) {
    set.centers = points.row(reps[0]);
    set.radius = Vec<Scalar>::Zero(1);
    set.density = Vec<Scalar>::Zero(1);
    set.live = {1};
    set.processed = {1};
    set.k_prime = 1;
    set.total = 1;
    tr.final_live = 1;
    return set;
  }

  detail::DistBuffer<Scalar> buf;
  buf.ensure(k0 + 16, 0);
  set.centers.resize(k0 + 16, points.cols());
  for (Index a = 0; a < k0; ++a) {
    set.centers.row(a) = points.row(reps[static_cast<std::size_t>(a)]);
    for (Index b = 0; b < a; ++b) {
      buf.dist(b, a) = point_dist(reps[static_cast<std::size_t>(b)], reps[static_cast<std::size_t>(a)]);
      buf.dist(a, b) = buf.dist(b, a);
    }
    buf.dist(a, a) = Scalar(0);
  }

  set.radius = Vec<Scalar>::Zero(k0);
  set.density = Vec<Scalar>::Zero(k0);
  set.live.assign(static_cast<std::size_t>(k0), 1);
  set.processed.assign(static_cast<std::size_t>(k0), 0);
  set.k_prime = k0;
  set.total = k0;

  auto dist_view = [&]() {
    return Eigen::Ref<const SquareMat<Scalar>>(buf.dist.topLeftCorner(set.total, set.total));
  };
  for (Index i = 0; i < k0; ++i) {
    const auto est = adaptive_density<Scalar>(i, dist_view(), set.live, grid);
    set.density(i) = est.density;
    set.radius(i) = est.radius;
  }

  // Processing queue ordered by density descending, index ascending on ties;
  // merged candidates stay in place and are skipped when dead.
  auto before = [&](Index a, Index b) {
    if (set.density(a) != set.density(b)) return set.density(a) > set.density(b);
    return a < b;
  };
  std::vector<Index> queue(static_cast<std::size_t>(k0));
  for (Index i = 0; i < k0; ++i) queue[static_cast<std::size_t>(i)] = i;
  std::sort(queue.begin(), queue.end(), before);

  const Index s_all = k0;
  Index s_explore = 0;
  Index budget = explore_budget < 0 ? k0 : explore_budget;
  std::optional<RowVec<Scalar>> prev_center;

  for (;;) {
    Index cur = -1;
    for (Index id : queue) {
      if (set.live[static_cast<std::size_t>(id)] && !set.processed[static_cast<std::size_t>(id)]) {
        cur = id;
        break;
      }
    }
    if (cur < 0) break;
    const RowVec<Scalar> cur_center = set.centers.row(cur);

    bool do_explore = false;
    if (prev_center.has_value() && budget > 0) {
      const double alpha = greedy_alpha(s_explore, s_all);
      do_explore = rng.uniform01() < alpha;
    }

    if (do_explore) {
      const RowVec<Scalar> fresh = explore<Scalar>(cur_center, *prev_center, rng);
      buf.ensure(set.total + 1, set.total);
      if (set.centers.rows() == set.total) {
        set.centers.conservativeResize(set.total + 64, Eigen::NoChange);
      }
      const Index id = set.total;
      set.centers.row(id) = fresh;
      for (Index j = 0; j < set.total; ++j) {
        buf.dist(j, id) = (set.centers.row(j) - fresh).norm();
        buf.dist(id, j) = buf.dist(j, id);
      }
      buf.dist(id, id) = Scalar(0);
      set.total += 1;
      set.live.push_back(1);
      set.processed.push_back(0);
      set.k_prime += 1;
      set.radius.conservativeResize(set.total);
      set.density.conservativeResize(set.total);
      const auto est = adaptive_density<Scalar>(id, dist_view(), set.live, grid);
      set.density(id) = est.density;
      set.radius(id) = est.radius;
      queue.insert(std::lower_bound(queue.begin(), queue.end(), id, before), id);
      ++s_explore;
      --budget;
      ++tr.explored;
      tr.steps.push_back({IdentifyStep::Kind::Explore, id, 0, set.k_prime - 1, set.k_prime});
    } else {
      const Index live_before = set.k_prime;
      const auto rep = merge_split<Scalar>(cur, set, dist_view());
      tr.removed += rep.merge_size - 1;
      tr.steps.push_back(
          {IdentifyStep::Kind::Exploit, cur, rep.merge_size, live_before, set.k_prime});
    }
    prev_center = cur_center;
  }

  // Compact to live candidates in index order.
  CandidateSet<Scalar> out;
  out.k_prime = set.k_prime;
  out.total = set.total;
  out.centers.resize(set.k_prime, points.cols());
  out.radius.resize(set.k_prime);
  out.density.resize(set.k_prime);
  out.live.assign(static_cast<std::size_t>(set.k_prime), 1);
  out.processed.assign(static_cast<std::size_t>(set.k_prime), 1);
  Index w = 0;
  for (Index i = 0; i < set.total; ++i) {
    if (!set.live[static_cast<std::size_t>(i)]) continue;
    out.centers.row(w) = set.centers.row(i);
    out.radius(w) = set.radius(i);
    out.density(w) = set.density(i);
    ++w;
  }
  tr.final_live = out.k_prime;
  return out;
}

// Nearest final center per point, lowest index on ties.
template <typename Scalar>
std::vector<Index> nearest_center_assignment(const Eigen::Ref<const Mat<Scalar>>& points,
                                             const Eigen::Ref<const Mat<Scalar>>& centers) {
  std::vector<Index> assign(static_cast<std::size_t>(points.rows()), 0);
  for (Index i = 0; i < points.rows(); ++i) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    Index arg = 0;
    for (Index c = 0; c < centers.rows(); ++c) {
      const Scalar d = (points.row(i) - centers.row(c)).norm();
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    assign[static_cast<std::size_t>(i)] = arg;
  }
  return assign;
}

}  // namespace grouprec
