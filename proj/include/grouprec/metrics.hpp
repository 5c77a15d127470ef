#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "grouprec/clustering.hpp"
#include "grouprec/dataset.hpp"
#include "grouprec/embedding.hpp"
#include "grouprec/types.hpp"

namespace grouprec {

// Rank of the positive among its negatives; ties count against the positive
// so results do not depend on sort stability.
inline int rank_of(Real positive_score, const std::vector<Real>& negative_scores) {
  if (negative_scores.empty()) throw std::invalid_argument("rank_of: no negatives");
  int rank = 1;
  for (Real s : negative_scores) {
    if (s >= positive_score) ++rank;
  }
  return rank;
}

struct RankCaseOutcome {
  std::vector<int> hit;      // aligned with k_values
  std::vector<Real> ndcg;
};

inline RankCaseOutcome rank_case(Real positive_score, const std::vector<Real>& negative_scores,
                                 const std::vector<int>& k_values) {
  const int rank = rank_of(positive_score, negative_scores);
  RankCaseOutcome out;
  for (int k : k_values) {
    const bool hit = rank <= k;
    out.hit.push_back(hit ? 1 : 0);
    out.ndcg.push_back(hit ? 1.0 / std::log2(static_cast<Real>(rank) + 1.0) : 0.0);
  }
  return out;
}

struct RankingMetrics {
  std::map<int, Real> hr;
  std::map<int, Real> ndcg;
  long n_cases = 0;
  Real avg = 0.0;  // mean over all reported hr and ndcg values
};

// Aggregates rank histograms rather than per-case floats so the result is
// exactly independent of case order.
template <typename ScoreFn>
RankingMetrics evaluate_cases(const EvalSet& eval, const std::vector<int>& k_values,
                              ScoreFn&& score_of) {
  if (k_values.empty()) throw std::invalid_argument("evaluate_cases: no cutoffs");
  const int k_max = *std::max_element(k_values.begin(), k_values.end());
  std::vector<long> rank_counts(static_cast<std::size_t>(k_max) + 1, 0);
  long n = 0;
  for (const auto& c : eval.cases) {
    const Real pos = score_of(c.subject, c.positive);
    std::vector<Real> negs;
    negs.reserve(c.negatives.size());
    for (int t : c.negatives) negs.push_back(score_of(c.subject, t));
    const int rank = rank_of(pos, negs);
    if (rank <= k_max) ++rank_counts[static_cast<std::size_t>(rank)];
    ++n;
  }
  RankingMetrics m;
  m.n_cases = n;
  Real sum_all = 0.0;
  for (int k : k_values) {
    long hits = 0;
    Real gain = 0.0;
    for (int r = 1; r <= k; ++r) {
      hits += rank_counts[static_cast<std::size_t>(r)];
      gain += static_cast<Real>(rank_counts[static_cast<std::size_t>(r)]) /
              std::log2(static_cast<Real>(r) + 1.0);
    }
    m.hr[k] = n > 0 ? static_cast<Real>(hits) / static_cast<Real>(n) : 0.0;
    m.ndcg[k] = n > 0 ? gain / static_cast<Real>(n) : 0.0;
    sum_all += m.hr[k] + m.ndcg[k];
  }
  m.avg = sum_all / (2.0 * static_cast<Real>(k_values.size()));
  return m;
}

inline RankingMetrics evaluate_user_rec(const EmbeddingState& emb, const EvalSet& eval,
                                        const std::vector<int>& k_values) {
  return evaluate_cases(eval, k_values, [&](int subject, int item) {
    return score(emb, subject, item);
  });
}

enum class GroupScoreMode { MemberMean, NearestCenter };

inline RowVecX group_embedding(const EmbeddingState& emb, const GroupMembership& groups,
                               int group, GroupScoreMode mode, const MatX* centers) {
  if (group < 0 || group >= groups.n_groups) throw UserError("unknown group index");
  const auto& members = groups.members[static_cast<std::size_t>(group)];
  if (members.empty()) throw UserError("group " + std::to_string(group) + " is empty");
  RowVecX mean = RowVecX::Zero(emb.dim);
  for (int u : members) {
    if (u < 0 || u >= emb.users.rows()) {
      throw UserError("group " + std::to_string(group) + ": member " + std::to_string(u) +
                      " has no trained embedding");
    }
    mean += emb.users.row(u);
  }
  mean /= static_cast<Real>(members.size());
  if (mode == GroupScoreMode::MemberMean) return mean;
  if (centers == nullptr || centers->rows() == 0) {
    throw UserError("nearest-center scoring requires identified group centers");
  }
  Real best = std::numeric_limits<Real>::infinity();
  Index arg = 0;
  for (Index c = 0; c < centers->rows(); ++c) {
    const Real d = (mean - centers->row(c)).norm();
    if (d < best) {
      best = d;
      arg = c;
    }
  }
  return centers->row(arg);
}

inline RankingMetrics evaluate_group_rec(const EmbeddingState& emb, const GroupMembership& groups,
                                         const EvalSet& eval, const std::vector<int>& k_values,
                                         GroupScoreMode mode = GroupScoreMode::MemberMean,
                                         const MatX* centers = nullptr) {
  std::map<int, RowVecX> cache;
  return evaluate_cases(eval, k_values, [&](int subject, int item) {
    auto it = cache.find(subject);
    if (it == cache.end()) {
      it = cache.emplace(subject, group_embedding(emb, groups, subject, mode, centers)).first;
    }
    if (item < 0 || item >= emb.items.rows()) throw UserError("eval item outside trained range");
    return it->second.dot(emb.items.row(item));
  });
}

// Silhouette over a precomputed distance matrix: cohesion a(i) vs separation
// b(i), singleton clusters contributing 0.
inline Real silhouette_from_distances(const Eigen::Ref<const SquareMatX>& dist,
                                      const std::vector<Index>& assignment) {
  const Index n = dist.rows();
  if (static_cast<Index>(assignment.size()) != n) {
    throw std::invalid_argument("silhouette: assignment size mismatch");
  }
  Index max_cluster = 0;
  for (Index c : assignment) max_cluster = std::max(max_cluster, c);
  std::vector<Index> cluster_size(static_cast<std::size_t>(max_cluster) + 1, 0);
  for (Index c : assignment) ++cluster_size[static_cast<std::size_t>(c)];
  Index non_empty = 0;
  for (Index s : cluster_size) {
    if (s > 0) ++non_empty;
  }
  if (non_empty < 2) throw std::invalid_argument("silhouette: needs at least 2 non-empty clusters");

  Real total = 0.0;
  std::vector<Real> sums(cluster_size.size(), 0.0);
  for (Index i = 0; i < n; ++i) {
    const Index own = assignment[static_cast<std::size_t>(i)];
    if (cluster_size[static_cast<std::size_t>(own)] == 1) continue;  // contributes 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])] += dist(j, i);
    }
    const Real a = sums[static_cast<std::size_t>(own)] /
                   static_cast<Real>(cluster_size[static_cast<std::size_t>(own)] - 1);
    Real b = std::numeric_limits<Real>::infinity();
    for (std::size_t c = 0; c < cluster_size.size(); ++c) {
      if (static_cast<Index>(c) == own || cluster_size[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<Real>(cluster_size[c]));
    }
    const Real denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<Real>(n);
}

inline Real silhouette(const Eigen::Ref<const MatX>& points, const std::vector<Index>& assignment) {
  return silhouette_from_distances(pairwise_distances<Real>(points), assignment);
}

}  // namespace grouprec
