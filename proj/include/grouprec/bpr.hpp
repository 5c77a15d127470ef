#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "grouprec/adam.hpp"
#include "grouprec/embedding.hpp"
#include "grouprec/types.hpp"

namespace grouprec {

struct BprTriple {
  int user = 0;
  int pos = 0;
  int neg = 0;
};

using BprBatch = std::vector<BprTriple>;

inline Real sigmoid(Real x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

// -ln sigmoid(x), stable for large |x|.
inline Real neg_log_sigmoid(Real x) {
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Pairwise ranking loss, one term per user equal to the mean -ln sigmoid of
// that user's score margins within the batch. Gradients accumulate into the
// touched rows of U and I only.
inline Real bpr_loss_and_grad(const EmbeddingState& s, const BprBatch& batch,
                              SparseRowGrads* grad_users, SparseRowGrads* grad_items) {
  if (batch.empty()) throw std::invalid_argument("bpr_loss_and_grad: empty batch");

  std::unordered_map<int, Real> user_weight;
  for (const auto& t : batch) user_weight[t.user] += 1.0;
  for (auto& [u, w] : user_weight) w = 1.0 / w;

  Real loss = 0.0;
  for (const auto& t : batch) {
    const Real w = user_weight.at(t.user);
    const RowVecX diff = s.items.row(t.pos) - s.items.row(t.neg);
    const Real margin = s.users.row(t.user).dot(diff);
    loss += w * neg_log_sigmoid(margin);
    if (grad_users != nullptr && grad_items != nullptr) {
      // d/dm of -ln sigmoid(m) is sigmoid(m) - 1.
      const Real coeff = w * (sigmoid(margin) - 1.0);
      grad_users->add(t.user, coeff * diff);
      grad_items->add(t.pos, coeff * s.users.row(t.user));
      grad_items->add(t.neg, -coeff * s.users.row(t.user));
    }
  }
  return loss;
}

inline Real bpr_loss(const EmbeddingState& s, const BprBatch& batch) {
  return bpr_loss_and_grad(s, batch, nullptr, nullptr);
}

// Number of distinct users in a batch; the loss above is a sum of exactly
// this many per-user terms.
inline std::size_t bpr_user_count(const BprBatch& batch) {
  std::unordered_map<int, char> users;
  for (const auto& t : batch) users.emplace(t.user, 1);
  return users.size();
}

}  // namespace grouprec
