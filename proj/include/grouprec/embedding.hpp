#pragma once

#include <cstdint>

#include "grouprec/types.hpp"

namespace grouprec {

// Learnable parameters of the base recommender: one embedding row per user
// and per item, scored by inner product.
struct EmbeddingState {
  MatX users;   // n x d
  MatX items;   // m x d
  Index dim = 0;
};

// Entries i.i.d. Gaussian(0, 0.1); identical seed gives identical matrices.
EmbeddingState init_embeddings(Index n_users, Index n_items, Index dim, std::uint64_t seed);

inline Real score(const EmbeddingState& s, Index user, Index item) {
  if (user < 0 || user >= s.users.rows() || item < 0 || item >= s.items.rows()) {
    throw std::out_of_range("score: index out of range");
  }
  return s.users.row(user).dot(s.items.row(item));
}

// Each row divided by its Euclidean norm; zero rows stay zero. Returns the
// number of zero rows so callers can warn.
template <typename Scalar>
Index normalize_rows(Mat<Scalar>& m) {
  Index zero_rows = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    const Scalar norm = m.row(i).norm();
    if (norm > Scalar(0)) {
      m.row(i) /= norm;
    } else {
      ++zero_rows;
    }
  }
  return zero_rows;
}

template <typename Scalar>
Mat<Scalar> normalized_rows(const Mat<Scalar>& m) {
  Mat<Scalar> out = m;
  normalize_rows(out);
  return out;
}

}  // namespace grouprec
