#include "grouprec/embedding.hpp"

#include "grouprec/rng.hpp"

namespace grouprec {

EmbeddingState init_embeddings(Index n_users, Index n_items, Index dim, std::uint64_t seed) {
  if (n_users < 1 || n_items < 1 || dim < 1) {
    throw std::invalid_argument("init_embeddings: dimensions must be >= 1");
  }
  Rng rng(seed);
  EmbeddingState s;
  s.dim = dim;
  s.users.resize(n_users, dim);
  s.items.resize(n_items, dim);
  for (Index i = 0; i < n_users; ++i) {
    for (Index j = 0; j < dim; ++j) s.users(i, j) = rng.gaussian(0.0, 0.1);
  }
  for (Index i = 0; i < n_items; ++i) {
    for (Index j = 0; j < dim; ++j) s.items(i, j) = rng.gaussian(0.0, 0.1);
  }
  return s;
}

}  // namespace grouprec
