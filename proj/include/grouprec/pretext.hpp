#pragma once

#include <vector>

#include "grouprec/dataset.hpp"
#include "grouprec/embedding.hpp"
#include "grouprec/types.hpp"

namespace grouprec {

namespace detail {

template <typename Scalar>
Mat<Scalar> normalized_or_throw(const Eigen::Ref<const Mat<Scalar>>& m, const char* what) {
  Mat<Scalar> out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const Scalar norm = m.row(i).norm();
    if (!(norm > Scalar(0))) {
      throw std::invalid_argument(std::string(what) + ": zero-norm row " + std::to_string(i));
    }
    out.row(i) = m.row(i) / norm;
  }
  return out;
}

// Chain rule through row normalization: for x~ = x/|x| and upstream gradient
// g on x~, the gradient on x is (g - (g . x~) x~) / |x|.
template <typename Scalar>
Mat<Scalar> backprop_row_normalization(const Eigen::Ref<const Mat<Scalar>>& raw,
                                       const Eigen::Ref<const Mat<Scalar>>& normalized,
                                       const Eigen::Ref<const Mat<Scalar>>& grad_normalized) {
  Mat<Scalar> out(raw.rows(), raw.cols());
  for (Index i = 0; i < raw.rows(); ++i) {
    const Scalar norm = raw.row(i).norm();
    const Scalar along = grad_normalized.row(i).dot(normalized.row(i));
    out.row(i) = (grad_normalized.row(i) - along * normalized.row(i)) / norm;
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
struct ParResult {
  Scalar loss = Scalar(0);
  Scalar pull = Scalar(0);
  Scalar repulsion = Scalar(0);
  bool repulsion_defined = true;   // false for a single center
  Mat<Scalar> grad_users;
  Mat<Scalar> grad_centers;
};

// Pull-and-repulsion loss over row-normalized users and centers:
// mean squared user-center distance minus mean squared center-center
// distance, gradients flowing through the normalization.
//
// When `assigned` is given (entries in {0,1}), the pull term averages over
// the assigned pairs only instead of all n*k pairs.
template <typename Scalar>
ParResult<Scalar> par_loss_and_grad(const Eigen::Ref<const Mat<Scalar>>& users,
                                    const Eigen::Ref<const Mat<Scalar>>& centers,
                                    const Mat<Scalar>* assigned = nullptr) {
  const Index n = users.rows();
  const Index k = centers.rows();
  if (n < 1 || k < 1) throw std::invalid_argument("par_loss_and_grad: empty input");
  if (assigned != nullptr && (assigned->rows() != n || assigned->cols() != k)) {
    throw std::invalid_argument("par_loss_and_grad: assignment shape mismatch");
  }

  const Mat<Scalar> un = detail::normalized_or_throw<Scalar>(users, "par_loss_and_grad(users)");
  const Mat<Scalar> gn = detail::normalized_or_throw<Scalar>(centers, "par_loss_and_grad(centers)");

  ParResult<Scalar> res;
  Mat<Scalar> grad_un(n, users.cols());
  Mat<Scalar> grad_gn = Mat<Scalar>::Zero(k, centers.cols());

  if (assigned == nullptr) {
    // |u~ - g~|^2 = 2 - 2 u~.g~ for unit rows.
    const Mat<Scalar> dots = un * gn.transpose();  // n x k
    const Scalar nk = static_cast<Scalar>(n) * static_cast<Scalar>(k);
    res.pull = Scalar(2) - Scalar(2) * dots.sum() / nk;
    const RowVec<Scalar> sum_gn = gn.colwise().sum();
    const RowVec<Scalar> sum_un = un.colwise().sum();
    for (Index i = 0; i < n; ++i) {
      grad_un.row(i) = (Scalar(2) / nk) * (static_cast<Scalar>(k) * un.row(i) - sum_gn);
    }
    for (Index j = 0; j < k; ++j) {
      grad_gn.row(j) = (Scalar(2) / nk) * (static_cast<Scalar>(n) * gn.row(j) - sum_un);
    }
  } else {
    const Mat<Scalar>& a = *assigned;
    const Scalar z = std::max<Scalar>(a.sum(), Scalar(1));
    const Mat<Scalar> dots = un * gn.transpose();
    Scalar pull = Scalar(0);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < k; ++j) {
        if (a(i, j) != Scalar(0)) pull += Scalar(2) - Scalar(2) * dots(i, j);
      }
    }
    res.pull = pull / z;
    const Vec<Scalar> row_counts = a.rowwise().sum();
    const Vec<Scalar> col_counts = a.colwise().sum();
    const Mat<Scalar> a_gn = a * gn;               // n x d
    const Mat<Scalar> at_un = a.transpose() * un;  // k x d
    for (Index i = 0; i < n; ++i) {
      grad_un.row(i) = (Scalar(2) / z) * (row_counts(i) * un.row(i) - a_gn.row(i));
    }
    for (Index j = 0; j < k; ++j) {
      grad_gn.row(j) = (Scalar(2) / z) * (col_counts(j) * gn.row(j) - at_un.row(j));
    }
  }

  if (k >= 2) {
    const Mat<Scalar> dots = gn * gn.transpose();
    const Scalar denom = static_cast<Scalar>(k - 1) * static_cast<Scalar>(k);
    const Scalar sum_sq = Scalar(2) * denom - Scalar(2) * (dots.sum() - static_cast<Scalar>(k));
    res.repulsion = -sum_sq / denom;
    const RowVec<Scalar> sum_gn = gn.colwise().sum();
    for (Index j = 0; j < k; ++j) {
      grad_gn.row(j) += (-Scalar(4) / denom) * (static_cast<Scalar>(k) * gn.row(j) - sum_gn);
    }
  } else {
    res.repulsion = Scalar(0);
    res.repulsion_defined = false;
  }

  res.loss = res.pull + res.repulsion;
  res.grad_users = detail::backprop_row_normalization<Scalar>(users, un, grad_un);
  res.grad_centers = detail::backprop_row_normalization<Scalar>(centers, gn, grad_gn);
  return res;
}

template <typename Scalar>
struct PseudoLabels {
  Mat<Scalar> distances;   // n x k', between normalized rows
  Mat<Scalar> assignment;  // n x k', entries in {0,1}
  Scalar threshold = Scalar(0);
};

// Distance of every normalized user to every normalized center, thresholded
// strictly below the global mean distance.
template <typename Scalar>
Mat<Scalar> assignment_from_distances(const Eigen::Ref<const Mat<Scalar>>& distances,
                                      Scalar threshold) {
  return (distances.array() < threshold).template cast<Scalar>().matrix();
}

template <typename Scalar>
PseudoLabels<Scalar> pseudo_assignment(const Eigen::Ref<const Mat<Scalar>>& users,
                                       const Eigen::Ref<const Mat<Scalar>>& centers) {
  const Index n = users.rows();
  const Index k = centers.rows();
  if (n < 1 || k < 1) throw std::invalid_argument("pseudo_assignment: empty input");
  const Mat<Scalar> un = detail::normalized_or_throw<Scalar>(users, "pseudo_assignment(users)");
  const Mat<Scalar> gn = detail::normalized_or_throw<Scalar>(centers, "pseudo_assignment(centers)");

  PseudoLabels<Scalar> out;
  out.distances.resize(n, k);
  for (Index j = 0; j < k; ++j) {
    out.distances.col(j) = (un.rowwise() - gn.row(j)).rowwise().norm();
  }
  out.threshold = out.distances.sum() / (static_cast<Scalar>(n) * static_cast<Scalar>(k));
  out.assignment = assignment_from_distances<Scalar>(out.distances, out.threshold);
  return out;
}

// Pseudo group-item interactions: entry (g, t) counts the assigned members
// of g that interacted with t.
template <typename Scalar>
Mat<Scalar> pseudo_group_interactions(const Eigen::Ref<const Mat<Scalar>>& assignment,
                                      const InteractionMatrix& train) {
  const Index n = assignment.rows();
  const Index k = assignment.cols();
  if (n != train.n_rows) {
    throw std::invalid_argument("pseudo_group_interactions: user dimension mismatch");
  }
  Mat<Scalar> q = Mat<Scalar>::Zero(k, train.n_cols);
  std::vector<Index> groups_of_user;
  for (Index u = 0; u < n; ++u) {
    groups_of_user.clear();
    for (Index g = 0; g < k; ++g) {
      if (assignment(u, g) != Scalar(0)) groups_of_user.push_back(g);
    }
    if (groups_of_user.empty()) continue;
    for (int t : train.row_index[static_cast<std::size_t>(u)]) {
      for (Index g : groups_of_user) q(g, t) += Scalar(1);
    }
  }
  return q;
}

template <typename Scalar>
void binarize_counts(Mat<Scalar>& counts) {
  counts = (counts.array() > Scalar(0)).template cast<Scalar>().matrix();
}

template <typename Scalar>
struct PgrResult {
  Scalar loss = Scalar(0);
  Mat<Scalar> grad_centers;
  Mat<Scalar> grad_items;
};

// Mean squared error between center-item scores and the pseudo interaction
// counts, materialized block-by-block over items to bound the residual.
template <typename Scalar>
PgrResult<Scalar> pgr_loss_and_grad(const Eigen::Ref<const Mat<Scalar>>& centers,
                                    const Eigen::Ref<const Mat<Scalar>>& items,
                                    const Eigen::Ref<const Mat<Scalar>>& pseudo_q,
                                    Index block_size = 1024) {
  const Index k = centers.rows();
  const Index m = items.rows();
  if (k < 1 || m < 1) throw std::invalid_argument("pgr_loss_and_grad: empty input");
  if (pseudo_q.rows() != k || pseudo_q.cols() != m) {
    throw std::invalid_argument("pgr_loss_and_grad: pseudo interaction shape mismatch");
  }
  PgrResult<Scalar> res;
  res.grad_centers = Mat<Scalar>::Zero(k, centers.cols());
  res.grad_items = Mat<Scalar>::Zero(m, items.cols());
  const Scalar scale = Scalar(2) / (static_cast<Scalar>(k) * static_cast<Scalar>(m));
  Scalar sq_sum = Scalar(0);
  for (Index start = 0; start < m; start += block_size) {
    const Index len = std::min(block_size, m - start);
    const auto item_block = items.middleRows(start, len);
    const Mat<Scalar> residual = centers * item_block.transpose() - pseudo_q.middleCols(start, len);
    sq_sum += residual.array().square().sum();
    res.grad_centers += scale * (residual * item_block);
    res.grad_items.middleRows(start, len) = scale * (residual.transpose() * centers);
  }
  res.loss = sq_sum / (static_cast<Scalar>(k) * static_cast<Scalar>(m));
  return res;
}

}  // namespace grouprec
