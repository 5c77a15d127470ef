#pragma once

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "grouprec/types.hpp"

namespace grouprec {

// Gradient restricted to the rows a batch touched, accumulated in arrival
// order and applied in ascending row order so updates are reproducible.
class SparseRowGrads {
 public:
  explicit SparseRowGrads(Index cols) : cols_(cols) {}

  void add(Index row, const RowVecX& g) {
    auto it = slots_.find(row);
    if (it == slots_.end()) {
      slots_.emplace(row, data_.size());
      data_.push_back(g);
      rows_.push_back(row);
    } else {
      data_[it->second] += g;
    }
  }

  std::vector<Index> sorted_rows() const {
    std::vector<Index> rows = rows_;
    std::sort(rows.begin(), rows.end());
    return rows;
  }

  const RowVecX& at(Index row) const { return data_[slots_.at(row)]; }
  Index cols() const { return cols_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

 private:
  Index cols_;
  std::unordered_map<Index, std::size_t> slots_;
  std::vector<Index> rows_;
  std::vector<RowVecX> data_;
};

// Adam with bias correction, applied lazily: only rows present in the
// gradient get their moments advanced.
struct AdamState {
  MatX m;
  MatX v;
  long step = 0;
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

inline AdamState make_adam(Index rows, Index cols, Real lr) {
  AdamState s;
  s.m = MatX::Zero(rows, cols);
  s.v = MatX::Zero(rows, cols);
  s.lr = lr;
  return s;
}

namespace detail {
inline void adam_update_row(MatX& params, AdamState& opt, Index r,
                            const Eigen::Ref<const RowVecX>& g) {
  if (!g.allFinite()) {
    throw std::runtime_error("optimizer_step: non-finite gradient at row " + std::to_string(r));
  }
  opt.m.row(r) = opt.beta1 * opt.m.row(r) + (1.0 - opt.beta1) * g;
  opt.v.row(r) = opt.beta2 * opt.v.row(r).array().matrix() +
                 (1.0 - opt.beta2) * g.array().square().matrix();
  const Real bc1 = 1.0 - std::pow(opt.beta1, static_cast<Real>(opt.step));
  const Real bc2 = 1.0 - std::pow(opt.beta2, static_cast<Real>(opt.step));
  const RowVecX m_hat = opt.m.row(r) / bc1;
  const RowVecX v_hat = opt.v.row(r) / bc2;
  params.row(r).array() -= opt.lr * m_hat.array() / (v_hat.array().sqrt() + opt.eps);
}
}  // namespace detail

inline void adam_step_rows(MatX& params, AdamState& opt, const SparseRowGrads& grads) {
  if (params.rows() != opt.m.rows() || params.cols() != opt.m.cols() ||
      grads.cols() != params.cols()) {
    throw std::runtime_error("optimizer_step: shape mismatch");
  }
  ++opt.step;
  for (Index r : grads.sorted_rows()) {
    if (r < 0 || r >= params.rows()) throw std::runtime_error("optimizer_step: row out of range");
    detail::adam_update_row(params, opt, r, grads.at(r));
  }
}

inline void adam_step_dense(MatX& params, AdamState& opt, const MatX& grad) {
  if (params.rows() != grad.rows() || params.cols() != grad.cols() ||
      params.rows() != opt.m.rows()) {
    throw std::runtime_error("optimizer_step: shape mismatch");
  }
  ++opt.step;
  for (Index r = 0; r < params.rows(); ++r) {
    detail::adam_update_row(params, opt, r, grad.row(r));
  }
}

}  // namespace grouprec
