#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grouprec {

// Dense row-major matrices: one entity embedding per row, rows contiguous
// for checkpoint IO and per-row updates.
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Square matrices (distance matrices) keep Eigen's column-major default;
// they are symmetric and accessed column-wise.
template <typename Scalar>
using SquareMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Real = double;
using MatX = Mat<Real>;
using VecX = Vec<Real>;
using RowVecX = RowVec<Real>;
using SquareMatX = SquareMat<Real>;
using Index = Eigen::Index;

// Raised for bad user input (files, config, CLI arguments). The CLI maps
// this to exit code 2; anything else is an internal error (exit code 1).
class UserError : public std::runtime_error {
 public:
  explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace grouprec
