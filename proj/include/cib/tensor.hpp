#pragma once

#include <Eigen/Dense>

#include <array>
#include <random>
#include <string>

namespace cib {

/// Dense row-major 2-D array. Batches are rows, features are columns; a
/// scalar is a 1x1 tensor.
template <typename Scalar>
using TensorT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Tensor = TensorT<double>;
using Shape = std::array<Eigen::Index, 2>;

template <typename Derived>
Shape shape_of(const Eigen::DenseBase<Derived>& t) {
  return {t.rows(), t.cols()};
}

inline std::string shape_string(const Shape& s) {
  return "[" + std::to_string(s[0]) + "x" + std::to_string(s[1]) + "]";
}

inline Tensor scalar_tensor(double v) {
  Tensor t(1, 1);
  t(0, 0) = v;
  return t;
}

/// Column tensor [n x 1] from any Eigen vector expression.
template <typename Derived>
Tensor column(const Eigen::MatrixBase<Derived>& v) {
  Tensor t(v.size(), 1);
  for (Eigen::Index i = 0; i < v.size(); ++i) t(i, 0) = v(i);
  return t;
}

template <typename Rng>
Tensor standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& t) {
  return t.derived().array().isFinite().all();
}

}  // namespace cib
