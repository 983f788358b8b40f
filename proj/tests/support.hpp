#pragma once

#include "cib/graph.hpp"
#include "cib/nets.hpp"
#include "cib/rng.hpp"
#include "cib/tensor.hpp"

#include <random>

namespace cib::testing {

inline Tensor uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = d(rng);
  return t;
}

inline Tensor binary_column(Eigen::Index rows, Rng& rng) {
  Tensor t(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) t(i, 0) = static_cast<double>(i % 2);
  std::shuffle(t.data(), t.data() + rows, rng);
  return t;
}

inline ModelConfig small_config(int d_x = 3, int d_z = 2, std::vector<int> hidden = {4}) {
  ModelConfig c;
  c.input_dim = d_x;
  c.representation_dim = d_z;
  c.hidden_dims = std::move(hidden);
  return c;
}

inline void zero_all(CibModel& m) {
  m.for_each_parameter(CibModel::Visitor([](const std::string&, Tensor& t) { t.setZero(); }));
}

/// ||a - b|| / max(||a||, ||b||), zero when both vanish.
inline double rel_err(const Tensor& a, const Tensor& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace cib::testing
