#pragma once

#include "cib/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cib {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates keyed by parameter name.
struct AdamState {
  struct Moments {
    Tensor m;
    Tensor v;
  };
  std::map<std::string, Moments> moments;
  std::int64_t step = 0;
};

using ParamRefs = std::vector<std::pair<std::string, Tensor*>>;

/// One bias-corrected Adam update (descent on `grads`). Parameters without
/// an entry in `grads` are treated as having zero gradient.
void adam_step(AdamState& state, const ParamRefs& params, const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg);

}  // namespace cib
