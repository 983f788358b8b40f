#include "cib/adam.hpp"

#include "cib/error.hpp"

#include <cmath>

namespace cib {

void adam_step(AdamState& state, const ParamRefs& params, const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (const auto& [name, param] : params) {
    auto [it, fresh] = state.moments.try_emplace(name);
    auto& mom = it->second;
    if (fresh) {
      mom.m = Tensor::Zero(param->rows(), param->cols());
      mom.v = Tensor::Zero(param->rows(), param->cols());
    }
    auto g = grads.find(name);
    if (g == grads.end()) {
      mom.m *= cfg.beta1;
      mom.v *= cfg.beta2;
    } else {
      if (g->second.rows() != param->rows() || g->second.cols() != param->cols())
        throw ShapeError("adam_step: gradient of '" + name + "' is " + shape_string(shape_of(g->second)) +
                         ", parameter is " + shape_string(shape_of(*param)));
      mom.m = cfg.beta1 * mom.m + (1.0 - cfg.beta1) * g->second;
      mom.v = cfg.beta2 * mom.v + (1.0 - cfg.beta2) * g->second.cwiseAbs2();
    }
    param->array() -= cfg.learning_rate * (mom.m.array() / c1) / ((mom.v.array() / c2).sqrt() + cfg.eps);
  }
}

}  // namespace cib
