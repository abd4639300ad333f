#include "disent/numerics/adam.hpp"

#include <cmath>
#include <string>

#include "disent/numerics/errors.hpp"

namespace disent {

AdamState AdamState::for_parameters(std::span<Tensor* const> params, AdamOptions options) {
  if (!(options.learning_rate > 0.0)) throw ContractError("adam: learning rate must be positive");
  if (!(options.beta1 > 0.0 && options.beta1 < 1.0) ||
      !(options.beta2 > 0.0 && options.beta2 < 1.0)) {
    throw ContractError("adam: betas must lie in (0, 1)");
  }
  if (!(options.eps > 0.0)) throw ContractError("adam: eps must be positive");
  AdamState state;
  state.options = options;
  state.m.reserve(params.size());
  state.v.reserve(params.size());
  for (const Tensor* p : params) {
    state.m.emplace_back(p->size(), 0.0);
    state.v.emplace_back(p->size(), 0.0);
  }
  return state;
}

void adam_step(std::span<Tensor* const> params, AdamState& state) {
  if (params.size() != state.m.size()) {
    throw ContractError("adam: parameter list does not match optimizer state");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->requires_grad()) {
      throw ContractError("adam: parameter " + std::to_string(i) + " has no gradient");
    }
    if (params[i]->size() != state.m[i].size()) {
      throw ContractError("adam: parameter " + std::to_string(i) + " changed size");
    }
  }

  state.step += 1;
  const AdamOptions& o = state.options;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    std::span<double> g = p.grad();
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.eps);
    }
    p.check_finite("adam: parameter " + std::to_string(i) + " after step");
    p.zero_grad();
  }
}

}  // namespace disent
