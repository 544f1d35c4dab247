#include "ctxgate/optimizer.hpp"

#include <cmath>

#include "ctxgate/errors.hpp"

namespace ctxgate {

template <typename T>
void adamw_step(std::span<Parameter<T>* const> params, AdamState<T>& state, double lr, const AdamWOptions& opts) {
  if (state.m.empty() && state.step == 0) {
    for (const auto* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adamw_step: optimizer state holds " + std::to_string(state.m.size()) + " moments for " +
                     std::to_string(params.size()) + " parameters");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (!m.same_shape(p.value) || !v.same_shape(p.value) || !p.grad.same_shape(p.value)) {
      throw ShapeError("adamw_step: state shape mismatch for parameter '" + p.name + "'");
    }
    const double decay = p.decay ? lr * opts.weight_decay : 0.0;
    for (std::size_t j = 0; j < p.value.numel(); ++j) {
      const double g = static_cast<double>(p.grad[j]);
      const double mj = opts.beta1 * static_cast<double>(m[j]) + (1.0 - opts.beta1) * g;
      const double vj = opts.beta2 * static_cast<double>(v[j]) + (1.0 - opts.beta2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      double theta = static_cast<double>(p.value[j]);
      theta -= decay * theta;
      theta -= lr * (mj / bc1) / (std::sqrt(vj / bc2) + opts.eps);
      p.value[j] = static_cast<T>(theta);
    }
  }
}

template <typename T>
double clip_grad_norm(std::span<Parameter<T>* const> params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params)
    for (auto g : p->grad.data()) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const auto scale = static_cast<T>(max_norm / norm);
    for (auto* p : params)
      for (auto& g : p->grad.data()) g *= scale;
  }
  return norm;
}

template void adamw_step<float>(std::span<Parameter<float>* const>, AdamState<float>&, double, const AdamWOptions&);
template void adamw_step<double>(std::span<Parameter<double>* const>, AdamState<double>&, double,
                                 const AdamWOptions&);
template double clip_grad_norm<float>(std::span<Parameter<float>* const>, double);
template double clip_grad_norm<double>(std::span<Parameter<double>* const>, double);

}  // namespace ctxgate
