#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctxgate/tensor.hpp"

namespace ctxgate {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

template <typename T>
struct AdamState {
  std::vector<BasicTensor<T>> m;
  std::vector<BasicTensor<T>> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update with decoupled weight decay
/// (theta -= lr * wd * theta) on parameters whose decay flag is set. The state
/// is sized on first use; later calls must pass the same parameter list.
template <typename T>
void adamw_step(std::span<Parameter<T>* const> params, AdamState<T>& state, double lr, const AdamWOptions& opts);

/// Scales every gradient so the global L2 norm is at most max_norm. Returns
/// the norm before clipping.
template <typename T>
double clip_grad_norm(std::span<Parameter<T>* const> params, double max_norm);

}  // namespace ctxgate
