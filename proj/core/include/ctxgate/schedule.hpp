#pragma once

#include <cstddef>

#include "ctxgate/train_config.hpp"

namespace ctxgate {

/// Number of warmup steps: ceil(warmup_fraction * total_steps).
std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction);

/// Linear ramp 0 -> learning_rate over the warmup steps, then linear decay to
/// 0 at total_steps.
double lr_at_step(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

}  // namespace ctxgate
