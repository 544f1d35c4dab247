#include "ctxgate/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "ctxgate/errors.hpp"

namespace ctxgate {

std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction) {
  // The epsilon absorbs representation error in products such as 0.1 * 1000.
  const double exact = warmup_fraction * static_cast<double>(total_steps);
  return static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

double lr_at_step(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  if (total_steps < 1) throw ArgumentError("lr_at_step: total_steps must be at least 1");
  if (step > total_steps) {
    throw ArgumentError("lr_at_step: step " + std::to_string(step) + " exceeds total " + std::to_string(total_steps));
  }
  if (step == total_steps) return 0.0;
  const std::size_t warm = warmup_steps(total_steps, cfg.warmup_fraction);
  if (step < warm) return cfg.learning_rate * static_cast<double>(step) / static_cast<double>(warm);
  return cfg.learning_rate * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warm);
}

}  // namespace ctxgate
