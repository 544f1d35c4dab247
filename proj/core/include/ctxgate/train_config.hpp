#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace ctxgate {

/// Defaults are the fine-tuning regimen: lr 2e-5, 3 epochs, batch 16, 10% warmup.
struct TrainConfig {
  double learning_rate = 2e-5;
  std::size_t epochs = 3;
  std::size_t batch_size = 16;
  double warmup_fraction = 0.10;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  std::optional<double> grad_clip_norm = 1.0;
  std::optional<std::pair<double, double>> class_weights;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Flat key=value text. Keys are the field names above; blank lines and lines
/// starting with '#' are skipped. grad_clip_norm and class_weights accept
/// "none"; class_weights otherwise takes "w0,w1". Unknown keys are errors.
TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string format_train_config(const TrainConfig& cfg);

}  // namespace ctxgate
