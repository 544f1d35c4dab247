#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctxgate/checkpoint.hpp"
#include "ctxgate/dataset.hpp"
#include "ctxgate/metrics.hpp"
#include "ctxgate/model.hpp"
#include "ctxgate/train_config.hpp"

namespace ctxgate {

struct LabeledSequence {
  TokenSequence seq;
  int label = 0;
};

std::vector<LabeledSequence> encode_examples(std::span<const Example> examples, const Vocabulary& vocab,
                                             std::size_t max_len);

/// Index batches over n items. With shuffle on, the order is a seeded
/// permutation that also depends on the epoch; the final partial batch is kept.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                   std::size_t epoch, bool shuffle);

struct EpochRecord {
  double train_loss = 0.0;  // mean over the epoch's batches
  MetricsReport validation;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0-based
  std::size_t steps_total = 0;

  std::string to_json() const;
  static TrainHistory from_json(std::string_view text);

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  CaBertModel<float> model;
  TrainHistory history;
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochRecord& record)>;

/// Runs epochs x batches AdamW steps under the warmup/decay schedule. After
/// each epoch the model is evaluated on val_set and checkpointed when the
/// validation accuracy strictly improves; the returned model is reloaded from
/// that checkpoint.
TrainResult train(CaBertModel<float> model, std::span<const LabeledSequence> train_set,
                  std::span<const LabeledSequence> val_set, const TrainConfig& cfg,
                  const std::filesystem::path& checkpoint_path, const CheckpointInfo& info = {},
                  const EpochCallback& on_epoch = {});

std::vector<Prediction> predict_all(const CaBertModel<float>& model, std::span<const LabeledSequence> dataset);

MetricsReport evaluate(const CaBertModel<float>& model, std::span<const LabeledSequence> dataset);

MetricsReport baseline_majority(std::span<const Example> train_set, std::span<const Example> eval_set);

struct BowOptions {
  std::size_t epochs = 20;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t max_vocab = 50000;
};

/// Logistic regression on word-count vectors, trained by per-example SGD in
/// a seeded order. The feature vocabulary comes from the training set only.
MetricsReport baseline_bow(std::span<const Example> train_set, std::span<const Example> eval_set,
                           std::uint64_t seed, const BowOptions& opts = {});

}  // namespace ctxgate
