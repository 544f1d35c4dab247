#include "ctxgate/trainer.hpp"

#include <cmath>
#include <json.hpp>

#include "ctxgate/errors.hpp"
#include "ctxgate/optimizer.hpp"
#include "ctxgate/schedule.hpp"

namespace ctxgate {

namespace {

constexpr std::size_t kEvalBatch = 64;
constexpr std::uint64_t kDropoutSalt = 0xd20b;

}  // namespace

std::vector<LabeledSequence> encode_examples(std::span<const Example> examples, const Vocabulary& vocab,
                                             std::size_t max_len) {
  std::vector<LabeledSequence> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back({encode(e.turns, vocab, max_len), e.label});
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                   std::size_t epoch, bool shuffle) {
  if (batch_size < 1) throw ArgumentError("make_batches: batch_size must be at least 1");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) {
    Rng rng(mix_seed(seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<Prediction> predict_all(const CaBertModel<float>& model, std::span<const LabeledSequence> dataset) {
  std::vector<Prediction> out;
  out.reserve(dataset.size());
  std::vector<TokenSequence> chunk;
  for (std::size_t start = 0; start < dataset.size(); start += kEvalBatch) {
    const std::size_t end = std::min(dataset.size(), start + kEvalBatch);
    chunk.clear();
    for (std::size_t i = start; i < end; ++i) chunk.push_back(dataset[i].seq);
    auto preds = predict(forward_eval(model, std::span<const TokenSequence>(chunk)));
    out.insert(out.end(), preds.begin(), preds.end());
  }
  return out;
}

MetricsReport evaluate(const CaBertModel<float>& model, std::span<const LabeledSequence> dataset) {
  if (dataset.empty()) throw ArgumentError("evaluate: empty dataset");
  const auto preds = predict_all(model, dataset);
  std::vector<int> truth, guess;
  truth.reserve(dataset.size());
  guess.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    truth.push_back(dataset[i].label);
    guess.push_back(preds[i].label);
  }
  return report(confusion(truth, guess));
}

TrainResult train(CaBertModel<float> model, std::span<const LabeledSequence> train_set,
                  std::span<const LabeledSequence> val_set, const TrainConfig& cfg,
                  const std::filesystem::path& checkpoint_path, const CheckpointInfo& info,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw TrainingError("training set is empty");
  if (val_set.empty()) throw TrainingError("validation set is empty");
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    if (train_set[i].seq.ids.size() != model.config().max_len) {
      throw TrainingError("training example " + std::to_string(i) + " length does not match model max_len");
    }
  }

  const std::size_t batches_per_epoch = (train_set.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches_per_epoch * cfg.epochs;
  const AdamWOptions adam{0.9, 0.999, 1e-8, cfg.weight_decay};
  AdamState<float> state;
  Rng dropout_rng(mix_seed(cfg.seed, kDropoutSalt));
  auto params = model.parameters();

  TrainHistory history;
  history.steps_total = total_steps;
  double best_accuracy = -1.0;
  std::size_t step = 0;
  std::vector<TokenSequence> seqs;
  std::vector<int> labels;
  ForwardTrace<float> trace;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    const auto batches = make_batches(train_set.size(), cfg.batch_size, cfg.seed, epoch, true);
    for (const auto& batch : batches) {
      seqs.clear();
      labels.clear();
      for (auto i : batch) {
        seqs.push_back(train_set[i].seq);
        labels.push_back(train_set[i].label);
      }
      model.zero_grad();
      const auto logits = forward(model, std::span<const TokenSequence>(seqs), Mode::kTrain, dropout_rng, &trace);
      const auto ce = cross_entropy(logits, std::span<const int>(labels), cfg.class_weights);
      if (!std::isfinite(ce.loss)) throw DivergenceError(step);
      backward(model, trace, ce.dlogits);
      if (cfg.grad_clip_norm) clip_grad_norm(std::span<Parameter<float>* const>(params), *cfg.grad_clip_norm);
      adamw_step(std::span<Parameter<float>* const>(params), state, lr_at_step(step, total_steps, cfg), adam);
      loss_sum += static_cast<double>(ce.loss);
      ++step;
    }

    EpochRecord record{loss_sum / static_cast<double>(batches.size()), evaluate(model, val_set)};
    if (record.validation.accuracy > best_accuracy) {
      best_accuracy = record.validation.accuracy;
      history.best_epoch = epoch;
      try {
        save_checkpoint(model, checkpoint_path, info);
      } catch (const CheckpointError& e) {
        throw TrainingError(std::string("saving checkpoint failed: ") + e.what());
      }
    }
    history.epochs.push_back(record);
    if (on_epoch) on_epoch(epoch, record);
  }

  try {
    return TrainResult{load_checkpoint(checkpoint_path), std::move(history)};
  } catch (const CheckpointError& e) {
    throw TrainingError(std::string("reloading best checkpoint failed: ") + e.what());
  }
}

std::string TrainHistory::to_json() const {
  using nlohmann::json;
  json epochs_json = json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back(json{{"train_loss", e.train_loss}, {"validation", json::parse(report_to_json(e.validation))}});
  }
  return json{{"epochs", epochs_json}, {"best_epoch", best_epoch}, {"steps_total", steps_total}}.dump(2);
}

TrainHistory TrainHistory::from_json(std::string_view text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    TrainHistory h;
    for (const auto& e : j.at("epochs")) {
      h.epochs.push_back({e.at("train_loss").get<double>(), report_from_json(e.at("validation").dump())});
    }
    h.best_epoch = j.at("best_epoch").get<std::size_t>();
    h.steps_total = j.at("steps_total").get<std::size_t>();
    return h;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("TrainHistory::from_json: ") + e.what());
  }
}

}  // namespace ctxgate
