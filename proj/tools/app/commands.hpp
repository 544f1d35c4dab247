#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctxgate/model.hpp"

namespace ctxgate::app {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct SynthOptions {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  double context_rate = 0.44;
};

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);

struct TrainOptions {
  std::filesystem::path data;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_checkpoint;
  std::size_t context_turns = 0;
  double train_fraction = 0.8;
  // Overrides applied on top of the config file.
  std::optional<double> learning_rate;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  // vocab_size is replaced by the size of the built vocabulary.
  ModelConfig model;
  std::size_t max_vocab = 8000;
  std::size_t min_freq = 1;
  bool baselines = false;
};

/// Artifacts written next to the checkpoint.
struct TrainArtifacts {
  std::filesystem::path checkpoint;
  std::filesystem::path vocab;
  std::filesystem::path history;
  std::filesystem::path train_fold;
  std::filesystem::path val_fold;
};
TrainArtifacts artifacts_for(const std::filesystem::path& checkpoint);

/// load -> window(K) -> split -> build_vocab (train fold) -> train.
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  bool json = false;
};

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);

struct PredictOptions {
  std::filesystem::path checkpoint;
  std::vector<std::string> turns;
};

/// Prints the same JSON body the /classify endpoint returns.
int cmd_predict(const PredictOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace ctxgate::app
