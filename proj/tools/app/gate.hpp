#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxgate/checkpoint.hpp"
#include "ctxgate/tokenizer.hpp"

namespace ctxgate::app {

struct ClassifyRequest {
  std::vector<std::string> turns;  // oldest first; back() is the current turn
};

struct ClassifyResponse {
  int fetch_context = 0;
  double p_context = 0.0;
  std::string model_id;

  friend bool operator==(const ClassifyResponse&, const ClassifyResponse&) = default;
};

/// Parses `{"turns": [string, ...]}`. Returns an error message instead of a
/// request when the body is malformed or the current turn is blank.
struct ParsedRequest {
  std::optional<ClassifyRequest> request;
  std::string error;
};
ParsedRequest parse_classify_request(std::string_view body);

std::string to_json(const ClassifyResponse& r);

/// A loaded checkpoint with its vocabulary, used read-only by predict and serve.
class ContextGate {
 public:
  static ContextGate open(const std::filesystem::path& checkpoint);

  /// Eval-mode classification. Only the newest context_turns + 1 turns are
  /// encoded, matching the window the model was trained with.
  ClassifyResponse classify(std::span<const std::string> turns) const;

  const Checkpoint& checkpoint() const noexcept { return ckpt_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const std::string& model_id() const noexcept { return model_id_; }

 private:
  ContextGate(Checkpoint ckpt, Vocabulary vocab);

  Checkpoint ckpt_;
  Vocabulary vocab_;
  std::string model_id_;
};

/// Resolves the vocabulary file recorded in a checkpoint.
std::filesystem::path vocab_path_for(const std::filesystem::path& checkpoint, const CheckpointInfo& info);

}  // namespace ctxgate::app
