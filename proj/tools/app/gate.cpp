#include "gate.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>

#include "ctxgate/errors.hpp"
#include "ctxgate/model.hpp"

namespace ctxgate::app {

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

ParsedRequest parse_classify_request(std::string_view body) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    return {std::nullopt, std::string("invalid JSON: ") + e.what()};
  }
  if (!j.is_object() || !j.contains("turns")) return {std::nullopt, "body must be an object with a \"turns\" array"};
  const auto& turns = j["turns"];
  if (!turns.is_array()) return {std::nullopt, "\"turns\" must be an array of strings"};
  if (turns.empty()) return {std::nullopt, "\"turns\" must not be empty"};
  ClassifyRequest req;
  for (const auto& t : turns) {
    if (!t.is_string()) return {std::nullopt, "\"turns\" must be an array of strings"};
    req.turns.push_back(t.get<std::string>());
  }
  if (blank(req.turns.back())) return {std::nullopt, "the current (last) turn is empty"};
  return {std::move(req), {}};
}

std::string to_json(const ClassifyResponse& r) {
  nlohmann::ordered_json j{{"fetch_context", r.fetch_context}, {"p_context", r.p_context}, {"model_id", r.model_id}};
  return j.dump();
}

std::filesystem::path vocab_path_for(const std::filesystem::path& checkpoint, const CheckpointInfo& info) {
  if (info.vocab_file.empty()) throw CheckpointError("checkpoint does not reference a vocabulary file");
  std::filesystem::path p(info.vocab_file);
  return p.is_absolute() ? p : checkpoint.parent_path() / p;
}

ContextGate::ContextGate(Checkpoint ckpt, Vocabulary vocab)
    : ckpt_(std::move(ckpt)), vocab_(std::move(vocab)), model_id_(ckpt_.model_id()) {}

ContextGate ContextGate::open(const std::filesystem::path& checkpoint) {
  Checkpoint ckpt = read_checkpoint(checkpoint);
  Vocabulary vocab = Vocabulary::load(vocab_path_for(checkpoint, ckpt.info));
  if (vocab.size() != ckpt.model.config().vocab_size) {
    throw CheckpointError("vocabulary has " + std::to_string(vocab.size()) + " tokens but the model expects " +
                          std::to_string(ckpt.model.config().vocab_size));
  }
  return ContextGate(std::move(ckpt), std::move(vocab));
}

ClassifyResponse ContextGate::classify(std::span<const std::string> turns) const {
  if (turns.empty() || blank(turns.back())) throw ArgumentError("classify: the current turn is empty");
  const std::size_t keep = std::min(turns.size(), ckpt_.info.context_turns + 1);
  const auto window = turns.subspan(turns.size() - keep);
  const std::vector<TokenSequence> batch{encode(window, vocab_, ckpt_.model.config().max_len)};
  const auto pred = predict(forward_eval(ckpt_.model, std::span<const TokenSequence>(batch))).front();
  return {pred.label, pred.p_context, model_id_};
}

}  // namespace ctxgate::app
