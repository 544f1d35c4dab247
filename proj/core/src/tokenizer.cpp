#include "ctxgate/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "ctxgate/errors.hpp"

namespace ctxgate {

namespace {

const std::vector<std::string>& reserved_names() {
  static const std::vector<std::string> names = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  return names;
}

bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(from_tokens({})) {}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  const auto& reserved = reserved_names();
  if (tokens.empty()) tokens = reserved;
  if (tokens.size() < kReservedTokens || !std::equal(reserved.begin(), reserved.end(), tokens.begin())) {
    throw ArgumentError("vocabulary must start with [PAD], [UNK], [CLS], [SEP]");
  }
  Vocabulary v(std::move(tokens), 0);
  return v;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, int) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& tok = tokens_[i];
    if (tok.empty()) throw ArgumentError("vocabulary token " + std::to_string(i) + " is empty");
    if (std::any_of(tok.begin(), tok.end(), [](char c) { return is_space(static_cast<unsigned char>(c)); })) {
      throw ArgumentError("vocabulary token " + std::to_string(i) + " contains whitespace");
    }
    if (!index_.emplace(tok, static_cast<TokenId>(i)).second) {
      throw ArgumentError("duplicate vocabulary token '" + tok + "'");
    }
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> corpus, std::size_t max_size, std::size_t min_freq) {
  if (max_size <= kReservedTokens) throw ArgumentError("build_vocab: max_size must exceed 4");
  if (min_freq < 1) throw ArgumentError("build_vocab: min_freq must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus)
    for (auto& tok : basic_tokenize(text)) ++counts[std::move(tok)];
  const auto& reserved = reserved_names();
  for (const auto& r : reserved) counts.erase(r);

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts)
    if (n >= min_freq) ranked.emplace_back(tok, n);
  // counts is already in lexicographic order, so a stable sort by frequency
  // yields (frequency desc, token asc).
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size - kReservedTokens) ranked.resize(max_size - kReservedTokens);

  std::vector<std::string> tokens = reserved;
  for (auto& [tok, n] : ranked) tokens.push_back(std::move(tok));
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path.string());
  for (const auto& tok : tokens_) out << tok << '\n';
  if (!out) throw std::runtime_error("failed writing vocabulary file " + path.string());
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ArgumentError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                        std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenSequence encode(std::span<const std::string> turns, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 2) throw ArgumentError("encode: max_len must be at least 2");
  std::vector<std::vector<TokenId>> per_turn;
  per_turn.reserve(turns.size());
  for (const auto& t : turns) {
    std::vector<TokenId> ids;
    for (const auto& tok : basic_tokenize(t)) ids.push_back(vocab.id_of(tok));
    per_turn.push_back(std::move(ids));
  }
  if (per_turn.empty()) per_turn.emplace_back();

  // Keep the newest turns that fit: CLS plus each kept turn and its SEP.
  std::size_t first = per_turn.size() - 1;
  std::size_t used = 1 + per_turn.back().size() + 1;
  while (first > 0 && used + per_turn[first - 1].size() + 1 <= max_len) {
    --first;
    used += per_turn[first].size() + 1;
  }
  auto& newest = per_turn.back();
  if (newest.size() + 2 > max_len) newest.erase(newest.begin(), newest.end() - static_cast<std::ptrdiff_t>(max_len - 2));

  TokenSequence seq;
  seq.ids.reserve(max_len);
  seq.ids.push_back(kClsId);
  for (std::size_t t = first; t < per_turn.size(); ++t) {
    seq.ids.insert(seq.ids.end(), per_turn[t].begin(), per_turn[t].end());
    seq.ids.push_back(kSepId);
  }
  seq.true_length = seq.ids.size();
  seq.ids.resize(max_len, kPadId);
  seq.attention_mask.assign(max_len, 0);
  std::fill_n(seq.attention_mask.begin(), seq.true_length, std::uint8_t{1});
  return seq;
}

std::vector<std::string> decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(vocab.token_of(id));
  return out;
}

}  // namespace ctxgate
