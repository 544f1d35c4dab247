#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctxgate {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kSepId = 3;
inline constexpr std::size_t kReservedTokens = 4;

/// Lowercases ASCII and splits on whitespace; each ASCII punctuation
/// character becomes its own token. Bytes >= 0x80 are treated as word bytes.
std::vector<std::string> basic_tokenize(std::string_view text);

/// Token <-> id bijection. Ids 0..3 are always [PAD], [UNK], [CLS], [SEP].
class Vocabulary {
 public:
  Vocabulary();

  /// Frequency >= min_freq, ordered by (frequency desc, token asc), truncated
  /// so that the total size is at most max_size.
  static Vocabulary build(std::span<const std::string> corpus, std::size_t max_size, std::size_t min_freq = 1);

  /// From tokens in id order, reserved names first.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId id_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token_of(TokenId id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  Vocabulary(std::vector<std::string> tokens, int);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> attention_mask;
  std::size_t true_length = 0;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Lays out CLS t1 SEP t2 SEP ... tn SEP and pads to max_len. When the
/// sequence overflows, the oldest turns are dropped first; if the newest turn
/// alone still overflows, its leading tokens are dropped.
TokenSequence encode(std::span<const std::string> turns, const Vocabulary& vocab, std::size_t max_len);

std::vector<std::string> decode(std::span<const TokenId> ids, const Vocabulary& vocab);

}  // namespace ctxgate
