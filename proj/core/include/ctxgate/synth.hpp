#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "ctxgate/dataset.hpp"

namespace ctxgate {

/// The marker rule behind synthetic labels: a turn needs context when it
/// contains a pronoun from a fixed set (it, that, they, ...) or opens with
/// "what about" / "how about".
bool contains_marker(std::string_view text);

/// Generates conversations of 2-6 turns from template pools. Each turn is
/// context-dependent with probability context_rate (labeled 1, carries a
/// marker) and otherwise self-contained (labeled 0, carries none). Some
/// templates of each class share the same bag of words and differ only in
/// word order. Deterministic in seed.
std::vector<ChatRecord> synthesize(std::size_t n, std::uint64_t seed, double context_rate = 0.44);

}  // namespace ctxgate
