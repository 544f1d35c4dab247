#include "ctxgate/synth.hpp"

#include <array>
#include <cstdio>
#include <string>

#include "ctxgate/errors.hpp"
#include "ctxgate/rng.hpp"
#include "ctxgate/tokenizer.hpp"

namespace ctxgate {

namespace {

constexpr std::array<std::string_view, 14> kPronouns = {"it",   "its",  "that", "this", "these", "those", "they",
                                                        "them", "their", "he",  "she",  "him",   "her",   "there"};

struct Topic {
  std::string_view name;
  std::vector<std::string_view> nouns;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> t = {
      {"chit-chat", {"music", "old movies", "poetry", "football", "long weekends", "coffee", "rainy days", "painting"}},
      {"travel",
       {"paris", "tokyo", "rome", "a beach holiday", "the train to berlin", "a hotel in madrid", "the airport",
        "lisbon"}},
      {"tech-support",
       {"my password", "the wifi router", "my laptop", "the printer", "my email account", "a software update",
        "my phone", "the backup drive"}},
      {"shopping",
       {"running shoes", "a winter coat", "a new phone", "headphones", "a gift card", "groceries", "a desk lamp",
        "a yoga mat"}},
      {"cooking",
       {"pasta", "rice", "a chocolate cake", "fresh bread", "tomato soup", "pancakes", "green curry", "roast chicken"}},
  };
  return t;
}

// "{}" is replaced by a topic noun.
const std::vector<std::string_view> kSelfContained = {
    "what is the best way to learn about {} ?",
    "can you tell me about {} ?",
    "how do i find {} ?",
    "do you like {} ?",
    "where can i buy {} ?",
    "how much does {} cost ?",
    "what do you know about {} ?",
    "how long does {} take ?",
    "tell me what you think about {} .",
    "is {} popular right now ?",
    "do you sleep ?",
    "do you dream ?",
    "can you feel emotions ?",
    "do you have a favorite color ?",
};

const std::vector<std::string_view> kNeedsContext = {
    "what about {} ?",
    "how about {} ?",
    "and that one ?",
    "how much is it ?",
    "can you explain that again ?",
    "why did they say so ?",
    "is it open on sundays ?",
    "tell me more about them .",
    "what did he mean ?",
    "does it come in blue ?",
    "how long does it take ?",
    "where can i buy those ?",
    "do you like it ?",
    "can you tell me about that ?",
    "is there a cheaper one ?",
};

// Index i of each list has the same bag of words as index i of the other.
const std::vector<std::string_view> kOrderedSelfContained = {
    "do you know what about {} ?",
    "tell me how about {} ?",
};
const std::vector<std::string_view> kOrderedNeedsContext = {
    "what about {} ? do you know",
    "how about {} ? tell me",
};

constexpr double kOrderedShare = 0.12;

std::string fill(std::string_view tmpl, std::string_view noun) {
  std::string out(tmpl);
  if (auto pos = out.find("{}"); pos != std::string::npos) out.replace(pos, 2, noun);
  return out;
}

template <typename C>
const auto& pick(const C& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

std::string make_chat_id(Rng& rng) {
  const std::uint64_t hi = rng.next_u64(), lo = rng.next_u64();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08llx-%04llx-%04llx-%04llx-%012llx", static_cast<unsigned long long>(hi >> 32),
                static_cast<unsigned long long>((hi >> 16) & 0xffff), static_cast<unsigned long long>(hi & 0xffff),
                static_cast<unsigned long long>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

}  // namespace

bool contains_marker(std::string_view text) {
  const auto tokens = basic_tokenize(text);
  if (tokens.size() >= 2 && (tokens[0] == "what" || tokens[0] == "how") && tokens[1] == "about") return true;
  for (const auto& t : tokens)
    for (auto p : kPronouns)
      if (t == p) return true;
  return false;
}

std::vector<ChatRecord> synthesize(std::size_t n, std::uint64_t seed, double context_rate) {
  if (n < 1) throw ArgumentError("synthesize: n must be at least 1");
  if (!(context_rate > 0.0 && context_rate < 1.0)) throw ArgumentError("synthesize: context_rate must be in (0, 1)");
  Rng rng(seed);
  std::vector<ChatRecord> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::size_t remaining = n - out.size();
    std::size_t turns = 2 + static_cast<std::size_t>(rng.below(5));
    if (remaining <= 6 && remaining - std::min(turns, remaining) < 2) {
      turns = remaining;
    } else if (remaining - turns == 1) {
      --turns;
    }
    const Topic& topic = pick(topics(), rng);
    const std::string chat_id = make_chat_id(rng);
    for (std::size_t t = 0; t < turns; ++t) {
      const int label = rng.bernoulli(context_rate) ? 1 : 0;
      const bool ordered = rng.bernoulli(kOrderedShare);
      const auto& pool = ordered ? (label ? kOrderedNeedsContext : kOrderedSelfContained)
                                 : (label ? kNeedsContext : kSelfContained);
      const auto tmpl = pick(pool, rng);
      const auto noun = pick(topic.nouns, rng);
      out.push_back(ChatRecord{fill(tmpl, noun), label, chat_id, std::string(topic.name)});
    }
  }
  return out;
}

}  // namespace ctxgate
