#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ctxgate {

/// One annotated chat turn: chat, fetch_context, chat_id, topic.
struct ChatRecord {
  std::string chat;
  int fetch_context = 0;
  std::string chat_id;
  std::string topic;

  friend bool operator==(const ChatRecord&, const ChatRecord&) = default;
};

/// The labeled turn plus up to K preceding turns of the same conversation,
/// oldest first. turns.back() is the labeled turn.
struct Example {
  std::vector<std::string> turns;
  int label = 0;
  std::string chat_id;
  std::size_t turn_index = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

struct DatasetStats {
  std::size_t total = 0;
  std::array<std::size_t, 2> per_label{};
  std::map<std::string, std::size_t> per_topic;
  std::size_t conversations = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

enum class DatasetFormat { kCsv, kJsonl };

/// Picks the format from the extension: .jsonl / .json for JSON lines,
/// anything else CSV.
DatasetFormat format_for_path(const std::filesystem::path& path);

/// Header (CSV) or keys (JSONL) must be exactly chat, fetch_context,
/// chat_id, topic. Errors carry the 1-based physical line number.
std::vector<ChatRecord> parse_dataset(std::istream& in, DatasetFormat format);
std::vector<ChatRecord> load_dataset(const std::filesystem::path& path, DatasetFormat format);
std::vector<ChatRecord> load_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, std::span<const ChatRecord> records, DatasetFormat format);
void write_dataset(const std::filesystem::path& path, std::span<const ChatRecord> records, DatasetFormat format);

/// Whole conversations go to one fold. Conversation order is shuffled with
/// seed, then each conversation joins the training fold when doing so moves
/// the training count closer to fraction * total. Both folds end non-empty.
std::pair<std::vector<ChatRecord>, std::vector<ChatRecord>> split(std::span<const ChatRecord> records,
                                                                  double train_fraction, std::uint64_t seed);

/// One Example per record, carrying up to K preceding turns of the same
/// chat_id in file order.
std::vector<Example> window(std::span<const ChatRecord> records, std::size_t context_turns);

DatasetStats class_stats(std::span<const ChatRecord> records);
std::string format_stats(const DatasetStats& stats);

}  // namespace ctxgate
