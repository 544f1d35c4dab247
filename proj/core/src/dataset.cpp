#include "ctxgate/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ctxgate/errors.hpp"
#include "ctxgate/rng.hpp"

namespace ctxgate {

namespace {

const std::vector<std::string> kColumns = {"chat", "fetch_context", "chat_id", "topic"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_label(std::string_view text, std::size_t line) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw ParseError(line, "fetch_context must be 0 or 1, got '" + std::string(text) + "'");
}

void check_chat(const std::string& chat, std::size_t line) {
  if (trim(chat).empty()) throw ParseError(line, "chat is empty");
}

// Reads one RFC-4180 record. Returns false at end of input. `line` is advanced
// past every newline consumed, including ones inside quoted fields.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  int c = in.peek();
  if (c == std::char_traits<char>::eof()) return false;
  const std::size_t start_line = line;
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  while (true) {
    c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ParseError(start_line, "unterminated quoted field");
      fields.push_back(std::move(field));
      ++line;
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (!field.empty() || field_started_quoted) throw ParseError(line, "unexpected quote inside unquoted field");
      quoted = true;
      field_started_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
    } else if (ch == '\r' && in.peek() == '\n') {
      // CRLF terminator; the LF is handled on the next iteration.
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      ++line;
      return true;
    } else {
      if (field_started_quoted) throw ParseError(line, "characters after closing quote");
      field.push_back(ch);
    }
  }
}

std::vector<ChatRecord> parse_csv(std::istream& in) {
  std::size_t line = 1;
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields, line)) throw ParseError(1, "missing header");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  std::array<int, 4> column{-1, -1, -1, -1};
  for (std::size_t i = 0; i < fields.size(); ++i) {
    auto it = std::find(kColumns.begin(), kColumns.end(), std::string(trim(fields[i])));
    if (it == kColumns.end()) throw ParseError(1, "unexpected column '" + fields[i] + "'");
    auto& slot = column[static_cast<std::size_t>(it - kColumns.begin())];
    if (slot != -1) throw ParseError(1, "duplicate column '" + fields[i] + "'");
    slot = static_cast<int>(i);
  }
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (column[k] == -1) throw ParseError(1, "missing column '" + kColumns[k] + "'");
  }

  std::vector<ChatRecord> records;
  while (true) {
    const std::size_t record_line = line;
    if (!read_csv_record(in, fields, line)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != kColumns.size()) {
      throw ParseError(record_line, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    ChatRecord r;
    r.chat = fields[static_cast<std::size_t>(column[0])];
    r.fetch_context = parse_label(trim(fields[static_cast<std::size_t>(column[1])]), record_line);
    r.chat_id = fields[static_cast<std::size_t>(column[2])];
    r.topic = fields[static_cast<std::size_t>(column[3])];
    check_chat(r.chat, record_line);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ChatRecord> parse_jsonl(std::istream& in) {
  using nlohmann::json;
  std::vector<ChatRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "expected a JSON object");
    for (const auto& key : kColumns) {
      if (!j.contains(key)) throw ParseError(line, "missing key '" + key + "'");
    }
    for (const auto& [key, _] : j.items()) {
      if (std::find(kColumns.begin(), kColumns.end(), key) == kColumns.end()) {
        throw ParseError(line, "unexpected key '" + key + "'");
      }
    }
    ChatRecord r;
    const auto& label = j["fetch_context"];
    if (label.is_number_integer()) {
      const auto v = label.get<long long>();
      if (v != 0 && v != 1) throw ParseError(line, "fetch_context must be 0 or 1, got " + std::to_string(v));
      r.fetch_context = static_cast<int>(v);
    } else if (label.is_string()) {
      r.fetch_context = parse_label(label.get<std::string>(), line);
    } else {
      throw ParseError(line, "fetch_context must be 0 or 1");
    }
    for (const char* key : {"chat", "chat_id", "topic"}) {
      if (!j[key].is_string()) throw ParseError(line, std::string("'") + key + "' must be a string");
    }
    r.chat = j["chat"].get<std::string>();
    r.chat_id = j["chat_id"].get<std::string>();
    r.topic = j["topic"].get<std::string>();
    check_chat(r.chat, line);
    records.push_back(std::move(r));
  }
  return records;
}

std::string csv_field(const std::string& s) {
  const bool needs_quotes = s.find_first_of(",\"\r\n") != std::string::npos ||
                            (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                                            std::isspace(static_cast<unsigned char>(s.back()))));
  if (!needs_quotes) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

DatasetFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? DatasetFormat::kJsonl : DatasetFormat::kCsv;
}

std::vector<ChatRecord> parse_dataset(std::istream& in, DatasetFormat format) {
  return format == DatasetFormat::kCsv ? parse_csv(in) : parse_jsonl(in);
}

std::vector<ChatRecord> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return parse_dataset(in, format);
}

std::vector<ChatRecord> load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_for_path(path));
}

void write_dataset(std::ostream& out, std::span<const ChatRecord> records, DatasetFormat format) {
  if (format == DatasetFormat::kCsv) {
    out << "chat,fetch_context,chat_id,topic\n";
    for (const auto& r : records) {
      out << csv_field(r.chat) << ',' << r.fetch_context << ',' << csv_field(r.chat_id) << ','
          << csv_field(r.topic) << '\n';
    }
  } else {
    for (const auto& r : records) {
      nlohmann::ordered_json j{
          {"chat", r.chat}, {"fetch_context", r.fetch_context}, {"chat_id", r.chat_id}, {"topic", r.topic}};
      out << j.dump() << '\n';
    }
  }
}

void write_dataset(const std::filesystem::path& path, std::span<const ChatRecord> records, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  write_dataset(out, records, format);
  if (!out) throw std::runtime_error("failed writing dataset " + path.string());
}

std::pair<std::vector<ChatRecord>, std::vector<ChatRecord>> split(std::span<const ChatRecord> records,
                                                                  double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("split: fraction must be in (0, 1)");
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::size_t> group_size;
  std::vector<std::size_t> record_group(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = group_of.emplace(records[i].chat_id, group_size.size());
    if (inserted) group_size.push_back(0);
    ++group_size[it->second];
    record_group[i] = it->second;
  }
  const std::size_t groups = group_size.size();
  if (groups < 2) throw SplitError("split needs at least 2 conversations, found " + std::to_string(groups));

  std::vector<std::size_t> order(groups);
  for (std::size_t g = 0; g < groups; ++g) order[g] = g;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const double target = train_fraction * static_cast<double>(records.size());
  std::vector<bool> in_train(groups, false);
  double train_count = 0.0;
  std::vector<std::size_t> taken;
  for (auto g : order) {
    const double next = train_count + static_cast<double>(group_size[g]);
    if (std::abs(next - target) < std::abs(train_count - target)) {
      in_train[g] = true;
      train_count = next;
      taken.push_back(g);
    }
  }
  if (taken.empty()) {
    in_train[order.front()] = true;
  } else if (taken.size() == groups) {
    in_train[taken.back()] = false;
  }

  std::pair<std::vector<ChatRecord>, std::vector<ChatRecord>> folds;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_train[record_group[i]] ? folds.first : folds.second).push_back(records[i]);
  }
  return folds;
}

std::vector<Example> window(std::span<const ChatRecord> records, std::size_t context_turns) {
  std::unordered_map<std::string, std::vector<std::string>> history;
  std::vector<Example> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto& h = history[r.chat_id];
    Example e;
    e.turn_index = h.size();
    const std::size_t keep = std::min(context_turns, h.size());
    e.turns.assign(h.end() - static_cast<std::ptrdiff_t>(keep), h.end());
    e.turns.push_back(r.chat);
    e.label = r.fetch_context;
    e.chat_id = r.chat_id;
    h.push_back(r.chat);
    out.push_back(std::move(e));
  }
  return out;
}

DatasetStats class_stats(std::span<const ChatRecord> records) {
  DatasetStats s;
  std::set<std::string> ids;
  for (const auto& r : records) {
    ++s.total;
    ++s.per_label[static_cast<std::size_t>(r.fetch_context == 1)];
    ++s.per_topic[r.topic];
    ids.insert(r.chat_id);
  }
  s.conversations = ids.size();
  return s;
}

std::string format_stats(const DatasetStats& s) {
  std::ostringstream out;
  out << "records: " << s.total << "\n"
      << "conversations: " << s.conversations << "\n"
      << "fetch_context=0: " << s.per_label[0] << "\n"
      << "fetch_context=1: " << s.per_label[1] << "\n";
  for (const auto& [topic, n] : s.per_topic) out << "topic " << topic << ": " << n << "\n";
  return out.str();
}

}  // namespace ctxgate
