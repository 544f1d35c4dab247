#include "ctxgate/train_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ctxgate/errors.hpp"

namespace ctxgate {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must be in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (grad_clip_norm && !(*grad_clip_norm > 0.0)) throw ConfigError("grad_clip_norm must be positive or none");
  if (class_weights && !(class_weights->first >= 0.0 && class_weights->second >= 0.0 &&
                         class_weights->first + class_weights->second > 0.0)) {
    throw ConfigError("class_weights must be non-negative and not both zero");
  }
}

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string l = trim(raw);
    if (l.empty() || l.front() == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line) + ": expected key=value");
    const std::string key = trim(std::string_view(l).substr(0, eq));
    const std::string value = trim(std::string_view(l).substr(eq + 1));
    if (key == "learning_rate") {
      cfg.learning_rate = to_double(key, value);
    } else if (key == "epochs") {
      cfg.epochs = to_uint(key, value);
    } else if (key == "batch_size") {
      cfg.batch_size = to_uint(key, value);
    } else if (key == "warmup_fraction") {
      cfg.warmup_fraction = to_double(key, value);
    } else if (key == "weight_decay") {
      cfg.weight_decay = to_double(key, value);
    } else if (key == "seed") {
      cfg.seed = to_uint(key, value);
    } else if (key == "grad_clip_norm") {
      if (value == "none") {
        cfg.grad_clip_norm.reset();
      } else {
        cfg.grad_clip_norm = to_double(key, value);
      }
    } else if (key == "class_weights") {
      if (value == "none") {
        cfg.class_weights.reset();
      } else {
        const auto comma = value.find(',');
        if (comma == std::string::npos) throw ConfigError("config key 'class_weights': expected w0,w1 or none");
        cfg.class_weights = std::pair{to_double(key, trim(value.substr(0, comma))),
                                      to_double(key, trim(value.substr(comma + 1)))};
      }
    } else {
      throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

std::string format_train_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "learning_rate=" << number(cfg.learning_rate) << "\n"
      << "epochs=" << cfg.epochs << "\n"
      << "batch_size=" << cfg.batch_size << "\n"
      << "warmup_fraction=" << number(cfg.warmup_fraction) << "\n"
      << "weight_decay=" << number(cfg.weight_decay) << "\n"
      << "seed=" << cfg.seed << "\n"
      << "grad_clip_norm=" << (cfg.grad_clip_norm ? number(*cfg.grad_clip_norm) : "none") << "\n"
      << "class_weights="
      << (cfg.class_weights ? number(cfg.class_weights->first) + "," + number(cfg.class_weights->second) : "none")
      << "\n";
  return out.str();
}

}  // namespace ctxgate
