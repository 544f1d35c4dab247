#include "ctxgate/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ctxgate/errors.hpp"

namespace ctxgate {

namespace {

using nlohmann::json;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_bytes(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  std::uint32_t u32(const std::string& field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string bytes(const std::string& field) {
    const std::uint32_t n = u32(field + " length");
    need(n, field);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  float f32(const std::string& field) { return std::bit_cast<float>(u32(field)); }

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  void need(std::size_t n, const std::string& field) const {
    if (end_ - pos_ < n) throw CheckpointError("checkpoint truncated while reading " + field);
  }

  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

json config_record(const ModelConfig& c, const CheckpointInfo& info) {
  return json{{"vocab_size", c.vocab_size}, {"d_model", c.d_model},     {"n_heads", c.n_heads},
              {"n_layers", c.n_layers},     {"d_ff", c.d_ff},           {"max_len", c.max_len},
              {"dropout_p", c.dropout_p},   {"n_classes", c.n_classes}, {"layer_norm_eps", c.layer_norm_eps},
              {"vocab_file", info.vocab_file}, {"context_turns", info.context_turns}};
}

template <typename V>
V field(const json& j, const char* key) {
  if (!j.contains(key)) throw CheckpointError(std::string("checkpoint config missing field '") + key + "'");
  try {
    return j.at(key).get<V>();
  } catch (const json::exception&) {
    throw CheckpointError(std::string("checkpoint config field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::uint32_t crc32_of(const void* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string Checkpoint::model_id() const {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", checksum);
  return buf;
}

std::string serialize_checkpoint(const CaBertModel<float>& model, const CheckpointInfo& info) {
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  put_bytes(out, config_record(model.config(), info).dump());
  for (const auto* p : model.parameters()) {
    put_bytes(out, p->name);
    put_u32(out, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : p->value.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  put_u32(out, crc32_of(out.data(), out.size()));
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kCheckpointMagic || std::memcmp(bytes.data(), kCheckpointMagic, 6) != 0) {
    throw CheckpointError("bad checkpoint magic");
  }
  if (std::memcmp(bytes.data() + 6, kCheckpointMagic + 6, 2) != 0) {
    throw CheckpointError("unsupported checkpoint version '" + bytes.substr(6, 2) + "'");
  }
  if (bytes.size() < sizeof kCheckpointMagic + 4) throw CheckpointError("checkpoint truncated while reading checksum");
  const std::size_t body_end = bytes.size() - 4;
  Reader r(bytes, body_end);
  r.seek(sizeof kCheckpointMagic);

  json record;
  try {
    record = json::parse(r.bytes("config record"));
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint config record is not valid JSON: ") + e.what());
  }
  ModelConfig cfg;
  cfg.vocab_size = field<std::size_t>(record, "vocab_size");
  cfg.d_model = field<std::size_t>(record, "d_model");
  cfg.n_heads = field<std::size_t>(record, "n_heads");
  cfg.n_layers = field<std::size_t>(record, "n_layers");
  cfg.d_ff = field<std::size_t>(record, "d_ff");
  cfg.max_len = field<std::size_t>(record, "max_len");
  cfg.dropout_p = field<double>(record, "dropout_p");
  cfg.n_classes = field<std::size_t>(record, "n_classes");
  cfg.layer_norm_eps = field<double>(record, "layer_norm_eps");
  CheckpointInfo info;
  info.vocab_file = field<std::string>(record, "vocab_file");
  info.context_turns = field<std::size_t>(record, "context_turns");
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config invalid: ") + e.what());
  }

  Checkpoint ckpt{CaBertModel<float>(cfg), info, 0};
  for (auto* p : ckpt.model.parameters()) {
    const std::string name = r.bytes("parameter name after '" + p->name + "'");
    if (name != p->name) throw CheckpointError("expected parameter '" + p->name + "', found '" + name + "'");
    const std::uint32_t rank = r.u32(name + " rank");
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.u32(name + " dimension"));
    if (shape != p->value.shape()) {
      throw CheckpointError("parameter '" + name + "' has shape " + shape_to_string(shape) + ", expected " +
                            shape_to_string(p->value.shape()));
    }
    for (auto& v : p->value.data()) v = r.f32(name + " values");
  }
  if (r.pos() != body_end) throw CheckpointError("checkpoint has trailing bytes before checksum");
  Reader tail(bytes, bytes.size());
  tail.seek(body_end);
  const std::uint32_t stored = tail.u32("checksum");
  const std::uint32_t actual = crc32_of(bytes.data(), body_end);
  if (stored != actual) throw CheckpointError("checkpoint checksum mismatch");
  ckpt.checksum = stored;
  return ckpt;
}

void save_checkpoint(const CaBertModel<float>& model, const std::filesystem::path& path, const CheckpointInfo& info) {
  const std::string bytes = serialize_checkpoint(model, info);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace ctxgate
