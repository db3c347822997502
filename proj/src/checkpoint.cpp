#include "mcr/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace mcr {
namespace {

constexpr char kMagic[8] = {'M', 'C', 'R', 'C', 'K', 'P', 'T', '1'};

void write_raw(std::ostream& out, const void* data, size_t len) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  write_raw(out, &v, sizeof(T));
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  write_raw(out, s.data(), s.size());
}

void write_block_map(std::ostream& out, const ParamMap<float>& blocks) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& [name, m] : blocks) {
    write_string(out, name);
    write_pod<std::int32_t>(out, static_cast<std::int32_t>(m.rows()));
    write_pod<std::int32_t>(out, static_cast<std::int32_t>(m.cols()));
    // row-major on disk regardless of Eigen's storage order
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    write_raw(out, rm.data(), sizeof(float) * static_cast<size_t>(rm.size()));
  }
}

void read_raw(std::istream& in, void* data, size_t len, const std::string& what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
  if (static_cast<size_t>(in.gcount()) != len)
    throw CheckpointError("truncated checkpoint while reading " + what + ": expected " +
                          std::to_string(len) + " bytes, got " +
                          std::to_string(in.gcount()));
}

template <typename T>
T read_pod(std::istream& in, const std::string& what) {
  T v{};
  read_raw(in, &v, sizeof(T), what);
  return v;
}

std::string read_string(std::istream& in, const std::string& what) {
  auto len = read_pod<std::uint32_t>(in, what + " length");
  if (len > (1u << 20)) throw CheckpointError("implausible string length in " + what);
  std::string s(len, '\0');
  read_raw(in, s.data(), len, what);
  return s;
}

ParamMap<float> read_block_map(std::istream& in, const std::string& what) {
  auto count = read_pod<std::uint32_t>(in, what + " count");
  ParamMap<float> blocks;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = read_string(in, what + " name");
    auto rows = read_pod<std::int32_t>(in, "block " + name + " rows");
    auto cols = read_pod<std::int32_t>(in, "block " + name + " cols");
    if (rows < 0 || cols < 0 || static_cast<std::int64_t>(rows) * cols > (1 << 26))
      throw CheckpointError("implausible shape for block " + name);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    const size_t bytes = sizeof(float) * static_cast<size_t>(rm.size());
    in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<size_t>(in.gcount()) != bytes)
      throw CheckpointError("block " + name + ": expected " + std::to_string(bytes) +
                            " bytes, got " + std::to_string(in.gcount()));
    blocks[name] = rm;
  }
  return blocks;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  for (const auto& [name, shape] : param_shapes(ckpt.model_config)) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end())
      throw CheckpointError("checkpoint is missing block " + name);
    if (it->second.rows() != shape.first || it->second.cols() != shape.second)
      throw CheckpointError("block " + name + " has wrong shape");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  write_raw(out, kMagic, sizeof(kMagic));
  const auto& c = ckpt.model_config;
  write_pod<std::int32_t>(out, c.hidden_dim);
  write_pod<std::int32_t>(out, c.attention_heads);
  write_pod<std::int32_t>(out, c.gat_layers);
  write_pod<std::int32_t>(out, static_cast<std::int32_t>(c.encoder));
  write_pod<std::int32_t>(out, static_cast<std::int32_t>(c.aggregator));
  write_pod<std::int32_t>(out, static_cast<std::int32_t>(c.scorer));
  write_pod<double>(out, c.logit_scale);
  write_pod<double>(out, c.epsilon);
  write_pod<std::int32_t>(out, c.max_user);
  write_pod<double>(out, c.leaky_slope);
  write_pod<std::uint8_t>(out, c.reencode_each_step ? 1 : 0);
  write_pod<std::int64_t>(out, ckpt.step);
  write_pod<double>(out, ckpt.baseline);
  write_pod<std::uint8_t>(out, ckpt.baseline_set ? 1 : 0);
  write_pod<std::uint64_t>(out, ckpt.rng_seed);
  write_pod<std::uint64_t>(out, ckpt.rng_counter);
  write_block_map(out, ckpt.params);
  write_block_map(out, ckpt.adam_m);
  write_block_map(out, ckpt.adam_v);
  if (!out) throw CheckpointError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  char magic[8];
  read_raw(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError(path + " is not a checkpoint file");
  Checkpoint ckpt;
  auto& c = ckpt.model_config;
  c.hidden_dim = read_pod<std::int32_t>(in, "hidden_dim");
  c.attention_heads = read_pod<std::int32_t>(in, "attention_heads");
  c.gat_layers = read_pod<std::int32_t>(in, "gat_layers");
  c.encoder = static_cast<EncoderVariant>(read_pod<std::int32_t>(in, "encoder"));
  c.aggregator = static_cast<AggregatorVariant>(read_pod<std::int32_t>(in, "aggregator"));
  c.scorer = static_cast<ScorerVariant>(read_pod<std::int32_t>(in, "scorer"));
  c.logit_scale = read_pod<double>(in, "logit_scale");
  c.epsilon = read_pod<double>(in, "epsilon");
  c.max_user = read_pod<std::int32_t>(in, "max_user");
  c.leaky_slope = read_pod<double>(in, "leaky_slope");
  c.reencode_each_step = read_pod<std::uint8_t>(in, "reencode flag") != 0;
  ckpt.step = read_pod<std::int64_t>(in, "step");
  ckpt.baseline = read_pod<double>(in, "baseline");
  ckpt.baseline_set = read_pod<std::uint8_t>(in, "baseline flag") != 0;
  ckpt.rng_seed = read_pod<std::uint64_t>(in, "rng seed");
  ckpt.rng_counter = read_pod<std::uint64_t>(in, "rng counter");
  ckpt.params = read_block_map(in, "params");
  ckpt.adam_m = read_block_map(in, "adam m");
  ckpt.adam_v = read_block_map(in, "adam v");
  c.check();
  auto shapes = param_shapes(c);
  for (const auto& [name, shape] : shapes) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end())
      throw CheckpointError("checkpoint is missing block " + name);
    if (it->second.rows() != shape.first || it->second.cols() != shape.second)
      throw CheckpointError("block " + name + " has wrong shape");
  }
  return ckpt;
}

}  // namespace mcr
