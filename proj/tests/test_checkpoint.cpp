#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mcr/checkpoint.hpp"

using namespace mcr;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

Checkpoint sample_checkpoint() {
  Checkpoint ckpt;
  ckpt.model_config.hidden_dim = 16;
  ckpt.model_config.attention_heads = 4;
  ckpt.model_config.gat_layers = 2;
  ckpt.params = init_params(ckpt.model_config, 7);
  for (const auto& [name, m] : ckpt.params) {
    ckpt.adam_m[name] = Eigen::MatrixXf::Constant(m.rows(), m.cols(), 0.125f);
    ckpt.adam_v[name] = Eigen::MatrixXf::Constant(m.rows(), m.cols(), 1e-3f);
  }
  ckpt.step = 1234;
  ckpt.baseline = -7.25;
  ckpt.baseline_set = true;
  ckpt.rng_seed = 99;
  ckpt.rng_counter = 4321;
  return ckpt;
}

}  // namespace

TEST_CASE("round trip is bit-exact") {
  TempFile f("ckpt_roundtrip.bin");
  auto ckpt = sample_checkpoint();
  save_checkpoint(ckpt, f.path);
  auto loaded = load_checkpoint(f.path);

  CHECK(loaded.model_config == ckpt.model_config);
  CHECK(loaded.step == ckpt.step);
  CHECK(loaded.baseline == ckpt.baseline);  // exact, not approximate
  CHECK(loaded.baseline_set == ckpt.baseline_set);
  CHECK(loaded.rng_seed == ckpt.rng_seed);
  CHECK(loaded.rng_counter == ckpt.rng_counter);
  REQUIRE(loaded.params.size() == ckpt.params.size());
  for (const auto& [name, m] : ckpt.params) CHECK(loaded.params.at(name) == m);
  for (const auto& [name, m] : ckpt.adam_m) CHECK(loaded.adam_m.at(name) == m);
  for (const auto& [name, m] : ckpt.adam_v) CHECK(loaded.adam_v.at(name) == m);

  // Saving the loaded checkpoint reproduces the file byte for byte.
  TempFile f2("ckpt_roundtrip2.bin");
  save_checkpoint(loaded, f2.path);
  std::ifstream a(f.path, std::ios::binary), b(f2.path, std::ios::binary);
  std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
  CHECK(!bytes_a.empty());
}

TEST_CASE("pre-training checkpoints skip optimizer state") {
  TempFile f("ckpt_fresh.bin");
  Checkpoint ckpt;
  ckpt.model_config.hidden_dim = 8;
  ckpt.model_config.attention_heads = 2;
  ckpt.params = init_params(ckpt.model_config, 1);
  save_checkpoint(ckpt, f.path);
  auto loaded = load_checkpoint(f.path);
  CHECK(loaded.adam_m.empty());
  CHECK(loaded.adam_v.empty());
  CHECK(loaded.step == 0);
  CHECK_FALSE(loaded.baseline_set);
}

TEST_CASE("missing file and bad magic are rejected") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/path/ckpt.bin"), CheckpointError);

  TempFile f("ckpt_badmagic.bin");
  std::ofstream(f.path, std::ios::binary) << "NOTACKPTxxxxxxxxxxxxxxxx";
  CHECK_THROWS_AS(load_checkpoint(f.path), CheckpointError);
}

TEST_CASE("truncation error names the block and byte counts") {
  TempFile f("ckpt_trunc.bin");
  auto ckpt = sample_checkpoint();
  save_checkpoint(ckpt, f.path);

  auto size = std::filesystem::file_size(f.path);
  std::filesystem::resize_file(f.path, size - 40);
  try {
    load_checkpoint(f.path);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    std::string msg = e.what();
    CHECK(msg.find("block ") != std::string::npos);
    CHECK(msg.find("expected ") != std::string::npos);
    CHECK(msg.find(" bytes") != std::string::npos);
  }
}

TEST_CASE("parameter blocks are validated against the config on load") {
  TempFile f("ckpt_shape.bin");
  auto ckpt = sample_checkpoint();
  ckpt.params.erase("ptr.W3");
  CHECK_THROWS_AS(save_checkpoint(ckpt, f.path), CheckpointError);

  ckpt = sample_checkpoint();
  ckpt.params["ptr.W3"] = Eigen::MatrixXf::Zero(2, 2);
  CHECK_THROWS_AS(save_checkpoint(ckpt, f.path), CheckpointError);

  ckpt = sample_checkpoint();
  ckpt.model_config.hidden_dim = -4;
  CHECK_THROWS(save_checkpoint(ckpt, f.path));
}
