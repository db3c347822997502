#pragma once

#include <cstdint>
#include <string>

#include "mcr/gpn.hpp"

namespace mcr {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to resume training bit-exactly: parameters, optimizer
/// moments, step counter and the generator state driving instance sampling.
struct Checkpoint {
  ModelConfig model_config;
  ModelParams params;
  ParamMap<float> adam_m;  // empty if training never started
  ParamMap<float> adam_v;
  std::int64_t step = 0;
  double baseline = 0.0;
  bool baseline_set = false;
  std::uint64_t rng_seed = 0;     // seed of the training stream
  std::uint64_t rng_counter = 0;  // instances drawn so far
};

/// Binary format: magic "MCRCKPT1", config fields, then named float32
/// row-major blocks. The round-trip is bit-exact.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mcr
