#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "autodiff/adam.hpp"
#include "autodiff/params.hpp"

namespace pcsod::ad {

// Byte layout (all integers and floats little-endian):
//   "PCSD" | u32 version | u32 len, config text
//   u32 count, parameter records | u32 count, buffer records
//   u8 has_optimizer [ u64 step | f64 lr, weight_decay, beta1, beta2, eps
//                      | u32 count, moment records ]
// record        = u32 name_len, name | u32 ndims, u32 dims[ndims] | f32 values
// moment record = u32 name_len, name | u32 ndims, u32 dims[ndims] | f32 m | f32 v
inline constexpr char kCheckpointMagic[4] = {'P', 'C', 'S', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct MomentRecord {
  std::string name;
  Shape shape;
  std::vector<float> first;
  std::vector<float> second;
};

struct OptimizerRecord {
  std::uint64_t step = 0;
  AdamConfig config;
  std::vector<MomentRecord> moments;
};

struct Checkpoint {
  std::string config_text;
  std::vector<TensorRecord> parameters;
  // Normalization buffers, stored as "<layer>.running_mean" / ".running_var".
  std::vector<TensorRecord> buffers;
  std::optional<OptimizerRecord> optimizer;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint capture(const ParamStore<float>& store, const AdamState<float>* optimizer, std::string config_text);

// Copies values into a store built from the same configuration. Names and
// shapes must match exactly.
void restore(const Checkpoint& checkpoint, ParamStore<float>& store, AdamState<float>* optimizer);

}  // namespace pcsod::ad
