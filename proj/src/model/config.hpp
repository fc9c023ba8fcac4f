#pragma once

#include <array>
#include <map>
#include <cstddef>
#include <string>
#include <vector>

#include "autodiff/reduce.hpp"

namespace pcsod::model {

using ad::Reduction;

struct PpbConfig {
  std::array<std::size_t, 4> k{};

  std::size_t max_k() const { return k[3]; }
  void validate(const char* which) const;
};

struct ModelConfig {
  std::size_t k_enc = 32;
  std::array<std::size_t, 4> level_dims{64, 128, 256, 512};
  std::size_t fab_channels = 128;
  PpbConfig ppb_semantics{{1, 4, 9, 16}};
  PpbConfig ppb_multiscale{{1, 9, 25, 49}};
  Reduction reduction = Reduction::MeanMax;
  std::size_t spb_channels = 128;
  std::size_t head_hidden = 64;
  bool batch_norm = true;

  void validate() const;

  // Throws unless `points` can flow through every block.
  void validate_block(std::size_t points) const;

  static const std::vector<std::string>& keys();
};

inline constexpr std::size_t kInputChannels = 9;
inline constexpr std::size_t kLevels = 4;
inline constexpr std::size_t kLevelStride = 4;
inline constexpr std::size_t kBlockMultiple = 256;  // kLevelStride^kLevels

// Points at encoder level l (0 = input).
std::size_t level_points(std::size_t points, std::size_t level);

std::string format_model_config(const ModelConfig& config);
ModelConfig parse_model_config(const std::string& text);
// Reads model keys out of a key=value map; every key is required.
ModelConfig model_config_from(const std::map<std::string, std::string>& values);

}  // namespace pcsod::model
