#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pcsod {

using Vec3 = std::array<double, 3>;

// One captured view of a scene. Positions are scene units; colors in [0,1];
// labels (1 = salient) are present for annotated views only.
struct PointView {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  std::optional<std::vector<std::uint8_t>> labels;
  std::string scene_id;
  std::string view_id;

  std::size_t size() const noexcept { return positions.size(); }
  bool has_labels() const noexcept { return labels.has_value(); }

  // Throws Error(Data) when an invariant is violated.
  void validate() const;
};

// N x 9 row-major: centered xyz, rgb, bounding-box normalized xyz.
struct EncodedInput {
  static constexpr std::size_t kChannels = 9;

  std::size_t rows = 0;
  std::vector<double> features;

  double at(std::size_t row, std::size_t channel) const {
    return features[row * kChannels + channel];
  }
  Vec3 centered_position(std::size_t row) const {
    return {at(row, 0), at(row, 1), at(row, 2)};
  }
};

}  // namespace pcsod
