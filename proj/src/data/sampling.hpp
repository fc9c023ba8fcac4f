#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "data/point_view.hpp"

namespace pcsod {

using Rng = std::mt19937_64;

inline constexpr std::size_t kDefaultBlockSize = 4096;

EncodedInput encode_input(const PointView& view);

// Encoded rows for a subset of points (rows in `indices` order).
EncodedInput select_rows(const EncodedInput& input, const std::vector<std::size_t>& indices);

// Uniform draw of n indices with replacement.
std::vector<std::size_t> sample_training_block(const PointView& view, std::size_t n, Rng& rng);

struct ChunkPlan {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::uint32_t> coverage;  // visits per point
};

// Random permutation split into ceil(N/n) blocks of exactly n indices; the
// final short block is padded with already-covered indices.
ChunkPlan plan_chunks(const PointView& view, std::size_t n, Rng& rng);

// Rotation about the vertical axis; colors and labels are copied.
PointView rotate_about_z(const PointView& view, double angle);

// rotate_about_z with an angle drawn uniformly from [0, 2*pi).
PointView augment_rotation(const PointView& view, Rng& rng);

}  // namespace pcsod
