#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "data/point_view.hpp"

namespace pcsod {

enum class PlyFormat { Ascii, BinaryLittleEndian };

// Reads a PLY vertex element with x,y,z and red,green,blue; an optional
// label property is mapped to {0,1}. Integer colors are rescaled from 0..255.
PointView load_ply(const std::filesystem::path& path);

// Writes x,y,z as float and colors as uchar. When `scalar` is given it must
// hold one value in [0,1] per point; colors are then replaced by a heat map of
// the scalar and the raw value is stored in a float "probability" property.
void save_ply(const PointView& view, const std::filesystem::path& path, PlyFormat format,
              std::optional<std::span<const double>> scalar = std::nullopt);

// Blue (0) to red (1) heat map, 8-bit per channel.
std::array<std::uint8_t, 3> heat_color(double value);

}  // namespace pcsod
