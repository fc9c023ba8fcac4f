#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "data/point_view.hpp"
#include "data/synth.hpp"

namespace pcsod {

enum class Split { Train, Test };

std::string to_string(Split split);

// root/{train,test}/*.ply in lexicographic file-name order.
std::vector<PointView> load_dataset(const std::filesystem::path& root, Split split);

struct SynthOptions {
  std::size_t views = 120;
  std::uint64_t seed = 0;
  double split_ratio = 0.7;
  std::size_t points = kDefaultScenePoints;
};

struct SynthSummary {
  std::size_t train = 0;
  std::size_t test = 0;
};

// Writes labeled binary PLY views and their recipes under `root`.
SynthSummary synthesize_dataset(const std::filesystem::path& root, const SynthOptions& options);

}  // namespace pcsod
