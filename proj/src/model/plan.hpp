#pragma once

#include <array>
#include <vector>

#include "data/point_view.hpp"
#include "model/config.hpp"

namespace pcsod::model {

// All row indices below address batch-stacked tensors: sample s occupies rows
// [s * n, (s + 1) * n) of a level with n points per sample.

struct GroupPlan {
  std::size_t centers = 0;
  std::size_t k = 0;
  std::vector<std::size_t> neighbor_rows;  // centers * k, into the previous level
  std::vector<double> relative;            // centers * k * 3, neighbor minus center
};

struct InterpPlan {
  std::size_t rows = 0;
  std::size_t per_row = 0;
  std::vector<std::size_t> indices;
  std::vector<double> weights;
};

inline constexpr std::size_t kRelationWidth = 10;

// [center, neighbor, center - neighbor, |center - neighbor|].
std::array<double, kRelationWidth> relation_vector(const Vec3& center, const Vec3& neighbor);

struct BranchPlan {
  std::size_t k = 0;
  std::vector<double> relation;  // rows * k * kRelationWidth
};

struct PpbPlan {
  std::size_t rows = 0;
  std::array<BranchPlan, 4> branches;
};

// Point-perception grouping for batch-stacked point sets of equal size.
PpbPlan plan_ppb(const std::vector<std::vector<Vec3>>& positions, const PpbConfig& config);

struct NetworkPlan {
  std::size_t batch = 0;
  std::size_t points = 0;
  // level_positions[l][s]: positions of sample s at level l (0 = input).
  std::array<std::vector<std::vector<Vec3>>, kLevels + 1> level_positions;
  std::array<GroupPlan, kLevels> encoder;
  // fab[0]: level 4 -> 3, fab[1]: 3 -> 2, fab[2]: 2 -> 1.
  std::array<InterpPlan, 3> fab;
  PpbPlan semantics;   // over level 4
  PpbPlan multiscale;  // over level 1
  InterpPlan spb_semantics;   // level 4 -> input points
  InterpPlan spb_multiscale;  // level 1 -> input points
};

// Neighborhoods, samplings and interpolation weights for one batch of blocks.
// Depends on positions only.
NetworkPlan plan_network(const ModelConfig& config, const std::vector<std::vector<Vec3>>& block_positions);

}  // namespace pcsod::model
