#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "data/point_view.hpp"

namespace pcsod::geometry {

double euclidean_distance(const Vec3& a, const Vec3& b);

struct NeighborGroup {
  std::size_t center_index = 0;
  std::vector<std::size_t> neighbor_indices;  // nearest first
  std::vector<double> distances;              // non-decreasing
};

// Flat row-major neighbor table: row i holds the k neighbors of query i.
struct NeighborTable {
  std::size_t queries = 0;
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::size_t index(std::size_t query, std::size_t j) const { return indices[query * k + j]; }
  double distance(std::size_t query, std::size_t j) const { return distances[query * k + j]; }
  NeighborGroup group(std::size_t query) const;
};

// Exact k nearest neighbors by Euclidean distance, brute force. Equal
// distances resolve to the smaller reference index. Throws when k > |reference|.
NeighborTable knn_table(std::span<const Vec3> query, std::span<const Vec3> reference, std::size_t k);
std::vector<NeighborGroup> knn(std::span<const Vec3> query, std::span<const Vec3> reference, std::size_t k);

struct SampleResult {
  std::vector<std::size_t> selected_indices;
  // Entry 0: seed distance from the centroid. Entry j > 0: distance from the
  // j-th pick to the nearest earlier pick.
  std::vector<double> farthest_distances;
};

// Greedy max-min selection of m points. The seed is the point farthest from
// the centroid (ties: lexicographically smallest coordinates, then index);
// later ties go to the smaller index.
SampleResult farthest_point_sample(std::span<const Vec3> points, std::size_t m);

// Inverse-squared-distance weights over the (up to) 3 nearest coarse points.
// Weights of each row sum to 1; a fine point within 1e-10 of a coarse point
// takes that point's feature with weight 1.
struct InterpolationTable {
  std::size_t rows = 0;
  std::size_t neighbors = 0;
  std::vector<std::size_t> indices;
  std::vector<double> weights;
};

inline constexpr double kCoincidentDistance = 1e-10;

InterpolationTable interpolation_table(std::span<const Vec3> coarse, std::span<const Vec3> fine);

// coarse_features: M x channels row-major. Returns N x channels.
std::vector<double> interpolate_features(std::span<const Vec3> coarse, std::span<const double> coarse_features,
                                         std::size_t channels, std::span<const Vec3> fine);

}  // namespace pcsod::geometry
