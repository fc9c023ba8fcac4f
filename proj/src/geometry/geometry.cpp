#include "geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "common/error.hpp"
#include "common/parallel.hpp"

namespace pcsod::geometry {
namespace {

double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

double euclidean_distance(const Vec3& a, const Vec3& b) { return std::sqrt(squared_distance(a, b)); }

NeighborGroup NeighborTable::group(std::size_t query) const {
  NeighborGroup g;
  g.center_index = query;
  g.neighbor_indices.assign(indices.begin() + static_cast<std::ptrdiff_t>(query * k),
                            indices.begin() + static_cast<std::ptrdiff_t>((query + 1) * k));
  g.distances.assign(distances.begin() + static_cast<std::ptrdiff_t>(query * k),
                     distances.begin() + static_cast<std::ptrdiff_t>((query + 1) * k));
  return g;
}

NeighborTable knn_table(std::span<const Vec3> query, std::span<const Vec3> reference, std::size_t k) {
  if (k > reference.size()) {
    throw_usage("knn: k=" + std::to_string(k) + " exceeds reference size " + std::to_string(reference.size()));
  }
  NeighborTable table;
  table.queries = query.size();
  table.k = k;
  table.indices.resize(query.size() * k);
  table.distances.resize(query.size() * k);
  if (k == 0) return table;

  parallel_for(query.size(), [&](std::size_t q) {
    // Bounded max-heap of the k smallest (d2, index) pairs; the pair order
    // makes equal distances resolve to the lower index.
    thread_local std::vector<std::pair<double, std::size_t>> candidates;
    candidates.clear();
    for (std::size_t r = 0; r < k; ++r) candidates.emplace_back(squared_distance(query[q], reference[r]), r);
    std::make_heap(candidates.begin(), candidates.end());
    for (std::size_t r = k; r < reference.size(); ++r) {
      const std::pair<double, std::size_t> c{squared_distance(query[q], reference[r]), r};
      if (c < candidates.front()) {
        std::pop_heap(candidates.begin(), candidates.end());
        candidates.back() = c;
        std::push_heap(candidates.begin(), candidates.end());
      }
    }
    std::sort_heap(candidates.begin(), candidates.end());
    for (std::size_t j = 0; j < k; ++j) {
      table.indices[q * k + j] = candidates[j].second;
      table.distances[q * k + j] = std::sqrt(candidates[j].first);
    }
  });
  return table;
}

std::vector<NeighborGroup> knn(std::span<const Vec3> query, std::span<const Vec3> reference, std::size_t k) {
  const NeighborTable table = knn_table(query, reference, k);
  std::vector<NeighborGroup> groups;
  groups.reserve(query.size());
  for (std::size_t q = 0; q < query.size(); ++q) groups.push_back(table.group(q));
  return groups;
}

SampleResult farthest_point_sample(std::span<const Vec3> points, std::size_t m) {
  const std::size_t n = points.size();
  if (m == 0 || m > n) {
    throw_usage("farthest_point_sample: m=" + std::to_string(m) + " not in [1, " + std::to_string(n) + "]");
  }
  Vec3 centroid{0, 0, 0};
  for (const auto& p : points) {
    for (int c = 0; c < 3; ++c) centroid[c] += p[c];
  }
  for (auto& c : centroid) c /= static_cast<double>(n);

  std::size_t seed = 0;
  double seed_d2 = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = squared_distance(points[i], centroid);
    if (d2 > seed_d2 || (d2 == seed_d2 && points[i] < points[seed])) {
      seed = i;
      seed_d2 = d2;
    }
  }

  SampleResult result;
  result.selected_indices.reserve(m);
  result.farthest_distances.reserve(m);
  result.selected_indices.push_back(seed);
  result.farthest_distances.push_back(std::sqrt(seed_d2));

  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t last = seed;
  for (std::size_t step = 1; step < m; ++step) {
    std::size_t best = 0;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = std::min(nearest[i], squared_distance(points[i], points[last]));
      nearest[i] = d2;
      if (d2 > best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    result.selected_indices.push_back(best);
    result.farthest_distances.push_back(std::sqrt(best_d2));
    last = best;
  }
  return result;
}

InterpolationTable interpolation_table(std::span<const Vec3> coarse, std::span<const Vec3> fine) {
  if (coarse.empty()) throw_usage("interpolation requires at least one coarse point");
  const std::size_t m = std::min<std::size_t>(3, coarse.size());
  const NeighborTable nn = knn_table(fine, coarse, m);
  InterpolationTable table;
  table.rows = fine.size();
  table.neighbors = m;
  table.indices = nn.indices;
  table.weights.assign(fine.size() * m, 0.0);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    double* w = &table.weights[i * m];
    if (nn.distance(i, 0) < kCoincidentDistance) {
      w[0] = 1.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = nn.distance(i, j);
      w[j] = 1.0 / (d * d);
      total += w[j];
    }
    for (std::size_t j = 0; j < m; ++j) w[j] /= total;
  }
  return table;
}

std::vector<double> interpolate_features(std::span<const Vec3> coarse, std::span<const double> coarse_features,
                                         std::size_t channels, std::span<const Vec3> fine) {
  if (coarse_features.size() != coarse.size() * channels) throw_usage("interpolate_features: feature size mismatch");
  const InterpolationTable table = interpolation_table(coarse, fine);
  std::vector<double> out(fine.size() * channels, 0.0);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    for (std::size_t j = 0; j < table.neighbors; ++j) {
      const double w = table.weights[i * table.neighbors + j];
      const double* src = &coarse_features[table.indices[i * table.neighbors + j] * channels];
      for (std::size_t c = 0; c < channels; ++c) out[i * channels + c] += w * src[c];
    }
  }
  return out;
}

}  // namespace pcsod::geometry
