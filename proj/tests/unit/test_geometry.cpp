#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "geometry/geometry.hpp"
#include "support.hpp"

using namespace pcsod;
using namespace pcsod::geometry;

namespace {

std::vector<Vec3> random_cloud(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

// Exhaustive oracle: full sort by (distance, index).
std::vector<std::size_t> oracle_knn(const Vec3& q, const std::vector<Vec3>& ref, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < ref.size(); ++i) all.emplace_back(euclidean_distance(q, ref[i]), i);
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < k; ++j) out.push_back(all[j].second);
  return out;
}

double min_pairwise(const std::vector<Vec3>& pts, const std::vector<std::size_t>& idx) {
  double best = INFINITY;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) best = std::min(best, euclidean_distance(pts[idx[a]], pts[idx[b]]));
  }
  return best;
}

}  // namespace

TEST_CASE("euclidean distance") {
  CHECK(euclidean_distance({0, 0, 0}, {1, 0, 0}) == 1.0);
  CHECK(euclidean_distance({2, 3, 4}, {2, 3, 4}) == 0.0);
  CHECK(euclidean_distance({1, 2, 2}, {0, 0, 0}) == 3.0);
}

TEST_CASE("knn basics") {
  const std::vector<Vec3> ref = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const std::vector<Vec3> q = {{0.4, 0, 0}};
  const auto g = knn(q, ref, 2);
  CHECK(g[0].neighbor_indices == std::vector<std::size_t>{0, 1});
  const auto self = knn(std::vector<Vec3>{{1, 0, 0}}, ref, 1);
  CHECK(self[0].neighbor_indices[0] == 1);
  CHECK(self[0].distances[0] == 0.0);
  CHECK_THROWS_AS(knn(q, ref, 4), Error);
  // Equidistant references resolve to the smaller index.
  const auto tie = knn(std::vector<Vec3>{{1, 0, 0}}, std::vector<Vec3>{{2, 0, 0}, {0, 0, 0}}, 1);
  CHECK(tie[0].neighbor_indices[0] == 0);
}

TEST_CASE("knn matches the exhaustive oracle up to N=500") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 7u, 64u, 200u, 500u}) {
    const auto ref = random_cloud(n, rng);
    const auto query = random_cloud(50, rng);
    for (std::size_t k : {std::size_t{1}, std::min<std::size_t>(8, n), n}) {
      const auto groups = knn(query, ref, k);
      for (std::size_t i = 0; i < query.size(); ++i) {
        CHECK(groups[i].neighbor_indices == oracle_knn(query[i], ref, k));
        CHECK(std::is_sorted(groups[i].distances.begin(), groups[i].distances.end()));
      }
    }
  }
}

TEST_CASE("farthest point sampling") {
  SUBCASE("collinear") {
    std::vector<Vec3> line;
    for (int x = 0; x < 10; ++x) line.push_back({double(x), 0, 0});
    const auto s = farthest_point_sample(line, 2);
    CHECK(s.selected_indices == std::vector<std::size_t>{0, 9});
  }
  SUBCASE("m = N selects everything") {
    std::mt19937_64 rng(2);
    const auto pts = random_cloud(40, rng);
    const auto s = farthest_point_sample(pts, 40);
    CHECK(std::set<std::size_t>(s.selected_indices.begin(), s.selected_indices.end()).size() == 40);
  }
  SUBCASE("errors") {
    const std::vector<Vec3> pts = {{0, 0, 0}};
    CHECK_THROWS_AS(farthest_point_sample(pts, 2), Error);
    CHECK_THROWS_AS(farthest_point_sample(pts, 0), Error);
  }
  SUBCASE("max-min selection beats random subsets") {
    std::mt19937_64 rng(5);
    const auto pts = random_cloud(300, rng);
    const auto s = farthest_point_sample(pts, 16);
    const double fps = min_pairwise(pts, s.selected_indices);
    std::vector<std::size_t> all(pts.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (int rep = 0; rep < 100; ++rep) {
      std::shuffle(all.begin(), all.end(), rng);
      CHECK(fps >= min_pairwise(pts, std::vector<std::size_t>(all.begin(), all.begin() + 16)));
    }
  }
  SUBCASE("distances non-increasing after the first entry") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 100; ++rep) {
      const auto pts = random_cloud(256, rng);
      const auto s = farthest_point_sample(pts, 64);
      for (std::size_t j = 2; j < s.farthest_distances.size(); ++j) {
        CHECK(s.farthest_distances[j] <= s.farthest_distances[j - 1]);
      }
    }
  }
  SUBCASE("seed depends on geometry, not order") {
    std::mt19937_64 rng(9);
    const auto pts = random_cloud(128, rng);
    std::vector<std::size_t> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec3> shuffled(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[perm[i]];
    const auto a = farthest_point_sample(pts, 32);
    const auto b = farthest_point_sample(shuffled, 32);
    for (std::size_t j = 0; j < 32; ++j) CHECK(perm[b.selected_indices[j]] == a.selected_indices[j]);
  }
}

TEST_CASE("feature interpolation") {
  std::mt19937_64 rng(4);
  SUBCASE("single coarse point") {
    const std::vector<Vec3> coarse = {{0, 0, 0}};
    const std::vector<double> feat = {1.5, -2.0};
    const auto fine = random_cloud(5, rng);
    const auto out = interpolate_features(coarse, feat, 2, fine);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(out[2 * i] == 1.5);
      CHECK(out[2 * i + 1] == -2.0);
    }
  }
  SUBCASE("equidistant coarse points give the mean") {
    const std::vector<Vec3> coarse = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {5, 5, 5}};
    const std::vector<double> feat = {3.0, 6.0, 12.0, 100.0};
    const auto out = interpolate_features(coarse, feat, 1, std::vector<Vec3>{{0, 0, 0}});
    CHECK(out[0] == doctest::Approx(7.0).epsilon(1e-12));
  }
  SUBCASE("coincident points copy exactly") {
    const auto coarse = random_cloud(20, rng);
    std::vector<double> feat(20 * 3);
    std::normal_distribution<double> n;
    for (auto& f : feat) f = n(rng);
    const auto out = interpolate_features(coarse, feat, 3, coarse);
    for (std::size_t i = 0; i < feat.size(); ++i) CHECK(out[i] == feat[i]);
  }
  SUBCASE("weights sum to one and outputs stay in range") {
    for (int rep = 0; rep < 20; ++rep) {
      const auto coarse = random_cloud(30, rng);
      const auto fine = random_cloud(200, rng);
      const auto table = interpolation_table(coarse, fine);
      std::vector<double> feat(30);
      std::uniform_real_distribution<double> u(-3, 3);
      for (auto& f : feat) f = u(rng);
      const auto out = interpolate_features(coarse, feat, 1, fine);
      for (std::size_t i = 0; i < fine.size(); ++i) {
        double total = 0.0, lo = INFINITY, hi = -INFINITY;
        for (std::size_t j = 0; j < table.neighbors; ++j) {
          const double w = table.weights[i * table.neighbors + j];
          CHECK(w >= 0.0);
          total += w;
          lo = std::min(lo, feat[table.indices[i * table.neighbors + j]]);
          hi = std::max(hi, feat[table.indices[i * table.neighbors + j]]);
        }
        CHECK(std::abs(total - 1.0) < 1e-9);
        CHECK(out[i] >= lo - 1e-12);
        CHECK(out[i] <= hi + 1e-12);
      }
    }
  }
}
