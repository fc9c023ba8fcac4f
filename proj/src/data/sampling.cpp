#include "data/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "common/error.hpp"

namespace pcsod {

EncodedInput encode_input(const PointView& view) {
  const std::size_t n = view.size();
  if (n == 0) throw_data("cannot encode an empty view");
  Vec3 centroid{0, 0, 0};
  Vec3 lo = view.positions[0];
  Vec3 hi = view.positions[0];
  for (const auto& p : view.positions) {
    for (int c = 0; c < 3; ++c) {
      centroid[c] += p[c];
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  for (auto& c : centroid) c /= static_cast<double>(n);

  EncodedInput out;
  out.rows = n;
  out.features.resize(n * EncodedInput::kChannels);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &out.features[i * EncodedInput::kChannels];
    const auto& p = view.positions[i];
    for (int c = 0; c < 3; ++c) {
      row[c] = p[c] - centroid[c];
      row[3 + c] = view.colors[i][c];
      const double extent = hi[c] - lo[c];
      row[6 + c] = extent > 0.0 ? std::clamp((p[c] - lo[c]) / extent, 0.0, 1.0) : 0.5;
    }
  }
  return out;
}

EncodedInput select_rows(const EncodedInput& input, const std::vector<std::size_t>& indices) {
  EncodedInput out;
  out.rows = indices.size();
  out.features.resize(indices.size() * EncodedInput::kChannels);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(&input.features[indices[i] * EncodedInput::kChannels], EncodedInput::kChannels,
                &out.features[i * EncodedInput::kChannels]);
  }
  return out;
}

std::vector<std::size_t> sample_training_block(const PointView& view, std::size_t n, Rng& rng) {
  if (view.size() == 0) throw_data("cannot sample from an empty view");
  std::uniform_int_distribution<std::size_t> pick(0, view.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = pick(rng);
  return out;
}

ChunkPlan plan_chunks(const PointView& view, std::size_t n, Rng& rng) {
  const std::size_t total = view.size();
  if (total == 0) throw_data("cannot plan chunks for an empty view");
  if (n == 0) throw_usage("chunk size must be positive");

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  ChunkPlan plan;
  plan.coverage.assign(total, 0);
  const std::size_t num_blocks = (total + n - 1) / n;
  plan.blocks.reserve(num_blocks);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const std::size_t begin = b * n;
    const std::size_t end = std::min(total, begin + n);
    plan.blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
  }

  auto& last = plan.blocks.back();
  const std::size_t missing = n - last.size();
  if (missing > 0) {
    const std::size_t covered_before = total - last.size();
    if (covered_before >= missing) {
      // Distinct re-draws from the points already covered by earlier blocks.
      std::vector<std::size_t> pool(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(covered_before));
      for (std::size_t i = 0; i < missing; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        last.push_back(pool[i]);
      }
    } else {
      const std::size_t own = last.size();
      std::uniform_int_distribution<std::size_t> pick(0, own - 1);
      for (std::size_t i = 0; i < missing; ++i) last.push_back(last[pick(rng)]);
    }
  }

  for (const auto& block : plan.blocks) {
    for (auto idx : block) ++plan.coverage[idx];
  }
  return plan;
}

PointView rotate_about_z(const PointView& view, double angle) {
  PointView out = view;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (auto& p : out.positions) {
    const double x = p[0];
    const double y = p[1];
    p[0] = c * x - s * y;
    p[1] = s * x + c * y;
  }
  return out;
}

PointView augment_rotation(const PointView& view, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  return rotate_about_z(view, angle(rng));
}

}  // namespace pcsod
