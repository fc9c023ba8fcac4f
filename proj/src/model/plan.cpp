#include "model/plan.hpp"

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "geometry/geometry.hpp"

namespace pcsod::model {
namespace {

struct SampleLevels {
  std::array<std::vector<Vec3>, kLevels + 1> positions;
  std::array<geometry::NeighborTable, kLevels> groups;
  std::array<geometry::InterpolationTable, 3> fab;
  geometry::InterpolationTable spb_semantics;
  geometry::InterpolationTable spb_multiscale;
};

InterpPlan stack_interp(const std::vector<geometry::InterpolationTable>& tables, std::size_t coarse_per_sample) {
  InterpPlan plan;
  plan.per_row = tables.front().neighbors;
  for (std::size_t s = 0; s < tables.size(); ++s) {
    const auto& t = tables[s];
    plan.rows += t.rows;
    for (auto idx : t.indices) plan.indices.push_back(idx + s * coarse_per_sample);
    plan.weights.insert(plan.weights.end(), t.weights.begin(), t.weights.end());
  }
  return plan;
}

}  // namespace

std::array<double, kRelationWidth> relation_vector(const Vec3& center, const Vec3& neighbor) {
  return {center[0],
          center[1],
          center[2],
          neighbor[0],
          neighbor[1],
          neighbor[2],
          center[0] - neighbor[0],
          center[1] - neighbor[1],
          center[2] - neighbor[2],
          geometry::euclidean_distance(center, neighbor)};
}

PpbPlan plan_ppb(const std::vector<std::vector<Vec3>>& positions, const PpbConfig& config) {
  if (positions.empty()) throw_data("plan_ppb: empty batch");
  const std::size_t m = positions.front().size();
  if (config.max_k() > m) {
    throw_data("point perception block needs " + std::to_string(config.max_k()) + " neighbors but only " +
               std::to_string(m) + " points are available");
  }
  PpbPlan plan;
  plan.rows = positions.size() * m;
  for (std::size_t b = 0; b < 4; ++b) {
    BranchPlan& branch = plan.branches[b];
    branch.k = config.k[b];
    branch.relation.resize(plan.rows * branch.k * kRelationWidth);
  }
  parallel_for(positions.size(), [&](std::size_t s) {
    const auto& pos = positions[s];
    if (pos.size() != m) throw_data("plan_ppb: samples differ in size");
    // Branch neighborhoods are nested prefixes of the largest one.
    const auto table = geometry::knn_table(pos, pos, config.max_k());
    for (std::size_t b = 0; b < 4; ++b) {
      BranchPlan& branch = plan.branches[b];
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < branch.k; ++j) {
          const auto rel = relation_vector(pos[i], pos[table.index(i, j)]);
          double* dst = &branch.relation[(((s * m) + i) * branch.k + j) * kRelationWidth];
          std::copy(rel.begin(), rel.end(), dst);
        }
      }
    }
  });
  return plan;
}

NetworkPlan plan_network(const ModelConfig& config, const std::vector<std::vector<Vec3>>& block_positions) {
  if (block_positions.empty()) throw_data("plan_network: empty batch");
  const std::size_t n = block_positions.front().size();
  config.validate_block(n);
  for (const auto& b : block_positions) {
    if (b.size() != n) throw_data("plan_network: blocks in a batch must have equal size");
  }
  const std::size_t batch = block_positions.size();

  std::vector<SampleLevels> samples(batch);
  parallel_for(batch, [&](std::size_t s) {
    SampleLevels& sl = samples[s];
    sl.positions[0] = block_positions[s];
    for (std::size_t l = 1; l <= kLevels; ++l) {
      const auto& prev = sl.positions[l - 1];
      const auto fps = geometry::farthest_point_sample(prev, level_points(n, l));
      auto& cur = sl.positions[l];
      cur.reserve(fps.selected_indices.size());
      for (auto idx : fps.selected_indices) cur.push_back(prev[idx]);
      sl.groups[l - 1] = geometry::knn_table(cur, prev, std::min(config.k_enc, prev.size()));
    }
    for (std::size_t f = 0; f < 3; ++f) {
      const std::size_t coarse = kLevels - f;  // 4, 3, 2
      sl.fab[f] = geometry::interpolation_table(sl.positions[coarse], sl.positions[coarse - 1]);
    }
    sl.spb_semantics = geometry::interpolation_table(sl.positions[4], sl.positions[0]);
    sl.spb_multiscale = geometry::interpolation_table(sl.positions[1], sl.positions[0]);
  });

  NetworkPlan plan;
  plan.batch = batch;
  plan.points = n;
  for (std::size_t l = 0; l <= kLevels; ++l) {
    plan.level_positions[l].reserve(batch);
    for (auto& sl : samples) plan.level_positions[l].push_back(sl.positions[l]);
  }
  for (std::size_t l = 1; l <= kLevels; ++l) {
    GroupPlan& g = plan.encoder[l - 1];
    const std::size_t prev_n = level_points(n, l - 1);
    const std::size_t cur_n = level_points(n, l);
    g.centers = batch * cur_n;
    g.k = samples.front().groups[l - 1].k;
    g.neighbor_rows.resize(g.centers * g.k);
    g.relative.resize(g.centers * g.k * 3);
    for (std::size_t s = 0; s < batch; ++s) {
      const auto& table = samples[s].groups[l - 1];
      const auto& prev = samples[s].positions[l - 1];
      const auto& cur = samples[s].positions[l];
      for (std::size_t i = 0; i < cur_n; ++i) {
        for (std::size_t j = 0; j < g.k; ++j) {
          const std::size_t at = (s * cur_n + i) * g.k + j;
          const std::size_t nb = table.index(i, j);
          g.neighbor_rows[at] = s * prev_n + nb;
          for (int c = 0; c < 3; ++c) g.relative[at * 3 + c] = prev[nb][c] - cur[i][c];
        }
      }
    }
  }
  for (std::size_t f = 0; f < 3; ++f) {
    std::vector<geometry::InterpolationTable> tables;
    for (auto& sl : samples) tables.push_back(std::move(sl.fab[f]));
    plan.fab[f] = stack_interp(tables, level_points(n, kLevels - f));
  }
  {
    std::vector<geometry::InterpolationTable> sem, ms;
    for (auto& sl : samples) {
      sem.push_back(std::move(sl.spb_semantics));
      ms.push_back(std::move(sl.spb_multiscale));
    }
    plan.spb_semantics = stack_interp(sem, level_points(n, 4));
    plan.spb_multiscale = stack_interp(ms, level_points(n, 1));
  }
  plan.semantics = plan_ppb(plan.level_positions[4], config.ppb_semantics);
  plan.multiscale = plan_ppb(plan.level_positions[1], config.ppb_multiscale);
  return plan;
}

}  // namespace pcsod::model
