#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "autodiff/adam.hpp"
#include "autodiff/checkpoint.hpp"
#include "data/point_view.hpp"
#include "data/sampling.hpp"
#include "metrics/metrics.hpp"
#include "model/network.hpp"
#include "training/config.hpp"

namespace pcsod::training {

struct EvalSummary {
  double mae = 0.0;
  double iou = 0.0;
  double max_f = 0.0;
  double max_e = 0.0;
};

struct StepRecord {
  std::uint64_t step = 0;  // 1-based
  std::size_t epoch = 0;   // 1-based
  double loss = 0.0;
  double seconds = 0.0;    // wall clock since the run (or resume) started
  std::optional<EvalSummary> eval;  // set on the last step of an evaluated epoch
};

struct RunLog {
  std::vector<StepRecord> steps;

  // step,epoch,loss,seconds,mae,iou,max_f,max_e (metrics empty when absent)
  void write_csv(const std::filesystem::path& path) const;
};

// Generator seeded from (seed, stream, index) so every step or epoch can be
// reproduced in isolation.
Rng derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct TrainHooks {
  std::filesystem::path checkpoint;          // empty: never written
  const std::vector<PointView>* eval_views = nullptr;
  std::size_t eval_every = 0;                // epochs; 0 disables evaluation
  std::function<void(const StepRecord&)> on_step;
};

class Trainer {
 public:
  explicit Trainer(const RunConfig& config);
  // Resumes from a checkpoint that carries optimizer state.
  explicit Trainer(const ad::Checkpoint& checkpoint);

  // Runs until the configured epochs (or max_steps) are complete.
  RunLog train(const std::vector<PointView>& views, const TrainHooks& hooks = {});

  // One optimizer step at the current position of the schedule.
  StepRecord step(const std::vector<PointView>& views);

  std::uint64_t steps_done() const { return optimizer_.step; }
  std::uint64_t total_steps(std::size_t views) const;
  static std::size_t steps_per_epoch(std::size_t views, std::size_t batch_size);

  const RunConfig& config() const { return config_; }
  model::Network<float>& network() { return *network_; }
  const model::Network<float>& network() const { return *network_; }

  ad::Checkpoint checkpoint() const;

 private:
  RunConfig config_;
  std::unique_ptr<model::Network<float>> network_;
  ad::AdamState<float> optimizer_;
};

// Blocks for one step: the views in `batch`, each sampled (with replacement)
// and, if enabled, rotated about the vertical axis.
struct TrainingBatch {
  std::vector<EncodedInput> inputs;
  std::vector<std::uint8_t> labels;
};
TrainingBatch sample_batch(const std::vector<PointView>& views, const std::vector<std::size_t>& batch,
                           std::size_t block_size, bool augment, Rng& rng);

// Full-view voting inference for every view, then metrics.
std::vector<metrics::MetricsReport> evaluate_views(const model::Network<float>& network,
                                                   const std::vector<PointView>& views, std::size_t block_size,
                                                   std::size_t votes, std::uint64_t seed);

// Loads the network from a checkpoint (optimizer state ignored).
std::unique_ptr<model::Network<float>> load_network(const ad::Checkpoint& checkpoint);

}  // namespace pcsod::training
