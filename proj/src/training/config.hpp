#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model/config.hpp"

namespace pcsod::training {

struct TrainConfig {
  double lr = 5e-4;
  double weight_decay = 1e-4;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::size_t block_size = 4096;
  std::uint64_t seed = 0;
  std::size_t votes = 3;
  std::size_t checkpoint_every = 0;  // steps; 0 writes only the final checkpoint
  double lr_decay = 1.0;             // per-epoch factor; 1 keeps the rate constant
  std::size_t max_steps = 0;         // 0 = run all epochs
  bool augment = true;

  void validate() const;
  static const std::vector<std::string>& keys();
};

// A run file holds every model key and every training key.
struct RunConfig {
  model::ModelConfig model;
  TrainConfig train;

  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
std::string format_run_config(const RunConfig& config);

}  // namespace pcsod::training
