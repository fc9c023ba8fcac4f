#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autodiff/reduce.hpp"

namespace pcsod::gradcheck {

enum class Block { Encoder, Fab, PpbSemantics, PpbMultiscale, Spb, Loss };

std::string to_string(Block block);
// "all", "encoder", "fab", "ppb" (both perception blocks), "spb", "loss".
std::vector<Block> parse_selection(const std::string& name);
const std::vector<Block>& all_blocks();

struct Options {
  double step = 1e-4;
  double tolerance = 1e-5;
  // Relative errors are |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  std::size_t entries_per_tensor = 24;  // sampled entries per checked tensor
  std::uint64_t seed = 0;
  ad::Reduction reduction = ad::Reduction::MeanMax;
  bool batch_norm = true;     // false checks every block without normalization
  bool inject_fault = false;  // corrupt one analytic gradient entry
};

struct BlockResult {
  Block block = Block::Encoder;
  std::size_t tensors = 0;
  std::size_t entries = 0;
  std::size_t kinks_skipped = 0;  // entries redrawn because ±step crossed a kink
  double max_relative_error = 0.0;
  std::string worst;              // tensor[index] of the largest error
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = false;
};

BlockResult check_block(Block block, const Options& options);
std::vector<BlockResult> run(const std::vector<Block>& blocks, const Options& options);
std::string format_table(const std::vector<BlockResult>& results, double tolerance);

}  // namespace pcsod::gradcheck
