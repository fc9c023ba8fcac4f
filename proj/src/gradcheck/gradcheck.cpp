#include "gradcheck/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "model/blocks.hpp"
#include "model/plan.hpp"

namespace pcsod::gradcheck {
namespace {

using ad::Tape;
using ad::Tensor;
using Rng = std::mt19937_64;
using Outputs = std::vector<Tensor<double>>;

// A block wired to fixed inputs. The checked scalar is sum_i r_i * out_i over
// every output with fixed random r, or the output itself when `scalar`.
struct Problem {
  std::vector<ad::NamedParameter<double>> tensors;
  std::function<Outputs(Tape<double>&)> forward;
  bool scalar = false;
  std::shared_ptr<void> state;  // blocks and plans captured by forward
};

constexpr std::size_t kBatch = 2;
constexpr std::size_t kPoints = 1024;

model::ModelConfig tiny_config(const Options& o) {
  model::ModelConfig c;
  c.k_enc = 6;
  c.level_dims = {16, 24, 32, 48};
  c.fab_channels = 24;
  c.ppb_semantics.k = {1, 2, 3, 4};
  c.ppb_multiscale.k = {1, 9, 25, 49};
  c.reduction = o.reduction;
  c.batch_norm = o.batch_norm;
  c.spb_channels = 24;
  c.head_hidden = 16;
  return c;
}

std::vector<std::vector<Vec3>> random_clouds(std::size_t batch, std::size_t points, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<Vec3>> out(batch, std::vector<Vec3>(points));
  for (auto& cloud : out) {
    for (auto& p : cloud) p = {u(rng), u(rng), 0.5 * u(rng)};
  }
  return out;
}

Tensor<double> checked_input(Problem& problem, const std::string& name, ad::Shape shape, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(ad::element_count(shape));
  for (auto& x : v) x = n(rng);
  auto t = Tensor<double>::parameter(std::move(shape), std::move(v));
  problem.tensors.push_back({name, t});
  return t;
}

// With normalization on, weights are checked at 10x their init scale. Batch
// norm makes the forward pass invariant to that scale, but the larger weights
// shrink the curvature seen by a fixed step, keeping central-difference
// truncation error low.
constexpr double kWeightScale = 10.0;

void check_store(Problem& problem, const ad::ParamStore<double>& store, bool scale) {
  for (const auto& p : store.parameters()) {
    if (scale && (p.name.ends_with(".weight") || p.name.ends_with(".attention"))) {
      auto t = p.tensor;
      for (auto& v : t.mutable_data()) v *= kWeightScale;
    }
    problem.tensors.push_back(p);
  }
}

template <typename Block>
struct Wired {
  ad::ParamStore<double> store;
  std::unique_ptr<Block> block;
  model::NetworkPlan plan;
  model::PpbPlan ppb;
};

Problem encoder_problem(const Options& o, Rng& rng) {
  auto s = std::make_shared<Wired<model::Encoder<double>>>();
  const auto config = tiny_config(o);
  s->block = std::make_unique<model::Encoder<double>>(s->store, config, rng);
  s->plan = model::plan_network(config, random_clouds(kBatch, kPoints, rng));
  Problem p;
  const auto input = checked_input(p, "input", {kBatch * kPoints, model::kInputChannels}, rng);
  check_store(p, s->store, o.batch_norm);
  p.forward = [s, input](Tape<double>& tape) {
    const auto levels = s->block->forward(tape, s->plan.encoder, input, true);
    return Outputs(levels.begin(), levels.end());
  };
  p.state = s;
  return p;
}

Problem fab_problem(const Options& o, Rng& rng) {
  auto s = std::make_shared<Wired<model::FeatureAggregation<double>>>();
  const auto config = tiny_config(o);
  s->block = std::make_unique<model::FeatureAggregation<double>>(s->store, config, rng);
  s->plan = model::plan_network(config, random_clouds(kBatch, kPoints, rng));
  Problem p;
  std::array<Tensor<double>, model::kLevels> levels;
  for (std::size_t l = 0; l < model::kLevels; ++l) {
    levels[l] = checked_input(p, "level" + std::to_string(l + 1),
                              {kBatch * model::level_points(kPoints, l + 1), config.level_dims[l]}, rng);
  }
  check_store(p, s->store, o.batch_norm);
  p.forward = [s, levels](Tape<double>& tape) { return Outputs{s->block->forward(tape, s->plan.fab, levels, true)}; };
  p.state = s;
  return p;
}

Problem ppb_problem(const Options& o, Rng& rng, const std::string& prefix, std::size_t points, std::size_t channels,
                    const model::PpbConfig& k) {
  auto s = std::make_shared<Wired<model::PointPerception<double>>>();
  s->block = std::make_unique<model::PointPerception<double>>(s->store, prefix, channels, k, o.reduction, o.batch_norm, rng);
  s->ppb = model::plan_ppb(random_clouds(kBatch, points, rng), k);
  Problem p;
  const auto features = checked_input(p, "features", {kBatch * points, channels}, rng);
  check_store(p, s->store, o.batch_norm);
  p.forward = [s, features](Tape<double>& tape) { return Outputs{s->block->forward(tape, s->ppb, features, true)}; };
  p.state = s;
  return p;
}

Problem spb_problem(const Options& o, Rng& rng) {
  auto s = std::make_shared<Wired<model::SaliencyPerception<double>>>();
  const auto config = tiny_config(o);
  s->block = std::make_unique<model::SaliencyPerception<double>>(s->store, config, rng);
  s->plan = model::plan_network(config, random_clouds(kBatch, kPoints, rng));
  Problem p;
  const auto semantics =
      checked_input(p, "semantics", {kBatch * model::level_points(kPoints, 4), config.level_dims[3]}, rng);
  const auto multiscale =
      checked_input(p, "multiscale", {kBatch * model::level_points(kPoints, 1), config.fab_channels}, rng);
  check_store(p, s->store, o.batch_norm);
  p.forward = [s, semantics, multiscale](Tape<double>& tape) {
    const auto out =
        s->block->forward(tape, s->plan.spb_semantics, s->plan.spb_multiscale, semantics, multiscale, true);
    return Outputs{out.logits};
  };
  p.state = s;
  return p;
}

Problem loss_problem(Rng& rng) {
  constexpr std::size_t rows = 64;
  Problem p;
  const auto logits = checked_input(p, "logits", {rows, 2}, rng);
  auto labels = std::make_shared<std::vector<std::uint8_t>>(rows);
  std::bernoulli_distribution coin(0.3);
  for (auto& l : *labels) l = coin(rng) ? 1 : 0;
  p.scalar = true;
  p.forward = [logits, labels](Tape<double>& tape) {
    return Outputs{ad::cross_entropy(tape, logits, std::span<const std::uint8_t>(*labels))};
  };
  p.state = labels;
  return p;
}

Problem make_problem(Block block, const Options& o, Rng& rng) {
  switch (block) {
    case Block::Encoder: return encoder_problem(o, rng);
    case Block::Fab: return fab_problem(o, rng);
    case Block::PpbSemantics:
      // Level-4 size of a 4096-point block with the default neighbor sets.
      return ppb_problem(o, rng, "ppb_semantics", 16, 32, model::PpbConfig{{1, 4, 9, 16}});
    case Block::PpbMultiscale:
      return ppb_problem(o, rng, "ppb_multiscale", 64, 24, model::PpbConfig{{1, 9, 25, 49}});
    case Block::Spb: return spb_problem(o, rng);
    case Block::Loss: return loss_problem(rng);
  }
  throw_usage("unknown block");
}

class Harness {
 public:
  Harness(Problem problem, std::uint64_t seed) : p_(std::move(problem)), seed_(seed) {}

  // Output values, flattened; `trace` receives the branch fingerprint.
  std::vector<double> outputs(ad::BranchTrace* trace) {
    Tape<double> tape;
    ad::set_branch_trace(trace);
    const Outputs out = p_.forward(tape);
    ad::set_branch_trace(nullptr);
    ensure_weights(out);
    std::vector<double> flat;
    for (const auto& o : out) flat.insert(flat.end(), o.data().begin(), o.data().end());
    return flat;
  }

  // Central difference of the objective, differencing each output before
  // weighting so outputs the perturbation barely moves add no cancellation
  // noise.
  double central_difference(const std::vector<double>& up, const std::vector<double>& down, double step) const {
    double total = 0.0;
    std::size_t i = 0;
    for (const auto& w : weights_) {
      for (double r : w) {
        total += r * (up[i] - down[i]);
        ++i;
      }
    }
    return total / (2.0 * step);
  }

  void analytic() {
    Tape<double> tape;
    const Outputs out = p_.forward(tape);
    ensure_weights(out);
    const auto loss = objective(tape, out);
    for (auto& t : p_.tensors) t.tensor.zero_grad();
    tape.backward(loss);
  }

  std::vector<ad::NamedParameter<double>>& tensors() { return p_.tensors; }

 private:
  void ensure_weights(const Outputs& out) {
    if (!weights_.empty()) return;
    Rng rng(seed_ ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& o : out) {
      std::vector<double> w(o.size(), 1.0);
      if (!p_.scalar) {
        for (auto& x : w) x = u(rng);
      }
      weights_.push_back(std::move(w));
    }
  }

  Tensor<double> objective(Tape<double>& tape, const Outputs& out) {
    if (p_.scalar) return out.front();
    Tensor<double> total;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto term = ad::weighted_sum(tape, out[i], std::span<const double>(weights_[i]));
      total = total.defined() ? ad::add(tape, total, term) : term;
    }
    return total;
  }

  Problem p_;
  std::uint64_t seed_;
  std::vector<std::vector<double>> weights_;
};

}  // namespace

std::string to_string(Block block) {
  switch (block) {
    case Block::Encoder: return "encoder";
    case Block::Fab: return "fab";
    case Block::PpbSemantics: return "ppb_semantics";
    case Block::PpbMultiscale: return "ppb_multiscale";
    case Block::Spb: return "spb";
    case Block::Loss: return "loss";
  }
  return "?";
}

const std::vector<Block>& all_blocks() {
  static const std::vector<Block> b = {Block::Encoder, Block::Fab, Block::PpbSemantics,
                                       Block::PpbMultiscale, Block::Spb, Block::Loss};
  return b;
}

std::vector<Block> parse_selection(const std::string& name) {
  if (name == "all") return all_blocks();
  if (name == "ppb") return {Block::PpbSemantics, Block::PpbMultiscale};
  for (Block b : all_blocks()) {
    if (to_string(b) == name) return {b};
  }
  throw_usage("unknown gradcheck block '" + name + "' (all|encoder|fab|ppb|spb|loss)");
}

BlockResult check_block(Block block, const Options& o) {
  if (!(o.step > 0.0) || !(o.tolerance > 0.0) || !(o.floor > 0.0) || o.entries_per_tensor == 0) {
    throw_usage("gradcheck options must be positive");
  }
  Rng rng(o.seed * 0x100 + static_cast<std::uint64_t>(block));
  Harness h(make_problem(block, o, rng), o.seed);
  ad::BranchTrace reference;
  h.outputs(&reference);
  h.analytic();

  BlockResult result;
  result.block = block;
  bool fault_pending = o.inject_fault;
  for (auto& named : h.tensors()) {
    auto& t = named.tensor;
    const std::size_t size = t.size();
    std::vector<double> grad(t.grad().begin(), t.grad().end());
    if (grad.empty()) grad.assign(size, 0.0);

    // Entries in random order; ones whose ±step crosses a kink are replaced by
    // the next candidate.
    std::vector<std::size_t> order(size);
    for (std::size_t i = 0; i < size; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t checked = 0;
    for (std::size_t idx : order) {
      if (checked == o.entries_per_tensor) break;
      auto values = t.mutable_data();
      const double original = values[idx];
      ad::BranchTrace plus, minus;
      values[idx] = original + o.step;
      const auto up = h.outputs(&plus);
      values[idx] = original - o.step;
      const auto down = h.outputs(&minus);
      values[idx] = original;
      if (plus.hash != reference.hash || minus.hash != reference.hash) {
        ++result.kinks_skipped;
        continue;
      }
      const double numeric = h.central_difference(up, down, o.step);
      double analytic = grad[idx];
      if (fault_pending) {
        analytic = analytic * 1.01 + 1e-3;
        fault_pending = false;
      }
      const double err =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), o.floor});
      if (err >= result.max_relative_error) {
        result.max_relative_error = err;
        result.worst = named.name + "[" + std::to_string(idx) + "]";
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
      ++checked;
    }
    result.entries += checked;
    ++result.tensors;
  }
  result.passed = result.max_relative_error <= o.tolerance;
  return result;
}

std::vector<BlockResult> run(const std::vector<Block>& blocks, const Options& options) {
  std::vector<BlockResult> out;
  for (Block b : blocks) out.push_back(check_block(b, options));
  return out;
}

std::string format_table(const std::vector<BlockResult>& results, double tolerance) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %8s %8s %6s %14s  %-6s %s\n", "block", "tensors", "entries", "kinks",
                "max_rel_err", "status", "worst");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-16s %8zu %8zu %6zu %14.3e  %-6s %s\n", to_string(r.block).c_str(), r.tensors,
                  r.entries, r.kinks_skipped, r.max_relative_error, r.passed ? "PASS" : "FAIL", r.worst.c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "tolerance %.1e\n", tolerance);
  out << line;
  return out.str();
}

}  // namespace pcsod::gradcheck
