#include "training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "common/error.hpp"
#include "training/inference.hpp"

namespace pcsod::training {
namespace {

enum Stream : std::uint64_t { kEpochOrder = 1, kStepSampling = 2, kInit = 3, kEval = 4 };

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void RunLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw_data("cannot open for writing: " + path.string());
  out << "step,epoch,loss,seconds,mae,iou,max_f,max_e\n";
  for (const auto& s : steps) {
    out << s.step << ',' << s.epoch << ',' << number(s.loss) << ',' << number(s.seconds);
    if (s.eval) {
      out << ',' << number(s.eval->mae) << ',' << number(s.eval->iou) << ',' << number(s.eval->max_f) << ','
          << number(s.eval->max_e);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  if (!out) throw_data("write failed: " + path.string());
}

Rng derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

TrainingBatch sample_batch(const std::vector<PointView>& views, const std::vector<std::size_t>& batch,
                           std::size_t block_size, bool augment, Rng& rng) {
  TrainingBatch out;
  for (std::size_t v : batch) {
    const PointView& view = views.at(v);
    if (!view.has_labels()) throw_data("training view " + view.view_id + " has no labels");
    // Encoding is per view (centroid and bounding box of the whole view), so
    // the view is rotated and encoded before the block's rows are taken.
    const auto indices = sample_training_block(view, block_size, rng);
    const EncodedInput encoded = augment ? encode_input(augment_rotation(view, rng)) : encode_input(view);
    out.inputs.push_back(select_rows(encoded, indices));
    for (std::size_t i : indices) out.labels.push_back((*view.labels)[i]);
  }
  return out;
}

Trainer::Trainer(const RunConfig& config) : config_(config) {
  config_.validate();
  const auto seed = derived_rng(config_.train.seed, kInit, 0)();
  network_ = std::make_unique<model::Network<float>>(config_.model, seed);
  optimizer_.config.lr = config_.train.lr;
  optimizer_.config.weight_decay = config_.train.weight_decay;
}

Trainer::Trainer(const ad::Checkpoint& checkpoint) : Trainer(parse_run_config(checkpoint.config_text)) {
  if (!checkpoint.optimizer) throw_data("checkpoint has no optimizer state to resume from");
  ad::restore(checkpoint, network_->params(), &optimizer_);
}

std::size_t Trainer::steps_per_epoch(std::size_t views, std::size_t batch_size) {
  return (views + batch_size - 1) / batch_size;
}

std::uint64_t Trainer::total_steps(std::size_t views) const {
  const std::uint64_t all = steps_per_epoch(views, config_.train.batch_size) * config_.train.epochs;
  return config_.train.max_steps ? std::min<std::uint64_t>(all, config_.train.max_steps) : all;
}

StepRecord Trainer::step(const std::vector<PointView>& views) {
  if (views.empty()) throw_data("empty training split");
  const auto& tc = config_.train;
  const std::size_t per_epoch = steps_per_epoch(views.size(), tc.batch_size);
  const std::uint64_t index = optimizer_.step;  // 0-based index of this step
  const std::size_t epoch = index / per_epoch;
  const std::size_t slot = index % per_epoch;

  // Each epoch visits every view once, in an order fixed by (seed, epoch).
  std::vector<std::size_t> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  Rng order_rng = derived_rng(tc.seed, kEpochOrder, epoch);
  std::shuffle(order.begin(), order.end(), order_rng);
  const std::size_t first = slot * tc.batch_size;
  const std::vector<std::size_t> members(order.begin() + first,
                                         order.begin() + std::min(views.size(), first + tc.batch_size));

  Rng rng = derived_rng(tc.seed, kStepSampling, index);
  const TrainingBatch batch = sample_batch(views, members, tc.block_size, tc.augment, rng);

  const auto plan = model::plan_network(config_.model, model::block_positions(batch.inputs));
  ad::Tape<float> tape;
  const auto out = network_->forward(tape, plan, model::input_tensor<float>(batch.inputs), true);
  const auto loss = ad::cross_entropy(tape, out.logits, std::span<const std::uint8_t>(batch.labels));
  const double value = loss.item();
  if (!std::isfinite(value)) throw_numeric("non-finite loss at step " + std::to_string(index + 1));

  network_->params().zero_grad();
  tape.backward(loss);
  optimizer_.config.lr = tc.lr * std::pow(tc.lr_decay, static_cast<double>(epoch));
  ad::adam_step(network_->params(), optimizer_);

  StepRecord record;
  record.step = optimizer_.step;
  record.epoch = epoch + 1;
  record.loss = value;
  return record;
}

RunLog Trainer::train(const std::vector<PointView>& views, const TrainHooks& hooks) {
  if (views.empty()) throw_data("empty training split");
  for (const auto& v : views) {
    if (!v.has_labels()) throw_data("training view " + v.view_id + " has no labels");
  }
  RunLog log;
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t total = total_steps(views.size());
  const std::size_t per_epoch = steps_per_epoch(views.size(), config_.train.batch_size);
  while (optimizer_.step < total) {
    StepRecord record = step(views);
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool epoch_end = record.step % per_epoch == 0;
    if (hooks.eval_views && hooks.eval_every && epoch_end && record.epoch % hooks.eval_every == 0) {
      const auto reports = evaluate_views(*network_, *hooks.eval_views, config_.train.block_size, 1,
                                          derived_rng(config_.train.seed, kEval, record.epoch)());
      const auto agg = metrics::aggregate(reports);
      record.eval = EvalSummary{agg.mae, agg.iou, agg.max_f, agg.max_e};
    }
    if (!hooks.checkpoint.empty() && config_.train.checkpoint_every &&
        record.step % config_.train.checkpoint_every == 0) {
      ad::write_checkpoint(hooks.checkpoint, checkpoint());
    }
    if (hooks.on_step) hooks.on_step(record);
    log.steps.push_back(record);
  }
  if (!hooks.checkpoint.empty()) ad::write_checkpoint(hooks.checkpoint, checkpoint());
  return log;
}

ad::Checkpoint Trainer::checkpoint() const {
  return ad::capture(network_->params(), &optimizer_, format_run_config(config_));
}

std::vector<metrics::MetricsReport> evaluate_views(const model::Network<float>& network,
                                                   const std::vector<PointView>& views, std::size_t block_size,
                                                   std::size_t votes, std::uint64_t seed) {
  const BlockPredictor predict = network_predictor(network);
  std::vector<metrics::MetricsReport> reports;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const PointView& view = views[i];
    if (!view.has_labels()) throw_data("evaluation view " + view.view_id + " has no labels");
    Rng rng = derived_rng(seed, kEval, i);
    const auto probs = infer_full_view(view, predict, block_size, votes, rng);
    auto report = metrics::evaluate(probs, *view.labels);
    report.view_id = view.view_id;
    reports.push_back(std::move(report));
  }
  return reports;
}

std::unique_ptr<model::Network<float>> load_network(const ad::Checkpoint& checkpoint) {
  const RunConfig config = parse_run_config(checkpoint.config_text);
  auto network = std::make_unique<model::Network<float>>(config.model, 0);
  ad::restore(checkpoint, network->params(), nullptr);
  return network;
}

}  // namespace pcsod::training
