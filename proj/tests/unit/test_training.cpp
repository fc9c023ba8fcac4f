#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "autodiff/checkpoint.hpp"
#include "autodiff/ops.hpp"
#include "data/sampling.hpp"
#include "data/synth.hpp"
#include "support.hpp"
#include "training/config.hpp"
#include "training/inference.hpp"
#include "training/trainer.hpp"

using namespace pcsod;
using namespace pcsod::training;

namespace {

RunConfig small_run() {
  RunConfig c;
  c.model.k_enc = 8;
  c.model.level_dims = {16, 24, 32, 48};
  c.model.fab_channels = 24;
  c.model.ppb_semantics.k = {1, 2, 3, 4};
  c.model.spb_channels = 24;
  c.model.head_hidden = 16;
  c.train.batch_size = 2;
  c.train.block_size = 1024;
  c.train.epochs = 2;
  c.train.seed = 17;
  c.train.lr = 2e-3;
  return c;
}

std::vector<PointView> small_views(std::size_t count, std::size_t points = 2048) {
  std::vector<PointView> views;
  for (std::size_t i = 0; i < count; ++i) {
    views.push_back(generate_scene(random_recipe(40 + i), points));
    views.back().view_id = "v" + std::to_string(i);
  }
  return views;
}

std::vector<float> flat_params(const model::Network<float>& net) {
  std::vector<float> out;
  for (const auto& p : net.params().parameters()) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

std::vector<float> flat_buffers(const model::Network<float>& net) {
  std::vector<float> out;
  for (const auto& b : net.params().norm_buffers()) {
    out.insert(out.end(), b.buffers->running_mean.begin(), b.buffers->running_mean.end());
    out.insert(out.end(), b.buffers->running_var.begin(), b.buffers->running_var.end());
  }
  return out;
}

}  // namespace

TEST_CASE("run config text round trip and key checks") {
  const RunConfig c = small_run();
  const std::string text = format_run_config(c);
  CHECK(format_run_config(parse_run_config(text)) == text);
  for (const std::string key : {"lr", "votes", "k_enc"}) {
    std::string missing = text;
    const auto at = missing.find(key + "=");
    REQUIRE(at != std::string::npos);
    missing.erase(at, missing.find('\n', at) - at + 1);
    ErrorKind kind{};
    CHECK(test::error_message([&] { parse_run_config(missing); }, &kind).find("'" + key + "'") != std::string::npos);
    CHECK(kind == ErrorKind::Usage);
  }
  CHECK(test::error_message([&] { parse_run_config(text + "learning_rate=1\n"); }).find("learning_rate") !=
        std::string::npos);
  RunConfig bad = c;
  bad.train.block_size = 1000;
  CHECK(!test::error_message([&] { bad.validate(); }).empty());
  bad = c;
  bad.train.lr = -1;
  CHECK(!test::error_message([&] { bad.validate(); }).empty());
}

TEST_CASE("schedule arithmetic") {
  CHECK(Trainer::steps_per_epoch(84, 32) == 3);
  CHECK(Trainer::steps_per_epoch(10, 2) == 5);
  CHECK(Trainer::steps_per_epoch(1, 32) == 1);
  RunConfig c = small_run();
  c.train.epochs = 3;
  Trainer t(c);
  CHECK(t.total_steps(5) == 9);
  c.train.max_steps = 4;
  CHECK(Trainer(c).total_steps(5) == 4);
}

TEST_CASE("training batches carry the sampled labels") {
  const auto views = small_views(2, 3000);
  Rng rng(3);
  const auto batch = sample_batch(views, {1, 0}, 1024, true, rng);
  REQUIRE(batch.inputs.size() == 2);
  CHECK(batch.labels.size() == 2048);
  for (const auto& in : batch.inputs) CHECK(in.rows == 1024);
  PointView unlabeled = views[0];
  unlabeled.labels.reset();
  CHECK(!test::error_message([&] { sample_batch({unlabeled}, {0}, 1024, false, rng); }).empty());
}

TEST_CASE("training is deterministic under a seed") {
  const auto views = small_views(3);
  RunConfig c = small_run();
  c.train.max_steps = 4;
  Trainer a(c), b(c);
  const auto la = a.train(views), lb = b.train(views);
  REQUIRE(la.steps.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(la.steps[i].step == i + 1);
    CHECK(la.steps[i].loss == lb.steps[i].loss);
  }
  CHECK(flat_params(a.network()) == flat_params(b.network()));
  c.train.seed = 18;
  Trainer other(c);
  CHECK(other.train(views).steps[0].loss != la.steps[0].loss);
}

TEST_CASE("zero learning rate leaves parameters alone") {
  const auto views = small_views(2);
  RunConfig c = small_run();
  c.train.lr = 0.0;
  c.train.max_steps = 2;
  Trainer t(c);
  const auto before = flat_params(t.network());
  const auto stats = flat_buffers(t.network());
  t.train(views);
  CHECK(flat_params(t.network()) == before);
  CHECK(flat_buffers(t.network()) != stats);
}

TEST_CASE("resumed training matches an uninterrupted run") {
  test::TempDir dir("resume");
  const auto views = small_views(3);
  RunConfig c = small_run();
  c.train.epochs = 3;  // 6 steps
  Trainer straight(c);
  const auto full = straight.train(views);
  REQUIRE(full.steps.size() == 6);

  RunConfig first_half = c;
  first_half.train.max_steps = 3;
  Trainer part(first_half);
  TrainHooks hooks;
  hooks.checkpoint = dir / "mid.ckpt";
  const auto head = part.train(views, hooks);
  REQUIRE(head.steps.size() == 3);

  auto ckpt = ad::read_checkpoint(dir / "mid.ckpt");
  // The checkpoint carries the capped schedule; resume under the full one.
  ckpt.config_text = format_run_config(c);
  Trainer resumed(ckpt);
  CHECK(resumed.steps_done() == 3);
  const auto tail = resumed.train(views);
  REQUIRE(tail.steps.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(head.steps[i].loss == full.steps[i].loss);
    CHECK(tail.steps[i].step == i + 4);
    CHECK(std::abs(tail.steps[i].loss - full.steps[i + 3].loss) <= 1e-6);
  }

  ad::Checkpoint no_optimizer = ckpt;
  no_optimizer.optimizer.reset();
  CHECK(!test::error_message([&] { Trainer t(no_optimizer); }).empty());
}

TEST_CASE("checkpointed network reproduces its forward pass exactly") {
  test::TempDir dir("ckpt");
  const auto views = small_views(2);
  RunConfig c = small_run();
  c.train.max_steps = 2;
  Trainer t(c);
  TrainHooks hooks;
  hooks.checkpoint = dir / "net.ckpt";
  t.train(views, hooks);
  const auto loaded = load_network(ad::read_checkpoint(dir / "net.ckpt"));
  const auto a = network_predictor(t.network());
  const auto b = network_predictor(*loaded);
  Rng rng(1);
  const auto block = select_rows(encode_input(views[0]), sample_training_block(views[0], 1024, rng));
  CHECK(a({block}) == b({block}));
}

TEST_CASE("run log csv") {
  test::TempDir dir("log");
  RunLog log;
  log.steps.push_back({1, 1, 0.5, 0.25, std::nullopt});
  log.steps.push_back({2, 1, 0.25, 0.5, EvalSummary{0.1, 0.8, 0.9, 0.95}});
  log.write_csv(dir / "log.csv");
  std::ifstream in(dir / "log.csv");
  std::string header, one, two;
  std::getline(in, header);
  std::getline(in, one);
  std::getline(in, two);
  CHECK(header == "step,epoch,loss,seconds,mae,iou,max_f,max_e");
  CHECK(one == "1,1,0.5,0.25,,,,");
  CHECK(two == "2,1,0.25,0.5,0.1,0.8,0.9,0.95");
}

TEST_CASE("loss on a fixed batch decreases at the default rate") {
  RunConfig c = small_run();
  c.train.lr = TrainConfig{}.lr;
  model::Network<float> net(c.model, 5);
  const auto views = small_views(2);
  Rng rng(9);
  const auto batch = sample_batch(views, {0, 1}, 1024, false, rng);
  const auto plan = model::plan_network(c.model, model::block_positions(batch.inputs));
  const auto input = model::input_tensor<float>(batch.inputs);
  ad::AdamState<float> opt;
  opt.config.lr = c.train.lr;
  opt.config.weight_decay = c.train.weight_decay;
  std::vector<double> losses;
  for (int step = 0; step < 11; ++step) {
    ad::Tape<float> tape;
    const auto loss = ad::cross_entropy(tape, net.forward(tape, plan, input, true).logits,
                                        std::span<const std::uint8_t>(batch.labels));
    losses.push_back(loss.item());
    net.params().zero_grad();
    tape.backward(loss);
    ad::adam_step(net.params(), opt);
  }
  int non_decreasing = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) non_decreasing += losses[i] >= losses[i - 1];
  CHECK(non_decreasing <= 1);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("a single view is memorized") {
  RunConfig c = small_run();
  c.train.batch_size = 1;
  c.train.epochs = 500;
  c.train.augment = false;
  c.train.lr = 5e-3;
  const auto views = small_views(1, 1024);
  Trainer t(c);
  const auto log = t.train(views);
  REQUIRE(log.steps.size() == 500);
  CHECK(log.steps.back().loss < 0.05);
}

TEST_CASE("voting inference") {
  const PointView view = generate_scene(random_recipe(3), 5000);
  SUBCASE("constant model: one vote equals three") {
    const BlockPredictor constant = [](const std::vector<EncodedInput>& blocks) {
      std::size_t rows = 0;
      for (const auto& b : blocks) rows += b.rows;
      return std::vector<double>(rows, 0.3);
    };
    Rng r1(1), r3(1);
    const auto one = infer_full_view(view, constant, 1024, 1, r1);
    const auto three = infer_full_view(view, constant, 1024, 3, r3, 2);
    CHECK(one == three);
    for (double p : one) CHECK(p == 0.3);
  }
  SUBCASE("votes average per-vote results, every point covered") {
    // Output depends on the block's composition, so votes differ.
    const BlockPredictor mixing = [](const std::vector<EncodedInput>& blocks) {
      std::vector<double> out;
      for (const auto& b : blocks) {
        double mean = 0.0;
        for (std::size_t r = 0; r < b.rows; ++r) mean += b.at(r, 6);
        mean /= double(b.rows);
        for (std::size_t r = 0; r < b.rows; ++r) out.push_back(0.5 * b.at(r, 6) + 0.5 * mean);
      }
      return out;
    };
    Rng r(5), parts(5);
    InferenceStats stats;
    const auto all = infer_full_view(view, mixing, 1024, 3, r, 1, &stats);
    CHECK(stats.chunks_per_vote == 5);
    CHECK(stats.forward_passes == 15);
    std::vector<std::vector<double>> single;
    for (int v = 0; v < 3; ++v) single.push_back(infer_full_view(view, mixing, 1024, 1, parts));
    REQUIRE(all.size() == view.size());
    bool differs = false;
    for (std::size_t i = 0; i < all.size(); ++i) {
      CHECK(std::isfinite(all[i]));
      CHECK(std::abs(all[i] - (single[0][i] + single[1][i] + single[2][i]) / 3.0) < 1e-9);
      differs = differs || single[0][i] != single[1][i];
    }
    CHECK(differs);
  }
  SUBCASE("240,000 points take 59 chunks per vote") {
    const PointView big = generate_scene(random_recipe(8), 240000);
    const BlockPredictor constant = [](const std::vector<EncodedInput>& blocks) {
      return std::vector<double>(blocks.size() * 4096, 0.5);
    };
    Rng rng(2);
    InferenceStats stats;
    const auto p = infer_full_view(big, constant, 4096, 3, rng, 8, &stats);
    CHECK(p.size() == 240000);
    CHECK(stats.chunks_per_vote == 59);
    CHECK(stats.forward_passes == 177);
  }
  CHECK(!test::error_message([&] {
           Rng rng(0);
           infer_full_view(view, BlockPredictor{}, 1024, 0, rng);
         }).empty());
}
