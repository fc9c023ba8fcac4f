#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "autodiff/ops.hpp"
#include "data/sampling.hpp"
#include "data/synth.hpp"
#include "model/config.hpp"
#include "model/network.hpp"
#include "model/plan.hpp"
#include "support.hpp"
#include "training/inference.hpp"

using namespace pcsod;
using namespace pcsod::model;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.k_enc = 8;
  c.level_dims = {16, 24, 32, 48};
  c.fab_channels = 24;
  c.ppb_semantics.k = {1, 2, 3, 4};
  c.spb_channels = 24;
  c.head_hidden = 16;
  return c;
}

struct Batch {
  std::vector<EncodedInput> inputs;
  NetworkPlan plan;
};

Batch make_batch(const ModelConfig& config, const std::vector<PointView>& views) {
  Batch b;
  for (const auto& v : views) b.inputs.push_back(encode_input(v));
  b.plan = plan_network(config, block_positions(b.inputs));
  return b;
}

PointView scene(std::uint64_t seed, std::size_t points) { return generate_scene(random_recipe(seed), points); }

}  // namespace

TEST_CASE("model config text round trip and errors") {
  const ModelConfig c = small_config();
  const std::string text = format_model_config(c);
  const ModelConfig back = parse_model_config(text);
  CHECK(format_model_config(back) == text);
  CHECK(back.level_dims == c.level_dims);
  CHECK(back.ppb_multiscale.k == c.ppb_multiscale.k);

  std::string missing = text;
  const auto at = missing.find("fab_channels");
  missing.erase(at, missing.find('\n', at) - at + 1);
  CHECK(test::error_message([&] { parse_model_config(missing); }).find("fab_channels") != std::string::npos);
  CHECK(test::error_message([&] { parse_model_config(text + "fab_chanels=3\n"); }).find("fab_chanels") !=
        std::string::npos);
  CHECK(!test::error_message([&] {
           auto bad = c;
           bad.ppb_semantics.k = {1, 4, 4, 16};
           bad.validate();
         }).empty());
}

TEST_CASE("level sizes and block divisibility") {
  CHECK(level_points(4096, 1) == 1024);
  CHECK(level_points(4096, 2) == 256);
  CHECK(level_points(4096, 3) == 64);
  CHECK(level_points(4096, 4) == 16);
  CHECK(level_points(256, 4) == 1);
  ModelConfig c;
  CHECK(test::error_message([&] { c.validate_block(4000); }).find("not divisible by 256") != std::string::npos);
  CHECK(!test::error_message([&] { c.validate_block(256); }).empty());  // K = 16 needs 16 points at level 4
  c.validate_block(4096);
}

TEST_CASE("forward shapes at the default configuration") {
  const ModelConfig config;
  Network<float> net(config, 1);
  const auto batch = make_batch(config, {scene(3, 4096)});
  ad::Tape<float> tape;
  const auto out = net.forward(tape, batch.plan, input_tensor<float>(batch.inputs), false);
  const std::array<std::size_t, 4> points{1024, 256, 64, 16};
  const std::array<std::size_t, 4> dims{64, 128, 256, 512};
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(out.levels[l].rows() == points[l]);
    CHECK(out.levels[l].cols() == dims[l]);
  }
  CHECK(out.compact.rows() == 1024);
  CHECK(out.compact.cols() == 128);
  CHECK(out.semantics.rows() == 16);
  CHECK(out.semantics.cols() == 512);
  CHECK(out.multiscale.rows() == 1024);
  CHECK(out.multiscale.cols() == 128);
  CHECK(out.logits.rows() == 4096);
  CHECK(out.logits.cols() == 2);

  const auto p = salient_probability(out.logits);
  REQUIRE(p.size() == 4096);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK((p[i] >= 0.0 && p[i] <= 1.0));
    const double a = out.logits.data()[2 * i], b = out.logits.data()[2 * i + 1];
    const double m = std::max(a, b);
    const double p0 = std::exp(a - m) / (std::exp(a - m) + std::exp(b - m));
    CHECK(std::abs(p0 + p[i] - 1.0) < 1e-9);
  }
  const auto& gate = out.spb.multiscale;
  for (std::size_t r = 0; r < gate.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < gate.cols(); ++c) s += gate.data()[r * gate.cols() + c];
    CHECK(std::abs(s - 1.0) < 1e-5);
  }
}

TEST_CASE("relation vectors") {
  const auto r = relation_vector({0, 0, 0}, {1, 0, 0});
  CHECK(std::vector<double>(r.begin(), r.end()) == std::vector<double>{0, 0, 0, 1, 0, 0, -1, 0, 0, 1});
  const auto self = relation_vector({0.3, -2, 5}, {0.3, -2, 5});
  for (int c = 6; c < 10; ++c) CHECK(self[c] == 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)}, shift{u(rng), u(rng), u(rng)};
    const auto r0 = relation_vector(a, b);
    const auto r1 = relation_vector({a[0] + shift[0], a[1] + shift[1], a[2] + shift[2]},
                                    {b[0] + shift[0], b[1] + shift[1], b[2] + shift[2]});
    for (int c = 6; c < 10; ++c) CHECK(std::abs(r0[c] - r1[c]) < 1e-9);
  }
}

TEST_CASE("point perception grouping and width") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<Vec3>> pos(2, std::vector<Vec3>(64));
  for (auto& s : pos) {
    for (auto& p : s) p = {u(rng), u(rng), u(rng)};
  }
  PpbConfig cfg{{1, 9, 25, 49}};
  const auto plan = plan_ppb(pos, cfg);
  CHECK(plan.rows == 128);
  // With k = 1 each point's only neighbor is itself.
  const auto& first = plan.branches[0];
  REQUIRE(first.k == 1);
  for (std::size_t r = 0; r < plan.rows; ++r) {
    const double* rel = &first.relation[r * kRelationWidth];
    for (int c = 0; c < 3; ++c) CHECK(rel[c] == rel[3 + c]);
    CHECK(rel[9] == 0.0);
  }
  CHECK(!test::error_message([&] { plan_ppb(pos, PpbConfig{{1, 9, 25, 81}}); }).empty());

  const auto features = ad::Tensor<float>::constant({128, 20}, std::vector<float>(128 * 20, 0.5f));
  for (const auto& k : {std::array<std::size_t, 4>{1, 2, 3, 4}, std::array<std::size_t, 4>{1, 9, 25, 49}}) {
    for (auto mode : {Reduction::Mean, Reduction::Max, Reduction::MeanMax, Reduction::Attentive}) {
      ad::ParamStore<float> store;
      PointPerception<float> ppb(store, "ppb", 20, PpbConfig{k}, mode, true, rng);
      ad::Tape<float> tape;
      const auto out = ppb.forward(tape, plan_ppb(pos, PpbConfig{k}), features, true);
      CHECK(out.rows() == 128);
      CHECK(out.cols() == 20);
    }
  }
}

TEST_CASE("aggregation uses the coarse levels") {
  const ModelConfig config = small_config();
  Network<float> net(config, 4);
  const auto batch = make_batch(config, {scene(1, 1024)});
  ad::Tape<float> tape;
  const auto out = net.forward(tape, batch.plan, input_tensor<float>(batch.inputs), false);
  auto levels = out.levels;
  for (std::size_t l = 1; l < 4; ++l) levels[l] = ad::Tensor<float>::zeros(levels[l].shape());
  const auto probe = net.aggregation().forward(tape, batch.plan.fab, levels, false);
  const auto again = net.aggregation().forward(tape, batch.plan.fab, out.levels, false);
  REQUIRE(probe.size() == out.compact.size());
  double diff = 0.0, same = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    diff = std::max(diff, double(std::abs(probe.data()[i] - out.compact.data()[i])));
    same = std::max(same, double(std::abs(again.data()[i] - out.compact.data()[i])));
  }
  CHECK(same == 0.0);
  CHECK(diff > 1e-3);
}

TEST_CASE("every parameter receives gradient") {
  const ModelConfig config = small_config();
  for (auto mode : {Reduction::MeanMax, Reduction::Attentive}) {
    ModelConfig c = config;
    c.reduction = mode;
    Network<float> net(c, 9);
    const auto batch = make_batch(c, {scene(5, 1024), scene(6, 1024)});
    std::mt19937_64 rng(1);
    std::vector<std::uint8_t> labels(2048);
    for (auto& l : labels) l = rng() % 2;
    ad::Tape<float> tape;
    const auto out = net.forward(tape, batch.plan, input_tensor<float>(batch.inputs), true);
    tape.backward(ad::cross_entropy(tape, out.logits, labels));
    for (const auto& p : net.params().parameters()) {
      INFO(p.name);
      REQUIRE(p.tensor.has_grad());
      CHECK(std::any_of(p.tensor.grad().begin(), p.tensor.grad().end(), [](float g) { return g != 0.0f; }));
    }
  }
}

TEST_CASE("forward is equivariant to point order") {
  const ModelConfig config = small_config();
  Network<float> net(config, 2);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    const PointView view = scene(100 + trial, 1024);
    std::vector<std::size_t> perm(view.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const PointView shuffled = training::subset(view, perm);
    for (bool training : {false, true}) {
      const auto a = make_batch(config, {view});
      const auto b = make_batch(config, {shuffled});
      ad::Tape<float> tape;
      const auto pa = salient_probability(net.forward(tape, a.plan, input_tensor<float>(a.inputs), training).logits);
      const auto pb = salient_probability(net.forward(tape, b.plan, input_tensor<float>(b.inputs), training).logits);
      double worst = 0.0;
      for (std::size_t i = 0; i < perm.size(); ++i) worst = std::max(worst, std::abs(pb[i] - pa[perm[i]]));
      CHECK(worst <= 1e-5);
    }
  }
}
