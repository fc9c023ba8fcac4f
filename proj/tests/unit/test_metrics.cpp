#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "metric_oracles.hpp"
#include "metrics/metrics.hpp"
#include "support.hpp"

using namespace pcsod;
using namespace pcsod::metrics;

namespace {

using Probs = std::vector<double>;
using Labels = std::vector<std::uint8_t>;

struct Instance {
  Probs p;
  Labels g;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance x;
  x.p.resize(n);
  x.g.resize(n);
  const double rate = u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    // Grid-aligned values exercise the inclusive threshold comparison.
    x.p[i] = rng() % 4 == 0 ? double(rng() % 256) / 255.0 : u(rng);
    x.g[i] = u(rng) < rate ? 1 : 0;
  }
  return x;
}

Probs from_binary(const std::vector<int>& b) { return Probs(b.begin(), b.end()); }

}  // namespace

TEST_CASE("threshold grid") {
  CHECK(grid_threshold(0) == 0.0);
  CHECK(grid_threshold(255) == 1.0);
  CHECK(grid_threshold(51) == 51.0 / 255.0);
}

TEST_CASE("MAE") {
  CHECK(mae(Probs{0, 1, 1}, Labels{0, 1, 1}) == 0.0);
  CHECK(mae(Probs(4, 0.5), Labels{0, 1, 1, 0}) == 0.5);
  CHECK(std::abs(mae(Probs{0.2, 0.9, 0.4}, Labels{0, 1, 1}) - 0.3) < 1e-12);
  ErrorKind kind{};
  CHECK(test::error_message([] { mae(Probs{0.1}, Labels{0, 1}); }, &kind).find("predictions for") != std::string::npos);
  CHECK(kind == ErrorKind::Data);
  CHECK(!test::error_message([] { mae(Probs{1.5}, Labels{1}); }).empty());
  CHECK(!test::error_message([] { mae(Probs{0.5}, Labels{2}); }).empty());
  CHECK(!test::error_message([] { mae(Probs{}, Labels{}); }).empty());
}

TEST_CASE("F-measure") {
  const Labels g = {1, 1, 0, 0, 1};
  CHECK(*f_measure_at(Probs{1, 1, 0, 0, 1}, g, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  // TP=4, FP=1, FN=4.
  Confusion c{4, 1, 4, 0};
  CHECK(std::abs(*f_measure(c) - 1.3 * 0.4 / 0.74) < 1e-12);
  CHECK(std::abs(*f_measure(c) - 0.7027) < 1e-4);
  CHECK(*f_measure_at(Probs(5, 0.0), g, 0.5) == 0.0);
  CHECK(!f_measure_at(Probs{0.2, 0.9}, Labels{0, 0}, 0.5).has_value());
  // Inclusive binarization: t = 0 marks everything positive.
  CHECK(confusion_at(Probs{0.0, 0.0}, Labels{1, 0}, 0.0).tp == 1);
  CHECK(confusion_at(Probs{0.5}, Labels{1}, 0.5).tp == 1);
  ErrorKind kind{};
  test::error_message([&] { f_measure_at(Probs{0.5}, Labels{1}, 1.5); }, &kind);
  CHECK(kind == ErrorKind::Usage);
}

TEST_CASE("E-measure") {
  std::mt19937_64 rng(11);
  const Labels g = {1, 0, 1, 1, 0, 0, 0, 1};
  std::vector<int> same(g.begin(), g.end()), flipped(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) flipped[i] = 1 - g[i];
  CHECK(std::abs(e_measure_at(from_binary(same), g, 0.5) - 1.0) < 1e-6);
  CHECK(std::abs(e_measure_at(from_binary(flipped), g, 0.5)) < 1e-6);
  CHECK(e_measure_at(Probs(3, 1.0), Labels{1, 1, 1}, 0.5) == 1.0);
  CHECK(e_measure_at(Probs(3, 0.0), Labels{1, 1, 1}, 0.5) == 0.0);

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> b(50);
    Labels gl(50);
    for (std::size_t i = 0; i < 50; ++i) {
      b[i] = rng() % 2;
      gl[i] = rng() % 2;
    }
    const double mine = e_measure_at(from_binary(b), gl, 0.5);
    CHECK(std::abs(mine - oracle::e_measure(b, gl)) < 1e-9);
    // Symmetric in exchanging the binarized prediction and the ground truth.
    const Probs swapped_p(gl.begin(), gl.end());
    const Labels swapped_g(b.begin(), b.end());
    CHECK(std::abs(mine - e_measure_at(swapped_p, swapped_g, 0.5)) < 1e-12);
  }
}

TEST_CASE("IoU") {
  CHECK(iou(Probs{1, 0, 1}, Labels{1, 0, 1}) == 1.0);
  CHECK(iou(Probs{1, 0, 0}, Labels{0, 1, 0}) == 0.0);
  CHECK(iou(Probs{0, 0}, Labels{0, 0}) == 1.0);
  // B = {1,2,3}, G = {2,3,4} over points 0..4.
  CHECK(iou(Probs{0, 1, 1, 1, 0}, Labels{0, 0, 1, 1, 1}) == 0.5);
}

TEST_CASE("metrics match brute-force oracles on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_instance(rng, 200 + rng() % 801);
    const double t = trial % 3 == 0 ? grid_threshold(rng() % 256) : std::uniform_real_distribution<double>(0, 1)(rng);
    const auto b = oracle::binarize(x.p, t);
    const auto oc = oracle::counts(b, x.g);
    const auto c = confusion_at(x.p, x.g, t);
    REQUIRE(c.tp == oc.tp);
    REQUIRE(c.fp == oc.fp);
    REQUIRE(c.fn == oc.fn);
    REQUIRE(c.tn == oc.tn);
    CHECK(std::abs(mae(x.p, x.g) - oracle::mae(x.p, x.g)) < 1e-9);
    CHECK(std::abs(iou(x.p, x.g, t) - oracle::iou(b, x.g)) < 1e-9);
    CHECK(std::abs(e_measure_at(x.p, x.g, t) - oracle::e_measure(b, x.g)) < 1e-9);
    const auto f = f_measure_at(x.p, x.g, t);
    const auto of = oracle::f_measure(b, x.g);
    REQUIRE(f.has_value() == of.has_value());
    if (f) CHECK(std::abs(*f - *of) < 1e-9);
  }
}

TEST_CASE("metric values stay in [0, 1] and depend only on the binarization") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_instance(rng, 300);
    const auto r = evaluate(x.p, x.g);
    for (double v : {r.mae, r.iou, r.max_e, r.mean_e}) CHECK((v >= 0.0 && v <= 1.0));
    if (r.f_defined) CHECK((r.max_f >= 0.0 && r.max_f <= 1.0));
    // A monotone remap that keeps every point on the same side of 0.5.
    Probs squashed(x.p.size());
    for (std::size_t i = 0; i < x.p.size(); ++i) squashed[i] = x.p[i] >= 0.5 ? 0.5 + 0.5 * x.p[i] * x.p[i] : 0.5 * x.p[i];
    CHECK(iou(squashed, x.g) == iou(x.p, x.g));
    CHECK(f_measure_at(squashed, x.g, 0.5) == f_measure_at(x.p, x.g, 0.5));
  }
}

TEST_CASE("evaluate and aggregate") {
  const Labels g = {1, 0, 0, 1, 1, 0};
  const Probs perfect(g.begin(), g.end());
  const auto r = evaluate(perfect, g);
  CHECK(r.f_curve.size() == kThresholds);
  CHECK(r.e_curve.size() == kThresholds);
  CHECK(r.mae == 0.0);
  CHECK(r.iou == 1.0);
  CHECK(r.max_f == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.max_e == doctest::Approx(1.0).epsilon(1e-9));

  std::mt19937_64 rng(4);
  const auto x = random_instance(rng, 400);
  auto one = evaluate(x.p, x.g);
  const auto same = aggregate({one, one, one});
  CHECK(same.view_id == "aggregate");
  CHECK(std::abs(same.mae - one.mae) < 1e-12);
  CHECK(std::abs(same.iou - one.iou) < 1e-12);
  CHECK(std::abs(same.max_f - one.max_f) < 1e-12);
  CHECK(std::abs(same.max_e - one.max_e) < 1e-12);
  CHECK(std::abs(same.mean_f - one.mean_f) < 1e-12);

  // A view without positives has undefined F and is left out of the F average.
  const auto empty_gt = evaluate(Probs{0.3, 0.7}, Labels{0, 0});
  CHECK(!empty_gt.f_defined);
  const auto mixed = aggregate({one, empty_gt});
  CHECK(mixed.f_defined);
  CHECK(std::abs(mixed.max_f - one.max_f) < 1e-12);
  CHECK(std::abs(mixed.mae - 0.5 * (one.mae + empty_gt.mae)) < 1e-12);
  CHECK(!aggregate({empty_gt}).f_defined);
  CHECK(!test::error_message([] { aggregate({}); }).empty());

  SUBCASE("report files") {
    test::TempDir dir("metrics");
    one.view_id = "v0";
    write_report_csv(dir / "r.csv", {one, one}, same);
    std::ifstream in(dir / "r.csv");
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "view_id,mae,iou,max_f,mean_f,max_e,mean_e");
    int aggregate_rows = 0;
    for (const auto& l : lines) aggregate_rows += l.rfind("aggregate,", 0) == 0;
    CHECK(aggregate_rows == 1);
    write_curve_csv(dir / "c.csv", one);
    std::ifstream curve(dir / "c.csv");
    std::size_t rows = 0;
    while (std::getline(curve, line)) ++rows;
    CHECK(rows == kThresholds + 1);
  }
}
