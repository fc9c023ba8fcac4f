#include "pcsod/pcsod.h"

#include <chrono>
#include <cmath>
#include <memory>
#include <new>
#include <string>

#include "autodiff/adam.hpp"
#include "autodiff/checkpoint.hpp"
#include "autodiff/ops.hpp"
#include "common/error.hpp"
#include "common/kv.hpp"
#include "data/dataset.hpp"
#include "data/ply.hpp"
#include "data/sampling.hpp"
#include "data/synth.hpp"
#include "gradcheck/gradcheck.hpp"
#include "metrics/metrics.hpp"
#include "model/network.hpp"
#include "training/config.hpp"
#include "training/inference.hpp"
#include "training/trainer.hpp"

struct pcsod_view {
  pcsod::PointView view;
};

struct pcsod_model {
  pcsod::training::RunConfig config;
  std::unique_ptr<pcsod::model::Network<float>> network;
};

struct pcsod_gradcheck_report {
  std::vector<pcsod::gradcheck::BlockResult> results;
  std::vector<std::string> names;
  std::string table;
};

namespace {

using namespace pcsod;

thread_local std::string last_error;

template <typename F>
int guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return PCSOD_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PCSOD_ERR_NUMERIC;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PCSOD_ERR_DATA;
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw_usage(message);
}

Split parse_split(const char* name) {
  require(name != nullptr, "split must be given");
  const std::string s = name;
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw_usage("unknown split '" + s + "' (train|test)");
}

void fill_metrics(const metrics::MetricsReport& r, std::size_t views, pcsod_metrics* out) {
  out->views = views;
  out->mae = r.mae;
  out->iou = r.iou;
  out->f_defined = r.f_defined ? 1 : 0;
  out->max_f = r.f_defined ? r.max_f : NAN;
  out->mean_f = r.f_defined ? r.mean_f : NAN;
  out->max_e = r.max_e;
  out->mean_e = r.mean_e;
}

}  // namespace

extern "C" {

const char* pcsod_last_error(void) { return last_error.c_str(); }

const char* pcsod_version(void) { return "1.0.0"; }

int pcsod_view_load(const char* ply_path, pcsod_view** out) {
  return guarded([&] {
    require(ply_path && out, "pcsod_view_load: null argument");
    auto v = std::make_unique<pcsod_view>();
    v->view = load_ply(ply_path);
    *out = v.release();
  });
}

int pcsod_view_create(size_t n, const double* xyz, const double* rgb, const uint8_t* labels, pcsod_view** out) {
  return guarded([&] {
    require(xyz && rgb && out, "pcsod_view_create: null argument");
    auto v = std::make_unique<pcsod_view>();
    v->view.positions.resize(n);
    v->view.colors.resize(n);
    for (size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        v->view.positions[i][c] = xyz[3 * i + c];
        v->view.colors[i][c] = rgb[3 * i + c];
      }
    }
    if (labels) v->view.labels.emplace(labels, labels + n);
    v->view.validate();
    *out = v.release();
  });
}

size_t pcsod_view_size(const pcsod_view* view) { return view ? view->view.size() : 0; }

int pcsod_view_has_labels(const pcsod_view* view) { return view && view->view.has_labels() ? 1 : 0; }

int pcsod_view_labels(const pcsod_view* view, uint8_t* out, size_t n) {
  return guarded([&] {
    require(view && out, "pcsod_view_labels: null argument");
    if (!view->view.labels) throw_data("view has no labels");
    require(n == view->view.size(), "pcsod_view_labels: buffer size does not match the view");
    std::copy(view->view.labels->begin(), view->view.labels->end(), out);
  });
}

int pcsod_view_positions(const pcsod_view* view, double* xyz_out, size_t n) {
  return guarded([&] {
    require(view && xyz_out, "pcsod_view_positions: null argument");
    require(n == view->view.size(), "pcsod_view_positions: buffer size does not match the view");
    for (size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) xyz_out[3 * i + c] = view->view.positions[i][c];
    }
  });
}

int pcsod_view_save(const pcsod_view* view, const char* ply_path, const double* probabilities, size_t n) {
  return guarded([&] {
    require(view && ply_path, "pcsod_view_save: null argument");
    if (!probabilities) {
      save_ply(view->view, ply_path, PlyFormat::BinaryLittleEndian);
      return;
    }
    require(n == view->view.size(), "pcsod_view_save: probability count does not match the view");
    PointView out = view->view;
    out.labels.emplace(n);
    for (size_t i = 0; i < n; ++i) (*out.labels)[i] = probabilities[i] >= 0.5 ? 1 : 0;
    save_ply(out, ply_path, PlyFormat::BinaryLittleEndian, std::span<const double>(probabilities, n));
  });
}

void pcsod_view_free(pcsod_view* view) { delete view; }

int pcsod_model_load(const char* checkpoint_path, pcsod_model** out) {
  return guarded([&] {
    require(checkpoint_path && out, "pcsod_model_load: null argument");
    const auto ckpt = ad::read_checkpoint(checkpoint_path);
    auto m = std::make_unique<pcsod_model>();
    m->config = training::parse_run_config(ckpt.config_text);
    m->network = training::load_network(ckpt);
    *out = m.release();
  });
}

int pcsod_model_predict(const pcsod_model* model, const pcsod_view* view, size_t votes, uint64_t seed,
                        double* probabilities, size_t n) {
  return guarded([&] {
    require(model && view && probabilities, "pcsod_model_predict: null argument");
    require(n == view->view.size(), "pcsod_model_predict: output size does not match the view");
    Rng rng(seed);
    const auto p = training::infer_full_view(view->view, training::network_predictor(*model->network),
                                             model->config.train.block_size, votes, rng);
    for (double v : p) {
      if (!std::isfinite(v)) throw_numeric("prediction is not finite");
    }
    std::copy(p.begin(), p.end(), probabilities);
  });
}

size_t pcsod_model_parameter_count(const pcsod_model* model) {
  return model ? model->network->params().scalar_count() : 0;
}

void pcsod_model_free(pcsod_model* model) { delete model; }

int pcsod_synthesize(const char* root, size_t views, uint64_t seed, double split_ratio, size_t points,
                     size_t* train_views, size_t* test_views) {
  return guarded([&] {
    require(root != nullptr, "pcsod_synthesize: null root");
    SynthOptions o;
    o.views = views;
    o.seed = seed;
    o.split_ratio = split_ratio;
    if (points) o.points = points;
    const auto summary = synthesize_dataset(root, o);
    if (train_views) *train_views = summary.train;
    if (test_views) *test_views = summary.test;
  });
}

void pcsod_train_options_init(pcsod_train_options* options) {
  if (options) *options = pcsod_train_options{};
}

int pcsod_train(const pcsod_train_options* options) {
  return guarded([&] {
    require(options && options->data_dir && options->checkpoint_out, "pcsod_train: data_dir and checkpoint_out are required");
    require(options->config_path || options->resume_from, "pcsod_train: a config or a checkpoint to resume is required");
    std::unique_ptr<training::Trainer> trainer;
    if (options->resume_from) {
      auto ckpt = ad::read_checkpoint(options->resume_from);
      if (options->config_path) {
        // The new run file may extend the schedule but must describe the same model.
        auto config = training::parse_run_config(read_text_file(options->config_path));
        if (options->has_seed) config.train.seed = options->seed;
        ckpt.config_text = training::format_run_config(config);
      }
      trainer = std::make_unique<training::Trainer>(ckpt);
    } else {
      auto config = training::parse_run_config(read_text_file(options->config_path));
      if (options->has_seed) config.train.seed = options->seed;
      trainer = std::make_unique<training::Trainer>(config);
    }
    const auto train = load_dataset(options->data_dir, Split::Train);
    std::vector<PointView> test;
    training::TrainHooks hooks;
    hooks.checkpoint = options->checkpoint_out;
    if (options->eval_every) {
      test = load_dataset(options->data_dir, Split::Test);
      hooks.eval_views = &test;
      hooks.eval_every = options->eval_every;
    }
    if (options->on_step) {
      hooks.on_step = [options](const training::StepRecord& r) {
        pcsod_step_info info{};
        info.step = r.step;
        info.epoch = r.epoch;
        info.loss = r.loss;
        info.seconds = r.seconds;
        if (r.eval) {
          info.has_eval = 1;
          info.mae = r.eval->mae;
          info.iou = r.eval->iou;
          info.max_f = r.eval->max_f;
          info.max_e = r.eval->max_e;
        }
        options->on_step(&info, options->user);
      };
    }
    const auto log = trainer->train(train, hooks);
    if (options->log_csv) log.write_csv(options->log_csv);
  });
}

int pcsod_metrics_compute(const double* probabilities, const uint8_t* labels, size_t n, pcsod_metrics* out) {
  return guarded([&] {
    require(probabilities && labels && out, "pcsod_metrics_compute: null argument");
    const auto r = metrics::evaluate(std::span<const double>(probabilities, n), std::span<const uint8_t>(labels, n));
    fill_metrics(r, 1, out);
  });
}

int pcsod_evaluate(const char* data_dir, const char* split, const char* checkpoint_path, size_t votes, uint64_t seed,
                   const char* report_csv, const char* curve_csv, pcsod_metrics* out) {
  return guarded([&] {
    require(data_dir && checkpoint_path, "pcsod_evaluate: data_dir and checkpoint are required");
    const Split which = parse_split(split);
    const auto ckpt = ad::read_checkpoint(checkpoint_path);
    const auto config = training::parse_run_config(ckpt.config_text);
    const auto network = training::load_network(ckpt);
    const auto views = load_dataset(data_dir, which);
    const auto reports = training::evaluate_views(*network, views, config.train.block_size, votes, seed);
    const auto total = metrics::aggregate(reports);
    if (report_csv) metrics::write_report_csv(report_csv, reports, total);
    if (curve_csv) metrics::write_curve_csv(curve_csv, total);
    if (out) fill_metrics(total, reports.size(), out);
  });
}

void pcsod_gradcheck_options_init(pcsod_gradcheck_options* options) {
  if (!options) return;
  const gradcheck::Options defaults;
  *options = pcsod_gradcheck_options{};
  options->blocks = "all";
  options->reduction = "mean_max";
  options->batch_norm = defaults.batch_norm ? 1 : 0;
  options->seed = defaults.seed;
  options->step = defaults.step;
  options->tolerance = defaults.tolerance;
}

int pcsod_gradcheck(const pcsod_gradcheck_options* options, pcsod_gradcheck_report** out) {
  return guarded([&] {
    require(options && out, "pcsod_gradcheck: null argument");
    gradcheck::Options o;
    o.reduction = ad::parse_reduction(options->reduction ? options->reduction : "mean_max");
    o.batch_norm = options->batch_norm != 0;
    o.seed = options->seed;
    o.step = options->step;
    o.tolerance = options->tolerance;
    o.inject_fault = options->inject_fault != 0;
    const auto blocks = gradcheck::parse_selection(options->blocks ? options->blocks : "all");
    auto report = std::make_unique<pcsod_gradcheck_report>();
    report->results = gradcheck::run(blocks, o);
    for (const auto& r : report->results) report->names.push_back(gradcheck::to_string(r.block));
    report->table = gradcheck::format_table(report->results, o.tolerance);
    *out = report.release();
  });
}

size_t pcsod_gradcheck_rows(const pcsod_gradcheck_report* report) { return report ? report->results.size() : 0; }

int pcsod_gradcheck_row_at(const pcsod_gradcheck_report* report, size_t i, pcsod_gradcheck_row* out) {
  return guarded([&] {
    require(report && out, "pcsod_gradcheck_row_at: null argument");
    require(i < report->results.size(), "pcsod_gradcheck_row_at: index out of range");
    const auto& r = report->results[i];
    out->block = report->names[i].c_str();
    out->entries = r.entries;
    out->max_relative_error = r.max_relative_error;
    out->passed = r.passed ? 1 : 0;
  });
}

int pcsod_gradcheck_passed(const pcsod_gradcheck_report* report) {
  if (!report || report->results.empty()) return 0;
  for (const auto& r : report->results) {
    if (!r.passed) return 0;
  }
  return 1;
}

const char* pcsod_gradcheck_table(const pcsod_gradcheck_report* report) { return report ? report->table.c_str() : ""; }

void pcsod_gradcheck_free(pcsod_gradcheck_report* report) { delete report; }

int pcsod_bench(const char* config_path, size_t batch, size_t block_size, size_t iterations, uint64_t seed,
                pcsod_bench_result* out) {
  return guarded([&] {
    require(out != nullptr, "pcsod_bench: null result");
    require(batch > 0 && iterations > 0, "pcsod_bench: batch and iterations must be positive");
    training::RunConfig config;
    if (config_path) config = training::parse_run_config(read_text_file(config_path));
    config.model.validate_block(block_size);
    model::Network<float> network(config.model, seed);
    ad::AdamState<float> optimizer;
    optimizer.config.lr = config.train.lr;
    optimizer.config.weight_decay = config.train.weight_decay;

    std::vector<PointView> views;
    for (size_t b = 0; b < batch; ++b) views.push_back(generate_scene(random_recipe(seed + b), block_size));
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    double plan_s = 0, forward_s = 0, backward_s = 0;
    for (size_t it = 0; it < iterations; ++it) {
      Rng rng(seed * 1000 + it);
      std::vector<size_t> members(batch);
      for (size_t b = 0; b < batch; ++b) members[b] = b;
      const auto data = training::sample_batch(views, members, block_size, true, rng);
      const auto t0 = clock::now();
      const auto plan = model::plan_network(config.model, model::block_positions(data.inputs));
      const auto t1 = clock::now();
      ad::Tape<float> tape;
      const auto fwd = network.forward(tape, plan, model::input_tensor<float>(data.inputs), true);
      const auto loss = ad::cross_entropy(tape, fwd.logits, std::span<const uint8_t>(data.labels));
      const auto t2 = clock::now();
      network.params().zero_grad();
      tape.backward(loss);
      ad::adam_step(network.params(), optimizer);
      const auto t3 = clock::now();
      plan_s += seconds(t0, t1);
      forward_s += seconds(t1, t2);
      backward_s += seconds(t2, t3);
    }
    const double n = static_cast<double>(iterations);
    out->parameters = network.params().scalar_count();
    out->plan_seconds = plan_s / n;
    out->forward_seconds = forward_s / n;
    out->backward_seconds = backward_s / n;
  });
}

}  // extern "C"
