// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "pcsod/pcsod.h"

namespace {

int fail(int status) {
  std::fprintf(stderr, "error: %s\n", pcsod_last_error());
  return status;
}

struct SynthArgs {
  std::string out;
  std::size_t views = 120;
  std::uint64_t seed = 0;
  double split_ratio = 0.7;
  std::size_t points = 0;
};

int run_synth(const SynthArgs& a) {
  std::size_t train = 0, test = 0;
  if (int s = pcsod_synthesize(a.out.c_str(), a.views, a.seed, a.split_ratio, a.points, &train, &test)) return fail(s);
  std::printf("wrote %zu train and %zu test views to %s\n", train, test, a.out.c_str());
  return 0;
}

struct TrainArgs {
  std::string data, config, out, log, resume;
  std::size_t eval_every = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool quiet = false;
  std::size_t print_every = 10;
};

void print_step(const pcsod_step_info* info, void* user) {
  const auto* a = static_cast<const TrainArgs*>(user);
  if (a->quiet) return;
  if (info->has_eval) {
    std::printf("step %llu epoch %zu loss %.4f | test mae %.4f iou %.4f maxF %.4f maxE %.4f | %.1fs\n",
                static_cast<unsigned long long>(info->step), info->epoch, info->loss, info->mae, info->iou,
                info->max_f, info->max_e, info->seconds);
  } else if (a->print_every && info->step % a->print_every == 0) {
    std::printf("step %llu epoch %zu loss %.4f | %.1fs\n", static_cast<unsigned long long>(info->step), info->epoch,
                info->loss, info->seconds);
  }
  std::fflush(stdout);
}

int run_train(const TrainArgs& a) {
  pcsod_train_options o;
  pcsod_train_options_init(&o);
  o.data_dir = a.data.c_str();
  o.config_path = a.config.empty() ? nullptr : a.config.c_str();
  o.checkpoint_out = a.out.c_str();
  o.log_csv = a.log.empty() ? nullptr : a.log.c_str();
  o.resume_from = a.resume.empty() ? nullptr : a.resume.c_str();
  o.eval_every = a.eval_every;
  o.has_seed = a.has_seed ? 1 : 0;
  o.seed = a.seed;
  o.on_step = print_step;
  o.user = const_cast<TrainArgs*>(&a);
  if (int s = pcsod_train(&o)) return fail(s);
  std::printf("checkpoint written to %s\n", a.out.c_str());
  return 0;
}

struct EvalArgs {
  std::string data, ckpt, report, curve, split = "test";
  std::size_t votes = 3;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
  pcsod_metrics m{};
  if (int s = pcsod_evaluate(a.data.c_str(), a.split.c_str(), a.ckpt.c_str(), a.votes, a.seed,
                             a.report.empty() ? nullptr : a.report.c_str(),
                             a.curve.empty() ? nullptr : a.curve.c_str(), &m)) {
    return fail(s);
  }
  std::printf("views %zu  mae %.4f  iou %.4f  maxF %.4f  meanF %.4f  maxE %.4f  meanE %.4f\n", m.views, m.mae, m.iou,
              m.max_f, m.mean_f, m.max_e, m.mean_e);
  return 0;
}

struct PredictArgs {
  std::string in, ckpt, out;
  std::size_t votes = 3;
  std::uint64_t seed = 0;
};

int run_predict(const PredictArgs& a) {
  pcsod_view* view = nullptr;
  pcsod_model* model = nullptr;
  int status = pcsod_view_load(a.in.c_str(), &view);
  if (!status) status = pcsod_model_load(a.ckpt.c_str(), &model);
  std::vector<double> p;
  if (!status) {
    p.resize(pcsod_view_size(view));
    status = pcsod_model_predict(model, view, a.votes, a.seed, p.data(), p.size());
  }
  if (!status) status = pcsod_view_save(view, a.out.c_str(), p.data(), p.size());
  if (!status) {
    std::size_t salient = 0;
    for (double v : p) salient += v >= 0.5;
    std::printf("%zu points, %zu predicted salient, written to %s\n", p.size(), salient, a.out.c_str());
  }
  pcsod_model_free(model);
  pcsod_view_free(view);
  return status ? fail(status) : 0;
}

struct GradcheckArgs {
  std::string block = "all", reduction = "mean_max";
  std::uint64_t seed = 0;
  bool no_batch_norm = false;
  bool inject_fault = false;
};

int run_gradcheck(const GradcheckArgs& a) {
  pcsod_gradcheck_options o;
  pcsod_gradcheck_options_init(&o);
  o.blocks = a.block.c_str();
  o.reduction = a.reduction.c_str();
  o.seed = a.seed;
  o.batch_norm = a.no_batch_norm ? 0 : 1;
  o.inject_fault = a.inject_fault ? 1 : 0;
  pcsod_gradcheck_report* report = nullptr;
  if (int s = pcsod_gradcheck(&o, &report)) return fail(s);
  std::fputs(pcsod_gradcheck_table(report), stdout);
  const bool ok = pcsod_gradcheck_passed(report);
  pcsod_gradcheck_free(report);
  if (!ok) {
    std::fprintf(stderr, "error: gradient check failed\n");
    return PCSOD_ERR_NUMERIC;
  }
  return 0;
}

struct BenchArgs {
  std::string config;
  std::size_t batch = 8, block = 4096, iterations = 3;
  std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& a) {
  pcsod_bench_result r{};
  if (int s = pcsod_bench(a.config.empty() ? nullptr : a.config.c_str(), a.batch, a.block, a.iterations, a.seed, &r)) {
    return fail(s);
  }
  std::printf("parameters %zu  batch %zu x %zu points\n", r.parameters, a.batch, a.block);
  std::printf("plan %.3fs  forward %.3fs  backward+step %.3fs  total %.3fs per step\n", r.plan_seconds,
              r.forward_seconds, r.backward_seconds, r.plan_seconds + r.forward_seconds + r.backward_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Salient object detection on 3D point clouds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pcsod_version());

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a labeled synthetic dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--views", synth.views, "Number of views")->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--split-ratio", synth.split_ratio, "Share of views in the train split");
  s->add_option("--points", synth.points, "Points per view (0 = default)");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--data", train.data, "Dataset root")->required();
  t->add_option("--config", train.config, "Run configuration file");
  t->add_option("--out", train.out, "Checkpoint to write")->required();
  t->add_option("--log", train.log, "Run log CSV");
  t->add_option("--resume", train.resume, "Checkpoint to resume from");
  t->add_option("--eval-every", train.eval_every, "Evaluate on the test split every N epochs");
  auto* seed_opt = t->add_option("--seed", train.seed, "Override the configured seed");
  t->add_option("--print-every", train.print_every, "Print every N steps");
  t->add_flag("--quiet", train.quiet, "No progress output");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  e->add_option("--data", eval.data, "Dataset root")->required();
  e->add_option("--ckpt", eval.ckpt, "Checkpoint")->required();
  e->add_option("--report", eval.report, "Per-view report CSV");
  e->add_option("--curve", eval.curve, "Threshold curve CSV");
  e->add_option("--split", eval.split, "train or test");
  e->add_option("--votes", eval.votes, "Voting rounds")->check(CLI::PositiveNumber);
  e->add_option("--seed", eval.seed, "Random seed");

  PredictArgs predict;
  auto* p = app.add_subcommand("predict", "Predict saliency for one PLY view");
  p->add_option("--in", predict.in, "Input PLY")->required();
  p->add_option("--ckpt", predict.ckpt, "Checkpoint")->required();
  p->add_option("--out", predict.out, "Output PLY")->required();
  p->add_option("--votes", predict.votes, "Voting rounds")->check(CLI::PositiveNumber);
  p->add_option("--seed", predict.seed, "Random seed");

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  g->add_option("--block", gc.block, "all|encoder|fab|ppb|spb|loss");
  g->add_option("--reduction", gc.reduction, "mean|max|mean_max|attentive");
  g->add_option("--seed", gc.seed, "Random seed");
  g->add_flag("--no-batch-norm", gc.no_batch_norm, "Check blocks without normalization");
  g->add_flag("--inject-fault", gc.inject_fault, "Corrupt one analytic gradient (harness self-test)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time planning, forward and backward passes");
  b->add_option("--config", bench.config, "Run configuration file (default model if omitted)");
  b->add_option("--batch", bench.batch, "Blocks per step")->check(CLI::PositiveNumber);
  b->add_option("--block", bench.block, "Points per block")->check(CLI::PositiveNumber);
  b->add_option("--iters", bench.iterations, "Timed steps")->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : PCSOD_ERR_USAGE;
  }

  if (s->parsed()) return run_synth(synth);
  if (t->parsed()) {
    train.has_seed = seed_opt->count() > 0;
    if (train.config.empty() && train.resume.empty()) {
      std::fprintf(stderr, "error: train needs --config or --resume\n");
      return PCSOD_ERR_USAGE;
    }
    return run_train(train);
  }
  if (e->parsed()) return run_eval(eval);
  if (p->parsed()) return run_predict(predict);
  if (g->parsed()) return run_gradcheck(gc);
  if (b->parsed()) return run_bench(bench);
  return PCSOD_ERR_USAGE;
}
