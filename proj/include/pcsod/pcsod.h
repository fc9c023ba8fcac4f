#ifndef PCSOD_PCSOD_H
#define PCSOD_PCSOD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PCSOD_API __declspec(dllexport)
#else
#define PCSOD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; also the CLI exit codes. */
enum {
  PCSOD_OK = 0,
  PCSOD_ERR_USAGE = 1,   /* bad argument, option or configuration */
  PCSOD_ERR_DATA = 2,    /* unreadable, malformed or inconsistent input */
  PCSOD_ERR_NUMERIC = 3  /* non-finite values or failed numeric check */
};

/* Message of the last failed call on this thread ("" after success). */
PCSOD_API const char* pcsod_last_error(void);
PCSOD_API const char* pcsod_version(void);

/* ---- point views -------------------------------------------------------- */

typedef struct pcsod_view pcsod_view;

PCSOD_API int pcsod_view_load(const char* ply_path, pcsod_view** out);
/* xyz and rgb are n*3 row-major, rgb in [0,1]; labels may be NULL. */
PCSOD_API int pcsod_view_create(size_t n, const double* xyz, const double* rgb, const uint8_t* labels,
                                pcsod_view** out);
PCSOD_API size_t pcsod_view_size(const pcsod_view* view);
PCSOD_API int pcsod_view_has_labels(const pcsod_view* view);
/* Copies n labels; fails when the view is unlabeled or n differs. */
PCSOD_API int pcsod_view_labels(const pcsod_view* view, uint8_t* out, size_t n);
PCSOD_API int pcsod_view_positions(const pcsod_view* view, double* xyz_out, size_t n);
/* Binary PLY. With probabilities (n values in [0,1]) the colors become a heat
   map, a float "probability" property is added and "label" holds p >= 0.5. */
PCSOD_API int pcsod_view_save(const pcsod_view* view, const char* ply_path, const double* probabilities, size_t n);
PCSOD_API void pcsod_view_free(pcsod_view* view);

/* ---- trained models ----------------------------------------------------- */

typedef struct pcsod_model pcsod_model;

PCSOD_API int pcsod_model_load(const char* checkpoint_path, pcsod_model** out);
/* Voting inference over every point of the view; writes view-size values. */
PCSOD_API int pcsod_model_predict(const pcsod_model* model, const pcsod_view* view, size_t votes, uint64_t seed,
                                  double* probabilities, size_t n);
PCSOD_API size_t pcsod_model_parameter_count(const pcsod_model* model);
PCSOD_API void pcsod_model_free(pcsod_model* model);

/* ---- datasets ----------------------------------------------------------- */

/* Writes labeled synthetic views under root/{train,test}. points = 0 uses the
   default view size. */
PCSOD_API int pcsod_synthesize(const char* root, size_t views, uint64_t seed, double split_ratio, size_t points,
                               size_t* train_views, size_t* test_views);

/* ---- training ----------------------------------------------------------- */

typedef struct {
  uint64_t step;
  size_t epoch;
  double loss;
  double seconds;
  int has_eval;
  double mae, iou, max_f, max_e; /* test split, when has_eval */
} pcsod_step_info;

typedef void (*pcsod_step_callback)(const pcsod_step_info* info, void* user);

typedef struct {
  const char* data_dir;       /* dataset root with train/ (and test/ for eval_every) */
  const char* config_path;    /* run file with every model and training key */
  const char* checkpoint_out; /* required */
  const char* log_csv;        /* optional */
  const char* resume_from;    /* optional checkpoint with optimizer state */
  size_t eval_every;          /* epochs between test-split evaluations; 0 = never */
  int has_seed;               /* nonzero: seed overrides the config */
  uint64_t seed;
  pcsod_step_callback on_step;
  void* user;
} pcsod_train_options;

PCSOD_API void pcsod_train_options_init(pcsod_train_options* options);
PCSOD_API int pcsod_train(const pcsod_train_options* options);

/* ---- metrics ------------------------------------------------------------ */

typedef struct {
  size_t views;
  double mae;
  double iou;
  int f_defined; /* 0 when no view had ground-truth positives */
  double max_f, mean_f;
  double max_e, mean_e;
} pcsod_metrics;

PCSOD_API int pcsod_metrics_compute(const double* probabilities, const uint8_t* labels, size_t n,
                                    pcsod_metrics* out);
/* Evaluates a split ("train" or "test"); report_csv and curve_csv may be NULL. */
PCSOD_API int pcsod_evaluate(const char* data_dir, const char* split, const char* checkpoint_path, size_t votes,
                             uint64_t seed, const char* report_csv, const char* curve_csv, pcsod_metrics* out);

/* ---- gradient check ----------------------------------------------------- */

typedef struct {
  const char* blocks;    /* all | encoder | fab | ppb | spb | loss */
  const char* reduction; /* mean | max | mean_max | attentive */
  int batch_norm;
  uint64_t seed;
  double step;
  double tolerance;
  int inject_fault;
} pcsod_gradcheck_options;

typedef struct {
  const char* block;
  size_t entries;
  double max_relative_error;
  int passed;
} pcsod_gradcheck_row;

typedef struct pcsod_gradcheck_report pcsod_gradcheck_report;

PCSOD_API void pcsod_gradcheck_options_init(pcsod_gradcheck_options* options);
PCSOD_API int pcsod_gradcheck(const pcsod_gradcheck_options* options, pcsod_gradcheck_report** out);
PCSOD_API size_t pcsod_gradcheck_rows(const pcsod_gradcheck_report* report);
PCSOD_API int pcsod_gradcheck_row_at(const pcsod_gradcheck_report* report, size_t i, pcsod_gradcheck_row* out);
PCSOD_API int pcsod_gradcheck_passed(const pcsod_gradcheck_report* report);
PCSOD_API const char* pcsod_gradcheck_table(const pcsod_gradcheck_report* report);
PCSOD_API void pcsod_gradcheck_free(pcsod_gradcheck_report* report);

/* ---- timing ------------------------------------------------------------- */

typedef struct {
  size_t parameters;
  double plan_seconds;     /* mean per iteration */
  double forward_seconds;
  double backward_seconds; /* backward pass plus optimizer step */
} pcsod_bench_result;

/* config_path may be NULL for the default model. */
PCSOD_API int pcsod_bench(const char* config_path, size_t batch, size_t block_size, size_t iterations, uint64_t seed,
                          pcsod_bench_result* out);

#ifdef __cplusplus
}
#endif

#endif
