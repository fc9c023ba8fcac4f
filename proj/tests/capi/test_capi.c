/* Exercises the C API from plain C. argv[1] is a scratch directory. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "pcsod/pcsod.h"

static int failures = 0;

#define EXPECT(cond)                                           \
  do {                                                         \
    if (!(cond)) {                                             \
      fprintf(stderr, "%s:%d: FAILED %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                              \
    }                                                          \
  } while (0)

static void path_join(char* out, size_t cap, const char* dir, const char* name) {
  snprintf(out, cap, "%s/%s", dir, name);
}

static void test_views(const char* dir) {
  const double xyz[] = {0.0, 0.0, 0.0, 1.0, 0.5, -0.25, 2.0, 1.0, 0.75};
  const double rgb[] = {0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.2, 0.4, 0.6};
  const uint8_t labels[] = {1, 0, 1};
  pcsod_view* v = NULL;
  EXPECT(pcsod_view_create(3, xyz, rgb, labels, &v) == PCSOD_OK);
  EXPECT(pcsod_view_size(v) == 3);
  EXPECT(pcsod_view_has_labels(v));

  char path[1024];
  path_join(path, sizeof path, dir, "capi_view.ply");
  const double probs[] = {0.9, 0.1, 0.5};
  EXPECT(pcsod_view_save(v, path, probs, 3) == PCSOD_OK);
  pcsod_view* back = NULL;
  EXPECT(pcsod_view_load(path, &back) == PCSOD_OK);
  EXPECT(pcsod_view_size(back) == 3);
  uint8_t hard[3] = {9, 9, 9};
  EXPECT(pcsod_view_labels(back, hard, 3) == PCSOD_OK);
  EXPECT(hard[0] == 1 && hard[1] == 0 && hard[2] == 1);
  double pos[9];
  EXPECT(pcsod_view_positions(back, pos, 9 / 3) == PCSOD_OK);
  EXPECT(memcmp(pos, xyz, sizeof pos) == 0);
  EXPECT(pcsod_view_labels(back, hard, 2) == PCSOD_ERR_USAGE);
  pcsod_view_free(back);

  const double out_of_range[] = {0.5, 1.5, 0.0};
  EXPECT(pcsod_view_save(v, path, out_of_range, 3) == PCSOD_ERR_DATA);
  EXPECT(strstr(pcsod_last_error(), "scalar out of range") != NULL);
  pcsod_view_free(v);

  pcsod_view* missing = NULL;
  path_join(path, sizeof path, dir, "does_not_exist.ply");
  EXPECT(pcsod_view_load(path, &missing) == PCSOD_ERR_DATA);
  EXPECT(strlen(pcsod_last_error()) > 0);
  EXPECT(pcsod_view_load(NULL, &missing) == PCSOD_ERR_USAGE);
}

static void test_metrics(void) {
  const double p[] = {0.2, 0.9, 0.4};
  const uint8_t g[] = {0, 1, 1};
  pcsod_metrics m;
  EXPECT(pcsod_metrics_compute(p, g, 3, &m) == PCSOD_OK);
  EXPECT(fabs(m.mae - 0.3) < 1e-12);
  EXPECT(m.f_defined == 1);
  EXPECT(strlen(pcsod_last_error()) == 0);
  const uint8_t none[] = {0, 0, 0};
  EXPECT(pcsod_metrics_compute(p, none, 3, &m) == PCSOD_OK);
  EXPECT(m.f_defined == 0);
  EXPECT(isnan(m.max_f));
}

static void test_models(const char* dir) {
  char path[1024];
  path_join(path, sizeof path, dir, "garbage.ckpt");
  FILE* f = fopen(path, "wb");
  fputs("not a checkpoint", f);
  fclose(f);
  pcsod_model* model = NULL;
  EXPECT(pcsod_model_load(path, &model) == PCSOD_ERR_DATA);
  EXPECT(strcmp(pcsod_last_error(), "bad checkpoint header") == 0);
  EXPECT(model == NULL);
}

static void test_synth(const char* dir) {
  char root[1024];
  path_join(root, sizeof root, dir, "capi_synth");
  size_t train = 0, test = 0;
  EXPECT(pcsod_synthesize(root, 10, 4, 0.7, 1024, &train, &test) == PCSOD_OK);
  EXPECT(train == 7 && test == 3);
  EXPECT(pcsod_synthesize(root, 10, 4, 1.0, 1024, &train, &test) == PCSOD_ERR_USAGE);
  EXPECT(strcmp(pcsod_last_error(), "empty test split") == 0);
}

static void test_gradcheck(void) {
  pcsod_gradcheck_options o;
  pcsod_gradcheck_options_init(&o);
  EXPECT(strcmp(o.blocks, "all") == 0);
  EXPECT(o.step == 1e-4 && o.tolerance == 1e-5);
  o.blocks = "loss";
  pcsod_gradcheck_report* r = NULL;
  EXPECT(pcsod_gradcheck(&o, &r) == PCSOD_OK);
  EXPECT(pcsod_gradcheck_rows(r) == 1);
  EXPECT(pcsod_gradcheck_passed(r) == 1);
  pcsod_gradcheck_row row;
  EXPECT(pcsod_gradcheck_row_at(r, 0, &row) == PCSOD_OK);
  EXPECT(strcmp(row.block, "loss") == 0 && row.passed && row.max_relative_error <= 1e-5);
  EXPECT(pcsod_gradcheck_row_at(r, 1, &row) == PCSOD_ERR_USAGE);
  EXPECT(strstr(pcsod_gradcheck_table(r), "loss") != NULL);
  pcsod_gradcheck_free(r);

  o.inject_fault = 1;
  EXPECT(pcsod_gradcheck(&o, &r) == PCSOD_OK);
  EXPECT(pcsod_gradcheck_passed(r) == 0);
  pcsod_gradcheck_free(r);

  o.blocks = "decoder";
  EXPECT(pcsod_gradcheck(&o, &r) == PCSOD_ERR_USAGE);
  EXPECT(strstr(pcsod_last_error(), "decoder") != NULL);
}

static void test_bench(void) {
  pcsod_bench_result b;
  EXPECT(pcsod_bench(NULL, 1, 1000, 1, 0, &b) == PCSOD_ERR_DATA);
  EXPECT(strstr(pcsod_last_error(), "divisible") != NULL);
  EXPECT(pcsod_bench(NULL, 1, 1024, 1, 0, &b) == PCSOD_ERR_DATA);  /* K = 16 needs 16 level-4 points */
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s SCRATCH_DIR\n", argv[0]);
    return 2;
  }
  test_views(argv[1]);
  test_metrics();
  test_models(argv[1]);
  test_synth(argv[1]);
  test_gradcheck();
  test_bench();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
