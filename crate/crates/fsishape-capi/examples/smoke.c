/* Minimal consumer of the C API: creates handles, evaluates the fields,
 * runs the first-order verification and one moment query. Exits nonzero on
 * any unexpected value. Build (from the workspace root, after
 * `cargo build -p fsishape-capi`):
 *
 *   cc crates/fsishape-capi/examples/smoke.c \
 *      -Icrates/fsishape-capi/include \
 *      target/debug/libfsishape_capi.a -lpthread -ldl -lm -o smoke
 */

#include <math.h>
#include <stdio.h>

#include "fsishape.h"

static int fail(const char *what, enum FsiStatus status) {
  fprintf(stderr, "%s: %s\n", what, fsishape_status_message(status));
  return 1;
}

int main(void) {
  FsiBenchmark *bench = NULL;
  FsiSample *sample = NULL;
  enum FsiStatus status;

  printf("fsishape %s\n", fsishape_version());

  status = fsishape_benchmark_new(&bench);
  if (status != FSI_STATUS_OK) return fail("benchmark_new", status);

  double p = 0.0;
  status = fsishape_eval_pressure(bench, 0.0, 0.0, &p);
  if (status != FSI_STATUS_OK) return fail("eval_pressure", status);
  if (fabs(p - 1.0) > 1e-14) {
    fprintf(stderr, "pressure at origin: %.17g\n", p);
    return 1;
  }

  status = fsishape_sample_new(0.1, 1.0, 1.0, &sample);
  if (status != FSI_STATUS_OK) return fail("sample_new", status);

  double max_residual = 0.0;
  int pass = 0;
  status = fsishape_verify_first_order(bench, sample, 50, 16, &max_residual, &pass);
  if (status != FSI_STATUS_OK) return fail("verify_first_order", status);
  if (!pass) {
    fprintf(stderr, "verification failed, max residual %.3e\n", max_residual);
    return 1;
  }

  double mean = 0.0, variance = 0.0;
  status = fsishape_moment_oracle(bench, 0.0, 0.0, 0.1, 0, &mean, &variance);
  if (status != FSI_STATUS_OK) return fail("moment_oracle", status);
  printf("mean %.12f variance %.3e max residual %.3e\n", mean, variance, max_residual);

  /* deliberate misuse must come back as a status, not a crash */
  status = fsishape_eval_pressure(NULL, 0.0, 0.0, &p);
  if (status != FSI_STATUS_NULL_POINTER) return fail("null check", status);

  fsishape_sample_free(sample);
  fsishape_benchmark_free(bench);
  puts("smoke test passed");
  return 0;
}
