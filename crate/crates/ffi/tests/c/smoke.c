#include <math.h>
#include <stdio.h>
#include <string.h>

#include "genshare.h"

#define CHECK(cond)                                         \
  do {                                                      \
    if (!(cond)) {                                          \
      fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); \
      return 1;                                             \
    }                                                       \
  } while (0)

int main(void) {
  GsForecaster *f = NULL;
  CHECK(gs_forecaster_new(GS_MIXING_FIXED_SHARE, 3, 0.8, 0.1, 0.0, &f) == GS_STATUS_OK);

  double loss[3] = {0.2, 0.9, 0.4};
  double realized = -1.0;
  CHECK(gs_forecaster_step(f, loss, 3, &realized) == GS_STATUS_OK);
  CHECK(fabs(realized - 0.5) < 1e-15);

  double p[3];
  CHECK(gs_forecaster_play(f, p, 3) == GS_STATUS_OK);
  CHECK(fabs(p[0] + p[1] + p[2] - 1.0) < 1e-12);
  CHECK(p[0] > p[2] && p[2] > p[1]);

  double bad[3] = {0.0, 2.0, 0.0};
  CHECK(gs_forecaster_step(f, bad, 3, NULL) == GS_STATUS_LOSS_OUT_OF_RANGE);
  CHECK(strlen(gs_last_error_message()) > 0);
  gs_forecaster_free(f);

  GsTuning t;
  CHECK(gs_tune_fixed_share(10, 2.0, 100.0, &t) == GS_STATUS_OK);
  CHECK(fabs(t.alpha - 0.02) < 1e-15);
  CHECK(fabs(t.bound - 26.841275597446267) < 1e-12);

  CHECK(gs_binary_entropy(0.5, NULL) == GS_STATUS_NULL_POINTER);
  printf("ok\n");
  return 0;
}
