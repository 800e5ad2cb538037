#ifndef GENSHARE_H
#define GENSHARE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_DIMENSION_MISMATCH = 3,
  GS_STATUS_LOSS_OUT_OF_RANGE = 4,
  GS_STATUS_NOT_A_DISTRIBUTION = 5,
  GS_STATUS_SCHEDULE_VIOLATION = 6,
  GS_STATUS_PANIC = 7,
} GsStatus;

typedef enum GsMixing {
  GS_MIXING_FIXED_SHARE = 0,
  GS_MIXING_PROJECTED = 1,
  GS_MIXING_BW_MAX = 2,
  GS_MIXING_BW_DECAYED = 3,
  /*
   `η_t = √(ln(d t)/t)` and `α_t = 1/t`; `eta`, `alpha`, `gamma` are ignored.
   */
  GS_MIXING_ANYTIME = 4,
} GsMixing;

/*
 Opaque forecaster handle.
 */
typedef struct GsForecaster GsForecaster;

typedef struct GsTuning {
  double eta;
  double alpha;
  double bound;
} GsTuning;

/*
 Worst interval found by [`gs_adaptive_regret`]; rounds are 1-indexed and
 inclusive.
 */
typedef struct GsInterval {
  double value;
  size_t start;
  size_t end;
  size_t corner;
} GsInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread. Valid until the next
 failing call on the same thread; empty if none failed.
 */
const char *gs_last_error_message(void);

/*
 Creates a forecaster over `d` experts. Free it with [`gs_forecaster_free`].

 # Safety
 `out` must be valid for a pointer write.
 */
enum GsStatus gs_forecaster_new(enum GsMixing rule,
                                size_t d,
                                double eta,
                                double alpha,
                                double gamma,
                                struct GsForecaster **out);

/*
 # Safety
 `f` must come from [`gs_forecaster_new`] and not be used afterwards.
 Null is a no-op.
 */
void gs_forecaster_free(struct GsForecaster *f);

/*
 Copies the current play `p_t` into `out[0..len]`.

 # Safety
 `f` must be a live handle and `out` valid for `len` writes.
 */
enum GsStatus gs_forecaster_play(const struct GsForecaster *f, double *out, size_t len);

/*
 Feeds `loss[0..len]` and advances one round. `realized` receives
 `p_t · ℓ_t` and may be null. A rejected loss leaves the handle unchanged.

 # Safety
 `f` must be a live handle, `loss` valid for `len` reads, `realized` null
 or valid for a write.
 */
enum GsStatus gs_forecaster_step(struct GsForecaster *f,
                                 const double *loss,
                                 size_t len,
                                 double *realized);

/*
 # Safety
 `f` must be a live handle and `out` valid for a write.
 */
enum GsStatus gs_forecaster_dim(const struct GsForecaster *f, size_t *out);

/*
 # Safety
 `f` must be a live handle and `out` valid for a write.
 */
enum GsStatus gs_forecaster_rounds(const struct GsForecaster *f, size_t *out);

/*
 KL projection of the distribution `v` onto `{x ∈ Δ_d : x_i ≥ α/d}`.

 # Safety
 `v` valid for `d` reads, `out` valid for `d` writes.
 */
enum GsStatus gs_kl_project_clipped(const double *v, size_t d, double alpha, double *out);

/*
 `Σ_i max(0, x_i − y_i)` over nonnegative vectors.

 # Safety
 `x`, `y` valid for `d` reads, `out` valid for a write.
 */
enum GsStatus gs_total_variation(const double *x, const double *y, size_t d, double *out);

/*
 # Safety
 `x`, `y` valid for `d` reads, `out` valid for a write.
 */
enum GsStatus gs_kl_divergence(const double *x, const double *y, size_t d, double *out);

/*
 # Safety
 `out` valid for a write.
 */
enum GsStatus gs_binary_entropy(double x, double *out);

/*
 Tuned fixed share for `m(u) + ‖u_1‖ ≤ m0` and `Σ‖u_t‖ ≤ U0`.

 # Safety
 `out` valid for a write.
 */
enum GsStatus gs_tune_fixed_share(size_t d, double m0, double u0, struct GsTuning *out);

/*
 Small-loss tuning; additionally needs the comparator loss cap `L0`.

 # Safety
 `out` valid for a write.
 */
enum GsStatus gs_tune_small_loss(size_t d, double m0, double u0, double l0, struct GsTuning *out);

/*
 Regret bound of fixed share at `(η, α)` for a comparator with the given
 `m(u)`, `Σ‖u_t‖` and `‖u_1‖`.

 # Safety
 `out` valid for a write.
 */
enum GsStatus gs_bound_fixed_share(size_t d,
                                   double eta,
                                   double alpha,
                                   double m,
                                   double u_sum,
                                   double u1_norm,
                                   double *out);

/*
 Same as [`gs_bound_fixed_share`] for the projected share.

 # Safety
 `out` valid for a write.
 */
enum GsStatus gs_bound_projected(size_t d,
                                 double eta,
                                 double alpha,
                                 double m,
                                 double u_sum,
                                 double u1_norm,
                                 double *out);

/*
 Adaptive regret bound for windows of at most `tau0` rounds; `relaxed` may
 be null.

 # Safety
 `exact` valid for a write, `relaxed` null or valid for a write.
 */
enum GsStatus gs_bound_adaptive(size_t d, size_t tau0, double *exact, double *relaxed);

/*
 Interval regret bound of the anytime schedule over `horizon` rounds.

 # Safety
 `out` valid for a write.
 */
enum GsStatus gs_bound_anytime(size_t d, size_t horizon, double *out);

/*
 Largest regret against a fixed expert over windows of at most `tau0`
 rounds. `plays` and `losses` are `horizon × d`.

 # Safety
 `plays` and `losses` valid for `horizon * d` reads, `out` valid for a write.
 */
enum GsStatus gs_adaptive_regret(const double *plays,
                                 const double *losses,
                                 size_t horizon,
                                 size_t d,
                                 size_t tau0,
                                 struct GsInterval *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENSHARE_H */
