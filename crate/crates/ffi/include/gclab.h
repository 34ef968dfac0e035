#ifndef GCLAB_H
#define GCLAB_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result codes.
 */
typedef enum GclabStatus {
  GCLAB_STATUS_OK = 0,
  GCLAB_STATUS_NULL_POINTER = 1,
  GCLAB_STATUS_INVALID_ARGUMENT = 2,
  GCLAB_STATUS_PRECONDITION = 3,
  GCLAB_STATUS_NUMERICAL = 4,
  GCLAB_STATUS_CONFIG = 5,
  GCLAB_STATUS_IO = 6,
  GCLAB_STATUS_BUFFER_TOO_SMALL = 7,
  GCLAB_STATUS_PANIC = 8,
} GclabStatus;

/*
 A sampled complex field on a periodic grid.
 */
typedef struct GclabField GclabField;

/*
 A finished lab run and its record.
 */
typedef struct GclabRun GclabRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, static storage.
 */
const char *gclab_version(void);

/*
 Writes the calling thread's last error message into `buf` (NUL-terminated)
 if `len` is large enough, and returns the size required including the NUL.
 Pass a null `buf` to query the size.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t gclab_last_error_message(char *buf, size_t len);

/*
 The closed-form Gaussian `e^{−κx²}` evolved to time `t` under `∂_t u = z ∂²u`,
 sampled on `n_points` nodes of `[−half_width, half_width)`.

 # Safety
 `out` must be a valid pointer; on success it receives a new handle.
 */
enum GclabStatus gclab_field_gaussian(size_t n_points,
                                      double half_width,
                                      double kappa,
                                      double z_re,
                                      double z_im,
                                      double t,
                                      struct GclabField **out);

/*
 A field from `n_points` samples given as separate real and imaginary arrays.

 # Safety
 `re` and `im` must each point to `n_points` readable doubles; `out` must be valid.
 */
enum GclabStatus gclab_field_from_samples(size_t n_points,
                                          double half_width,
                                          const double *re,
                                          const double *im,
                                          double time,
                                          struct GclabField **out);

/*
 Releases a field. Null is ignored.

 # Safety
 `field` must be null or a handle from this library not yet freed.
 */
void gclab_field_free(struct GclabField *field);

/*
 Number of samples, or 0 for a null handle.

 # Safety
 `field` must be null or a live handle.
 */
size_t gclab_field_len(const struct GclabField *field);

/*
 Copies the samples into `re` and `im`, each of capacity `len`.

 # Safety
 `re` and `im` must point to `len` writable doubles.
 */
enum GclabStatus gclab_field_samples(const struct GclabField *field,
                                     double *re,
                                     double *im,
                                     size_t len);

/*
 Exact free Schrödinger flow by `t`.

 # Safety
 `field` must be a live handle and `out` valid.
 */
enum GclabStatus gclab_field_free_propagate(const struct GclabField *field,
                                            double t,
                                            struct GclabField **out);

/*
 Heat flow `e^{a∂²}`, `a ≥ 0`.

 # Safety
 `field` must be a live handle and `out` valid.
 */
enum GclabStatus gclab_field_heat_regularize(const struct GclabField *field,
                                             double a,
                                             struct GclabField **out);

/*
 `‖a − b‖ / ‖b‖` on a shared grid.

 # Safety
 Both handles must be live and `out` valid.
 */
enum GclabStatus gclab_field_relative_l2_error(const struct GclabField *a,
                                               const struct GclabField *b,
                                               double *out);

/*
 `log ‖e^{γx²} f‖`; `divergent` is set when the tail reaches the box edge.

 # Safety
 `field` must be a live handle; `log_norm` and `divergent` valid.
 */
enum GclabStatus gclab_field_gaussian_log_norm(const struct GclabField *field,
                                               double gamma,
                                               double *log_norm,
                                               bool *divergent);

/*
 The Airy function `Ai(x)`.

 # Safety
 `out` must be valid.
 */
enum GclabStatus gclab_airy(double x, double *out);

/*
 `sup_ε E(γ, ε, 0)` and its maximiser.

 # Safety
 `eps_star` and `sup` must be valid.
 */
enum GclabStatus gclab_threshold_sup(double gamma, double *eps_star, double *sup);

/*
 Verifies a named operator identity (`"I1"` .. `"I4"`) in exact arithmetic;
 `residual_monomials` is 0 when it holds.

 # Safety
 `name` must be a NUL-terminated string and `residual_monomials` valid.
 */
enum GclabStatus gclab_verify_identity(const char *name, size_t *residual_monomials);

/*
 Runs one experiment and writes its artifacts into `out_dir/<experiment>/`.

 `config_toml` may be null for the defaults; otherwise its keys override them.
 A run whose checks fail still returns `GCLAB_STATUS_OK`; query the handle.

 # Safety
 `experiment` and `out_dir` must be NUL-terminated strings, `config_toml`
 null or NUL-terminated, and `out` valid.
 */
enum GclabStatus gclab_run_execute(const char *experiment,
                                   const char *config_toml,
                                   const char *out_dir,
                                   struct GclabRun **out);

/*
 1 if every check passed, 0 if some failed, -1 if the experiment errored or `run` is null.

 # Safety
 `run` must be null or a live handle.
 */
int32_t gclab_run_passed(const struct GclabRun *run);

/*
 Number of checks in the record, 0 for null.

 # Safety
 `run` must be null or a live handle.
 */
size_t gclab_run_check_count(const struct GclabRun *run);

/*
 The run record as JSON, copied like [`gclab_last_error_message`]; returns the size needed.

 # Safety
 `run` must be a live handle; `buf` null or `len` writable bytes.
 */
size_t gclab_run_record_json(const struct GclabRun *run, char *buf, size_t len);

/*
 Releases a run. Null is ignored.

 # Safety
 `run` must be null or a handle from this library not yet freed.
 */
void gclab_run_free(struct GclabRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GCLAB_H */
