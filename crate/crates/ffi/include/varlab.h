/* C interface to the varlab numerical laboratory. */

#ifndef VARLAB_H
#define VARLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome. Anything other than `Ok` leaves a message for
 * [`varlab_last_error_message`].
 */
typedef enum VarlabStatus {
  VarlabStatus_Ok = 0,
  /**
   * A required pointer argument was `NULL`.
   */
  VarlabStatus_NullArgument = 1,
  /**
   * Parameters violate a documented precondition.
   */
  VarlabStatus_InvalidArgument = 2,
  /**
   * Evaluation at a point where the integrand is not smooth enough.
   */
  VarlabStatus_Singular = 3,
  /**
   * A coercivity floor degenerated.
   */
  VarlabStatus_Degenerate = 4,
  /**
   * Text input could not be parsed.
   */
  VarlabStatus_ParseError = 5,
  /**
   * Everything else (claim-diagram violations, internal failures).
   */
  VarlabStatus_Failed = 6,
} VarlabStatus;

/**
 * Growth regime relative to the sharp threshold, ordered by position
 * along the q axis.
 */
typedef enum VarlabRegime {
  VarlabRegime_UniformSchauder = 0,
  VarlabRegime_SharpSchauderHolds = 1,
  VarlabRegime_Borderline = 2,
  VarlabRegime_DoublePhaseBounded = 3,
  VarlabRegime_CounterexampleRegion = 4,
} VarlabRegime;

/**
 * Opaque coefficient field over the unit square.
 */
typedef struct VarlabCoefficient VarlabCoefficient;

/**
 * Opaque claim diagram.
 */
typedef struct VarlabDag VarlabDag;

/**
 * Opaque integrand description (family, exponents, regularization).
 */
typedef struct VarlabIntegrand VarlabIntegrand;

/**
 * Opaque minimization outcome, including the final field.
 */
typedef struct VarlabSolveResult VarlabSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Borrowed message describing the most recent failure on this thread.
 * Valid until the next failing `varlab_*` call on the same thread; do not
 * free.
 */
const char *varlab_last_error_message(void);

/**
 * Releases a `char *` the library handed out as caller-owned.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library as an owned
 * string (or `NULL`, which is ignored), and must not be used afterwards.
 */
void varlab_string_free(char *s);

/**
 * Classifies `(p, q, alpha, n)` against the sharp threshold, reporting the
 * regime and the signed margin `1 + alpha/n - q/p`.
 *
 * # Safety
 * `out_regime` and `out_margin` must be valid for writes or `NULL` is
 * reported.
 */
enum VarlabStatus varlab_classify(double p,
                                  double q,
                                  double alpha,
                                  uint32_t n,
                                  enum VarlabRegime *out_regime,
                                  double *out_margin);

/**
 * Constant coefficient `value >= 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum VarlabStatus varlab_coefficient_constant(double value, struct VarlabCoefficient **out);

/**
 * Coefficient `amplitude * |x1 - offset|^alpha` with `alpha` in (0, 1].
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum VarlabStatus varlab_coefficient_distance_power(double alpha,
                                                    double amplitude,
                                                    double offset,
                                                    struct VarlabCoefficient **out);

/**
 * Smoothed-step coefficient rising to `amplitude` across `center` over
 * scale `width`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum VarlabStatus varlab_coefficient_smoothed_step(double alpha,
                                                   double amplitude,
                                                   double center,
                                                   double width,
                                                   struct VarlabCoefficient **out);

/**
 * Evaluates a coefficient at `(x1, x2)` in the closed unit square.
 *
 * # Safety
 * `coefficient` must be a live handle from this library; `out` must be
 * valid for writes.
 */
enum VarlabStatus varlab_coefficient_eval(const struct VarlabCoefficient *coefficient,
                                          double x1,
                                          double x2,
                                          double *out);

/**
 * Releases a coefficient handle.
 *
 * # Safety
 * `coefficient` must be a live handle from this library or `NULL`; it must
 * not be used afterwards.
 */
void varlab_coefficient_free(struct VarlabCoefficient *coefficient);

/**
 * p-power integrand `(a(x) + eps) (|z|^2 + mu^2)^{p/2}` with `p > 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum VarlabStatus varlab_integrand_p_power(double p, struct VarlabIntegrand **out);

/**
 * Double-phase integrand `m^p + (a(x) + eps) m^q` with `1 < p <= q`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum VarlabStatus varlab_integrand_double_phase(double p, double q, struct VarlabIntegrand **out);

/**
 * Log-linear base phase plus two raw power phases with exponents
 * `q, s > 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum VarlabStatus varlab_integrand_log_multiphase(double q, double s, struct VarlabIntegrand **out);

/**
 * Copy of `integrand` with ghost regularization `(eps, mu)` installed.
 *
 * # Safety
 * `integrand` must be a live handle; `out` must be valid for writes.
 */
enum VarlabStatus varlab_integrand_regularize(const struct VarlabIntegrand *integrand,
                                              double eps,
                                              double mu,
                                              struct VarlabIntegrand **out);

/**
 * Density value at spatial point `(x1, x2)` and gradient `(z1, z2)`.
 * `NULL` coefficients mean identically zero.
 *
 * # Safety
 * `integrand` must be a live handle; `a`/`b` must be live handles or
 * `NULL`; `out` must be valid for writes.
 */
enum VarlabStatus varlab_integrand_eval(const struct VarlabIntegrand *integrand,
                                        const struct VarlabCoefficient *a,
                                        const struct VarlabCoefficient *b,
                                        double x1,
                                        double x2,
                                        double z1,
                                        double z2,
                                        double *out);

/**
 * Density gradient in `z` at `(x1, x2)`, `(z1, z2)`.
 *
 * # Safety
 * Same as [`varlab_integrand_eval`], with both out-pointers writable.
 */
enum VarlabStatus varlab_integrand_grad(const struct VarlabIntegrand *integrand,
                                        const struct VarlabCoefficient *a,
                                        const struct VarlabCoefficient *b,
                                        double x1,
                                        double x2,
                                        double z1,
                                        double z2,
                                        double *out_g1,
                                        double *out_g2);

/**
 * Releases an integrand handle.
 *
 * # Safety
 * `integrand` must be a live handle from this library or `NULL`; it must
 * not be used afterwards.
 */
void varlab_integrand_free(struct VarlabIntegrand *integrand);

/**
 * Minimizes the energy on an `m x m` grid under Dirichlet data, running
 * one warm-started stage per `(eps, mu)` schedule row. `boundary` holds
 * `(m + 1)^2` nodal values row-major; only the rim is read. `schedule`
 * holds `schedule_len` rows of two doubles, lexicographically strictly
 * decreasing. A result is produced even when the final tolerance was not
 * reached; check [`varlab_solve_result_converged`].
 *
 * # Safety
 * `integrand` must be a live handle; `a`/`b` live or `NULL`; `boundary`
 * must point to `(m + 1)^2` readable doubles; `schedule` to
 * `2 * schedule_len` readable doubles; `out` must be valid for writes.
 */
enum VarlabStatus varlab_solve(const struct VarlabIntegrand *integrand,
                               const struct VarlabCoefficient *a,
                               const struct VarlabCoefficient *b,
                               size_t m,
                               const double *boundary,
                               double tol_grad,
                               uint64_t max_iters,
                               const double *schedule,
                               size_t schedule_len,
                               struct VarlabSolveResult **out);

/**
 * Samples a named boundary fixture into a caller buffer of `(m + 1)^2`
 * doubles: 0 affine(c1, c2), 1 saddle, 2 ramp-wave(c1, c2),
 * 3 cusp(c1).
 *
 * # Safety
 * `buffer` must point to `(m + 1)^2` writable doubles.
 */
enum VarlabStatus varlab_boundary_sample(uint32_t kind,
                                         double c1,
                                         double c2,
                                         size_t m,
                                         double *buffer);

/**
 * Whether every continuation stage reached its gradient tolerance.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
bool varlab_solve_result_converged(const struct VarlabSolveResult *result);

/**
 * Total accepted descent steps across all stages.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
uint64_t varlab_solve_result_iterations(const struct VarlabSolveResult *result);

/**
 * Max-norm of the final objective gradient.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
double varlab_solve_result_grad_norm(const struct VarlabSolveResult *result);

/**
 * Energy of the final stage's minimizer.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
double varlab_solve_result_energy(const struct VarlabSolveResult *result);

/**
 * Number of nodal values in the solved field.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
size_t varlab_solve_result_node_count(const struct VarlabSolveResult *result);

/**
 * Copies the solved nodal field (row-major) into a caller buffer.
 *
 * # Safety
 * `result` must be a live handle; `buffer` must point to `len` writable
 * doubles with `len` at least the node count.
 */
enum VarlabStatus varlab_solve_result_copy_field(const struct VarlabSolveResult *result,
                                                 double *buffer,
                                                 size_t len);

/**
 * Borrowed diagnostic for a non-converged solve, or `NULL` when the solve
 * converged. Valid while the handle lives; do not free.
 *
 * # Safety
 * `result` must be a live handle from this library.
 */
const char *varlab_solve_result_diagnostic(const struct VarlabSolveResult *result);

/**
 * Oscillation-decay estimate of the minimizer's gradient regularity at the
 * domain center. `radii` must be strictly decreasing, at least 4 entries,
 * each at least two cell widths.
 *
 * # Safety
 * `result` must be a live handle; `radii` must point to `radii_len`
 * readable doubles; out-pointers must be valid for writes.
 */
enum VarlabStatus varlab_solve_result_holder(const struct VarlabSolveResult *result,
                                             const double *radii,
                                             size_t radii_len,
                                             double *out_exponent,
                                             double *out_quality);

/**
 * Difference-quotient decay fit on the minimizer. `offsets` holds
 * `offsets_len` rows of two integers (lattice translations); the distinct
 * translation lengths must number at least 4 and span a factor of 4.
 * An exactly regular field reports `s_order = +inf`, `c = 0`.
 *
 * # Safety
 * `result` must be a live handle; `offsets` must point to
 * `2 * offsets_len` readable 64-bit integers; out-pointers must be valid
 * for writes.
 */
enum VarlabStatus varlab_solve_result_caccioppoli(const struct VarlabSolveResult *result,
                                                  double p,
                                                  double q,
                                                  const int64_t *offsets,
                                                  size_t offsets_len,
                                                  double *out_s_order,
                                                  double *out_c,
                                                  double *out_residual);

/**
 * Releases a solve-result handle.
 *
 * # Safety
 * `result` must be a live handle from this library or `NULL`; it must not
 * be used afterwards.
 */
void varlab_solve_result_free(struct VarlabSolveResult *result);

/**
 * Parses the line-oriented diagram format (`node <id> <label,...>`,
 * `edge <src> <dst> <from=to,...>`).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum VarlabStatus varlab_dag_parse(const char *text, struct VarlabDag **out);

/**
 * Settles every claim: rejected ids fail the checker, everything else
 * passes, and rejection propagates to descendants.
 *
 * # Safety
 * `dag` must be a live handle; `reject` must point to `reject_len`
 * NUL-terminated strings (or be `NULL` when `reject_len` is 0).
 */
enum VarlabStatus varlab_dag_validate(struct VarlabDag *dag,
                                      const char *const *reject,
                                      size_t reject_len);

/**
 * Renders the colimit classes of a validated diagram as caller-owned text,
 * one `class <k>: <id>:<label> ...` line per class. Release with
 * [`varlab_string_free`].
 *
 * # Safety
 * `dag` must be a live handle; `out_classes` must be valid for writes.
 */
enum VarlabStatus varlab_dag_colimit(const struct VarlabDag *dag, char **out_classes);

/**
 * Releases a diagram handle.
 *
 * # Safety
 * `dag` must be a live handle from this library or `NULL`; it must not be
 * used afterwards.
 */
void varlab_dag_free(struct VarlabDag *dag);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARLAB_H */
