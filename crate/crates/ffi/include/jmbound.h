/* C interface to jmbound: escape rates, collision distances, and diameter certificates. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared with the CLI: 0 success, 2 invalid input or
// geometry, 3 solver failure.
typedef enum JmbStatus {
  JMB_STATUS_OK = 0,
  JMB_STATUS_INVALID_INPUT = 2,
  JMB_STATUS_SOLVER_FAILURE = 3,
} JmbStatus;

// An escape planner holding the chamber analysis and diameter certificate
// for one mass system.
typedef struct JmbPlanner JmbPlanner;

// A mass system: masses, spatial dimension, gravitational constant.
typedef struct JmbSystem JmbSystem;

// Certificate constants in one flat struct.
typedef struct JmbCertificate {
  // Smallest pair constant λ_ab.
  double lambda_star;
  // Sum Λ of the pair constants.
  double lambda_sum;
  // 1/Λ.
  double c1;
  // 1/λ_*.
  double c_upper;
  // Global escape rate of the lifted collision arrangement.
  double rate;
  // Envelope constant k = rate/Λ.
  double k;
  // Arclength at which the envelope reaches the Hill boundary.
  double t_cross;
  // Metric distance bound from any Hill point to the boundary.
  double bound_single;
  // Metric diameter bound, twice `bound_single`.
  double bound_diameter;
} JmbCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *jmb_last_error_message(void);

// Create a mass system.
//
// # Safety
// `masses` must point to `n_bodies` doubles and `out` must be a valid
// pointer. On success `*out` owns the system; release it with
// [`jmb_system_free`].
enum JmbStatus jmb_system_new(const double *masses,
                              size_t n_bodies,
                              size_t dim,
                              double g,
                              struct JmbSystem **out);

// Release a system created by [`jmb_system_new`].
//
// # Safety
// `sys` must be null or a pointer previously returned by
// [`jmb_system_new`] that has not been freed.
void jmb_system_free(struct JmbSystem *sys);

// Gravitational potential U at a configuration. Returns +inf on a
// collision configuration.
//
// # Safety
// `coords` must point to `len` doubles (body-major layout); `sys` and
// `out` must be valid pointers.
enum JmbStatus jmb_system_potential(const struct JmbSystem *sys,
                                    const double *coords,
                                    size_t len,
                                    double *out);

// Mass-metric distance from a configuration to the collision locus.
//
// # Safety
// Same contract as [`jmb_system_potential`].
enum JmbStatus jmb_system_dist_to_collision(const struct JmbSystem *sys,
                                            const double *coords,
                                            size_t len,
                                            double *out);

// Build the escape planner (chamber analysis plus certificate) for a
// system, lifting collision subspaces along the given complement axis.
//
// # Safety
// `sys` and `out` must be valid pointers. On success `*out` owns the
// planner; release it with [`jmb_planner_free`].
enum JmbStatus jmb_planner_new(const struct JmbSystem *sys,
                               size_t lift_axis,
                               struct JmbPlanner **out);

// Release a planner created by [`jmb_planner_new`].
//
// # Safety
// `planner` must be null or a pointer previously returned by
// [`jmb_planner_new`] that has not been freed.
void jmb_planner_free(struct JmbPlanner *planner);

// Copy the planner's certificate constants.
//
// # Safety
// `planner` and `out` must be valid pointers.
enum JmbStatus jmb_planner_certificate(const struct JmbPlanner *planner,
                                       struct JmbCertificate *out);

// Walk a Hill-region configuration to the Hill boundary. Writes the
// measured metric length of the escape path and the straight-line
// arclength of the boundary crossing.
//
// # Safety
// `coords` must point to `len` doubles; `planner`, `jm_length`, and
// `crossing_arclength` must be valid pointers.
enum JmbStatus jmb_planner_escape_length(const struct JmbPlanner *planner,
                                         const double *coords,
                                         size_t len,
                                         double *jm_length,
                                         double *crossing_arclength);

// Escape rate of a polyhedral cone given by `m` unit normals of dimension
// `dim`, row-major.
//
// # Safety
// `normals` must point to `m * dim` doubles; `out` must be a valid
// pointer.
enum JmbStatus jmb_cone_escape_rate(const double *normals,
                                    size_t m,
                                    size_t dim,
                                    double tol,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
