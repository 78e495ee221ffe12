#ifndef RELVAC_H
#define RELVAC_H

/* C ABI for the relvac fluid-vacuum free-boundary simulator.
 * Kept in sync with crates/ffi/src/lib.rs; regenerate with
 *   cbindgen --crate relvac-ffi --output include/relvac.h
 * when the surface changes. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum RvStatus {
  RV_OK = 0,
  /**
   * Malformed configuration or arguments.
   */
  RV_INVALID_INPUT = 1,
  /**
   * Physically inadmissible values (vacuum, superluminal, ...).
   */
  RV_DOMAIN_ERROR = 2,
  /**
   * The run stopped at a breakdown state; partial data is available.
   */
  RV_ABORTED = 3,
  RV_IO_ERROR = 4,
  RV_INTERNAL = 5,
} RvStatus;

/**
 * Opaque trajectory handle.
 */
typedef struct RvTrajectory RvTrajectory;

/**
 * Number of f64 values per log row (matches the energy CSV columns).
 */
#define RV_ROW_LEN 11

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *rv_last_error(void);

/**
 * Library version string (static storage).
 */
const char *rv_version(void);

/**
 * Run a simulation from a JSON configuration document (the same schema the
 * `relvac simulate` subcommand reads). On success `*out` owns the
 * trajectory; release it with `rv_trajectory_free`.
 *
 * # Safety
 * `config_json` must point to a NUL-terminated string and `out` to a valid
 * pointer slot; both must outlive the call.
 */
RvStatus rv_simulate_json(const char *config_json, RvTrajectory **out);

/**
 * Number of logged cadence rows in the trajectory.
 *
 * # Safety
 * `traj` must be a live handle from `rv_simulate_json`.
 */
size_t rv_trajectory_rows(const RvTrajectory *traj);

/**
 * Copy row `i` into `out[0..11]`:
 * `t, E_I, E_II, E_III, E_IV, E_total, g0_defect, energy_drift, chi_h_res,
 * min_J, max_eps_v`.
 *
 * # Safety
 * `traj` must be a live handle and `out` must point to at least
 * `RV_ROW_LEN` doubles.
 */
RvStatus rv_trajectory_row(const RvTrajectory *traj, size_t i, double *out);

/**
 * Number of events (bracket violations etc.) recorded during the run.
 *
 * # Safety
 * `traj` must be a live handle.
 */
size_t rv_trajectory_events(const RvTrajectory *traj);

/**
 * Write the energy log as CSV (same format as the CLI).
 *
 * # Safety
 * `traj` must be a live handle, `path` a NUL-terminated string.
 */
RvStatus rv_trajectory_write_csv(const RvTrajectory *traj, const char *path);

/**
 * Release a trajectory handle. Passing null is a no-op; passing a handle
 * twice is undefined behavior.
 *
 * # Safety
 * `traj` must be null or a handle obtained from this library and not yet
 * freed.
 */
void rv_trajectory_free(RvTrajectory *traj);

/**
 * Squared sound speed at particle number density `n`.
 */
RvStatus rv_sound_speed_sq(double n, double gamma, double eps, double *out);

/**
 * Lorentz factor of velocity `(vx, vy, vz)`.
 */
RvStatus rv_lorentz_factor(double vx, double vy, double vz, double eps, double *out);

/**
 * Particle number density from energy density (inverts the equation of
 * state).
 */
RvStatus rv_number_density(double rho, double gamma, double eps, double *out);

/**
 * Run the fast verification suite; `*failures` receives the number of
 * failed checks. Returns RV_OK when everything passed.
 *
 * # Safety
 * `failures` must be null or point to a valid usize slot.
 */
RvStatus rv_verify_quick(size_t *failures);

#ifdef __cplusplus
}  // extern "C"
#endif // __cplusplus

#endif  /* RELVAC_H */
