#ifndef FDISAC_H
#define FDISAC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FdisacStatus {
  FDISAC_STATUS_OK = 0,
  FDISAC_STATUS_NULL_POINTER = 1,
  FDISAC_STATUS_INVALID_ARGUMENT = 2,
  FDISAC_STATUS_INFEASIBLE = 3,
  FDISAC_STATUS_SOLVER_FAILURE = 4,
  FDISAC_STATUS_PANIC = 5,
  FDISAC_STATUS_BUFFER_TOO_SMALL = 6,
} FdisacStatus;

/*
 Validated configuration and the channels it realizes.
 */
typedef struct FdisacScenario FdisacScenario;

/*
 Recovered design together with the channels it was solved for.
 */
typedef struct FdisacSolution FdisacSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a configuration document (same schema as the CLI config file).

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FdisacStatus fdisac_scenario_from_json(const char *json, struct FdisacScenario **out);

/*
 The reference scenario with the given channel seed.

 # Safety
 `out` must be a valid pointer.
 */
enum FdisacStatus fdisac_scenario_default(uint64_t seed, struct FdisacScenario **out);

/*
 # Safety
 `scenario` must be null or a handle from this library not yet freed.
 */
void fdisac_scenario_free(struct FdisacScenario *scenario);

/*
 Runs the joint optimization. On `FDISAC_STATUS_OK` `*out` owns a new
 solution; otherwise it is set to null.

 # Safety
 `scenario` must be a live handle and `out` a valid pointer.
 */
enum FdisacStatus fdisac_solve(const struct FdisacScenario *scenario, struct FdisacSolution **out);

/*
 # Safety
 `solution` must be null or a handle from this library not yet freed.
 */
void fdisac_solution_free(struct FdisacSolution *solution);

/*
 Total transmit power of the recovered design, in mW.

 # Safety
 `solution` must be a live handle and `out` a valid pointer.
 */
enum FdisacStatus fdisac_solution_total_power_mw(const struct FdisacSolution *solution,
                                                 double *out);

/*
 Writes 1 to `*out` if the iteration met its tolerance, 0 if it stopped at
 the iteration limit.

 # Safety
 `solution` must be a live handle and `out` a valid pointer.
 */
enum FdisacStatus fdisac_solution_converged(const struct FdisacSolution *solution, int32_t *out);

/*
 Achieved SINRs in dB (radar, uplink users, downlink users). `*needed`
 receives the number of entries; pass a null `buf` to query it.

 # Safety
 `solution` must be a live handle; `buf` must hold `len` doubles; `needed`
 may be null.
 */
enum FdisacStatus fdisac_solution_sinrs_db(const struct FdisacSolution *solution,
                                           double *buf,
                                           size_t len,
                                           size_t *needed);

/*
 Beampattern gain in dB on the grid −90°, −90° + step, …, 90°.

 # Safety
 `solution` must be a live handle; `buf` must hold `len` doubles; `needed`
 may be null.
 */
enum FdisacStatus fdisac_solution_beampattern_db(const struct FdisacSolution *solution,
                                                 double step_deg,
                                                 double *buf,
                                                 size_t len,
                                                 size_t *needed);

/*
 Message of the most recent failure on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *fdisac_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *fdisac_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDISAC_H */
