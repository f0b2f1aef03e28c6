#ifndef UAVPLAN_H
#define UAVPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum UavStatus {
  UAV_STATUS_OK = 0,
  UAV_STATUS_NULL_POINTER = 1,
  UAV_STATUS_INVALID_UTF8 = 2,
  UAV_STATUS_PARSE_ERROR = 3,
  UAV_STATUS_INVALID_ARGUMENT = 4,
  // No obstacle-free mission exists (blocked endpoint or unreachable leg).
  UAV_STATUS_INFEASIBLE = 5,
  UAV_STATUS_OUT_OF_RANGE = 6,
  UAV_STATUS_INTERNAL = 7,
} UavStatus;

typedef enum UavPlanMode {
  UAV_PLAN_MODE_TSP_EUCLID = 0,
  UAV_PLAN_MODE_ASTAR_SEQ = 1,
  UAV_PLAN_MODE_HYBRID = 2,
  // Straight legs in detection order.
  UAV_PLAN_MODE_REFERENCE = 3,
} UavPlanMode;

// Opaque mission handle.
typedef struct UavMission UavMission;

// Opaque scene handle.
typedef struct UavScene UavScene;

// Synthetic scene parameters; start from `uav_gen_params_default()`.
typedef struct UavGenParams {
  uint64_t seed;
  uint32_t width_px;
  uint32_t height_px;
  uint32_t cell_size_px;
  uint32_t n_targets;
  uint32_t n_obstacles;
  double disc_fraction;
  double min_obstacle_px;
  double max_obstacle_px;
  double clearance_px;
  double altitude_m;
} UavGenParams;

// 0 takeoff, 1 waypoint, 2 path point, 3 return-to-land.
typedef struct UavMissionItem {
  uint32_t kind;
  double lat;
  double lon;
  double alt_m;
} UavMissionItem;

typedef struct UavLatLon {
  double lat;
  double lon;
} UavLatLon;

typedef struct UavErrors {
  double knn_m;
  double dtw_m;
  double seq_m;
} UavErrors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread. Valid until the next
// failing call on the same thread; never NULL.
const char *uav_last_error(void);

// Library version as a static NUL-terminated string.
const char *uav_version(void);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void uav_string_free(char *s);

// Parses a JSON scene document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum UavStatus uav_scene_from_json(const char *json, struct UavScene **out);

// Default synthetic scene parameters.
struct UavGenParams uav_gen_params_default(void);

// Generates a seeded synthetic scene.
//
// # Safety
// `params` and `out` must be valid pointers.
enum UavStatus uav_scene_generate(const struct UavGenParams *params, struct UavScene **out);

// Serializes a scene to JSON; NULL on failure. Free with `uav_string_free`.
//
// # Safety
// `scene` must be a live handle.
char *uav_scene_to_json(const struct UavScene *scene);

// Number of targets in the scene, 0 for NULL.
//
// # Safety
// `scene` must be NULL or a live handle.
uintptr_t uav_scene_target_count(const struct UavScene *scene);

// # Safety
// `scene` must be NULL or a handle not yet freed.
void uav_scene_free(struct UavScene *scene);

// Plans a mission. Returns `UAV_STATUS_INFEASIBLE` when no obstacle-free
// mission exists; the message names the failing endpoint or leg.
//
// # Safety
// `scene` must be a live handle; `out` must be a valid pointer.
enum UavStatus uav_plan(const struct UavScene *scene,
                        enum UavPlanMode mode,
                        struct UavMission **out);

// Mission length in meters; NaN for NULL.
//
// # Safety
// `mission` must be NULL or a live handle.
double uav_mission_length_m(const struct UavMission *mission);

// # Safety
// `mission` must be NULL or a live handle.
uintptr_t uav_mission_item_count(const struct UavMission *mission);

// # Safety
// `mission` must be a live handle; `out` must be a valid pointer.
enum UavStatus uav_mission_item(const struct UavMission *mission,
                                uintptr_t index,
                                struct UavMissionItem *out);

// Copies up to `capacity` target indices in visiting order into `out` and
// returns the total number of targets.
//
// # Safety
// `mission` must be a live handle; `out` must hold `capacity` elements (may
// be NULL when `capacity` is 0).
uintptr_t uav_mission_visit_order(const struct UavMission *mission,
                                  uintptr_t *out,
                                  uintptr_t capacity);

// Plan-file text of the mission. Free with `uav_string_free`.
//
// # Safety
// `mission` must be a live handle.
char *uav_mission_to_plan(const struct UavMission *mission);

// # Safety
// `mission` must be NULL or a handle not yet freed.
void uav_mission_free(struct UavMission *mission);

// Great-circle distance in meters (mean Earth radius).
double uav_haversine_m(double lat1, double lon1, double lat2, double lon2);

// KNN, DTW and sequential RMSE of `gen` against `reference`.
//
// # Safety
// `gen` and `reference` must point to `n_gen` / `n_ref` elements; `out` must be valid.
enum UavStatus uav_compare_trajectories(const struct UavLatLon *gen,
                                        uintptr_t n_gen,
                                        const struct UavLatLon *reference,
                                        uintptr_t n_ref,
                                        uintptr_t samples,
                                        struct UavErrors *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVPLAN_H */
