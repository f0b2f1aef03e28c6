/* Generates a scene, plans it, and prints the plan file.
 *
 *   cargo build -p uavplan-ffi --release
 *   cc crates/ffi/examples/smoke.c -Icrates/ffi/include \
 *      target/release/libuavplan_ffi.a -lpthread -ldl -lm -o smoke
 */
#include <stdio.h>
#include "uavplan.h"

int main(void) {
    UavGenParams p = uav_gen_params_default();
    p.seed = 42;
    UavScene *scene = NULL;
    if (uav_scene_generate(&p, &scene) != UAV_STATUS_OK) {
        fprintf(stderr, "generate: %s\n", uav_last_error());
        return 1;
    }
    UavMission *mission = NULL;
    UavStatus s = uav_plan(scene, UAV_PLAN_MODE_HYBRID, &mission);
    if (s != UAV_STATUS_OK) {
        fprintf(stderr, "plan: %s\n", uav_last_error());
        uav_scene_free(scene);
        return s == UAV_STATUS_INFEASIBLE ? 2 : 1;
    }
    char *plan = uav_mission_to_plan(mission);
    fputs(plan, stdout);
    uav_string_free(plan);
    uav_mission_free(mission);
    uav_scene_free(scene);
    return 0;
}
