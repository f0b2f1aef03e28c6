use std::ffi::{CStr, CString};
use std::ptr;

use uavplan_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(uav_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn generated(seed: u64) -> *mut UavScene {
    let mut p = uav_gen_params_default();
    p.seed = seed;
    let mut scene = ptr::null_mut();
    assert_eq!(
        unsafe { uav_scene_generate(&p, &mut scene) },
        UavStatus::Ok,
        "{}",
        last_error()
    );
    assert!(!scene.is_null());
    scene
}

#[test]
fn generate_plan_and_read_back() {
    unsafe {
        let scene = generated(5);
        assert_eq!(uav_scene_target_count(scene), 8);
        let mut hybrid = ptr::null_mut();
        let mut seq = ptr::null_mut();
        assert_eq!(uav_plan(scene, UavPlanMode::Hybrid, &mut hybrid), UavStatus::Ok);
        assert_eq!(uav_plan(scene, UavPlanMode::AstarSeq, &mut seq), UavStatus::Ok);
        assert!(uav_mission_length_m(hybrid) <= uav_mission_length_m(seq) + 1e-6);

        let n = uav_mission_item_count(hybrid);
        let mut first = UavMissionItem {
            kind: 9,
            lat: 0.0,
            lon: 0.0,
            alt_m: 0.0,
        };
        let mut last = first;
        assert_eq!(uav_mission_item(hybrid, 0, &mut first), UavStatus::Ok);
        assert_eq!(uav_mission_item(hybrid, n - 1, &mut last), UavStatus::Ok);
        assert_eq!((first.kind, last.kind), (0, 3));
        assert_eq!((first.lat, first.lon), (last.lat, last.lon));
        assert_eq!(uav_mission_item(hybrid, n, &mut last), UavStatus::OutOfRange);
        assert!(last_error().contains(&format!("of {n}")));

        let mut order = [usize::MAX; 8];
        assert_eq!(
            uav_mission_visit_order(hybrid, order.as_mut_ptr(), order.len()),
            8
        );
        let mut sorted = order;
        sorted.sort();
        assert_eq!(sorted, [0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(uav_mission_visit_order(hybrid, ptr::null_mut(), 0), 8);

        let text = uav_mission_to_plan(hybrid);
        let plan = CStr::from_ptr(text).to_str().unwrap().to_owned();
        uav_string_free(text);
        assert!(plan.starts_with("UAVVLPA PLAN 1\n"));
        assert_eq!(plan.lines().count(), n + 2);

        uav_mission_free(hybrid);
        uav_mission_free(seq);
        uav_scene_free(scene);
    }
}

#[test]
fn scene_json_round_trip() {
    unsafe {
        let scene = generated(9);
        let json = uav_scene_to_json(scene);
        assert!(!json.is_null());
        let mut back = ptr::null_mut();
        assert_eq!(uav_scene_from_json(json, &mut back), UavStatus::Ok);
        let again = uav_scene_to_json(back);
        assert_eq!(CStr::from_ptr(json), CStr::from_ptr(again));
        uav_string_free(json);
        uav_string_free(again);
        uav_scene_free(back);
        uav_scene_free(scene);
    }
}

#[test]
fn errors_are_reported_by_status() {
    unsafe {
        let mut scene = ptr::null_mut();
        assert_eq!(
            uav_scene_from_json(ptr::null(), &mut scene),
            UavStatus::NullPointer
        );
        let bad = CString::new("{\"schema_version\": 2}").unwrap();
        assert_eq!(
            uav_scene_from_json(bad.as_ptr(), &mut scene),
            UavStatus::ParseError
        );
        assert!(scene.is_null());
        assert!(!last_error().is_empty());

        let mut p = uav_gen_params_default();
        p.min_obstacle_px = 90.0;
        p.max_obstacle_px = 10.0;
        assert_ne!(uav_scene_generate(&p, &mut scene), UavStatus::Ok);

        let mut m = ptr::null_mut();
        assert_eq!(
            uav_plan(ptr::null(), UavPlanMode::Hybrid, &mut m),
            UavStatus::NullPointer
        );
        assert!(uav_mission_length_m(ptr::null()).is_nan());
        assert_eq!(uav_mission_item_count(ptr::null()), 0);
        uav_scene_free(ptr::null_mut());
        uav_mission_free(ptr::null_mut());
    }
}

#[test]
fn enclosed_target_is_infeasible() {
    let json = r#"{
      "schema_version": 1,
      "name": "ring",
      "image": {"width_px": 200, "height_px": 200},
      "transform": {"origin_lat": 40.0, "origin_lon": -100.0, "deg_per_px_x": 0.00001, "deg_per_px_y": 0.00001},
      "home": {"x": 20.0, "y": 20.0},
      "targets": [{"x": 150.0, "y": 150.0}],
      "obstacles": [
        {"kind": "polygon", "vertices": [{"x":120,"y":120},{"x":180,"y":120},{"x":180,"y":125},{"x":120,"y":125}]},
        {"kind": "polygon", "vertices": [{"x":120,"y":175},{"x":180,"y":175},{"x":180,"y":180},{"x":120,"y":180}]},
        {"kind": "polygon", "vertices": [{"x":120,"y":120},{"x":125,"y":120},{"x":125,"y":180},{"x":120,"y":180}]},
        {"kind": "polygon", "vertices": [{"x":175,"y":120},{"x":180,"y":120},{"x":180,"y":180},{"x":175,"y":180}]}
      ]
    }"#;
    let json = CString::new(json).unwrap();
    unsafe {
        let mut scene = ptr::null_mut();
        assert_eq!(
            uav_scene_from_json(json.as_ptr(), &mut scene),
            UavStatus::Ok,
            "{}",
            last_error()
        );
        let mut m = ptr::null_mut();
        assert_eq!(
            uav_plan(scene, UavPlanMode::Hybrid, &mut m),
            UavStatus::Infeasible
        );
        assert!(m.is_null());
        assert!(last_error().contains("target 0"), "{}", last_error());
        assert_eq!(uav_plan(scene, UavPlanMode::TspEuclid, &mut m), UavStatus::Ok);
        uav_mission_free(m);
        uav_scene_free(scene);
    }
}

#[test]
fn distance_and_metrics() {
    assert_eq!(uav_haversine_m(1.0, 2.0, 1.0, 2.0), 0.0);
    assert!((uav_haversine_m(0.0, 0.0, 0.0, 1.0) - 111195.08).abs() < 0.01);
    let pts: Vec<UavLatLon> = (0..10)
        .map(|k| UavLatLon {
            lat: 40.0,
            lon: -100.0 + k as f64 * 1e-4,
        })
        .collect();
    let mut e = UavErrors::default();
    let s =
        unsafe { uav_compare_trajectories(pts.as_ptr(), pts.len(), pts.as_ptr(), pts.len(), 200, &mut e) };
    assert_eq!(s, UavStatus::Ok);
    assert_eq!((e.knn_m, e.dtw_m, e.seq_m), (0.0, 0.0, 0.0));
    let s = unsafe { uav_compare_trajectories(pts.as_ptr(), 0, pts.as_ptr(), 3, 200, &mut e) };
    assert_eq!(s, UavStatus::InvalidArgument);
    let s = unsafe { uav_compare_trajectories(pts.as_ptr(), 3, pts.as_ptr(), 3, 1, &mut e) };
    assert_eq!(s, UavStatus::InvalidArgument);
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/uavplan.h");
    for sym in [
        "UAVPLAN_H",
        "typedef struct UavScene UavScene",
        "typedef struct UavMission UavMission",
        "UAV_STATUS_INFEASIBLE",
        "UAV_PLAN_MODE_HYBRID",
        "uav_scene_from_json",
        "uav_scene_generate",
        "uav_plan(",
        "uav_mission_item(",
        "uav_mission_to_plan",
        "uav_compare_trajectories",
        "uav_last_error",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
    let version = unsafe { CStr::from_ptr(uav_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}
