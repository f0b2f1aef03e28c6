//! C ABI over `uavplan`.
//!
//! Scenes and missions are opaque handles owned by the caller and released
//! with `uav_scene_free` / `uav_mission_free`. Fallible calls return a
//! [`UavStatus`]; the message for the most recent failure on the calling
//! thread is available from [`uav_last_error`]. Strings returned by this
//! library must be released with [`uav_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uavplan::geo::{haversine_m, GeoPoint};
use uavplan::metrics::{self, Trajectory};
use uavplan::planner::{self, ItemKind, Mission, PlanMode, PlanOptions, Scene};
use uavplan::scene_io::{self, GenParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    /// No obstacle-free mission exists (blocked endpoint or unreachable leg).
    Infeasible = 5,
    OutOfRange = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavPlanMode {
    TspEuclid = 0,
    AstarSeq = 1,
    Hybrid = 2,
    /// Straight legs in detection order.
    Reference = 3,
}

impl From<UavPlanMode> for PlanMode {
    fn from(m: UavPlanMode) -> Self {
        match m {
            UavPlanMode::TspEuclid => PlanMode::TspEuclid,
            UavPlanMode::AstarSeq => PlanMode::AstarSeq,
            UavPlanMode::Hybrid => PlanMode::Hybrid,
            UavPlanMode::Reference => PlanMode::InputOrder,
        }
    }
}

/// 0 takeoff, 1 waypoint, 2 path point, 3 return-to-land.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavMissionItem {
    pub kind: u32,
    pub lat: f64,
    pub lon: f64,
    pub alt_m: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavLatLon {
    pub lat: f64,
    pub lon: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UavErrors {
    pub knn_m: f64,
    pub dtw_m: f64,
    pub seq_m: f64,
}

/// Synthetic scene parameters; start from `uav_gen_params_default()`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavGenParams {
    pub seed: u64,
    pub width_px: u32,
    pub height_px: u32,
    pub cell_size_px: u32,
    pub n_targets: u32,
    pub n_obstacles: u32,
    pub disc_fraction: f64,
    pub min_obstacle_px: f64,
    pub max_obstacle_px: f64,
    pub clearance_px: f64,
    pub altitude_m: f64,
}

impl From<&UavGenParams> for GenParams {
    fn from(p: &UavGenParams) -> Self {
        GenParams {
            seed: p.seed,
            width_px: p.width_px,
            height_px: p.height_px,
            cell_size_px: p.cell_size_px,
            n_targets: p.n_targets as usize,
            n_obstacles: p.n_obstacles as usize,
            disc_fraction: p.disc_fraction,
            min_obstacle_px: p.min_obstacle_px,
            max_obstacle_px: p.max_obstacle_px,
            clearance_px: p.clearance_px,
            altitude_m: p.altitude_m,
            ..GenParams::default()
        }
    }
}

/// Opaque scene handle.
pub struct UavScene(Scene);

/// Opaque mission handle.
pub struct UavMission(Mission);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> UavStatus) -> UavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            UavStatus::Internal
        }
    }
}

fn fail(status: UavStatus, msg: impl Into<String>) -> UavStatus {
    set_error(msg);
    status
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, UavStatus> {
    if s.is_null() {
        return Err(fail(UavStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(UavStatus::InvalidUtf8, "string is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message describing the last failure on this thread. Valid until the next
/// failing call on the same thread; never NULL.
#[no_mangle]
pub extern "C" fn uav_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uav_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON scene document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uav_scene_from_json(json: *const c_char, out: *mut *mut UavScene) -> UavStatus {
    guard(|| {
        if out.is_null() {
            return fail(UavStatus::NullPointer, "out is null");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match scene_io::load_scene(text) {
            Ok(scene) => {
                *out = Box::into_raw(Box::new(UavScene(scene)));
                UavStatus::Ok
            }
            Err(e) => fail(UavStatus::ParseError, e.to_string()),
        }
    })
}

/// Default synthetic scene parameters.
#[no_mangle]
pub extern "C" fn uav_gen_params_default() -> UavGenParams {
    let d = GenParams::default();
    UavGenParams {
        seed: d.seed,
        width_px: d.width_px,
        height_px: d.height_px,
        cell_size_px: d.cell_size_px,
        n_targets: d.n_targets as u32,
        n_obstacles: d.n_obstacles as u32,
        disc_fraction: d.disc_fraction,
        min_obstacle_px: d.min_obstacle_px,
        max_obstacle_px: d.max_obstacle_px,
        clearance_px: d.clearance_px,
        altitude_m: d.altitude_m,
    }
}

/// Generates a seeded synthetic scene.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn uav_scene_generate(
    params: *const UavGenParams,
    out: *mut *mut UavScene,
) -> UavStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(UavStatus::NullPointer, "params or out is null");
        }
        match scene_io::generate_scene(&GenParams::from(&*params)) {
            Ok(scene) => {
                *out = Box::into_raw(Box::new(UavScene(scene)));
                UavStatus::Ok
            }
            Err(e) => fail(UavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Serializes a scene to JSON; NULL on failure. Free with `uav_string_free`.
///
/// # Safety
/// `scene` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uav_scene_to_json(scene: *const UavScene) -> *mut c_char {
    if scene.is_null() {
        set_error("scene is null");
        return ptr::null_mut();
    }
    into_c_string(scene_io::save_scene(&(*scene).0))
}

/// Number of targets in the scene, 0 for NULL.
///
/// # Safety
/// `scene` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uav_scene_target_count(scene: *const UavScene) -> usize {
    scene.as_ref().map_or(0, |s| s.0.targets.len())
}

/// # Safety
/// `scene` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uav_scene_free(scene: *mut UavScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Plans a mission. Returns `UAV_STATUS_INFEASIBLE` when no obstacle-free
/// mission exists; the message names the failing endpoint or leg.
///
/// # Safety
/// `scene` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uav_plan(
    scene: *const UavScene,
    mode: UavPlanMode,
    out: *mut *mut UavMission,
) -> UavStatus {
    guard(|| {
        if scene.is_null() || out.is_null() {
            return fail(UavStatus::NullPointer, "scene or out is null");
        }
        match planner::plan(&(*scene).0, mode.into(), &PlanOptions::default()) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(UavMission(m)));
                UavStatus::Ok
            }
            Err(e) if e.is_infeasible() => fail(UavStatus::Infeasible, e.to_string()),
            Err(e) => fail(UavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Mission length in meters; NaN for NULL.
///
/// # Safety
/// `mission` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uav_mission_length_m(mission: *const UavMission) -> f64 {
    mission.as_ref().map_or(f64::NAN, |m| m.0.length_m)
}

/// # Safety
/// `mission` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uav_mission_item_count(mission: *const UavMission) -> usize {
    mission.as_ref().map_or(0, |m| m.0.items.len())
}

/// # Safety
/// `mission` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uav_mission_item(
    mission: *const UavMission,
    index: usize,
    out: *mut UavMissionItem,
) -> UavStatus {
    guard(|| {
        let Some(m) = mission.as_ref() else {
            return fail(UavStatus::NullPointer, "mission is null");
        };
        if out.is_null() {
            return fail(UavStatus::NullPointer, "out is null");
        }
        let Some(it) = m.0.items.get(index) else {
            return fail(
                UavStatus::OutOfRange,
                format!("item {index} of {}", m.0.items.len()),
            );
        };
        *out = UavMissionItem {
            kind: match it.kind {
                ItemKind::Takeoff => 0,
                ItemKind::Waypoint => 1,
                ItemKind::PathPoint => 2,
                ItemKind::ReturnToLand => 3,
            },
            lat: it.geo.lat,
            lon: it.geo.lon,
            alt_m: it.alt_m,
        };
        UavStatus::Ok
    })
}

/// Copies up to `capacity` target indices in visiting order into `out` and
/// returns the total number of targets.
///
/// # Safety
/// `mission` must be a live handle; `out` must hold `capacity` elements (may
/// be NULL when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn uav_mission_visit_order(
    mission: *const UavMission,
    out: *mut usize,
    capacity: usize,
) -> usize {
    let Some(m) = mission.as_ref() else {
        return 0;
    };
    let order = &m.0.visit_order;
    if !out.is_null() {
        let n = order.len().min(capacity);
        ptr::copy_nonoverlapping(order.as_ptr(), out, n);
    }
    order.len()
}

/// Plan-file text of the mission. Free with `uav_string_free`.
///
/// # Safety
/// `mission` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uav_mission_to_plan(mission: *const UavMission) -> *mut c_char {
    match mission.as_ref() {
        Some(m) => into_c_string(scene_io::save_mission(&m.0)),
        None => {
            set_error("mission is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `mission` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uav_mission_free(mission: *mut UavMission) {
    if !mission.is_null() {
        drop(Box::from_raw(mission));
    }
}

/// Great-circle distance in meters (mean Earth radius).
#[no_mangle]
pub extern "C" fn uav_haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    haversine_m(
        GeoPoint { lat: lat1, lon: lon1 },
        GeoPoint { lat: lat2, lon: lon2 },
    )
}

unsafe fn trajectory(points: *const UavLatLon, n: usize) -> Result<Trajectory, UavStatus> {
    if points.is_null() {
        return Err(fail(UavStatus::NullPointer, "points is null"));
    }
    let pts = std::slice::from_raw_parts(points, n)
        .iter()
        .map(|p| GeoPoint::new(p.lat, p.lon))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(UavStatus::InvalidArgument, e.to_string()))?;
    Trajectory::new(pts).map_err(|e| fail(UavStatus::InvalidArgument, e.to_string()))
}

/// KNN, DTW and sequential RMSE of `gen` against `reference`.
///
/// # Safety
/// `gen` and `reference` must point to `n_gen` / `n_ref` elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uav_compare_trajectories(
    gen: *const UavLatLon,
    n_gen: usize,
    reference: *const UavLatLon,
    n_ref: usize,
    samples: usize,
    out: *mut UavErrors,
) -> UavStatus {
    guard(|| {
        if out.is_null() {
            return fail(UavStatus::NullPointer, "out is null");
        }
        let (g, r) = match (trajectory(gen, n_gen), trajectory(reference, n_ref)) {
            (Ok(g), Ok(r)) => (g, r),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match metrics::compare(&g, &r, samples) {
            Ok(e) => {
                *out = UavErrors {
                    knn_m: e.knn_m,
                    dtw_m: e.dtw_m,
                    seq_m: e.seq_m,
                };
                UavStatus::Ok
            }
            Err(e) => fail(UavStatus::InvalidArgument, e.to_string()),
        }
    })
}
