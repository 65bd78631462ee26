//! C ABI for the sdftrack library: opaque scene handles, status codes and
//! one-shot tracking/evaluation entry points.
//!
//! The header `include/sdftrack.h` is generated at build time by cbindgen.
//! Conventions:
//!
//! - Every fallible function returns an [`StStatus`]; `Ok` is 0.
//! - On failure, a thread-local message with details is available via
//!   [`st_last_error_message`] until the next call on the same thread.
//! - `StScene` is an opaque handle created by [`st_scene_load`] or
//!   [`st_scene_bake`] and released with [`st_scene_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdftrack::eval::{ate_rmse, Trajectory};
use sdftrack::io::{load_dataset, read_tum, write_tum, RunConfig};
use sdftrack::optim::Budget;
use sdftrack::scene::{bake_grid, load_scene_file, CsgUnion, GridField, SceneField};
use sdftrack::tracker::{track_sequence, Method};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    NoValidPixels = 6,
    DegenerateQuaternion = 7,
    Internal = 8,
}

/// Tracking method selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StMethod {
    Sdf = 0,
    Vr = 1,
}

/// Per-frame budget mode for [`st_track_sequence`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StBudgetMode {
    FixedIterations = 0,
    WallClockMs = 1,
}

/// Opaque scene handle: either an analytic union or a baked grid.
pub struct StScene {
    field: SceneImpl,
}

enum SceneImpl {
    Union(CsgUnion),
    Grid(GridField),
}

impl StScene {
    fn field(&self) -> &dyn SceneField {
        match &self.field {
            SceneImpl::Union(u) => u,
            SceneImpl::Grid(g) => g,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(msg).unwrap_or_else(|_| CString::new("error").unwrap());
    });
}

fn fail(status: StStatus, msg: impl Into<String>) -> StStatus {
    set_error(msg);
    status
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn st_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn cstr_arg(ptr: *const c_char, what: &str) -> Result<String, StStatus> {
    if ptr.is_null() {
        set_error(format!("{what} is NULL"));
        return Err(StStatus::NullPointer);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(|s| s.to_string())
        .map_err(|_| {
            set_error(format!("{what} is not valid UTF-8"));
            StStatus::InvalidUtf8
        })
}

/// Parses a scene description file into an opaque handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_scene` a valid pointer;
/// the returned handle must be released with [`st_scene_free`].
#[no_mangle]
pub unsafe extern "C" fn st_scene_load(
    path: *const c_char,
    out_scene: *mut *mut StScene,
) -> StStatus {
    if out_scene.is_null() {
        return fail(StStatus::NullPointer, "out_scene is NULL");
    }
    let path = match cstr_arg(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    match load_scene_file(Path::new(&path)) {
        Ok(scene) => {
            *out_scene = Box::into_raw(Box::new(StScene { field: SceneImpl::Union(scene) }));
            StStatus::Ok
        }
        Err(e) => fail(StStatus::Parse, e.to_string()),
    }
}

/// Bakes an existing scene into a trilinear grid spanning `[min, max]`
/// (two 3-vectors) with `dims` nodes per axis (three values, each >= 2).
///
/// # Safety
/// `scene` must be a live handle; `min`, `max` point to 3 doubles each,
/// `dims` to 3 uint32 values, and `out_scene` must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_scene_bake(
    scene: *const StScene,
    min: *const f64,
    max: *const f64,
    dims: *const u32,
    out_scene: *mut *mut StScene,
) -> StStatus {
    if scene.is_null() || min.is_null() || max.is_null() || dims.is_null() || out_scene.is_null()
    {
        return fail(StStatus::NullPointer, "st_scene_bake received a NULL pointer");
    }
    let scene = &*scene;
    let lo = Vector3::new(*min, *min.add(1), *min.add(2));
    let hi = Vector3::new(*max, *max.add(1), *max.add(2));
    let dims = [*dims as usize, *dims.add(1) as usize, *dims.add(2) as usize];
    match bake_grid(scene.field(), lo, hi, dims) {
        Ok(grid) => {
            *out_scene = Box::into_raw(Box::new(StScene { field: SceneImpl::Grid(grid) }));
            StStatus::Ok
        }
        Err(e) => fail(StStatus::InvalidArgument, e.to_string()),
    }
}

/// Queries color and signed distance at a world point. `out_color` receives
/// 3 doubles, `out_sdf` one double; `out_out_of_bounds` (nullable) is set to
/// 1 when a grid query clamped.
///
/// # Safety
/// `scene` must be a live handle and the output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn st_scene_query(
    scene: *const StScene,
    x: f64,
    y: f64,
    z: f64,
    out_color: *mut f64,
    out_sdf: *mut f64,
    out_out_of_bounds: *mut u8,
) -> StStatus {
    if scene.is_null() || out_color.is_null() || out_sdf.is_null() {
        return fail(StStatus::NullPointer, "st_scene_query received a NULL pointer");
    }
    let sample = (*scene).field().query(Vector3::new(x, y, z));
    for ch in 0..3 {
        *out_color.add(ch) = sample.color[ch];
    }
    *out_sdf = sample.sdf;
    if !out_out_of_bounds.is_null() {
        *out_out_of_bounds = sample.out_of_bounds as u8;
    }
    StStatus::Ok
}

/// Spatial gradient of the signed distance at a world point; `out_gradient`
/// receives 3 doubles.
///
/// # Safety
/// `scene` must be a live handle and `out_gradient` valid for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn st_scene_gradient(
    scene: *const StScene,
    x: f64,
    y: f64,
    z: f64,
    out_gradient: *mut f64,
) -> StStatus {
    if scene.is_null() || out_gradient.is_null() {
        return fail(StStatus::NullPointer, "st_scene_gradient received a NULL pointer");
    }
    let g = (*scene).field().gradient(Vector3::new(x, y, z));
    for i in 0..3 {
        *out_gradient.add(i) = g[i];
    }
    StStatus::Ok
}

/// Number of `query` calls issued against this handle since creation.
///
/// # Safety
/// `scene` must be a live handle and `out_count` valid.
#[no_mangle]
pub unsafe extern "C" fn st_scene_query_count(
    scene: *const StScene,
    out_count: *mut u64,
) -> StStatus {
    if scene.is_null() || out_count.is_null() {
        return fail(StStatus::NullPointer, "st_scene_query_count received a NULL pointer");
    }
    *out_count = (*scene).field().query_count();
    StStatus::Ok
}

/// Releases a scene handle. NULL is a no-op.
///
/// # Safety
/// `scene` must be NULL or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn st_scene_free(scene: *mut StScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Tracks a dataset end to end and writes the estimated trajectory in TUM
/// format. The dataset's manifest must reference its scene file.
/// `config_path` (nullable) supplies tracker hyperparameters; the budget
/// arguments override it.
///
/// # Safety
/// String arguments must be NUL-terminated; `config_path` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn st_track_sequence(
    dataset_dir: *const c_char,
    method: StMethod,
    budget_mode: StBudgetMode,
    budget_value: f64,
    seed: u64,
    out_tum_path: *const c_char,
    config_path: *const c_char,
) -> StStatus {
    let dataset_dir = match cstr_arg(dataset_dir, "dataset_dir") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let out_path = match cstr_arg(out_tum_path, "out_tum_path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let config = if config_path.is_null() {
        RunConfig::default()
    } else {
        let path = match cstr_arg(config_path, "config_path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match RunConfig::read_from(Path::new(&path)) {
            Ok(c) => c,
            Err(e) => return fail(StStatus::Parse, e.to_string()),
        }
    };

    let result = catch_unwind(AssertUnwindSafe(|| {
        let mut tracker_cfg = config.tracker.clone();
        tracker_cfg.budget = match budget_mode {
            StBudgetMode::FixedIterations => {
                if budget_value < 0.0 || budget_value.fract() != 0.0 {
                    return fail(
                        StStatus::InvalidArgument,
                        format!(
                            "fixed iteration budget must be a non-negative integer, got {budget_value}"
                        ),
                    );
                }
                Budget::FixedIterations(budget_value as u32)
            }
            StBudgetMode::WallClockMs => {
                if !(budget_value > 0.0) {
                    return fail(
                        StStatus::InvalidArgument,
                        format!("wall-clock budget must be positive, got {budget_value}"),
                    );
                }
                Budget::WallClockMs(budget_value)
            }
        };
        if let Err(e) = tracker_cfg.validate() {
            return fail(StStatus::InvalidArgument, e.to_string());
        }
        let dataset = match load_dataset(Path::new(&dataset_dir)) {
            Ok(d) => d,
            Err(e) => return fail(StStatus::Io, e.to_string()),
        };
        let scene_path = match &dataset.scene_path {
            Some(p) => p.clone(),
            None => {
                return fail(
                    StStatus::InvalidArgument,
                    format!("dataset {dataset_dir} has no scene file in its manifest"),
                )
            }
        };
        let scene = match load_scene_file(&scene_path) {
            Ok(s) => s,
            Err(e) => return fail(StStatus::Parse, e.to_string()),
        };
        let initial = match dataset.groundtruth.first_pose() {
            Some(p) => *p,
            None => return fail(StStatus::InvalidArgument, "dataset ground truth is empty"),
        };
        let method = match method {
            StMethod::Sdf => Method::Sdf,
            StMethod::Vr => Method::Vr,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let run = track_sequence(
            &scene,
            &dataset.frames,
            &dataset.intrinsics,
            &initial,
            method,
            &tracker_cfg,
            dataset.manifest.rate_hz,
            &mut rng,
        );
        let traj = Trajectory::from_run(&run);
        match write_tum(Path::new(&out_path), &traj, dataset.manifest.rate_hz) {
            Ok(()) => StStatus::Ok,
            Err(e) => fail(StStatus::Io, e.to_string()),
        }
    }));
    match result {
        Ok(status) => status,
        Err(_) => fail(StStatus::Internal, "internal panic in st_track_sequence"),
    }
}

/// Computes the ATE RMSE between two TUM trajectory files. `out_failed`
/// (nullable) receives 1 when the error exceeds `failure_threshold`.
///
/// # Safety
/// Path arguments must be NUL-terminated strings; `out_ate_rmse` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn st_ate_rmse(
    est_path: *const c_char,
    gt_path: *const c_char,
    failure_threshold: f64,
    out_ate_rmse: *mut f64,
    out_failed: *mut u8,
) -> StStatus {
    if out_ate_rmse.is_null() {
        return fail(StStatus::NullPointer, "out_ate_rmse is NULL");
    }
    let est_path = match cstr_arg(est_path, "est_path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let gt_path = match cstr_arg(gt_path, "gt_path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let est = match read_tum(Path::new(&est_path)) {
        Ok(t) => t,
        Err(e) => return fail(StStatus::Io, e.to_string()),
    };
    let gt = match read_tum(Path::new(&gt_path)) {
        Ok(t) => t,
        Err(e) => return fail(StStatus::Io, e.to_string()),
    };
    match ate_rmse(&est, &gt, failure_threshold) {
        Ok(report) => {
            *out_ate_rmse = report.ate_rmse;
            if !out_failed.is_null() {
                *out_failed = report.failed as u8;
            }
            StStatus::Ok
        }
        Err(e) => fail(StStatus::InvalidArgument, e.to_string()),
    }
}
