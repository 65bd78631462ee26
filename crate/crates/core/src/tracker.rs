//! The per-frame, time-budgeted tracking loop and the whole-sequence
//! driver.
//!
//! Each frame repeats {sample -> loss + gradient -> adam step} until its
//! budget runs out. In wall-clock mode the loop predicts the next
//! iteration's cost from the running mean of this frame's iteration times
//! and stops when it no longer fits (the first iteration always runs);
//! fixed-iteration mode is exact and deterministic. The estimate for frame
//! `i > 0` is initialized from estimate `i - 1`; ground truth is read only
//! for frame 0.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;

use crate::geometry::{Intrinsics, Pose};
use crate::optim::{
    adam_step, sdf_loss, vr_loss, AdamState, Budget, LossReport, TrackerConfig,
};
use crate::sampling::{build_point_set, sample_from_valid, RgbdFrame};
use crate::scene::SceneField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sdf,
    Vr,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sdf => "sdf",
            Method::Vr => "vr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sdf" => Ok(Method::Sdf),
            "vr" => Ok(Method::Vr),
            other => Err(format!("unknown method '{other}', expected 'sdf' or 'vr'")),
        }
    }
}

/// Outcome of tracking one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub frame_index: u32,
    pub pose: Pose,
    pub iterations: u32,
    pub queries: u64,
    pub elapsed_ms: f64,
    /// Loss of the last evaluated iteration; NaN when no iteration ran.
    pub final_loss: f64,
    /// The frame had no valid pixels and was skipped (pose carried forward).
    pub skipped: bool,
}

/// A whole-sequence tracking result.
#[derive(Debug, Clone)]
pub struct TrackingRun {
    pub method: Method,
    pub config: TrackerConfig,
    /// Tracking rate in Hz; informational when the budget is fixed-iteration.
    pub rate_hz: f64,
    pub frames: Vec<FrameResult>,
}

impl TrackingRun {
    pub fn poses(&self) -> impl Iterator<Item = (u32, Pose)> + '_ {
        self.frames.iter().map(|f| (f.frame_index, f.pose))
    }
}

fn evaluate(
    field: &dyn SceneField,
    pose: &Pose,
    frame: &RgbdFrame,
    valid: &[(u32, u32)],
    intrinsics: &Intrinsics,
    method: Method,
    cfg: &TrackerConfig,
    rng: &mut impl Rng,
) -> LossReport {
    match method {
        Method::Sdf => {
            let pixels = sample_from_valid(valid, cfg.n, rng).expect("non-empty valid list");
            let samples = build_point_set(frame, intrinsics, &pixels)
                .expect("valid pixels backproject");
            sdf_loss(field, pose, &samples, cfg)
        }
        Method::Vr => {
            let pixels =
                sample_from_valid(valid, cfg.vr.n_pixels, rng).expect("non-empty valid list");
            vr_loss(field, pose, intrinsics, &pixels, frame, cfg, rng)
        }
    }
}

/// Optimizes one frame's pose from `init` under the configured budget.
/// Returns the last iterate (no best-loss backtracking). Adam state starts
/// fresh for every frame.
pub fn track_frame(
    field: &dyn SceneField,
    init: &Pose,
    frame: &RgbdFrame,
    intrinsics: &Intrinsics,
    method: Method,
    cfg: &TrackerConfig,
    rng: &mut impl Rng,
) -> FrameResult {
    let start = Instant::now();
    let queries_before = field.query_count();
    let valid = frame.valid_pixels();
    if valid.is_empty() {
        return FrameResult {
            frame_index: frame.frame_index,
            pose: *init,
            iterations: 0,
            queries: 0,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            final_loss: f64::NAN,
            skipped: true,
        };
    }

    let mut pose = *init;
    let mut state = AdamState::new();
    let mut iterations = 0u32;
    let mut final_loss = f64::NAN;
    let mut iter_time_sum = 0.0f64;

    loop {
        match cfg.budget {
            Budget::FixedIterations(cap) => {
                if iterations >= cap {
                    break;
                }
            }
            Budget::WallClockMs(budget_ms) => {
                if iterations > 0 {
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    let predicted = iter_time_sum / iterations as f64;
                    if elapsed + predicted > budget_ms {
                        break;
                    }
                }
            }
        }
        let iter_start = Instant::now();
        let report = evaluate(field, &pose, frame, &valid, intrinsics, method, cfg, rng);
        final_loss = report.total;
        pose = match adam_step(&mut state, &pose, &report.g_t, &report.g_q, cfg) {
            Ok(p) => p,
            // diverged quaternion: stop iterating, keep the last valid pose
            Err(_) => break,
        };
        iterations += 1;
        iter_time_sum += iter_start.elapsed().as_secs_f64() * 1e3;
    }

    FrameResult {
        frame_index: frame.frame_index,
        pose,
        iterations,
        queries: field.query_count() - queries_before,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        final_loss,
        skipped: false,
    }
}

/// Tracks a whole sequence. `initial_pose` is the known ground-truth pose of
/// frame 0; every later frame is initialized from the previous estimate.
/// Frames are processed in order with a single rng stream, so fixed-iteration
/// runs are bitwise reproducible given the seed.
pub fn track_sequence(
    field: &dyn SceneField,
    frames: &[RgbdFrame],
    intrinsics: &Intrinsics,
    initial_pose: &Pose,
    method: Method,
    cfg: &TrackerConfig,
    rate_hz: f64,
    rng: &mut impl Rng,
) -> TrackingRun {
    assert!(!frames.is_empty(), "sequence must contain at least one frame");
    let mut results: Vec<FrameResult> = Vec::with_capacity(frames.len());
    let mut pose = *initial_pose;
    for frame in frames {
        let result = track_frame(field, &pose, frame, intrinsics, method, cfg, rng);
        pose = result.pose;
        results.push(result);
    }
    TrackingRun { method, config: cfg.clone(), rate_hz, frames: results }
}
