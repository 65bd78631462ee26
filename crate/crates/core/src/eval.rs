//! Trajectory-error computation and benchmark report generation.
//!
//! The absolute trajectory error is the RMS of per-frame translation
//! errors, computed without any alignment step: the tracker is handed the
//! true initial pose, so both trajectories already share the world frame,
//! and aligning would hide initialization-anchored drift.

use std::fmt;

use crate::geometry::{geodesic_rotation_error, Pose};
use crate::optim::Budget;
use crate::tracker::{Method, TrackingRun};

/// ATE above this flags a failed run (Table-style reporting).
pub const DEFAULT_FAILURE_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// Estimated and ground-truth trajectories cover different frames.
    FrameMismatch { detail: String },
    NonIncreasingIndices { at: usize },
    Empty,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::FrameMismatch { detail } => write!(f, "frame mismatch: {detail}"),
            EvalError::NonIncreasingIndices { at } => {
                write!(f, "trajectory frame indices must strictly increase (entry {at})")
            }
            EvalError::Empty => write!(f, "trajectory is empty"),
        }
    }
}

impl std::error::Error for EvalError {}

/// An ordered list of `(frame_index, pose)` with strictly increasing
/// indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    entries: Vec<(u32, Pose)>,
}

impl Trajectory {
    pub fn new(entries: Vec<(u32, Pose)>) -> Result<Trajectory, EvalError> {
        for (i, pair) in entries.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(EvalError::NonIncreasingIndices { at: i + 1 });
            }
        }
        Ok(Trajectory { entries })
    }

    pub fn from_run(run: &TrackingRun) -> Trajectory {
        Trajectory { entries: run.poses().collect() }
    }

    pub fn entries(&self) -> &[(u32, Pose)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_pose(&self) -> Option<&Pose> {
        self.entries.first().map(|(_, p)| p)
    }
}

/// Trajectory error summary.
#[derive(Debug, Clone, PartialEq)]
pub struct AteReport {
    /// Root-mean-square of per-frame translation errors, meters.
    pub ate_rmse: f64,
    pub per_frame_errors: Vec<f64>,
    pub max_error: f64,
    pub failure_threshold: f64,
    /// `ate_rmse > failure_threshold`.
    pub failed: bool,
    /// Mean geodesic rotation error in radians (diagnostic only; the ATE
    /// itself is translation-only).
    pub mean_rotation_error: f64,
}

/// Computes the ATE between an estimated and a ground-truth trajectory
/// covering identical frame-index sets. No alignment is applied.
pub fn ate_rmse(
    est: &Trajectory,
    gt: &Trajectory,
    failure_threshold: f64,
) -> Result<AteReport, EvalError> {
    if est.is_empty() || gt.is_empty() {
        return Err(EvalError::Empty);
    }
    if est.len() != gt.len() {
        return Err(EvalError::FrameMismatch {
            detail: format!("{} estimated vs {} ground-truth frames", est.len(), gt.len()),
        });
    }
    let mut sq_sum = 0.0;
    let mut rot_sum = 0.0;
    let mut per_frame = Vec::with_capacity(est.len());
    let mut max_error = 0.0f64;
    for ((ei, ep), (gi, gp)) in est.entries.iter().zip(gt.entries.iter()) {
        if ei != gi {
            return Err(EvalError::FrameMismatch {
                detail: format!("estimate has frame {ei} where ground truth has {gi}"),
            });
        }
        let err = (ep.t - gp.t).norm();
        sq_sum += err * err;
        max_error = max_error.max(err);
        per_frame.push(err);
        rot_sum += geodesic_rotation_error(&ep.q, &gp.q);
    }
    let m = est.len() as f64;
    let ate = (sq_sum / m).sqrt();
    Ok(AteReport {
        ate_rmse: ate,
        per_frame_errors: per_frame,
        max_error,
        failure_threshold,
        failed: ate > failure_threshold,
        mean_rotation_error: rot_sum / m,
    })
}

/// One row of the iteration-count report: per (method, n, budget), the mean
/// iterations per frame and mean field queries per iteration. Wall-clock
/// time per iteration is carried separately because it is hardware-bound
/// and must stay out of deterministic outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub method: Method,
    pub n: usize,
    pub budget: Budget,
    pub mean_iterations: f64,
    pub mean_queries_per_iteration: f64,
    pub mean_ms_per_iteration: f64,
}

/// Aggregates per-run iteration statistics, one row per run.
pub fn iteration_report(runs: &[TrackingRun]) -> Vec<IterationRow> {
    runs.iter()
        .map(|run| {
            let frames = run.frames.len().max(1) as f64;
            let total_iters: u64 = run.frames.iter().map(|f| f.iterations as u64).sum();
            let total_queries: u64 = run.frames.iter().map(|f| f.queries).sum();
            let total_ms: f64 = run.frames.iter().map(|f| f.elapsed_ms).sum();
            let n = match run.method {
                Method::Sdf => run.config.n,
                Method::Vr => run.config.vr.n_pixels,
            };
            IterationRow {
                method: run.method,
                n,
                budget: run.config.budget,
                mean_iterations: total_iters as f64 / frames,
                mean_queries_per_iteration: if total_iters > 0 {
                    total_queries as f64 / total_iters as f64
                } else {
                    0.0
                },
                mean_ms_per_iteration: if total_iters > 0 {
                    total_ms / total_iters as f64
                } else {
                    0.0
                },
            }
        })
        .collect()
}

/// One evaluated cell of the method x budget comparison grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareEntry {
    pub scene: String,
    pub budget_label: String,
    pub method: Method,
    pub ate_rmse: f64,
    pub max_error: f64,
    pub failed: bool,
}

/// A comparison row with the winner marked.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub entry: CompareEntry,
    /// Lowest ATE among the methods sharing this (scene, budget) cell; ties
    /// go to the method listed first.
    pub best: bool,
}

/// Marks the better method within each (scene, budget) cell. Input order is
/// preserved; ties are broken deterministically in favor of the first
/// entry.
pub fn compare_report(entries: &[CompareEntry]) -> Vec<CompareRow> {
    let mut rows: Vec<CompareRow> =
        entries.iter().map(|e| CompareRow { entry: e.clone(), best: false }).collect();
    let mut seen: Vec<(String, String)> = Vec::new();
    for i in 0..rows.len() {
        let key = (rows[i].entry.scene.clone(), rows[i].entry.budget_label.clone());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key.clone());
        let mut best_idx = i;
        for (j, row) in rows.iter().enumerate().skip(i + 1) {
            if (row.entry.scene.clone(), row.entry.budget_label.clone()) == key
                && row.entry.ate_rmse < rows[best_idx].entry.ate_rmse
            {
                best_idx = j;
            }
        }
        rows[best_idx].best = true;
    }
    rows
}
