//! Synthetic RGB-D dataset generation: camera trajectories over a scene,
//! rendered with sphere tracing and written in the dataset layout.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::eval::Trajectory;
use crate::geometry::{Intrinsics, Pose, Quaternion};
use crate::io::{write_dataset, DataError};
use crate::render::{render_frame, RenderParams};
use crate::sampling::RgbdFrame;
use crate::scene::SceneField;

/// Camera path specification.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectorySpec {
    /// Circle of `radius` around `center` at `center.z + height`, looking at
    /// `center`. A sequence of `m` frames sweeps `m * degrees_per_frame`
    /// degrees inclusive of both endpoints, so a 360-degree sweep closes
    /// exactly onto its first pose.
    Orbit {
        center: Vector3<f64>,
        radius: f64,
        height: f64,
        degrees_per_frame: f64,
    },
    /// Linear interpolation from `start` to `end`, looking at `look_at`.
    Line {
        start: Vector3<f64>,
        end: Vector3<f64>,
        look_at: Vector3<f64>,
    },
}

impl TrajectorySpec {
    /// Pose of frame `i` in a sequence of `m` frames.
    pub fn pose_at(&self, i: usize, m: usize) -> Pose {
        debug_assert!(m >= 2 && i < m);
        match self {
            TrajectorySpec::Orbit { center, radius, height, degrees_per_frame } => {
                let sweep = *degrees_per_frame * m as f64;
                let theta = (i as f64 * sweep / (m - 1) as f64).to_radians();
                let eye = center
                    + Vector3::new(radius * theta.cos(), radius * theta.sin(), *height);
                look_at_pose(eye, *center, Vector3::z())
            }
            TrajectorySpec::Line { start, end, look_at } => {
                let s = i as f64 / (m - 1) as f64;
                let eye = start + (end - start) * s;
                look_at_pose(eye, *look_at, Vector3::z())
            }
        }
    }

    pub fn trajectory(&self, m: usize) -> Trajectory {
        Trajectory::new((0..m).map(|i| (i as u32, self.pose_at(i, m))).collect())
            .expect("indices are strictly increasing by construction")
    }
}

/// Camera-to-world pose at `eye` with +z looking toward `target`. The
/// camera's +y points world-down (the frame is +x right, +y down,
/// +z forward); a fallback up-axis handles views along `up`.
pub fn look_at_pose(eye: Vector3<f64>, target: Vector3<f64>, up: Vector3<f64>) -> Pose {
    let forward = (target - eye).normalize();
    let up = if forward.dot(&up.normalize()).abs() > 0.999 {
        Vector3::x()
    } else {
        up.normalize()
    };
    let right = forward.cross(&up).normalize();
    let down = forward.cross(&right);
    let q = Quaternion::from_rotation_matrix(&Matrix3::from_columns(&[right, down, forward]));
    Pose { t: eye, q }
}

/// Renders `m` frames along a trajectory and writes them as a dataset,
/// optionally adding i.i.d. Gaussian depth noise (clamped to >= 0) on valid
/// pixels. Deterministic given the rng.
#[allow(clippy::too_many_arguments)]
pub fn generate_sequence(
    field: &dyn SceneField,
    spec: &TrajectorySpec,
    intrinsics: &Intrinsics,
    m: usize,
    params: &RenderParams,
    depth_noise_std: f64,
    rng: &mut impl Rng,
    out_dir: &Path,
    rate_hz: f64,
    scene_text: Option<&str>,
) -> Result<Trajectory, DataError> {
    assert!(m >= 2, "a sequence needs at least 2 frames");
    let groundtruth = spec.trajectory(m);
    let mut frames = Vec::with_capacity(m);
    for (index, pose) in groundtruth.entries() {
        let mut frame = render_frame(field, pose, intrinsics, params, *index);
        if depth_noise_std > 0.0 {
            add_depth_noise(&mut frame, depth_noise_std, rng);
        }
        frames.push(frame);
    }
    write_dataset(out_dir, intrinsics, &frames, &groundtruth, rate_hz, scene_text)?;
    Ok(groundtruth)
}

fn add_depth_noise(frame: &mut RgbdFrame, std: f64, rng: &mut impl Rng) {
    let normal = Normal::new(0.0, std).expect("positive std");
    for i in 0..frame.depth.len() {
        if frame.valid[i] {
            let noisy = (frame.depth[i] as f64 + normal.sample(rng)).max(0.0);
            frame.depth[i] = noisy as f32;
            frame.valid[i] = frame.depth[i] > 0.0;
        }
    }
}
