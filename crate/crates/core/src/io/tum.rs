//! TUM trajectory format: one `timestamp tx ty tz qx qy qz qw` line per
//! pose.
//!
//! Quaternions are stored xyzw on disk (scalar-last) and reordered to the
//! in-memory scalar-first layout on read. Timestamps are synthesized as
//! `frame_index / rate`; readers assign frame indices by line order.
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces the poses bitwise.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::eval::Trajectory;
use crate::geometry::{Pose, Quaternion};

use super::DataError;

pub fn write_tum(path: &Path, traj: &Trajectory, rate_hz: f64) -> Result<(), DataError> {
    let mut out = String::new();
    for (index, pose) in traj.entries() {
        let q = pose
            .q
            .normalize()
            .map_err(|e| DataError::format(path, format!("frame {index}: {e}")))?;
        let ts = *index as f64 / rate_hz;
        writeln!(
            out,
            "{:.6} {} {} {} {} {} {} {}",
            ts, pose.t.x, pose.t.y, pose.t.z, q.x, q.y, q.z, q.w
        )
        .expect("string write");
    }
    std::fs::write(path, out).map_err(|e| DataError::io(path, e))
}

pub fn read_tum(path: &Path) -> Result<Trajectory, DataError> {
    let src = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let mut entries = Vec::new();
    for (line_no, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(DataError::format(
                path,
                format!("line {}: expected 8 fields, got {}", line_no + 1, fields.len()),
            ));
        }
        let mut nums = [0f64; 8];
        for (i, f) in fields.iter().enumerate() {
            nums[i] = f.parse().map_err(|e| {
                DataError::format(path, format!("line {}: field {}: {e}", line_no + 1, i + 1))
            })?;
        }
        let q = Quaternion::new(nums[7], nums[4], nums[5], nums[6]);
        let pose = Pose::new(Vector3::new(nums[1], nums[2], nums[3]), q)
            .map_err(|e| DataError::format(path, format!("line {}: {e}", line_no + 1)))?;
        entries.push((entries.len() as u32, pose));
    }
    Trajectory::new(entries).map_err(|e| DataError::format(path, e.to_string()))
}
