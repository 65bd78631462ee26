//! Per-iteration pixel sampling and colored point-set construction from
//! RGB-D frames.
//!
//! The trackers draw a fresh set of pixels every optimization iteration,
//! uniformly with replacement over the valid-depth mask.

use std::fmt;

use nalgebra::Vector3;
use rand::Rng;

use crate::geometry::{GeometryError, Intrinsics};

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingError {
    /// The frame's valid mask is empty; the tracker skips the frame and
    /// carries the previous pose forward.
    NoValidPixels,
    Geometry(GeometryError),
}

impl fmt::Display for SamplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingError::NoValidPixels => write!(f, "frame has no valid pixels"),
            SamplingError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SamplingError {}

impl From<GeometryError> for SamplingError {
    fn from(e: GeometryError) -> Self {
        SamplingError::Geometry(e)
    }
}

/// One color + depth observation. Color is RGB in `[0,1]`, depth is the
/// camera-z coordinate in meters; `valid` implies a positive finite depth.
///
/// Color and depth are stored as `f32` to match the on-disk codecs exactly
/// (8-bit PPM for color, 32-bit PFM for depth), so frames survive a disk
/// round trip bitwise in depth.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbdFrame {
    pub width: u32,
    pub height: u32,
    pub color: Vec<[f32; 3]>,
    pub depth: Vec<f32>,
    pub valid: Vec<bool>,
    pub frame_index: u32,
}

impl RgbdFrame {
    pub fn new(width: u32, height: u32, frame_index: u32) -> Self {
        let n = (width * height) as usize;
        RgbdFrame {
            width,
            height,
            color: vec![[0.0; 3]; n],
            depth: vec![0.0; n],
            valid: vec![false; n],
            frame_index,
        }
    }

    /// Rebuilds a frame from decoded image planes, deriving the valid mask
    /// from the depth (0 or non-finite marks invalid).
    pub fn from_planes(
        width: u32,
        height: u32,
        color: Vec<[f32; 3]>,
        depth: Vec<f32>,
        frame_index: u32,
    ) -> Self {
        let valid = depth.iter().map(|d| *d > 0.0 && d.is_finite()).collect();
        RgbdFrame { width, height, color, depth, valid, frame_index }
    }

    #[inline]
    pub fn idx(&self, u: u32, v: u32) -> usize {
        (v * self.width + u) as usize
    }

    pub fn set_pixel(&mut self, u: u32, v: u32, color: [f32; 3], depth: f32) {
        let i = self.idx(u, v);
        self.color[i] = color;
        self.depth[i] = depth;
        self.valid[i] = depth > 0.0 && depth.is_finite();
    }

    pub fn set_invalid(&mut self, u: u32, v: u32) {
        let i = self.idx(u, v);
        self.color[i] = [0.0; 3];
        self.depth[i] = 0.0;
        self.valid[i] = false;
    }

    pub fn is_valid(&self, u: u32, v: u32) -> bool {
        self.valid[self.idx(u, v)]
    }

    pub fn depth_at(&self, u: u32, v: u32) -> f32 {
        self.depth[self.idx(u, v)]
    }

    pub fn color_at(&self, u: u32, v: u32) -> [f32; 3] {
        self.color[self.idx(u, v)]
    }

    /// All valid pixel coordinates in row-major order.
    pub fn valid_pixels(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for v in 0..self.height {
            for u in 0..self.width {
                if self.valid[self.idx(u, v)] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// One sampled observation: pixel, its color and the backprojected
/// camera-frame point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub u: u32,
    pub v: u32,
    pub color: [f64; 3],
    pub p_cam: Vector3<f64>,
}

/// Draws `n` pixels uniformly with replacement from a precomputed valid
/// list. Deterministic given the rng state.
pub fn sample_from_valid(
    valid: &[(u32, u32)],
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(u32, u32)>, SamplingError> {
    if valid.is_empty() {
        return Err(SamplingError::NoValidPixels);
    }
    Ok((0..n).map(|_| valid[rng.gen_range(0..valid.len())]).collect())
}

/// Draws `n` pixels uniformly with replacement over the frame's valid mask.
pub fn sample_pixels(
    frame: &RgbdFrame,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(u32, u32)>, SamplingError> {
    sample_from_valid(&frame.valid_pixels(), n, rng)
}

/// Backprojects sampled pixels into the camera frame with their colors.
/// Rays go through pixel centers, `(u + 0.5, v + 0.5)`.
pub fn build_point_set(
    frame: &RgbdFrame,
    intrinsics: &Intrinsics,
    pixels: &[(u32, u32)],
) -> Result<Vec<PointSample>, SamplingError> {
    let mut out = Vec::with_capacity(pixels.len());
    for &(u, v) in pixels {
        let depth = frame.depth_at(u, v) as f64;
        let p_cam = intrinsics.backproject(u as f64 + 0.5, v as f64 + 0.5, depth)?;
        let c = frame.color_at(u, v);
        out.push(PointSample {
            u,
            v,
            color: [c[0] as f64, c[1] as f64, c[2] as f64],
            p_cam,
        });
    }
    Ok(out)
}
