//! Rigid-body poses, quaternion algebra and the pinhole camera model.
//!
//! Every gradient in the tracking losses flows through the Jacobians defined
//! here, so the conventions are fixed once and for all:
//!
//! - Quaternions are Hamilton, stored scalar-first `(w, x, y, z)`; the
//!   identity rotation is `(1, 0, 0, 0)`.
//! - Poses are camera-to-world: `p_world = R(q) * p_cam + t`.
//! - Camera frame is +x right, +y down, +z forward; "depth" is the camera-z
//!   coordinate, not the ray length.
//! - Gradients with respect to the orientation are taken on the raw
//!   quaternion 4-vector; renormalization happens after the optimizer step,
//!   not inside the chain rule.

use std::fmt;

use nalgebra::{Matrix3, Matrix3x4, Vector3};

/// Norm below which a quaternion can no longer be normalized meaningfully.
pub const DEGENERATE_QUAT_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// The quaternion norm collapsed below [`DEGENERATE_QUAT_NORM`]; in the
    /// tracking loop this signals optimizer divergence.
    DegenerateQuaternion { norm: f64 },
    /// Backprojection requires a strictly positive, finite depth.
    InvalidDepth { depth: f64 },
    /// Focal lengths must be positive and the principal point inside the image.
    InvalidIntrinsics { reason: String },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DegenerateQuaternion { norm } => {
                write!(f, "degenerate quaternion (norm {norm:e})")
            }
            GeometryError::InvalidDepth { depth } => write!(f, "invalid depth {depth}"),
            GeometryError::InvalidIntrinsics { reason } => {
                write!(f, "invalid intrinsics: {reason}")
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// Hamilton quaternion, scalar-first.
///
/// Note the TUM trajectory format stores quaternions as `(qx, qy, qz, qw)`;
/// the reorder happens at the I/O boundary, never here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn from_axis_angle(axis: Vector3<f64>, angle_rad: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = (angle_rad * 0.5).sin_cos();
        Quaternion { w: c, x: a.x * s, y: a.y * s, z: a.z * s }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Rescales to unit norm, preserving direction.
    ///
    /// Idempotent at the bit level: inputs already within a few ulp of unit
    /// norm are returned unchanged.
    pub fn normalize(&self) -> Result<Quaternion, GeometryError> {
        let n = self.norm();
        if n <= DEGENERATE_QUAT_NORM {
            return Err(GeometryError::DegenerateQuaternion { norm: n });
        }
        if (n - 1.0).abs() <= 16.0 * f64::EPSILON {
            return Ok(*self);
        }
        Ok(Quaternion { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n })
    }

    /// Applies the quaternion sandwich product `q p q*`.
    ///
    /// Expanded polynomial form, valid for any (not necessarily unit) `q`:
    ///
    /// ```text
    /// r = (w^2 - |v|^2) p + 2 (v . p) v + 2 w (v x p),   v = (x, y, z)
    /// ```
    ///
    /// For unit `q` this is the rotation `R(q) p`; for non-unit `q` it scales
    /// by `|q|^2`. [`Quaternion::rotation_jacobian`] differentiates exactly
    /// this polynomial, so finite differences of `rotate` on the raw
    /// parameters agree with the analytic Jacobian.
    pub fn rotate(&self, p: Vector3<f64>) -> Vector3<f64> {
        let v = Vector3::new(self.x, self.y, self.z);
        let w = self.w;
        p * (w * w - v.dot(&v)) + v * (2.0 * v.dot(&p)) + v.cross(&p) * (2.0 * w)
    }

    /// Jacobian of [`Quaternion::rotate`] with respect to the raw parameters
    /// `(w, x, y, z)`, as a 3x4 matrix.
    pub fn rotation_jacobian(&self, p: Vector3<f64>) -> Matrix3x4<f64> {
        let v = Vector3::new(self.x, self.y, self.z);
        let w = self.w;
        let vp = v.dot(&p);
        let col_w = (p * w + v.cross(&p)) * 2.0;
        let mut jac = Matrix3x4::zeros();
        jac.set_column(0, &col_w);
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = 1.0;
            let col = (p * (-v[i]) + v * p[i] + e * vp + e.cross(&p) * w) * 2.0;
            jac.set_column(i + 1, &col);
        }
        jac
    }

    /// Rotation matrix of a unit quaternion (columns are the rotated axes).
    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let c0 = self.rotate(Vector3::x());
        let c1 = self.rotate(Vector3::y());
        let c2 = self.rotate(Vector3::z());
        Matrix3::from_columns(&[c0, c1, c2])
    }

    /// Shepperd's method; `m` must be a proper rotation.
    pub fn from_rotation_matrix(m: &Matrix3<f64>) -> Quaternion {
        let trace = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Quaternion {
                w: 0.25 * s,
                x: (m[(2, 1)] - m[(1, 2)]) / s,
                y: (m[(0, 2)] - m[(2, 0)]) / s,
                z: (m[(1, 0)] - m[(0, 1)]) / s,
            }
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            Quaternion {
                w: (m[(2, 1)] - m[(1, 2)]) / s,
                x: 0.25 * s,
                y: (m[(0, 1)] + m[(1, 0)]) / s,
                z: (m[(0, 2)] + m[(2, 0)]) / s,
            }
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            Quaternion {
                w: (m[(0, 2)] - m[(2, 0)]) / s,
                x: (m[(0, 1)] + m[(1, 0)]) / s,
                y: 0.25 * s,
                z: (m[(1, 2)] + m[(2, 1)]) / s,
            }
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            Quaternion {
                w: (m[(1, 0)] - m[(0, 1)]) / s,
                x: (m[(0, 2)] + m[(2, 0)]) / s,
                y: (m[(1, 2)] + m[(2, 1)]) / s,
                z: 0.25 * s,
            }
        };
        q.normalize().expect("rotation matrix yields non-degenerate quaternion")
    }
}

/// Angle between two unit quaternions in radians, in `[0, pi]`.
///
/// Uses `2 acos(|<q1, q2>|)`, so `q` and `-q` compare equal (double cover).
pub fn geodesic_rotation_error(q1: &Quaternion, q2: &Quaternion) -> f64 {
    2.0 * q1.dot(q2).abs().clamp(0.0, 1.0).acos()
}

/// Camera-to-world rigid transform; the quantity the trackers optimize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    /// Camera position in the world frame, meters.
    pub t: Vector3<f64>,
    /// Camera-to-world rotation, unit norm.
    pub q: Quaternion,
}

impl Pose {
    pub const IDENTITY: Pose =
        Pose { t: Vector3::new(0.0, 0.0, 0.0), q: Quaternion::IDENTITY };

    /// Builds a pose, normalizing the quaternion.
    pub fn new(t: Vector3<f64>, q: Quaternion) -> Result<Pose, GeometryError> {
        Ok(Pose { t, q: q.normalize()? })
    }

    /// Maps a camera-frame point into the world frame.
    pub fn transform(&self, p_cam: Vector3<f64>) -> Vector3<f64> {
        self.q.rotate(p_cam) + self.t
    }

    pub fn inverse(&self) -> Pose {
        let q_inv = self.q.conjugate();
        Pose { t: -q_inv.rotate(self.t), q: q_inv }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.q.to_rotation_matrix()
    }
}

/// Jacobians of the world-frame point `R(q) p_cam + t` with respect to the
/// pose parameters: `(d/dt, d/d(w,x,y,z))`.
///
/// The translation block is the identity; the orientation block is taken on
/// the raw quaternion 4-vector (renormalization is applied after the
/// optimizer step, not inside the gradient).
pub fn pose_jacobians(pose: &Pose, p_cam: Vector3<f64>) -> (Matrix3<f64>, Matrix3x4<f64>) {
    (Matrix3::identity(), pose.q.rotation_jacobian(p_cam))
}

/// Pinhole intrinsics. Image size is in pixels; rays are cast through pixel
/// centers at `(u + 0.5, v + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
    ) -> Result<Intrinsics, GeometryError> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(GeometryError::InvalidIntrinsics {
                reason: format!("focal lengths must be positive, got fx={fx} fy={fy}"),
            });
        }
        if !(0.0 <= cx && cx < width as f64 && 0.0 <= cy && cy < height as f64) {
            return Err(GeometryError::InvalidIntrinsics {
                reason: format!(
                    "principal point ({cx}, {cy}) outside {width}x{height} image"
                ),
            });
        }
        Ok(Intrinsics { fx, fy, cx, cy, width, height })
    }

    /// Maps a pixel plus z-depth to a camera-frame point.
    ///
    /// `(u, v)` are image coordinates (typically pixel centers, `col + 0.5`,
    /// `row + 0.5`); the returned point is
    /// `((u-cx) d / fx, (v-cy) d / fy, d)`.
    pub fn backproject(&self, u: f64, v: f64, depth: f64) -> Result<Vector3<f64>, GeometryError> {
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(GeometryError::InvalidDepth { depth });
        }
        Ok(Vector3::new(
            (u - self.cx) * depth / self.fx,
            (v - self.cy) * depth / self.fy,
            depth,
        ))
    }

    /// Projects a camera-frame point (z > 0) to image coordinates.
    pub fn project(&self, p_cam: Vector3<f64>) -> (f64, f64) {
        (
            self.fx * p_cam.x / p_cam.z + self.cx,
            self.fy * p_cam.y / p_cam.z + self.cy,
        )
    }

    /// Unit camera-frame direction through image coordinates `(u, v)`.
    pub fn pixel_direction(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0).normalize()
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && u < self.width as f64 && v >= 0.0 && v < self.height as f64
    }
}
