//! Analytic SDF primitives with exact gradients.

use nalgebra::Vector3;

use super::SceneError;

/// Color assignment for a primitive, evaluated at the query point.
#[derive(Debug, Clone, PartialEq)]
pub enum ColorRule {
    Constant([f64; 3]),
    /// Axis-aligned 3D checkerboard alternating between two colors with the
    /// given tile period in meters.
    Checker { a: [f64; 3], b: [f64; 3], period: f64 },
}

impl ColorRule {
    pub fn color_at(&self, p: Vector3<f64>) -> [f64; 3] {
        match self {
            ColorRule::Constant(c) => *c,
            ColorRule::Checker { a, b, period } => {
                let parity = (p.x / period).floor() as i64
                    + (p.y / period).floor() as i64
                    + (p.z / period).floor() as i64;
                if parity.rem_euclid(2) == 0 {
                    *a
                } else {
                    *b
                }
            }
        }
    }

    fn validate(&self) -> Result<(), SceneError> {
        let check_rgb = |c: &[f64; 3]| {
            c.iter().all(|x| (0.0..=1.0).contains(x) && x.is_finite())
        };
        match self {
            ColorRule::Constant(c) if check_rgb(c) => Ok(()),
            ColorRule::Checker { a, b, period }
                if check_rgb(a) && check_rgb(b) && *period > 0.0 && period.is_finite() =>
            {
                Ok(())
            }
            _ => Err(SceneError::InvalidPrimitive {
                reason: "colors must be in [0,1] and checker period positive".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere { center: Vector3<f64>, radius: f64 },
    Box { center: Vector3<f64>, half_extents: Vector3<f64> },
    /// Points satisfying `normal . p = offset`; sdf is positive on the side
    /// the normal points to.
    Plane { normal: Vector3<f64>, offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub color: ColorRule,
}

impl Primitive {
    pub fn new(shape: Shape, color: ColorRule) -> Result<Primitive, SceneError> {
        color.validate()?;
        let shape = match shape {
            Shape::Sphere { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(SceneError::InvalidPrimitive {
                        reason: format!("sphere radius must be positive, got {radius}"),
                    });
                }
                Shape::Sphere { center, radius }
            }
            Shape::Box { center, half_extents } => {
                if !half_extents.iter().all(|h| *h > 0.0 && h.is_finite()) {
                    return Err(SceneError::InvalidPrimitive {
                        reason: format!("box half extents must be positive, got {half_extents:?}"),
                    });
                }
                Shape::Box { center, half_extents }
            }
            Shape::Plane { normal, offset } => {
                let n = normal.norm();
                if !(n > 1e-12 && n.is_finite()) {
                    return Err(SceneError::InvalidPrimitive {
                        reason: "plane normal must be nonzero".into(),
                    });
                }
                // store a unit normal; rescale the offset accordingly
                Shape::Plane { normal: normal / n, offset: offset / n }
            }
        };
        Ok(Primitive { shape, color })
    }

    /// Exact Euclidean signed distance, negative inside.
    pub fn sdf(&self, p: Vector3<f64>) -> f64 {
        match &self.shape {
            Shape::Sphere { center, radius } => (p - center).norm() - radius,
            Shape::Box { center, half_extents } => {
                let q = (p - center).abs() - half_extents;
                let outside = q.map(|x| x.max(0.0)).norm();
                let inside = q.max().min(0.0);
                outside + inside
            }
            Shape::Plane { normal, offset } => normal.dot(&p) - offset,
        }
    }

    /// Exact spatial gradient of the sdf; unit norm everywhere except on the
    /// measure-zero kink sets (box diagonal planes, sphere center), where the
    /// first branch wins.
    pub fn sdf_gradient(&self, p: Vector3<f64>) -> Vector3<f64> {
        match &self.shape {
            Shape::Sphere { center, radius: _ } => {
                let d = p - center;
                let n = d.norm();
                if n <= 1e-300 {
                    Vector3::z()
                } else {
                    d / n
                }
            }
            Shape::Box { center, half_extents } => {
                let rel = p - center;
                let q = rel.abs() - half_extents;
                let pos = q.map(|x| x.max(0.0));
                let len = pos.norm();
                if len > 0.0 {
                    // outside: direction from the nearest face/edge/corner
                    Vector3::new(
                        rel.x.signum() * pos.x,
                        rel.y.signum() * pos.y,
                        rel.z.signum() * pos.z,
                    ) / len
                } else {
                    // inside: toward the closest face (largest q component)
                    let mut axis = 0;
                    for i in 1..3 {
                        if q[i] > q[axis] {
                            axis = i;
                        }
                    }
                    let mut g = Vector3::zeros();
                    g[axis] = rel[axis].signum();
                    g
                }
            }
            Shape::Plane { normal, .. } => *normal,
        }
    }

    pub fn color_at(&self, p: Vector3<f64>) -> [f64; 3] {
        self.color.color_at(p)
    }

    /// Distance from `p` to the nearest gradient kink of this shape
    /// (box edge planes, sphere center). Used by tests to sample points
    /// where the eikonal property must hold exactly.
    pub fn kink_margin(&self, p: Vector3<f64>) -> f64 {
        match &self.shape {
            Shape::Sphere { center, .. } => (p - center).norm(),
            Shape::Plane { .. } => f64::INFINITY,
            Shape::Box { center, half_extents } => {
                let q = ((p - center).abs() - half_extents).map(|x| x);
                let pos_count = q.iter().filter(|x| **x > 0.0).count();
                if pos_count >= 1 {
                    // outside region is C1; the kink is at the surface itself
                    // and at the coordinate planes through the box faces
                    q.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
                } else {
                    // inside: kinks where the two largest components tie
                    let mut s = [q.x, q.y, q.z];
                    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    (s[0] - s[1]).abs()
                }
            }
        }
    }
}
