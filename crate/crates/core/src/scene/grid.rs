//! Baked trilinear grid field: a deterministic stand-in for a learned scene
//! encoding, sampled once from a source field at lattice nodes.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{Matrix3, Vector3};

use super::{FieldSample, SceneError, SceneField};

/// Fractional cell coordinates closer to a node than this snap to it, so
/// node queries reproduce the stored sample bitwise.
const NODE_SNAP: f64 = 1e-9;

#[derive(Debug)]
pub struct GridField {
    origin: Vector3<f64>,
    spacing: Vector3<f64>,
    dims: [usize; 3],
    sdf: Vec<f64>,
    color: Vec<[f64; 3]>,
    queries: AtomicU64,
}

impl GridField {
    pub fn new(
        origin: Vector3<f64>,
        spacing: Vector3<f64>,
        dims: [usize; 3],
        sdf: Vec<f64>,
        color: Vec<[f64; 3]>,
    ) -> Result<GridField, SceneError> {
        for (axis, &n) in dims.iter().enumerate() {
            if n < 2 {
                return Err(SceneError::ResolutionTooLow { axis, got: n });
            }
        }
        if !spacing.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(SceneError::DegenerateBounds);
        }
        let nodes = dims[0] * dims[1] * dims[2];
        if sdf.len() != nodes || color.len() != nodes {
            return Err(SceneError::InvalidPrimitive {
                reason: format!(
                    "grid value arrays must hold {nodes} nodes, got sdf={} color={}",
                    sdf.len(),
                    color.len()
                ),
            });
        }
        Ok(GridField { origin, spacing, dims, sdf, color, queries: AtomicU64::new(0) })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> Vector3<f64> {
        self.spacing
    }

    pub fn origin(&self) -> Vector3<f64> {
        self.origin
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    /// World position of lattice node `(i, j, k)`; uses the same arithmetic
    /// as [`bake_grid`], so querying here reproduces baked samples bitwise.
    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        Vector3::new(
            self.origin.x + i as f64 * self.spacing.x,
            self.origin.y + j as f64 * self.spacing.y,
            self.origin.z + k as f64 * self.spacing.z,
        )
    }

    pub fn node_sample(&self, i: usize, j: usize, k: usize) -> FieldSample {
        let idx = self.index(i, j, k);
        FieldSample { color: self.color[idx], sdf: self.sdf[idx], out_of_bounds: false }
    }

    /// Cell index, fractional coordinates in `[0,1]^3` and the out-of-bounds
    /// flag for a world point. Out-of-range coordinates clamp to the
    /// boundary cell.
    fn locate(&self, p: Vector3<f64>) -> ([usize; 3], [f64; 3], bool) {
        let mut cell = [0usize; 3];
        let mut frac = [0f64; 3];
        let mut oob = false;
        for ax in 0..3 {
            let rel = (p[ax] - self.origin[ax]) / self.spacing[ax];
            let top = (self.dims[ax] - 1) as f64;
            let clamped = if rel < 0.0 {
                oob = true;
                0.0
            } else if rel > top {
                oob = true;
                top
            } else {
                rel
            };
            let mut c = clamped.floor();
            if c > top - 1.0 {
                c = top - 1.0;
            }
            let mut u = clamped - c;
            if u < NODE_SNAP {
                u = 0.0;
            } else if u > 1.0 - NODE_SNAP {
                u = 1.0;
            }
            cell[ax] = c as usize;
            frac[ax] = u;
        }
        (cell, frac, oob)
    }

    fn interpolate(&self, cell: [usize; 3], frac: [f64; 3]) -> (f64, [f64; 3]) {
        // exact hit on a node: return the stored sample, no arithmetic
        if frac == [0.0, 0.0, 0.0] {
            let idx = self.index(cell[0], cell[1], cell[2]);
            return (self.sdf[idx], self.color[idx]);
        }
        let mut sdf = 0.0;
        let mut color = [0.0f64; 3];
        for corner in 0..8usize {
            let d = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            for ax in 0..3 {
                w *= if d[ax] == 1 { frac[ax] } else { 1.0 - frac[ax] };
            }
            if w == 0.0 {
                continue;
            }
            let idx = self.index(cell[0] + d[0], cell[1] + d[1], cell[2] + d[2]);
            sdf += w * self.sdf[idx];
            for ch in 0..3 {
                color[ch] += w * self.color[idx][ch];
            }
        }
        (sdf, color)
    }

    /// Per-axis derivative of the trilinear interpolant within the located
    /// cell, applied to a per-node scalar accessor.
    fn cell_gradient(&self, cell: [usize; 3], frac: [f64; 3], value: impl Fn(usize) -> f64) -> Vector3<f64> {
        let mut grad = Vector3::zeros();
        for corner in 0..8usize {
            let d = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let idx = self.index(cell[0] + d[0], cell[1] + d[1], cell[2] + d[2]);
            let v = value(idx);
            for ax in 0..3 {
                let mut w = if d[ax] == 1 { 1.0 } else { -1.0 };
                for other in 0..3 {
                    if other != ax {
                        w *= if d[other] == 1 { frac[other] } else { 1.0 - frac[other] };
                    }
                }
                grad[ax] += w * v / self.spacing[ax];
            }
        }
        grad
    }
}

impl SceneField for GridField {
    fn query(&self, p: Vector3<f64>) -> FieldSample {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let (cell, frac, oob) = self.locate(p);
        let (sdf, color) = self.interpolate(cell, frac);
        FieldSample { color, sdf, out_of_bounds: oob }
    }

    /// Gradient of the interpolant at the (clamped) query point. Outside the
    /// bounds this is the boundary cell's interior gradient, which still
    /// points back toward the encoded surface.
    fn gradient(&self, p: Vector3<f64>) -> Vector3<f64> {
        let (cell, frac, _) = self.locate(p);
        self.cell_gradient(cell, frac, |idx| self.sdf[idx])
    }

    fn color_jacobian(&self, p: Vector3<f64>) -> Matrix3<f64> {
        let (cell, frac, _) = self.locate(p);
        let mut jac = Matrix3::zeros();
        for ch in 0..3 {
            let row = self.cell_gradient(cell, frac, |idx| self.color[idx][ch]);
            jac.set_row(ch, &row.transpose());
        }
        jac
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Samples `field` at the lattice nodes of a regular grid spanning
/// `[min, max]` with `dims` nodes per axis (>= 2).
pub fn bake_grid(
    field: &dyn SceneField,
    min: Vector3<f64>,
    max: Vector3<f64>,
    dims: [usize; 3],
) -> Result<GridField, SceneError> {
    for (axis, &n) in dims.iter().enumerate() {
        if n < 2 {
            return Err(SceneError::ResolutionTooLow { axis, got: n });
        }
    }
    if !(0..3).all(|ax| max[ax] > min[ax] && min[ax].is_finite() && max[ax].is_finite()) {
        return Err(SceneError::DegenerateBounds);
    }
    let spacing = Vector3::new(
        (max.x - min.x) / (dims[0] - 1) as f64,
        (max.y - min.y) / (dims[1] - 1) as f64,
        (max.z - min.z) / (dims[2] - 1) as f64,
    );
    let nodes = dims[0] * dims[1] * dims[2];
    let mut sdf = Vec::with_capacity(nodes);
    let mut color = Vec::with_capacity(nodes);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = Vector3::new(
                    min.x + i as f64 * spacing.x,
                    min.y + j as f64 * spacing.y,
                    min.z + k as f64 * spacing.z,
                );
                let s = field.query(p);
                sdf.push(s.sdf);
                color.push(s.color);
            }
        }
    }
    GridField::new(min, spacing, dims, sdf, color)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ColorRule, CsgUnion, Primitive, Shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane_scene() -> CsgUnion {
        CsgUnion::new(vec![Primitive::new(
            Shape::Plane { normal: Vector3::z(), offset: 0.0 },
            ColorRule::Constant([0.25, 0.5, 0.75]),
        )
        .unwrap()])
        .unwrap()
    }

    fn sphere_scene() -> CsgUnion {
        CsgUnion::new(vec![Primitive::new(
            Shape::Sphere { center: Vector3::zeros(), radius: 1.0 },
            ColorRule::Constant([0.8, 0.2, 0.4]),
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn resolution_too_low_rejected() {
        let scene = plane_scene();
        let err = bake_grid(
            &scene,
            Vector3::new(-1.0, -1.0, -1.0),
            Vector3::new(1.0, 1.0, 1.0),
            [4, 1, 4],
        )
        .unwrap_err();
        assert!(matches!(err, SceneError::ResolutionTooLow { axis: 1, got: 1 }));
    }

    #[test]
    fn node_queries_reproduce_source_bitwise() {
        let scene = sphere_scene();
        let grid = bake_grid(
            &scene,
            Vector3::new(-2.0, -2.0, -2.0),
            Vector3::new(2.0, 2.0, 2.0),
            [9, 9, 9],
        )
        .unwrap();
        for k in 0..9 {
            for j in 0..9 {
                for i in 0..9 {
                    let p = grid.node_position(i, j, k);
                    let src = scene.query(p);
                    let got = grid.query(p);
                    assert_eq!(got.sdf.to_bits(), src.sdf.to_bits());
                    for ch in 0..3 {
                        assert_eq!(got.color[ch].to_bits(), src.color[ch].to_bits());
                    }
                    assert!(!got.out_of_bounds);
                }
            }
        }
    }

    #[test]
    fn trilinear_reproduces_affine_fields() {
        // plane sdf z is affine, so interpolation error is pure f64 dust
        let scene = plane_scene();
        let grid = bake_grid(
            &scene,
            Vector3::new(-2.0, -2.0, -2.0),
            Vector3::new(2.0, 2.0, 2.0),
            [5, 7, 6],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..2000 {
            let p = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let got = grid.query(p);
            assert!((got.sdf - p.z).abs() < 1e-12);
            assert!(!got.out_of_bounds);
        }
        // gradient of an affine interpolant is the plane normal everywhere
        let g = grid.gradient(Vector3::new(0.3, -1.2, 0.7));
        assert!((g - Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn bake_error_bounded_by_spacing() {
        let scene = sphere_scene();
        let grid = bake_grid(
            &scene,
            Vector3::new(-2.0, -2.0, -2.0),
            Vector3::new(2.0, 2.0, 2.0),
            [64, 64, 64],
        )
        .unwrap();
        let spacing = grid.spacing().x;
        assert!((spacing - 4.0 / 63.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut max_err: f64 = 0.0;
        for _ in 0..10_000 {
            let p = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let err = (grid.query(p).sdf - scene.query(p).sdf).abs();
            max_err = max_err.max(err);
        }
        assert!(max_err < spacing, "max error {max_err} vs spacing {spacing}");
    }

    #[test]
    fn out_of_bounds_clamps_and_flags() {
        let scene = plane_scene();
        let grid = bake_grid(
            &scene,
            Vector3::new(-1.0, -1.0, -1.0),
            Vector3::new(1.0, 1.0, 1.0),
            [4, 4, 4],
        )
        .unwrap();
        let inside = grid.query(Vector3::new(0.0, 0.0, 1.0));
        let outside = grid.query(Vector3::new(0.0, 0.0, 5.0));
        assert!(outside.out_of_bounds);
        assert!(!inside.out_of_bounds);
        assert_eq!(outside.sdf, inside.sdf);
        // clamped on one axis only still flags
        let corner = grid.query(Vector3::new(-9.0, 0.5, 0.5));
        assert!(corner.out_of_bounds);
    }

    #[test]
    fn gradient_matches_finite_differences_of_query() {
        let scene = sphere_scene();
        let grid = bake_grid(
            &scene,
            Vector3::new(-2.0, -2.0, -2.0),
            Vector3::new(2.0, 2.0, 2.0),
            [32, 32, 32],
        )
        .unwrap();
        let spacing = grid.spacing().x;
        let h = spacing / 100.0;
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut accepted = 0;
        while accepted < 500 {
            let p = Vector3::new(
                rng.gen_range(-1.9..1.9),
                rng.gen_range(-1.9..1.9),
                rng.gen_range(-1.9..1.9),
            );
            // stay away from cell faces where the interpolant kinks
            let rel = (p - grid.origin()).component_div(&grid.spacing());
            if rel.iter().any(|r| {
                let f = r.fract();
                f < 0.02 || f > 0.98
            }) {
                continue;
            }
            accepted += 1;
            let mut fd = Vector3::zeros();
            for ax in 0..3 {
                let mut lo = p;
                let mut hi = p;
                lo[ax] -= h;
                hi[ax] += h;
                fd[ax] = (grid.query(hi).sdf - grid.query(lo).sdf) / (2.0 * h);
            }
            let g = grid.gradient(p);
            let denom = fd.norm().max(1e-12);
            assert!(
                (g - fd).norm() / denom < 1e-6,
                "relative deviation {} at {p:?}",
                (g - fd).norm() / denom
            );
        }
    }

    #[test]
    fn color_jacobian_matches_finite_differences() {
        // checkered source gives the grid non-trivial interpolated colors
        let scene = CsgUnion::new(vec![Primitive::new(
            Shape::Sphere { center: Vector3::zeros(), radius: 1.0 },
            ColorRule::Checker { a: [1.0, 0.3, 0.1], b: [0.1, 0.6, 1.0], period: 0.37 },
        )
        .unwrap()])
        .unwrap();
        let grid = bake_grid(
            &scene,
            Vector3::new(-2.0, -2.0, -2.0),
            Vector3::new(2.0, 2.0, 2.0),
            [24, 24, 24],
        )
        .unwrap();
        let h = grid.spacing().x / 100.0;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut accepted = 0;
        while accepted < 200 {
            let p = Vector3::new(
                rng.gen_range(-1.9..1.9),
                rng.gen_range(-1.9..1.9),
                rng.gen_range(-1.9..1.9),
            );
            let rel = (p - grid.origin()).component_div(&grid.spacing());
            if rel.iter().any(|r| {
                let f = r.fract();
                f < 0.02 || f > 0.98
            }) {
                continue;
            }
            accepted += 1;
            let jac = grid.color_jacobian(p);
            for ax in 0..3 {
                let mut lo = p;
                let mut hi = p;
                lo[ax] -= h;
                hi[ax] += h;
                let (clo, chi) = (grid.query(lo).color, grid.query(hi).color);
                for ch in 0..3 {
                    let fd = (chi[ch] - clo[ch]) / (2.0 * h);
                    assert!(
                        (jac[(ch, ax)] - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                        "channel {ch} axis {ax}: {} vs {fd}",
                        jac[(ch, ax)]
                    );
                }
            }
        }
    }
}
