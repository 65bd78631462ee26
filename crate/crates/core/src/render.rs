//! Two renderers over scene fields: sphere tracing for ground-truth RGB-D
//! synthesis, and density-based volume rendering along rays for the
//! baseline tracker.

use nalgebra::Vector3;
use rand::Rng;

use crate::geometry::{Intrinsics, Pose};
use crate::sampling::RgbdFrame;
use crate::scene::{density_from_sdf, DensityParams, SceneField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    /// Unit direction.
    pub dir: Vector3<f64>,
}

impl Ray {
    pub fn new(origin: Vector3<f64>, dir: Vector3<f64>) -> Ray {
        Ray { origin, dir: dir.normalize() }
    }

    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin + self.dir * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub t_near: f64,
    pub t_far: f64,
    /// Volume-rendering quadrature samples per ray.
    pub n_samples_per_ray: usize,
    /// Sphere tracing accepts a hit when |sdf| falls below this.
    pub hit_eps: f64,
    pub max_steps: usize,
    /// Stratified (jittered) quadrature; midpoint rule when false.
    pub stratified: bool,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            t_near: 0.05,
            t_far: 20.0,
            n_samples_per_ray: 32,
            hit_eps: 1e-4,
            max_steps: 256,
            stratified: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceResult {
    Hit { t: f64 },
    Miss,
}

/// Marches along the ray stepping by the queried signed distance (clamped
/// below by `hit_eps / 2`), which is safe because a true SDF lower-bounds
/// the distance to the surface.
pub fn sphere_trace(field: &dyn SceneField, ray: &Ray, params: &RenderParams) -> TraceResult {
    let mut t = params.t_near;
    for _ in 0..params.max_steps {
        if t > params.t_far {
            return TraceResult::Miss;
        }
        let d = field.query(ray.at(t)).sdf;
        if d.abs() <= params.hit_eps {
            return TraceResult::Hit { t };
        }
        t += d.max(params.hit_eps * 0.5);
    }
    TraceResult::Miss
}

/// Renders a full RGB-D frame by sphere tracing one ray through each pixel
/// center. Missed pixels get depth 0 and are marked invalid.
///
/// The stored depth is the camera-z coordinate of the hit point, not the
/// ray length, so `backproject` on the result reconstructs the hit point.
pub fn render_frame(
    field: &dyn SceneField,
    pose: &Pose,
    intrinsics: &Intrinsics,
    params: &RenderParams,
    frame_index: u32,
) -> RgbdFrame {
    let mut frame = RgbdFrame::new(intrinsics.width, intrinsics.height, frame_index);
    for v in 0..intrinsics.height {
        for u in 0..intrinsics.width {
            let dir_cam = intrinsics.pixel_direction(u as f64 + 0.5, v as f64 + 0.5);
            let ray = Ray { origin: pose.t, dir: pose.q.rotate(dir_cam) };
            match sphere_trace(field, &ray, params) {
                TraceResult::Hit { t } => {
                    let color = field.query(ray.at(t)).color;
                    let depth = t * dir_cam.z;
                    frame.set_pixel(
                        u,
                        v,
                        [color[0] as f32, color[1] as f32, color[2] as f32],
                        depth as f32,
                    );
                }
                TraceResult::Miss => frame.set_invalid(u, v),
            }
        }
    }
    frame
}

/// Output of volume rendering a single ray. `depth_t` is the
/// transmittance-weighted expected ray length; multiply by the camera-frame
/// unit direction's z to obtain z-depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeSample {
    pub color: [f64; 3],
    pub depth_t: f64,
    pub opacity: f64,
}

/// Quadrature node positions for one ray. With stratification, sample `j`
/// lands at `t_near + (j + offsets[j]) * delta`; the midpoint rule uses
/// offset 0.5 everywhere.
pub fn quadrature_ts(params: &RenderParams, offsets: &[f64]) -> Vec<f64> {
    let n = params.n_samples_per_ray;
    debug_assert_eq!(offsets.len(), n);
    let delta = (params.t_far - params.t_near) / n as f64;
    (0..n)
        .map(|j| params.t_near + (j as f64 + offsets[j]) * delta)
        .collect()
}

/// Draws one stratification offset per quadrature sample in `[0,1)`, or the
/// midpoint constants when stratification is off.
pub fn draw_offsets(params: &RenderParams, rng: &mut impl Rng) -> Vec<f64> {
    if params.stratified {
        (0..params.n_samples_per_ray).map(|_| rng.gen::<f64>()).collect()
    } else {
        vec![0.5; params.n_samples_per_ray]
    }
}

/// Volume-renders one ray with explicit stratification offsets.
///
/// Compositing uses transmittance weights
/// `w_j = exp(-sum_{k<j} sigma_k delta_k) * (1 - exp(-sigma_j delta_j))`
/// with `delta_j = t_{j+1} - t_j` and the last delta closing the interval
/// at `t_far`. Issues exactly `n_samples_per_ray` field queries.
pub fn volume_render_ray_offsets(
    field: &dyn SceneField,
    density: &DensityParams,
    ray: &Ray,
    params: &RenderParams,
    offsets: &[f64],
) -> VolumeSample {
    let ts = quadrature_ts(params, offsets);
    let n = ts.len();
    let mut color = [0.0f64; 3];
    let mut depth_t = 0.0;
    let mut opacity = 0.0;
    let mut transmittance = 1.0;
    for j in 0..n {
        let delta = if j + 1 < n { ts[j + 1] - ts[j] } else { params.t_far - ts[j] };
        let sample = field.query(ray.at(ts[j]));
        let sigma = density_from_sdf(sample.sdf, density);
        let alpha = 1.0 - (-sigma * delta).exp();
        let w = transmittance * alpha;
        for ch in 0..3 {
            color[ch] += w * sample.color[ch];
        }
        depth_t += w * ts[j];
        opacity += w;
        transmittance *= 1.0 - alpha;
    }
    VolumeSample { color, depth_t, opacity }
}

/// Volume-renders one ray, drawing stratification offsets from `rng`.
pub fn volume_render_ray(
    field: &dyn SceneField,
    density: &DensityParams,
    ray: &Ray,
    params: &RenderParams,
    rng: &mut impl Rng,
) -> VolumeSample {
    let offsets = draw_offsets(params, rng);
    volume_render_ray_offsets(field, density, ray, params, &offsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Quaternion;
    use crate::scene::{ColorRule, CsgUnion, Primitive, Shape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_sphere_scene() -> CsgUnion {
        CsgUnion::new(vec![Primitive::new(
            Shape::Sphere { center: Vector3::zeros(), radius: 1.0 },
            ColorRule::Constant([0.9, 0.1, 0.2]),
        )
        .unwrap()])
        .unwrap()
    }

    fn floor_scene() -> CsgUnion {
        CsgUnion::new(vec![Primitive::new(
            Shape::Plane { normal: Vector3::z(), offset: 0.0 },
            ColorRule::Constant([0.2, 0.8, 0.2]),
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn sphere_trace_head_on() {
        let scene = unit_sphere_scene();
        let params = RenderParams::default();
        let ray = Ray::new(Vector3::new(-3.0, 0.0, 0.0), Vector3::x());
        match sphere_trace(&scene, &ray, &params) {
            TraceResult::Hit { t } => assert!((t - 2.0).abs() <= params.hit_eps),
            TraceResult::Miss => panic!("expected hit"),
        }
    }

    #[test]
    fn sphere_trace_misses_above() {
        let scene = unit_sphere_scene();
        let ray = Ray::new(Vector3::new(-3.0, 0.0, 5.0), Vector3::x());
        assert_eq!(sphere_trace(&scene, &ray, &RenderParams::default()), TraceResult::Miss);
    }

    #[test]
    fn sphere_trace_plane() {
        let scene = floor_scene();
        let params = RenderParams::default();
        let ray = Ray::new(Vector3::new(0.0, 0.0, 2.0), -Vector3::z());
        match sphere_trace(&scene, &ray, &params) {
            TraceResult::Hit { t } => assert!((t - 2.0).abs() <= params.hit_eps),
            TraceResult::Miss => panic!("expected hit"),
        }
    }

    #[test]
    fn sphere_trace_hits_are_sound() {
        // every reported hit sits within hit_eps of the surface
        let scene = unit_sphere_scene();
        let params = RenderParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let mut hits = 0;
        for _ in 0..10_000 {
            let origin = Vector3::new(
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
            );
            let dir = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if dir.norm() < 1e-6 || origin.norm() < 1.1 {
                continue;
            }
            let ray = Ray::new(origin, dir);
            let before = scene.query_count();
            if let TraceResult::Hit { t } = sphere_trace(&scene, &ray, &params) {
                hits += 1;
                assert!(scene.query(ray.at(t)).sdf.abs() <= params.hit_eps);
                assert!((params.t_near..=params.t_far).contains(&t));
            }
            let steps = scene.query_count() - before;
            assert!(steps <= params.max_steps as u64 + 1);
        }
        assert!(hits > 100, "sanity: some rays should hit ({hits})");
    }

    #[test]
    fn render_frame_center_pixel_depth() {
        let scene = unit_sphere_scene();
        // camera at -3z looking along +z (identity orientation)
        let pose = Pose::new(Vector3::new(0.0, 0.0, -3.0), Quaternion::IDENTITY).unwrap();
        let k = Intrinsics::new(30.0, 30.0, 16.0, 12.0, 32, 24).unwrap();
        let params = RenderParams::default();
        let frame = render_frame(&scene, &pose, &k, &params, 0);
        // pixel whose center is the principal ray: u+0.5 == cx is between
        // pixels; take (15,11) and (16,12) corners around it
        let d = frame.depth_at(16, 12) as f64;
        assert!(frame.is_valid(16, 12));
        assert!((d - 2.0).abs() < 2.0 * params.hit_eps + 1e-3, "depth {d}");
        // wide-angle corners miss the unit sphere
        assert!(!frame.is_valid(0, 0));
        assert!(!frame.is_valid(31, 23));
    }

    #[test]
    fn render_frame_is_deterministic() {
        let scene = unit_sphere_scene();
        let pose = Pose::new(Vector3::new(0.5, -0.2, -3.0), Quaternion::IDENTITY).unwrap();
        let k = Intrinsics::new(30.0, 30.0, 16.0, 12.0, 32, 24).unwrap();
        let a = render_frame(&scene, &pose, &k, &RenderParams::default(), 0);
        let b = render_frame(&scene, &pose, &k, &RenderParams::default(), 0);
        assert_eq!(a, b);
    }

    #[test]
    fn render_frame_backprojection_lands_on_surface() {
        let scene = unit_sphere_scene();
        let q = Quaternion::from_axis_angle(Vector3::new(0.3, 1.0, -0.2), 0.4);
        let pose = Pose::new(Vector3::new(0.4, -2.8, 0.3), q).unwrap();
        // point the camera roughly at the sphere
        let look = look_at_sphere(&pose.t);
        let pose = Pose::new(pose.t, look).unwrap();
        let k = Intrinsics::new(30.0, 30.0, 16.0, 12.0, 32, 24).unwrap();
        let params = RenderParams::default();
        let frame = render_frame(&scene, &pose, &k, &params, 0);
        let mut checked = 0;
        for v in 0..k.height {
            for u in 0..k.width {
                if !frame.is_valid(u, v) {
                    continue;
                }
                let p_cam = k
                    .backproject(u as f64 + 0.5, v as f64 + 0.5, frame.depth_at(u, v) as f64)
                    .unwrap();
                let p_world = pose.transform(p_cam);
                assert!(scene.query(p_world).sdf.abs() <= 2.0 * params.hit_eps);
                checked += 1;
            }
        }
        assert!(checked > 50, "sanity: frame should see the sphere ({checked})");
    }

    fn look_at_sphere(eye: &Vector3<f64>) -> Quaternion {
        let fwd = (-eye).normalize();
        let up = Vector3::z();
        let right = fwd.cross(&up).normalize();
        let down = fwd.cross(&right);
        Quaternion::from_rotation_matrix(&nalgebra::Matrix3::from_columns(&[right, down, fwd]))
    }

    #[test]
    fn volume_render_empty_space() {
        // a sphere far away: sigma ~ 0 along the ray
        let scene = unit_sphere_scene();
        let density = DensityParams::default();
        let params = RenderParams { t_near: 0.1, t_far: 1.0, ..Default::default() };
        let ray = Ray::new(Vector3::new(100.0, 0.0, 0.0), Vector3::x());
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let out = volume_render_ray(&scene, &density, &ray, &params, &mut rng);
        assert!(out.opacity < 1e-12);
        assert!(out.color.iter().all(|c| *c < 1e-12));
        assert!(out.depth_t < 1e-9);
    }

    #[test]
    fn volume_render_opaque_front_sample() {
        // deep inside the sphere the very first sample saturates
        let scene = unit_sphere_scene();
        let density = DensityParams { alpha: 5000.0, s: 0.02 };
        let params = RenderParams {
            t_near: 0.01,
            t_far: 0.5,
            n_samples_per_ray: 8,
            stratified: false,
            ..Default::default()
        };
        let ray = Ray::new(Vector3::zeros(), Vector3::x());
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let out = volume_render_ray(&scene, &density, &ray, &params, &mut rng);
        assert!(out.opacity >= 1.0 - 1e-9);
        assert!((out.color[0] - 0.9).abs() < 1e-9);
        assert!((out.color[1] - 0.1).abs() < 1e-9);
    }

    /// Closed-form two-sample transmittance: sigma_j delta_j = ln 2 gives
    /// w = (1/2, 1/4).
    #[test]
    fn volume_render_two_sample_closed_form() {
        struct ConstField(f64);
        impl SceneField for ConstField {
            fn query(&self, _p: Vector3<f64>) -> crate::scene::FieldSample {
                crate::scene::FieldSample::new([1.0, 0.0, 0.0], self.0)
            }
            fn gradient(&self, _p: Vector3<f64>) -> Vector3<f64> {
                Vector3::zeros()
            }
            fn query_count(&self) -> u64 {
                0
            }
        }
        // constant sdf 0 -> sigma = alpha/2; pick alpha so sigma*delta = ln 2
        let delta = 0.5;
        let alpha = 2.0 * std::f64::consts::LN_2 / delta;
        let field = ConstField(0.0);
        let density = DensityParams { alpha, s: 1.0 };
        let params = RenderParams {
            t_near: 0.0,
            t_far: 1.0,
            n_samples_per_ray: 2,
            stratified: false,
            ..Default::default()
        };
        // midpoint samples at t = 0.25, 0.75: delta_1 = 0.5, delta_2 = 0.25
        // force equal deltas with explicit offsets at bin starts
        let out = volume_render_ray_offsets(
            &field,
            &density,
            &Ray::new(Vector3::zeros(), Vector3::x()),
            &params,
            &[0.0, 0.0],
        );
        // ts = 0.0, 0.5; deltas = 0.5, 0.5; sigma*delta = ln 2 at both
        assert!((out.opacity - 0.75).abs() < 1e-12);
        assert!((out.color[0] - 0.75).abs() < 1e-12);
        let want_depth = 0.25 * 0.5; // w1*t1 + w2*t2 = 0.5*0 + 0.25*0.5
        assert!((out.depth_t - want_depth).abs() < 1e-12);
    }

    #[test]
    fn volume_render_weights_bounded() {
        let scene = unit_sphere_scene();
        let density = DensityParams::default();
        let params = RenderParams { t_near: 0.1, t_far: 8.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..2000 {
            let origin = Vector3::new(
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
            );
            let dir = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if dir.norm() < 1e-6 {
                continue;
            }
            let out =
                volume_render_ray(&scene, &density, &Ray::new(origin, dir), &params, &mut rng);
            assert!(out.opacity >= 0.0 && out.opacity <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn volume_render_depth_consistent_with_sphere_trace() {
        let scene = unit_sphere_scene();
        let density = DensityParams { alpha: 200.0, s: 0.02 };
        let params = RenderParams {
            t_near: 0.5,
            t_far: 4.0,
            n_samples_per_ray: 256,
            stratified: true,
            ..Default::default()
        };
        let ray = Ray::new(Vector3::new(-3.0, 0.0, 0.0), Vector3::x());
        let traced = match sphere_trace(&scene, &ray, &params) {
            TraceResult::Hit { t } => t,
            TraceResult::Miss => panic!("expected hit"),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let out = volume_render_ray(&scene, &density, &ray, &params, &mut rng);
        assert!(
            (out.depth_t - traced).abs() <= 3.0 * density.s,
            "vr depth {} vs traced {traced}",
            out.depth_t
        );
    }

    #[test]
    fn volume_render_issues_exactly_n_queries() {
        let scene = unit_sphere_scene();
        let density = DensityParams::default();
        let params = RenderParams { n_samples_per_ray: 17, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let before = scene.query_count();
        volume_render_ray(
            &scene,
            &density,
            &Ray::new(Vector3::new(-3.0, 0.0, 0.0), Vector3::x()),
            &params,
            &mut rng,
        );
        assert_eq!(scene.query_count() - before, 17);
    }
}
