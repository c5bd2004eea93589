//! Local plane fitting and terrain traversability scoring.
//!
//! For a surface point, the points inside an `l_s`-sided cube form the
//! support set. An SVD least-squares plane through the support gives the
//! local frame; three indicators graded against critical values blend into a
//! single traversability score in `[0, 1]`:
//!
//! * **slope** — inclination of the plane normal against vertical;
//! * **flatness** — fourth moment of point residuals to the plane, punishing
//!   rough surfaces;
//! * **sparsity** — penalty for vacant regions in the plane footprint,
//!   distinguishing concentrated holes from scattered thin coverage.
//!
//! 0 means freely drivable, 1 means impassable.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

/// Weights and thresholds of the traversability blend.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssessmentConfig {
    /// Blend weights for (slope, flatness, sparsity); must sum to 1.
    pub weights: [f64; 3],
    /// Critical slope score: a plane with `slope == slope_crit` contributes a
    /// full weight share.
    pub slope_crit: f64,
    pub flatness_crit: f64,
    pub sparsity_crit: f64,
    /// Gain on the inclination angle. The default `2/pi` normalizes slope to
    /// `[0, 1]` (flat ground 0, vertical wall 1).
    pub slope_gain: f64,
    pub flatness_gain: f64,
    /// Vacancy ratio below which sparsity is zero.
    pub vacancy_min: f64,
    /// Vacancy ratio above which the plane counts as fully sparse.
    pub vacancy_max: f64,
    /// Upper bound on `tr(S^T S)` of the vacant-cell covariance for the
    /// graded sparsity branch; scattered vacancies above it score zero.
    pub trace_threshold: f64,
    /// Minimum support points for a fit to succeed.
    pub min_support_points: usize,
    /// Side length `l_s` of the cubic support region, meters.
    pub support_side: f64,
    /// Cells per side of the vacancy raster.
    pub vacancy_grid: usize,
}

impl Default for AssessmentConfig {
    fn default() -> Self {
        Self {
            weights: [0.4, 0.3, 0.3],
            slope_crit: 0.5,
            // fourth-moment flatness of +/-2 cm alternating residuals
            flatness_crit: 1.6e-7,
            sparsity_crit: 1.0,
            slope_gain: std::f64::consts::FRAC_2_PI,
            flatness_gain: 1.0,
            vacancy_min: 0.1,
            vacancy_max: 0.5,
            trace_threshold: 0.05,
            min_support_points: 10,
            support_side: 2.0,
            vacancy_grid: 8,
        }
    }
}

/// A plane fitted to a support set, with its local coordinate frame.
///
/// The rotation columns are `(e_x, e_y, e_z)`: `e_z` is the upward-oriented
/// unit normal, `e_x` the in-plane direction toward the next node, and
/// `e_y = e_z x e_x`, so the frame is orthonormal and right-handed.
#[derive(Debug, Clone)]
pub struct LocalPlane {
    /// Surface point the plane is anchored at (frame translation).
    pub center: Vector3<f64>,
    /// Columns are `(e_x, e_y, e_z)`.
    pub rotation: Matrix3<f64>,
    /// Points the plane was fitted to.
    pub support: Arc<Vec<Vector3<f64>>>,
    /// Side length of the support cube.
    pub side: f64,
}

impl LocalPlane {
    pub fn ex(&self) -> Vector3<f64> {
        self.rotation.column(0).into()
    }

    pub fn ey(&self) -> Vector3<f64> {
        self.rotation.column(1).into()
    }

    /// Plane unit normal.
    pub fn ez(&self) -> Vector3<f64> {
        self.rotation.column(2).into()
    }
}

/// Traversability and its raw components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversabilityScore {
    /// Blended score clamped to `[0, 1]`.
    pub tau: f64,
    pub slope: f64,
    pub flatness: f64,
    pub sparsity: f64,
}

/// Least-squares plane normal of a point set: the right singular vector of
/// the centered point matrix for the smallest singular value, flipped to
/// point upward. Returns the normal and the support centroid, or `None` when
/// the set is degenerate (fewer than 3 points, or collinear).
pub fn plane_normal_svd(support: &[Vector3<f64>]) -> Option<(Vector3<f64>, Vector3<f64>)> {
    if support.len() < 3 {
        return None;
    }
    let n = support.len();
    let centroid = support.iter().sum::<Vector3<f64>>() / n as f64;
    let centered = DMatrix::from_fn(n, 3, |r, c| support[r][c] - centroid[c]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.as_ref()?;
    let sv = &svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap());
    // collinear support: two vanishing singular values leave the normal free
    if sv[order[1]] <= 1e-9 * sv[order[2]].max(f64::MIN_POSITIVE) {
        return None;
    }
    let row = v_t.row(order[0]);
    let mut normal = Vector3::new(row[0], row[1], row[2]);
    normal.normalize_mut();
    if normal.z < 0.0 {
        normal = -normal;
    }
    Some((normal, centroid))
}

/// Builds the right-handed frame for a normal: `e_x` is the hint direction
/// projected into the plane. When the hint is (near) parallel to the normal,
/// world X and then world Y take its place.
pub fn frame_from_normal(normal: Vector3<f64>, hint: Vector3<f64>) -> Matrix3<f64> {
    let ez = normal;
    let candidates = [hint, Vector3::x(), Vector3::y()];
    let mut ex = Vector3::x();
    for q in candidates {
        let proj = q - ez * q.dot(&ez);
        let norm = proj.norm();
        if norm > 1e-9 * q.norm().max(1.0) {
            ex = proj / norm;
            break;
        }
    }
    let ey = ez.cross(&ex);
    Matrix3::from_columns(&[ex, ey, ez])
}

/// Fits the local plane at a surface point. Returns `None` when the support
/// is too small or degenerate.
pub fn fit_plane(
    support: &[Vector3<f64>],
    center: Vector3<f64>,
    next_dir_hint: Vector3<f64>,
    cfg: &AssessmentConfig,
) -> Option<LocalPlane> {
    if support.len() < cfg.min_support_points {
        return None;
    }
    let (normal, _centroid) = plane_normal_svd(support)?;
    let rotation = frame_from_normal(normal, next_dir_hint);
    Some(LocalPlane {
        center,
        rotation,
        support: Arc::new(support.to_vec()),
        side: cfg.support_side,
    })
}

/// Slope score: gain times the inclination angle of the normal.
pub fn slope(plane: &LocalPlane, cfg: &AssessmentConfig) -> f64 {
    let cos_incl = plane.ez().z.clamp(0.0, 1.0);
    cfg.slope_gain * cos_incl.acos()
}

/// Flatness score: gain times the mean fourth power of support residuals to
/// the fitted plane (distances along the normal from the support centroid).
pub fn flatness(plane: &LocalPlane, cfg: &AssessmentConfig) -> f64 {
    let n = plane.support.len();
    if n == 0 {
        return 0.0;
    }
    let centroid = plane.support.iter().sum::<Vector3<f64>>() / n as f64;
    let ez = plane.ez();
    let sum: f64 = plane
        .support
        .iter()
        .map(|p| {
            let d = ez.dot(&(p - centroid));
            d * d * d * d
        })
        .sum();
    cfg.flatness_gain * sum / n as f64
}

/// Vacancy statistics of the plane footprint: the fraction `r` of raster
/// cells no support point projects into, and `tr(S^T S)` of the covariance
/// of vacant cell centers (in plane coordinates normalized by the side
/// length).
pub fn vacancy_stats(plane: &LocalPlane, cfg: &AssessmentConfig) -> (f64, f64) {
    let n = cfg.vacancy_grid;
    let half = plane.side / 2.0;
    let cell = plane.side / n as f64;
    let ex = plane.ex();
    let ey = plane.ey();
    let mut filled = vec![false; n * n];
    for p in plane.support.iter() {
        let rel = p - plane.center;
        let u = ex.dot(&rel);
        let v = ey.dot(&rel);
        if u.abs() > half || v.abs() > half {
            continue;
        }
        let iu = (((u + half) / cell) as usize).min(n - 1);
        let iv = (((v + half) / cell) as usize).min(n - 1);
        filled[iv * n + iu] = true;
    }
    let mut vacant = Vec::new();
    for iv in 0..n {
        for iu in 0..n {
            if !filled[iv * n + iu] {
                // cell center in plane coordinates, normalized by the side
                let u = (-half + (iu as f64 + 0.5) * cell) / plane.side;
                let v = (-half + (iv as f64 + 0.5) * cell) / plane.side;
                vacant.push(Vector2::new(u, v));
            }
        }
    }
    let r = vacant.len() as f64 / (n * n) as f64;
    if vacant.is_empty() {
        return (r, 0.0);
    }
    let mean = vacant.iter().sum::<Vector2<f64>>() / vacant.len() as f64;
    let mut cov = Matrix2::zeros();
    for c in &vacant {
        let d = c - mean;
        cov += d * d.transpose();
    }
    cov /= vacant.len() as f64;
    let trace = (cov.transpose() * cov).trace();
    (r, trace)
}

/// Sparsity score from the vacancy statistics:
/// 1 above `vacancy_max`; graded between the bounds when the vacancies are
/// concentrated (covariance trace below the threshold); 0 otherwise.
pub fn sparsity(plane: &LocalPlane, cfg: &AssessmentConfig) -> f64 {
    let (r, trace) = vacancy_stats(plane, cfg);
    if r > cfg.vacancy_max {
        1.0
    } else if r >= cfg.vacancy_min && trace < cfg.trace_threshold {
        (r - cfg.vacancy_min) / (cfg.vacancy_max - cfg.vacancy_min)
    } else {
        0.0
    }
}

/// Blends slope, flatness, and sparsity into the traversability score.
pub fn assess(plane: &LocalPlane, cfg: &AssessmentConfig) -> TraversabilityScore {
    let s = slope(plane, cfg);
    let f = flatness(plane, cfg);
    let l = sparsity(plane, cfg);
    let tau = (cfg.weights[0] * s / cfg.slope_crit
        + cfg.weights[1] * f / cfg.flatness_crit
        + cfg.weights[2] * l / cfg.sparsity_crit)
        .clamp(0.0, 1.0);
    TraversabilityScore {
        tau,
        slope: s,
        flatness: f,
        sparsity: l,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_support(n: usize, spacing: f64, z: impl Fn(f64, f64) -> f64) -> Vec<Vector3<f64>> {
        let half = (n as f64 - 1.0) / 2.0;
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 - half) * spacing;
                let y = (j as f64 - half) * spacing;
                pts.push(Vector3::new(x, y, z(x, y)));
            }
        }
        pts
    }

    fn cfg() -> AssessmentConfig {
        AssessmentConfig::default()
    }

    #[test]
    fn flat_support_gives_identity_frame() {
        let support = grid_support(10, 0.2, |_, _| 0.0);
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).unwrap();
        assert_relative_eq!(plane.ez(), Vector3::z(), epsilon = 1e-12);
        assert_relative_eq!(plane.ex(), Vector3::x(), epsilon = 1e-12);
        assert_relative_eq!(plane.ey(), Vector3::y(), epsilon = 1e-12);
    }

    #[test]
    fn ramp_normal_is_analytic() {
        // z = x tan(30 deg): unit normal is (-sin 30, 0, cos 30)
        let t = 30.0_f64.to_radians().tan();
        let support = grid_support(12, 0.15, |x, _| x * t);
        let hint = Vector3::new(1.0, 0.0, t);
        let plane = fit_plane(&support, Vector3::zeros(), hint, &cfg()).unwrap();
        let want = Vector3::new(-(30.0_f64.to_radians().sin()), 0.0, 30.0_f64.to_radians().cos());
        assert_relative_eq!(plane.ez(), want, epsilon = 1e-9);
    }

    #[test]
    fn too_few_points_fail() {
        let support = vec![Vector3::zeros(), Vector3::x()];
        assert!(fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).is_none());
    }

    #[test]
    fn collinear_support_fails() {
        let support: Vec<_> = (0..20).map(|i| Vector3::new(i as f64 * 0.1, 0.0, 0.0)).collect();
        assert!(fit_plane(&support, Vector3::zeros(), Vector3::y(), &cfg()).is_none());
    }

    #[test]
    fn hint_parallel_to_normal_falls_back_to_world_axes() {
        let support = grid_support(10, 0.2, |_, _| 0.0);
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::z(), &cfg()).unwrap();
        assert_relative_eq!(plane.ex(), Vector3::x(), epsilon = 1e-12);
        // and a vertical-ish plane whose normal is world X
        let wall = grid_support(10, 0.2, |_, _| 0.0)
            .iter()
            .map(|p| Vector3::new(0.0, p.x, p.y + 10.0))
            .collect::<Vec<_>>();
        let plane = fit_plane(&wall, Vector3::new(0.0, 0.0, 10.0), Vector3::x(), &cfg()).unwrap();
        assert!(plane.ez().x.abs() > 0.999);
        // hint == world X is parallel to the normal, so e_x falls back to world Y
        assert_relative_eq!(plane.ex().x.abs(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn slope_zero_on_flat() {
        let support = grid_support(10, 0.2, |_, _| 0.0);
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).unwrap();
        assert_eq!(slope(&plane, &cfg()), 0.0);
    }

    #[test]
    fn slope_on_45_ramp_with_unit_gain() {
        let support = grid_support(12, 0.15, |x, _| x);
        let mut c = cfg();
        c.slope_gain = 1.0;
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::new(1.0, 0.0, 1.0), &c).unwrap();
        assert_relative_eq!(slope(&plane, &c), std::f64::consts::FRAC_PI_4, epsilon = 1e-9);
    }

    #[test]
    fn slope_on_vertical_wall_is_gain_times_half_pi() {
        let wall: Vec<_> = grid_support(10, 0.2, |_, _| 0.0)
            .iter()
            .map(|p| Vector3::new(0.0, p.x, p.y))
            .collect();
        let c = cfg();
        let plane = fit_plane(&wall, Vector3::zeros(), Vector3::y(), &c).unwrap();
        assert_relative_eq!(
            slope(&plane, &c),
            c.slope_gain * std::f64::consts::FRAC_PI_2,
            epsilon = 1e-9
        );
    }

    #[test]
    fn flatness_zero_on_exact_plane() {
        let support = grid_support(10, 0.2, |x, y| 0.3 * x - 0.1 * y + 2.0);
        let plane = fit_plane(&support, Vector3::new(0.0, 0.0, 2.0), Vector3::x(), &cfg()).unwrap();
        assert!(flatness(&plane, &cfg()) < 1e-20);
    }

    /// Checkerboard of +/- h residuals on an even grid: the fitted plane
    /// stays level by symmetry and every residual is exactly +/- h.
    fn checkerboard(n: usize, spacing: f64, h: f64) -> Vec<Vector3<f64>> {
        let half = (n as f64 - 1.0) / 2.0;
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let z = if (i + j) % 2 == 0 { h } else { -h };
                pts.push(Vector3::new(
                    (i as f64 - half) * spacing,
                    (j as f64 - half) * spacing,
                    z,
                ));
            }
        }
        pts
    }

    #[test]
    fn flatness_of_alternating_offsets_is_fourth_power() {
        let h = 0.02;
        let support = checkerboard(10, 0.2, h);
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).unwrap();
        assert_relative_eq!(plane.ez(), Vector3::z(), epsilon = 1e-12);
        let f = flatness(&plane, &cfg());
        assert_relative_eq!(f, cfg().flatness_gain * h.powi(4), max_relative = 1e-10);
    }

    #[test]
    fn flatness_quartic_homogeneity() {
        let h = 0.01;
        let build = |scale: f64| {
            let support = checkerboard(10, 0.2, scale * h);
            let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).unwrap();
            flatness(&plane, &cfg())
        };
        assert_relative_eq!(build(2.0), 16.0 * build(1.0), max_relative = 1e-9);
    }

    #[test]
    fn sparsity_zero_on_dense_support() {
        let support = grid_support(24, 2.0 / 24.0, |_, _| 0.0);
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).unwrap();
        let (r, _) = vacancy_stats(&plane, &cfg());
        assert_eq!(r, 0.0);
        assert_eq!(sparsity(&plane, &cfg()), 0.0);
    }

    #[test]
    fn sparsity_one_when_hole_dominates() {
        // support only on one edge strip: most of the footprint is vacant
        let mut support = Vec::new();
        for i in 0..40 {
            for j in 0..4 {
                support.push(Vector3::new(
                    -1.0 + i as f64 * 0.05,
                    -1.0 + j as f64 * 0.05,
                    0.0,
                ));
            }
        }
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).unwrap();
        let (r, _) = vacancy_stats(&plane, &cfg());
        assert!(r > cfg().vacancy_max, "r = {r}");
        assert_eq!(sparsity(&plane, &cfg()), 1.0);
    }

    #[test]
    fn sparsity_graded_branch_hand_value() {
        // Fill the 8x8 raster except a concentrated 4x5 block: r = 20/64.
        // The vacant block is compact, so the covariance trace is far below
        // the threshold and the graded branch applies:
        // (0.3125 - 0.1) / (0.5 - 0.1) = 0.53125.
        let c = cfg();
        let n = c.vacancy_grid;
        let cell = c.support_side / n as f64;
        let mut support = Vec::new();
        for iu in 0..n {
            for iv in 0..n {
                let vacant = (2..6).contains(&iu) && (2..7).contains(&iv);
                if vacant {
                    continue;
                }
                support.push(Vector3::new(
                    -c.support_side / 2.0 + (iu as f64 + 0.5) * cell,
                    -c.support_side / 2.0 + (iv as f64 + 0.5) * cell,
                    0.0,
                ));
            }
        }
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &c).unwrap();
        let (r, trace) = vacancy_stats(&plane, &c);
        assert_relative_eq!(r, 20.0 / 64.0, epsilon = 1e-12);
        assert!(trace < c.trace_threshold, "trace = {trace}");
        assert_relative_eq!(sparsity(&plane, &c), 0.53125, epsilon = 1e-12);
    }

    #[test]
    fn assess_flat_dense_plane_is_zero() {
        let support = grid_support(24, 2.0 / 24.0, |_, _| 0.0);
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::x(), &cfg()).unwrap();
        assert_eq!(assess(&plane, &cfg()).tau, 0.0);
    }

    #[test]
    fn assess_single_term_blend() {
        // slope ratio 0.6, everything else 0, full weight on slope
        let mut c = cfg();
        c.weights = [1.0, 0.0, 0.0];
        c.slope_gain = 1.0;
        c.slope_crit = 1.0;
        let angle: f64 = 0.6;
        let t = angle.tan();
        let support = grid_support(12, 0.15, |x, _| x * t);
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::new(1.0, 0.0, t), &c).unwrap();
        assert_relative_eq!(assess(&plane, &c).tau, 0.6, epsilon = 1e-9);
    }

    #[test]
    fn assess_saturates_at_critical_values() {
        // each component at its critical value with equal weights blends to 1
        let c = AssessmentConfig {
            weights: [1.0 / 3.0; 3],
            ..cfg()
        };
        // slope at crit: inclination = slope_crit / slope_gain
        let angle = c.slope_crit / c.slope_gain;
        let t = angle.tan();
        let h = (c.flatness_crit / c.flatness_gain).powf(0.25);
        let mut support = Vec::new();
        let n = 10;
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 - 4.5) * 0.2;
                let y = (j as f64 - 4.5) * 0.2;
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                // residual applied along the tilted normal so the plane keeps
                // its analytic orientation and every residual is exactly h
                let base = Vector3::new(x, y, t * x);
                let normal = Vector3::new(-angle.sin(), 0.0, angle.cos());
                support.push(base + normal * (sign * h));
            }
        }
        let plane = fit_plane(&support, Vector3::zeros(), Vector3::new(1.0, 0.0, t), &c).unwrap();
        let score = assess(&plane, &c);
        // sparsity does not reach its critical value here, so tau lands at
        // the slope + flatness share
        assert_relative_eq!(score.slope / c.slope_crit, 1.0, epsilon = 1e-6);
        assert_relative_eq!(score.flatness / c.flatness_crit, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn tau_monotone_in_each_component() {
        let c = cfg();
        let blend = |s: f64, f: f64, l: f64| {
            (c.weights[0] * s / c.slope_crit
                + c.weights[1] * f / c.flatness_crit
                + c.weights[2] * l / c.sparsity_crit)
                .clamp(0.0, 1.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = rng.random_range(0.0..1.0);
            let f = rng.random_range(0.0..3e-7);
            let l = rng.random_range(0.0..1.0);
            let ds = rng.random_range(0.0..0.5);
            assert!(blend(s + ds, f, l) >= blend(s, f, l));
            assert!(blend(s, f + 1e-7, l) >= blend(s, f, l));
            assert!(blend(s, f, (l + 0.3).min(1.0)) >= blend(s, f, l));
        }
    }

    #[test]
    fn world_z_rotation_leaves_scores_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let c = cfg();
        for _ in 0..20 {
            let a = rng.random_range(-0.3..0.3);
            let b = rng.random_range(-0.3..0.3);
            let support: Vec<Vector3<f64>> = (0..120)
                .map(|_| {
                    let x = rng.random_range(-1.0..1.0);
                    let y = rng.random_range(-1.0..1.0);
                    let z = a * x + b * y + rng.random_range(-0.02..0.02);
                    Vector3::new(x, y, z)
                })
                .collect();
            let hint = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
            let plane = match fit_plane(&support, Vector3::zeros(), hint, &c) {
                Some(p) => p,
                None => continue,
            };
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), phi);
            let support_r: Vec<Vector3<f64>> = support.iter().map(|p| rot * p).collect();
            let plane_r = fit_plane(&support_r, Vector3::zeros(), rot * hint, &c).unwrap();

            assert_relative_eq!(slope(&plane, &c), slope(&plane_r, &c), epsilon = 1e-6);
            assert_relative_eq!(
                flatness(&plane, &c),
                flatness(&plane_r, &c),
                max_relative = 1e-6,
                epsilon = 1e-12
            );
            let (r0, _) = vacancy_stats(&plane, &c);
            let (r1, _) = vacancy_stats(&plane_r, &c);
            assert_relative_eq!(r0, r1, epsilon = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn fitted_frames_are_orthonormal_and_right_handed(seed in 0u64..400) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = rng.random_range(-1.0..1.0);
            let b = rng.random_range(-1.0..1.0);
            let support: Vec<Vector3<f64>> = (0..60)
                .map(|_| {
                    let x = rng.random_range(-1.0..1.0);
                    let y = rng.random_range(-1.0..1.0);
                    Vector3::new(x, y, a * x + b * y + rng.random_range(-0.05..0.05))
                })
                .collect();
            let hint = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if let Some(plane) = fit_plane(&support, Vector3::zeros(), hint, &cfg()) {
                let r = plane.rotation;
                let should_be_eye = r.transpose() * r;
                prop_assert!((should_be_eye - Matrix3::identity()).norm() < 1e-9);
                prop_assert!((r.determinant() - 1.0).abs() < 1e-9);
                prop_assert!(plane.ez().z >= 0.0);
                prop_assert!((plane.ey() - plane.ez().cross(&plane.ex())).norm() < 1e-12);
            }
        }
    }

    /// Hierarchically refined search over unit normals minimizing the sum of
    /// squared residuals. Independent of the SVD path.
    fn brute_force_normal(support: &[Vector3<f64>]) -> Vector3<f64> {
        let n = support.len() as f64;
        let centroid = support.iter().sum::<Vector3<f64>>() / n;
        let cost = |normal: &Vector3<f64>| -> f64 {
            support
                .iter()
                .map(|p| {
                    let d = normal.dot(&(p - centroid));
                    d * d
                })
                .sum()
        };
        let mut best = Vector3::z();
        let mut best_cost = f64::INFINITY;
        // coarse pass over the upper hemisphere
        let mut step = 10.0_f64.to_radians();
        for i in 0..=9 {
            for j in 0..36 {
                let incl = i as f64 * step;
                let az = j as f64 * step;
                let v = Vector3::new(incl.sin() * az.cos(), incl.sin() * az.sin(), incl.cos());
                let c = cost(&v);
                if c < best_cost {
                    best_cost = c;
                    best = v;
                }
            }
        }
        // local refinement by tangent-plane offsets, which avoids the
        // spherical-coordinate degeneracy at the vertical pole
        for _ in 0..14 {
            step *= 0.5;
            let t1 = if best.z.abs() < 0.9 {
                best.cross(&Vector3::z()).normalize()
            } else {
                best.cross(&Vector3::x()).normalize()
            };
            let t2 = best.cross(&t1);
            for di in -2..=2 {
                for dj in -2..=2 {
                    let mut v = best + t1 * (di as f64 * step) + t2 * (dj as f64 * step);
                    v.normalize_mut();
                    if v.z < 0.0 {
                        v = -v;
                    }
                    let c = cost(&v);
                    if c < best_cost {
                        best_cost = c;
                        best = v;
                    }
                }
            }
        }
        best
    }

    #[test]
    fn svd_normal_matches_brute_force_on_noisy_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = rng.random_range(-0.8..0.8);
            let b = rng.random_range(-0.8..0.8);
            let support: Vec<Vector3<f64>> = (0..80)
                .map(|_| {
                    let x = rng.random_range(-1.0..1.0);
                    let y = rng.random_range(-1.0..1.0);
                    Vector3::new(x, y, a * x + b * y + rng.random_range(-0.03..0.03))
                })
                .collect();
            let (normal, _) = plane_normal_svd(&support).unwrap();
            let brute = brute_force_normal(&support);
            let angle = normal.cross(&brute).norm().asin();
            assert!(angle < 2.0_f64.to_radians(), "angle = {angle}");
        }
    }

    #[test]
    fn svd_normal_exact_on_noiseless_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let a = rng.random_range(-0.8..0.8);
            let b = rng.random_range(-0.8..0.8);
            let support: Vec<Vector3<f64>> = (0..60)
                .map(|_| {
                    let x = rng.random_range(-1.0..1.0);
                    let y = rng.random_range(-1.0..1.0);
                    Vector3::new(x, y, a * x + b * y)
                })
                .collect();
            let (normal, _) = plane_normal_svd(&support).unwrap();
            let want = Vector3::new(-a, -b, 1.0).normalize();
            let angle = normal.cross(&want).norm().asin();
            assert!(angle < 1e-9, "angle = {angle}");
        }
    }
}
