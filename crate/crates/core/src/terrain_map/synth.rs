//! Synthetic terrain generation from a JSON spec.
//!
//! A spec is a list of primitives processed in order. Surface primitives
//! (`plate`, `ramp`) emit points on a cell-centered lattice with the spec's
//! `spacing`; modifier primitives act on every point emitted so far: `step`
//! raises the points inside its footprint, `bumps` adds a signed Gaussian-bump
//! height field, and `hole` removes points. Generation is deterministic given
//! the spec and its seed.

use nalgebra::{Vector2, Vector3};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PointCloud, TerrainError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainSpec {
    #[serde(default)]
    pub seed: u64,
    /// Lattice spacing of generated surface points, meters.
    pub spacing: f64,
    /// Std of Gaussian z-jitter applied to every point after all primitives;
    /// 0 disables it.
    #[serde(default)]
    pub noise_std: f64,
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    /// Horizontal rectangle of surface points at height `z`.
    Plate {
        min: [f64; 2],
        max: [f64; 2],
        #[serde(default)]
        z: f64,
    },
    /// Inclined rectangle. Height grows along `axis` from `z0` at the low
    /// edge with slope `tan(angle_deg)`.
    Ramp {
        min: [f64; 2],
        max: [f64; 2],
        axis: RampAxis,
        angle_deg: f64,
        #[serde(default)]
        z0: f64,
    },
    /// Raises previously generated points inside the footprint by `height`.
    Step {
        min: [f64; 2],
        max: [f64; 2],
        height: f64,
    },
    /// Removes previously generated points inside the footprint.
    Hole { min: [f64; 2], max: [f64; 2] },
    /// Adds `count` signed Gaussian bumps of std `sigma` and peak height
    /// `amplitude` at seeded random centers inside the footprint, perturbing
    /// previously generated points.
    Bumps {
        min: [f64; 2],
        max: [f64; 2],
        amplitude: f64,
        sigma: f64,
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RampAxis {
    XPos,
    XNeg,
    YPos,
    YNeg,
}

impl TerrainSpec {
    pub fn from_json(text: &str) -> Result<Self, TerrainError> {
        let spec: TerrainSpec =
            serde_json::from_str(text).map_err(|e| TerrainError::SpecField {
                field: "<document>".into(),
                msg: e.to_string(),
            })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        let field_err = |field: &str, msg: String| TerrainError::SpecField {
            field: field.into(),
            msg,
        };
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(field_err("spacing", format!("must be > 0, got {}", self.spacing)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(field_err(
                "noise_std",
                format!("must be >= 0, got {}", self.noise_std),
            ));
        }
        if self.primitives.is_empty() {
            return Err(field_err("primitives", "must not be empty".into()));
        }
        for (i, prim) in self.primitives.iter().enumerate() {
            let rect_check = |min: &[f64; 2], max: &[f64; 2]| -> Result<(), TerrainError> {
                for a in 0..2 {
                    if !(min[a] < max[a]) || !min[a].is_finite() || !max[a].is_finite() {
                        return Err(field_err(
                            &format!("primitives[{i}].min/max"),
                            format!("min {:?} must be < max {:?} per axis", min, max),
                        ));
                    }
                }
                Ok(())
            };
            match prim {
                Primitive::Plate { min, max, z } => {
                    rect_check(min, max)?;
                    if !z.is_finite() {
                        return Err(field_err(&format!("primitives[{i}].z"), "must be finite".into()));
                    }
                }
                Primitive::Ramp {
                    min,
                    max,
                    angle_deg,
                    z0,
                    ..
                } => {
                    rect_check(min, max)?;
                    if !(angle_deg.abs() < 89.0) {
                        return Err(field_err(
                            &format!("primitives[{i}].angle_deg"),
                            format!("must be in (-89, 89), got {angle_deg}"),
                        ));
                    }
                    if !z0.is_finite() {
                        return Err(field_err(&format!("primitives[{i}].z0"), "must be finite".into()));
                    }
                }
                Primitive::Step { min, max, height } => {
                    rect_check(min, max)?;
                    if !height.is_finite() {
                        return Err(field_err(
                            &format!("primitives[{i}].height"),
                            "must be finite".into(),
                        ));
                    }
                }
                Primitive::Hole { min, max } => rect_check(min, max)?,
                Primitive::Bumps {
                    min,
                    max,
                    amplitude,
                    sigma,
                    count,
                } => {
                    rect_check(min, max)?;
                    if !(*sigma > 0.0 && sigma.is_finite()) {
                        return Err(field_err(
                            &format!("primitives[{i}].sigma"),
                            format!("must be > 0, got {sigma}"),
                        ));
                    }
                    if !amplitude.is_finite() {
                        return Err(field_err(
                            &format!("primitives[{i}].amplitude"),
                            "must be finite".into(),
                        ));
                    }
                    if *count == 0 {
                        return Err(field_err(
                            &format!("primitives[{i}].count"),
                            "must be >= 1".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn in_rect(p: Vector2<f64>, min: &[f64; 2], max: &[f64; 2]) -> bool {
    p.x >= min[0] && p.x < max[0] && p.y >= min[1] && p.y < max[1]
}

/// Cell-centered lattice over `[min, max)` with the given spacing.
fn lattice(min: &[f64; 2], max: &[f64; 2], spacing: f64) -> Vec<Vector2<f64>> {
    let nx = ((max[0] - min[0]) / spacing).round().max(1.0) as usize;
    let ny = ((max[1] - min[1]) / spacing).round().max(1.0) as usize;
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let p = Vector2::new(
                min[0] + (i as f64 + 0.5) * spacing,
                min[1] + (j as f64 + 0.5) * spacing,
            );
            if in_rect(p, min, max) {
                out.push(p);
            }
        }
    }
    out
}

/// Generates a point cloud from a terrain spec. Deterministic given the spec
/// (including its seed).
pub fn synthesize_terrain(spec: &TerrainSpec) -> Result<PointCloud, TerrainError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points: Vec<Vector3<f64>> = Vec::new();
    for prim in &spec.primitives {
        match prim {
            Primitive::Plate { min, max, z } => {
                points.extend(
                    lattice(min, max, spec.spacing)
                        .into_iter()
                        .map(|p| Vector3::new(p.x, p.y, *z)),
                );
            }
            Primitive::Ramp {
                min,
                max,
                axis,
                angle_deg,
                z0,
            } => {
                let slope = angle_deg.to_radians().tan();
                points.extend(lattice(min, max, spec.spacing).into_iter().map(|p| {
                    let along = match axis {
                        RampAxis::XPos => p.x - min[0],
                        RampAxis::XNeg => max[0] - p.x,
                        RampAxis::YPos => p.y - min[1],
                        RampAxis::YNeg => max[1] - p.y,
                    };
                    Vector3::new(p.x, p.y, z0 + slope * along)
                }));
            }
            Primitive::Step { min, max, height } => {
                for p in points.iter_mut() {
                    if in_rect(p.xy(), min, max) {
                        p.z += height;
                    }
                }
            }
            Primitive::Hole { min, max } => {
                points.retain(|p| !in_rect(p.xy(), min, max));
            }
            Primitive::Bumps {
                min,
                max,
                amplitude,
                sigma,
                count,
            } => {
                let centers: Vec<(Vector2<f64>, f64)> = (0..*count)
                    .map(|_| {
                        let c = Vector2::new(
                            rng.random_range(min[0]..max[0]),
                            rng.random_range(min[1]..max[1]),
                        );
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        (c, sign)
                    })
                    .collect();
                let reach = 3.0 * sigma;
                for p in points.iter_mut() {
                    if !in_rect(p.xy(), min, max) {
                        continue;
                    }
                    for (c, sign) in &centers {
                        let d2 = (p.xy() - c).norm_squared();
                        if d2 <= reach * reach {
                            p.z += sign * amplitude * (-d2 / (2.0 * sigma * sigma)).exp();
                        }
                    }
                }
            }
        }
    }
    if spec.noise_std > 0.0 {
        for p in points.iter_mut() {
            // Box-Muller keeps the dependency footprint small
            let u1: f64 = rng.random_range(f64::EPSILON..1.0);
            let u2: f64 = rng.random::<f64>();
            let g = (-2.0_f64 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            p.z += spec.noise_std * g;
        }
    }
    PointCloud::new(points)
}
