//! Point clouds, voxel grid maps, and the surface queries the planner runs on.
//!
//! The map pipeline is: load or synthesize a [`PointCloud`], voxelize it into
//! a [`GridMap3D`], then answer two kinds of queries during planning:
//!
//! * **surface projection** — map a 2D point to the lowest occupied voxel in
//!   its column that has free space directly above it ([`GridMap3D::project_to_surface`]);
//! * **neighborhood extraction** — collect the cloud points inside an
//!   axis-aligned cube around a surface point ([`PointCloud::query_neighborhood`]),
//!   which feed the local plane fit.
//!
//! Neighborhood queries run against the original cloud, not the voxelized
//! map; the grid map only serves projection and collision checks.

mod kdtree;
pub mod io;
pub mod synth;

use nalgebra::{Vector2, Vector3};
use thiserror::Error;

use kdtree::KdTree;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("non-finite coordinate in point {index}")]
    NonFinitePoint { index: usize },
    #[error("voxel resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("query point ({x}, {y}) is outside the map bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("terrain spec field `{field}`: {msg}")]
    SpecField { field: String, msg: String },
}

/// An immutable set of 3D points in the world frame.
///
/// Construction validates the points and builds a kd-tree so box queries do
/// not rescan the whole cloud. The cloud is safe to share across threads.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
    kd: KdTree,
    aabb_min: Vector3<f64>,
    aabb_max: Vector3<f64>,
}

impl PointCloud {
    /// Builds a cloud from raw points. Rejects empty input and non-finite
    /// coordinates.
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self, TerrainError> {
        if points.is_empty() {
            return Err(TerrainError::EmptyCloud);
        }
        let mut lo = points[0];
        let mut hi = points[0];
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(TerrainError::NonFinitePoint { index: i });
            }
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let kd = KdTree::build(&points);
        Ok(Self {
            points,
            kd,
            aabb_min: lo,
            aabb_max: hi,
        })
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounding box of the cloud as `(min, max)`.
    pub fn aabb(&self) -> (Vector3<f64>, Vector3<f64>) {
        (self.aabb_min, self.aabb_max)
    }

    /// Returns every point `p` with `|p - center| <= side / 2` on all three
    /// axes. Order is unspecified; the result may be empty.
    pub fn query_neighborhood(&self, center: Vector3<f64>, side: f64) -> Vec<Vector3<f64>> {
        assert!(side > 0.0, "neighborhood side must be positive");
        let half = side / 2.0;
        let lo = center.map(|c| c - half);
        let hi = center.map(|c| c + half);
        let mut out = Vec::new();
        self.kd
            .box_query(&self.points, lo, hi, &mut |p| out.push(p));
        out
    }
}

/// A surface cell: the lowest occupied voxel of a column with free space
/// immediately above it.
///
/// `position` is snapped to the voxel lattice: x/y at the column center, z at
/// the base of the occupied voxel. All queries landing in the same column
/// therefore produce the identical surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vector3<f64>,
    pub column: (usize, usize),
}

/// Voxelized occupancy of a point cloud.
///
/// Bounds are the cloud's AABB padded by one voxel per side, so every
/// occupied voxel has in-bounds neighbors. The lower height bound of the
/// lattice equals the origin's z coordinate.
#[derive(Debug, Clone)]
pub struct GridMap3D {
    origin: Vector3<f64>,
    res: f64,
    dims: [usize; 3],
    occupancy: Vec<bool>,
}

impl GridMap3D {
    /// Voxelizes a cloud: a voxel is occupied iff at least one point falls
    /// inside it.
    pub fn voxelize(cloud: &PointCloud, res: f64) -> Result<Self, TerrainError> {
        if !(res > 0.0) || !res.is_finite() {
            return Err(TerrainError::BadResolution(res));
        }
        let (lo, hi) = cloud.aabb();
        let origin = lo.map(|c| c - res);
        let dims = [
            ((hi.x - lo.x) / res).floor() as usize + 3,
            ((hi.y - lo.y) / res).floor() as usize + 3,
            ((hi.z - lo.z) / res).floor() as usize + 3,
        ];
        let mut map = Self {
            origin,
            res,
            dims,
            occupancy: vec![false; dims[0] * dims[1] * dims[2]],
        };
        for p in cloud.points() {
            if let Some(v) = map.world_to_grid(*p) {
                let idx = map.index(v);
                map.occupancy[idx] = true;
            }
        }
        Ok(map)
    }

    pub fn res(&self) -> f64 {
        self.res
    }

    pub fn origin(&self) -> Vector3<f64> {
        self.origin
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Lower height bound of the voxel lattice.
    pub fn z_lower(&self) -> f64 {
        self.origin.z
    }

    fn index(&self, v: [usize; 3]) -> usize {
        (v[2] * self.dims[1] + v[1]) * self.dims[0] + v[0]
    }

    pub fn is_occupied(&self, v: [usize; 3]) -> bool {
        self.occupancy[self.index(v)]
    }

    pub fn world_to_grid(&self, p: Vector3<f64>) -> Option<[usize; 3]> {
        let mut v = [0usize; 3];
        for a in 0..3 {
            let i = ((p[a] - self.origin[a]) / self.res).floor();
            if i < 0.0 || i >= self.dims[a] as f64 {
                return None;
            }
            v[a] = i as usize;
        }
        Some(v)
    }

    /// Center of a voxel in world coordinates.
    pub fn grid_to_world(&self, v: [usize; 3]) -> Vector3<f64> {
        Vector3::new(
            self.origin.x + (v[0] as f64 + 0.5) * self.res,
            self.origin.y + (v[1] as f64 + 0.5) * self.res,
            self.origin.z + (v[2] as f64 + 0.5) * self.res,
        )
    }

    /// XY extent of the map as `(min, max)`.
    pub fn xy_bounds(&self) -> (Vector2<f64>, Vector2<f64>) {
        (
            Vector2::new(self.origin.x, self.origin.y),
            Vector2::new(
                self.origin.x + self.dims[0] as f64 * self.res,
                self.origin.y + self.dims[1] as f64 * self.res,
            ),
        )
    }

    /// Column index holding a 2D point, if in bounds.
    pub fn column_of(&self, xy: Vector2<f64>) -> Option<(usize, usize)> {
        let ix = ((xy.x - self.origin.x) / self.res).floor();
        let iy = ((xy.y - self.origin.y) / self.res).floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.dims[0] as f64 || iy >= self.dims[1] as f64 {
            return None;
        }
        Some((ix as usize, iy as usize))
    }

    /// XY center of a column.
    pub fn column_center(&self, column: (usize, usize)) -> Vector2<f64> {
        Vector2::new(
            self.origin.x + (column.0 as f64 + 0.5) * self.res,
            self.origin.y + (column.1 as f64 + 0.5) * self.res,
        )
    }

    /// Whether any voxel of the column is occupied.
    pub fn column_has_occupancy(&self, column: (usize, usize)) -> bool {
        (0..self.dims[2]).any(|k| self.is_occupied([column.0, column.1, k]))
    }

    /// Projects a 2D point to the terrain surface: the lowest voxel in its
    /// column that is occupied with a free voxel directly above. Returns
    /// `None` when the column has no such voxel (fully free, or occupied all
    /// the way to the top). Errors when the point is outside the map bounds.
    pub fn project_to_surface(
        &self,
        xy: Vector2<f64>,
    ) -> Result<Option<SurfacePoint>, TerrainError> {
        let column = self
            .column_of(xy)
            .ok_or(TerrainError::OutOfBounds { x: xy.x, y: xy.y })?;
        Ok(self.project_column(column))
    }

    /// Surface of a column addressed by index. See [`Self::project_to_surface`].
    pub fn project_column(&self, column: (usize, usize)) -> Option<SurfacePoint> {
        let (ix, iy) = column;
        for k in 0..self.dims[2] {
            if !self.is_occupied([ix, iy, k]) {
                continue;
            }
            let above_free = k + 1 >= self.dims[2] || !self.is_occupied([ix, iy, k + 1]);
            if above_free {
                let c = self.column_center(column);
                let z = self.origin.z + k as f64 * self.res;
                return Some(SurfacePoint {
                    position: Vector3::new(c.x, c.y, z),
                    column,
                });
            }
        }
        None
    }
}
