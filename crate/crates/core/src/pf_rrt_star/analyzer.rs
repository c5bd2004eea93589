//! Per-column terrain assessment with lazy or precomputed evaluation.
//!
//! Every grid-map column has at most one surface point, so plane fits are
//! memoized by column index. The hint-independent part of a fit (surface
//! projection, support extraction, SVD normal) is cached; the frame and the
//! scores are assembled per request because the in-plane axes and the
//! sparsity raster depend on the requested heading.
//!
//! Two modes mirror the two planning strategies under comparison:
//!
//! * [`AnalysisMode::Lazy`] analyzes a column the first time the planner
//!   touches it;
//! * [`AnalysisMode::Precomputed`] assesses every column of the map up front
//!   (with a canonical heading) and answers later requests from the cache
//!   alone.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::Vector3;

use crate::plane_fit::{
    self, assess, frame_from_normal, AssessmentConfig, LocalPlane, TraversabilityScore,
};
use crate::terrain_map::{GridMap3D, PointCloud, SurfacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisMode {
    Lazy,
    Precomputed,
}

/// Hint-independent part of a column assessment.
#[derive(Debug, Clone)]
struct ColumnCore {
    surface: SurfacePoint,
    support: Arc<Vec<Vector3<f64>>>,
    normal: Vector3<f64>,
}

/// A finished assessment of one column.
#[derive(Debug, Clone)]
pub struct AssessedColumn {
    pub plane: LocalPlane,
    pub score: TraversabilityScore,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzerStats {
    /// Wall time spent on fresh column analyses.
    pub analysis_secs: f64,
    /// Columns analyzed from scratch.
    pub analyzed_columns: usize,
}

pub struct TerrainAnalyzer {
    map: Arc<GridMap3D>,
    cloud: Arc<PointCloud>,
    cfg: AssessmentConfig,
    mode: AnalysisMode,
    /// `None` marks a column with no usable plane.
    lazy_cache: HashMap<(usize, usize), Option<ColumnCore>>,
    /// Canonical-heading assessments for precomputed mode.
    full_cache: HashMap<(usize, usize), Option<AssessedColumn>>,
    stats: AnalyzerStats,
}

/// Heading used for precomputed assessments, where no edge direction exists.
fn canonical_hint() -> Vector3<f64> {
    Vector3::x()
}

impl TerrainAnalyzer {
    pub fn new(
        map: Arc<GridMap3D>,
        cloud: Arc<PointCloud>,
        cfg: AssessmentConfig,
        mode: AnalysisMode,
    ) -> Self {
        let mut analyzer = Self {
            map,
            cloud,
            cfg,
            mode,
            lazy_cache: HashMap::new(),
            full_cache: HashMap::new(),
            stats: AnalyzerStats::default(),
        };
        if mode == AnalysisMode::Precomputed {
            analyzer.precompute_all();
        }
        analyzer
    }

    pub fn mode(&self) -> AnalysisMode {
        self.mode
    }

    pub fn stats(&self) -> AnalyzerStats {
        self.stats
    }

    pub fn map(&self) -> &Arc<GridMap3D> {
        &self.map
    }

    pub fn assessment_config(&self) -> &AssessmentConfig {
        &self.cfg
    }

    fn compute_core(&mut self, column: (usize, usize)) -> Option<ColumnCore> {
        let t0 = Instant::now();
        let core = self.compute_core_untimed(column);
        let dt: Duration = t0.elapsed();
        self.stats.analysis_secs += dt.as_secs_f64();
        self.stats.analyzed_columns += 1;
        core
    }

    fn compute_core_untimed(&self, column: (usize, usize)) -> Option<ColumnCore> {
        let surface = self.map.project_column(column)?;
        let support = self
            .cloud
            .query_neighborhood(surface.position, self.cfg.support_side);
        if support.len() < self.cfg.min_support_points {
            return None;
        }
        let (normal, _centroid) = plane_fit::plane_normal_svd(&support)?;
        Some(ColumnCore {
            surface,
            support: Arc::new(support),
            normal,
        })
    }

    fn finish(&self, core: &ColumnCore, hint: Vector3<f64>) -> AssessedColumn {
        let rotation = frame_from_normal(core.normal, hint);
        let plane = LocalPlane {
            center: core.surface.position,
            rotation,
            support: Arc::clone(&core.support),
            side: self.cfg.support_side,
        };
        let score = assess(&plane, &self.cfg);
        AssessedColumn { plane, score }
    }

    /// Surface point of a column, if the column has a usable assessment.
    /// In lazy mode this triggers (and caches) the column analysis.
    pub fn surface(&mut self, column: (usize, usize)) -> Option<SurfacePoint> {
        match self.mode {
            AnalysisMode::Lazy => {
                if !self.lazy_cache.contains_key(&column) {
                    let core = self.compute_core(column);
                    self.lazy_cache.insert(column, core);
                }
                self.lazy_cache[&column].as_ref().map(|c| c.surface)
            }
            AnalysisMode::Precomputed => self
                .full_cache
                .get(&column)
                .and_then(|v| v.as_ref())
                .map(|a| {
                    SurfacePoint {
                        position: a.plane.center,
                        column,
                    }
                }),
        }
    }

    /// Full assessment of a column for the given heading hint. Precomputed
    /// mode ignores the hint and answers with the canonical-heading result.
    pub fn assess_column(
        &mut self,
        column: (usize, usize),
        hint: Vector3<f64>,
    ) -> Option<AssessedColumn> {
        match self.mode {
            AnalysisMode::Lazy => {
                if !self.lazy_cache.contains_key(&column) {
                    let core = self.compute_core(column);
                    self.lazy_cache.insert(column, core);
                }
                let core = self.lazy_cache[&column].clone()?;
                Some(self.finish(&core, hint))
            }
            AnalysisMode::Precomputed => self.full_cache.get(&column).cloned().flatten(),
        }
    }

    /// Assesses every column of the map with the canonical heading.
    fn precompute_all(&mut self) {
        let dims = self.map.dims();
        let t0 = Instant::now();
        for ix in 0..dims[0] {
            for iy in 0..dims[1] {
                let column = (ix, iy);
                let assessed = self
                    .compute_core_untimed(column)
                    .map(|core| self.finish(&core, canonical_hint()));
                self.stats.analyzed_columns += 1;
                self.full_cache.insert(column, assessed);
            }
        }
        self.stats.analysis_secs += t0.elapsed().as_secs_f64();
    }
}
