//! Uniform time grids and sampled paths.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::SeedLineage;

/// A uniform, strictly increasing grid of time points.
#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    start: f64,
    end: f64,
    n: usize,
    #[serde(skip)]
    points: Arc<[f64]>,
}

impl Grid {
    /// Uniform grid of `n >= 1` points on `[start, end]`. A single-point
    /// grid requires `start == end`.
    pub fn uniform(start: f64, end: f64, n: usize) -> Result<Grid> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::invalid("grid endpoints must be finite"));
        }
        if n == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        if n == 1 {
            if start != end {
                return Err(Error::invalid(
                    "single-point grid requires start == end",
                ));
            }
            return Ok(Grid { start, end, n, points: Arc::from(vec![start]) });
        }
        if !(end > start) {
            return Err(Error::invalid(format!(
                "grid requires end > start, got [{start}, {end}]"
            )));
        }
        let mesh = (end - start) / (n as f64 - 1.0);
        let mut points: Vec<f64> = (0..n).map(|i| start + i as f64 * mesh).collect();
        // pin the endpoint exactly
        points[n - 1] = end;
        Ok(Grid { start, end, n, points: Arc::from(points) })
    }

    /// Grid on `[start, end]` whose mesh does not exceed `max_mesh`.
    pub fn with_max_mesh(start: f64, end: f64, max_mesh: f64) -> Result<Grid> {
        if !(max_mesh > 0.0) {
            return Err(Error::invalid("max_mesh must be positive"));
        }
        let span = end - start;
        if span <= 0.0 {
            return Grid::uniform(start, end, 1);
        }
        let n = ((span / max_mesh).ceil() as usize).max(1) + 1;
        Grid::uniform(start, end, n)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh width; `None` for a single-point grid.
    pub fn mesh(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.end - self.start) / (self.n as f64 - 1.0))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Index of the grid point maximizing `f` (first maximizer on ties).
    pub fn argmax_by(&self, mut f: impl FnMut(f64) -> f64) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &t) in self.points.iter().enumerate() {
            let v = f(t);
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        best
    }
}

/// A sampled path on a grid, with the substream that produced it.
#[derive(Debug, Clone)]
pub struct GridPath {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub seed_lineage: SeedLineage,
}

impl GridPath {
    /// Largest value on the grid (the discrete supremum).
    pub fn supremum(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Maximum of the path values.
pub fn path_supremum(path: &GridPath) -> f64 {
    path.supremum()
}
