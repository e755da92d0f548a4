//! Dense covariance assembly, factorization with a recorded jitter ladder,
//! multivariate normal path sampling, and the stationary comparison
//! kernels used by the Slepian sandwich diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridPath};
use crate::model::{ProcessSpec, RegimeParams};
use crate::rng::{streams, substream_rng, SeedLineage};

/// Jitter ladder, as multiples of trace/n. The first rung that lets the
/// factorization succeed is recorded on the matrix.
pub const JITTER_LADDER: [f64; 3] = [1e-14, 1e-12, 1e-10];

/// Required symmetry of assembled covariances (absolute, relative to the
/// mean diagonal scale).
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A factorized covariance on a grid.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    grid: Grid,
    matrix: DMatrix<f64>,
    factor: DMatrix<f64>,
    jitter_applied: f64,
}

impl CovarianceMatrix {
    /// Factorize a dense covariance over `grid`, escalating through the
    /// jitter ladder if the plain Cholesky fails.
    pub fn from_dense(grid: Grid, matrix: DMatrix<f64>) -> Result<CovarianceMatrix> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::invalid(format!(
                "covariance is {}x{} but the grid has {n} points",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::model("covariance has non-finite entries"));
        }
        let scale = (matrix.trace() / n as f64).abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in (i + 1)..n {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale.max(1.0) {
                    return Err(Error::invalid(format!(
                        "covariance not symmetric at ({i}, {j}): {} vs {}",
                        matrix[(i, j)],
                        matrix[(j, i)]
                    )));
                }
            }
        }

        if let Some(chol) = nalgebra::Cholesky::new(matrix.clone()) {
            return Ok(CovarianceMatrix {
                grid,
                matrix,
                factor: chol.unpack(),
                jitter_applied: 0.0,
            });
        }
        for rung in JITTER_LADDER {
            let jitter = rung * scale;
            let mut bumped = matrix.clone();
            for i in 0..n {
                bumped[(i, i)] += jitter;
            }
            if let Some(chol) = nalgebra::Cholesky::new(bumped) {
                return Ok(CovarianceMatrix {
                    grid,
                    matrix,
                    factor: chol.unpack(),
                    jitter_applied: jitter,
                });
            }
        }
        let min_eigenvalue = matrix
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        Err(Error::NotPositiveDefinite { min_eigenvalue })
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular factor L with L·Lᵀ = matrix + jitter·I.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn jitter_applied(&self) -> f64 {
        self.jitter_applied
    }

    /// One zero-mean sample into `out` (gets L·z with z standard normal).
    pub fn sample_into(&self, rng: &mut impl Rng, z: &mut DVector<f64>, out: &mut DVector<f64>) {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        out.gemv(1.0, &self.factor, z, 0.0);
    }
}

/// Assemble σ(s)σ(t)·r(s,t) over the grid and factorize it.
pub fn covariance_on_grid(spec: &ProcessSpec, grid: &Grid) -> Result<CovarianceMatrix> {
    if grid.start() < spec.start() - 1e-12 || grid.end() > spec.end() + 1e-12 {
        return Err(Error::invalid(format!(
            "grid [{}, {}] escapes the process domain [{}, {}]",
            grid.start(),
            grid.end(),
            spec.start(),
            spec.end()
        )));
    }
    let pts = grid.points();
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let si = spec.sigma(pts[i]);
        m[(i, i)] = si * si;
        for j in (i + 1)..n {
            let v = spec.sigma(pts[i]) * spec.sigma(pts[j]) * spec.correlation(pts[i], pts[j])?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    CovarianceMatrix::from_dense(grid.clone(), m)
}

/// `count` independent zero-mean Gaussian paths with the given covariance.
/// Deterministic in (seed, count, grid): each path draws from its own
/// substream and the output preserves path order.
pub fn sample_paths(cov: &CovarianceMatrix, count: usize, seed: u64) -> Vec<GridPath> {
    use rayon::prelude::*;

    let n = cov.n();
    (0..count)
        .into_par_iter()
        .map_init(
            || (DVector::zeros(n), DVector::zeros(n)),
            |(z, out), item| {
                let mut rng = substream_rng(seed, streams::SAMPLE_PATHS, item as u64);
                cov.sample_into(&mut rng, z, out);
                GridPath {
                    grid: cov.grid().clone(),
                    values: out.as_slice().to_vec(),
                    seed_lineage: SeedLineage {
                        root: seed,
                        stream: streams::SAMPLE_PATHS,
                        item: item as u64,
                    },
                }
            },
        )
        .collect()
}

/// Which side of the sandwich a comparison process bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComparisonKind {
    /// Covariance 1 − (1−ν)·a·u⁻²·|s−t|^(α+2b·window^β): more correlated
    /// than the rescaled target, so its exceedance is the lower bound.
    Lower,
    /// Covariance 1 − (1+ν)·a·u⁻²·|s−t|^α: less correlated than the
    /// rescaled target, so its exceedance is the upper bound.
    Upper,
}

/// Stationary comparison-process covariance on a grid inside [0, S].
///
/// `window` is the localization width δ(u); the lower kind inflates the
/// exponent to α + 2b·window^β and requires that inflated exponent ≤ 2.
/// These kernels are only locally positive definite: factorization failure
/// on a given grid is a structured error, not a panic.
pub fn comparison_process_cov(
    kind: ComparisonKind,
    nu: f64,
    u: f64,
    p: &RegimeParams,
    s_horizon: f64,
    window: f64,
    grid: &Grid,
) -> Result<CovarianceMatrix> {
    p.validate()?;
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::invalid(format!("nu must lie in (0, 1), got {nu}")));
    }
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::invalid(format!("u must be positive, got {u}")));
    }
    if !(s_horizon > 0.0) || !(window > 0.0) {
        return Err(Error::invalid("horizon and window must be positive"));
    }
    if grid.start() < -1e-12 || grid.end() > s_horizon + 1e-12 {
        return Err(Error::invalid(format!(
            "grid [{}, {}] escapes [0, {s_horizon}]",
            grid.start(),
            grid.end()
        )));
    }
    let (factor, exponent) = match kind {
        ComparisonKind::Lower => {
            let exponent = p.alpha0 + 2.0 * p.b * window.powf(p.beta);
            if exponent > 2.0 {
                return Err(Error::invalid(format!(
                    "inflated exponent α + 2b·window^β = {exponent} exceeds 2"
                )));
            }
            (1.0 - nu, exponent)
        }
        ComparisonKind::Upper => (1.0 + nu, p.alpha0),
    };
    let scale = factor * p.a0 / (u * u);
    let pts = grid.points();
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = 1.0 - scale * (pts[i] - pts[j]).abs().powf(exponent);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    CovarianceMatrix::from_dense(grid.clone(), m)
}
