//! Exact stationary Gaussian sequence simulation by circulant embedding,
//! and fractional Brownian motion built from embedded fractional Gaussian
//! noise.
//!
//! The autocovariance (ρ(0), …, ρ(n)) is extended evenly into a circulant
//! of size 2n whose eigenvalues come from one FFT. Each subsequent FFT of a
//! complex Gaussian vector weighted by √(λ_j/m) yields two independent
//! samples of the sequence (real and imaginary parts), which keeps the
//! method exact up to floating point — no truncation, no low-rank
//! approximation.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridPath};
use crate::rng::{streams, substream_rng, SeedLineage};

/// Relative tolerance for clipping slightly negative embedding eigenvalues;
/// anything more negative is refused, because silent clipping biases the
/// extreme-value statistics this crate exists to measure.
pub const EIGENVALUE_CLIP_TOL: f64 = 1e-9;

pub struct CirculantEmbedding {
    n: usize,
    m: usize,
    weights: Vec<f64>, // sqrt(λ_j / m)
    fft: Arc<dyn Fft<f64>>,
    min_eigenvalue: f64,
}

impl CirculantEmbedding {
    /// Build the embedding for `n`-point samples of a stationary sequence
    /// with autocovariance `rho(lag)` at integer lags.
    pub fn new(rho: impl Fn(usize) -> f64, n: usize) -> Result<CirculantEmbedding> {
        if n < 2 {
            return Err(Error::invalid("circulant embedding needs n >= 2 points"));
        }
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);

        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = j.min(m - j);
                Complex::new(rho(lag), 0.0)
            })
            .collect();
        if row.iter().any(|c| !c.re.is_finite()) {
            return Err(Error::model("autocovariance produced non-finite values"));
        }
        fft.process(&mut row);

        let mut max_eig: f64 = 0.0;
        let mut min_eig = f64::INFINITY;
        for c in &row {
            max_eig = max_eig.max(c.re);
            min_eig = min_eig.min(c.re);
        }
        let tolerance = EIGENVALUE_CLIP_TOL * max_eig;
        if min_eig < -tolerance {
            return Err(Error::EmbeddingFailure { eigenvalue: min_eig, tolerance });
        }
        let weights = row
            .iter()
            .map(|c| (c.re.max(0.0) / m as f64).sqrt())
            .collect();
        Ok(CirculantEmbedding { n, m, weights, fft, min_eigenvalue: min_eig })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Draw two independent samples of the sequence into `out1`, `out2`.
    /// `scratch` is resized to the circulant length and reused across calls.
    pub fn sample_pair_into(
        &self,
        rng: &mut impl Rng,
        scratch: &mut Vec<Complex<f64>>,
        out1: &mut [f64],
        out2: &mut [f64],
    ) {
        debug_assert_eq!(out1.len(), self.n);
        debug_assert_eq!(out2.len(), self.n);
        scratch.clear();
        scratch.extend((0..self.m).map(|j| {
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            Complex::new(self.weights[j] * u, self.weights[j] * v)
        }));
        self.fft.process(scratch);
        for i in 0..self.n {
            out1[i] = scratch[i].re;
            out2[i] = scratch[i].im;
        }
    }
}

/// Fractional Gaussian noise autocovariance at unit spacing for a motion
/// with E[B(t)²] = t^α: ρ(k) = ½(|k+1|^α − 2|k|^α + |k−1|^α).
pub fn fgn_autocov(alpha: f64, lag: usize) -> f64 {
    let k = lag as f64;
    0.5 * ((k + 1.0).powf(alpha) - 2.0 * k.powf(alpha) + (k - 1.0).abs().powf(alpha))
}

/// Sampler for fractional Brownian motion paths on a uniform grid starting
/// at 0, exact via circulant-embedded increments.
pub struct FbmSampler {
    alpha: f64,
    grid: Grid,
    embedding: CirculantEmbedding,
    increment_scale: f64,
}

impl FbmSampler {
    pub fn new(alpha: f64, grid: Grid) -> Result<FbmSampler> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid(format!(
                "fbm index alpha must lie in (0, 2], got {alpha}"
            )));
        }
        if grid.start() != 0.0 {
            return Err(Error::invalid("fbm grid must start at 0"));
        }
        let mesh = grid
            .mesh()
            .ok_or_else(|| Error::invalid("fbm grid needs at least 2 points"))?;
        let embedding = CirculantEmbedding::new(|lag| fgn_autocov(alpha, lag), grid.len() - 1)?;
        Ok(FbmSampler {
            alpha,
            grid,
            embedding,
            increment_scale: mesh.powf(alpha / 2.0),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Two independent paths per call; `out*` must have grid length. The
    /// first value of each path is exactly 0.
    pub fn sample_pair_into(
        &self,
        rng: &mut impl Rng,
        scratch: &mut Vec<Complex<f64>>,
        out1: &mut [f64],
        out2: &mut [f64],
    ) {
        let n_inc = self.grid.len() - 1;
        self.embedding
            .sample_pair_into(rng, scratch, &mut out1[1..], &mut out2[1..]);
        for out in [&mut *out1, &mut *out2] {
            out[0] = 0.0;
            let mut acc = 0.0;
            for i in 0..n_inc {
                acc += out[i + 1] * self.increment_scale;
                out[i + 1] = acc;
            }
        }
    }
}

/// One exact fractional Brownian motion path with E[B(t)²] = t^α.
pub fn fbm_path(alpha: f64, grid: &Grid, seed: u64) -> Result<GridPath> {
    let sampler = FbmSampler::new(alpha, grid.clone())?;
    let mut rng = substream_rng(seed, streams::FBM_PATH, 0);
    let mut scratch = Vec::new();
    let mut values = vec![0.0; grid.len()];
    let mut discard = vec![0.0; grid.len()];
    sampler.sample_pair_into(&mut rng, &mut scratch, &mut values, &mut discard);
    Ok(GridPath {
        grid: grid.clone(),
        values,
        seed_lineage: SeedLineage { root: seed, stream: streams::FBM_PATH, item: 0 },
    })
}
