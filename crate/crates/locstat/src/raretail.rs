//! Empirical exceedance probabilities P(sup over a grid > u) by crude and
//! importance-sampled Monte Carlo, the theory-versus-empirics comparison
//! table, the localization diagnostic, and the Slepian sandwich check.

use serde::{Deserialize, Serialize};

use crate::asympt::{regime_tail, stationary_tail};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{localization_delta, ProcessSpec, DEFAULT_Q};
use crate::rng::streams;
use crate::sampler::{comparison_process_cov, ComparisonKind, PathGenerator};
use crate::specfun::survival;

/// Threshold ladder used by the comparison runner when none is supplied;
/// past u = 5 even importance sampling needs effective-sample-size
/// safeguards at desk-scale budgets.
pub const DEFAULT_U_LADDER: [f64; 5] = [3.0, 3.5, 4.0, 4.5, 5.0];

/// Mesh guidance factor: grids should resolve the block length u^(−2/α);
/// meshes above `MESH_GUIDANCE_FACTOR`·u^(−2/α) accumulate visible
/// discretization bias in the supremum.
pub const MESH_GUIDANCE_FACTOR: f64 = 0.1;

/// Importance sampling is flagged ill-tilted when the effective sample
/// size drops below this fraction of n.
pub const ESS_WARN_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    Crude,
    Importance,
}

impl std::fmt::Display for TailMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailMethod::Crude => write!(f, "crude"),
            TailMethod::Importance => write!(f, "importance"),
        }
    }
}

/// A Monte Carlo exceedance probability estimate.
#[derive(Debug, Clone, Serialize)]
pub struct TailEstimate {
    pub u: f64,
    pub p_hat: f64,
    pub std_error: f64,
    pub n: usize,
    pub method: TailMethod,
    #[serde(skip)]
    pub grid: Grid,
    /// Effective sample size (Σw)²/Σw² — importance sampling only.
    pub ess: Option<f64>,
    /// Set when ess < 0.01·n: the tilt missed the exceedance region and
    /// the estimate is untrustworthy.
    pub ill_tilted: bool,
    /// Number of exceeding paths (unweighted count).
    pub exceedances: usize,
}

impl TailEstimate {
    /// 95% Clopper-Pearson-style upper bound for the zero-exceedance case;
    /// for importance sampling this certifies the tilted count, scaled by
    /// the largest observed weight.
    pub fn upper_bound_95(&self) -> f64 {
        if self.exceedances > 0 {
            return (self.p_hat + 1.6449 * self.std_error).min(1.0);
        }
        1.0 - 0.05f64.powf(1.0 / self.n as f64)
    }
}

fn check_grid_in_domain(spec: &ProcessSpec, grid: &Grid) -> Result<()> {
    if grid.start() < spec.start() - 1e-12 || grid.end() > spec.end() + 1e-12 {
        return Err(Error::invalid(format!(
            "grid [{}, {}] escapes the process domain [{}, {}]",
            grid.start(),
            grid.end(),
            spec.start(),
            spec.end()
        )));
    }
    Ok(())
}

/// Fraction of sampled paths whose grid supremum exceeds u, with binomial
/// standard error.
pub fn crude_tail(
    spec: &ProcessSpec,
    grid: &Grid,
    u: f64,
    n: usize,
    seed: u64,
) -> Result<TailEstimate> {
    if n < 1_000 {
        return Err(Error::invalid(format!("crude_tail needs n >= 1000, got {n}")));
    }
    if u.is_nan() {
        return Err(Error::invalid("crude_tail: u is NaN"));
    }
    check_grid_in_domain(spec, grid)?;
    let generator = PathGenerator::for_spec(spec, grid)?;
    let hits: Vec<bool> = generator.map_paths(n, seed, streams::CRUDE_TAIL, None, |_, values| {
        values.iter().any(|&v| v > u)
    });
    let k = hits.iter().filter(|&&h| h).count();
    let p = k as f64 / n as f64;
    Ok(TailEstimate {
        u,
        p_hat: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        n,
        method: TailMethod::Crude,
        grid: grid.clone(),
        ess: None,
        ill_tilted: false,
        exceedances: k,
    })
}

/// Importance-sampled exceedance probability: paths are drawn under a mean
/// shift μ(t) = u·Cov(X(t), X(t*))/Var(X(t*)) pointing at the grid point
/// t* of maximal variance, and reweighted by the exact likelihood ratio
/// exp(−u·X(t*)/Var(X(t*)) + u²/(2·Var(X(t*)))) evaluated at the shifted
/// sample. Exact for any Gaussian vector; effective when exceedances
/// localize near the variance maximizer.
pub fn importance_tail(
    spec: &ProcessSpec,
    grid: &Grid,
    u: f64,
    n: usize,
    seed: u64,
) -> Result<TailEstimate> {
    if n < 1_000 {
        return Err(Error::invalid(format!("importance_tail needs n >= 1000, got {n}")));
    }
    if !(u >= 2.0) {
        return Err(Error::invalid(format!(
            "importance_tail needs u >= 2 (got {u}); the zero-shift regime belongs to crude_tail"
        )));
    }
    check_grid_in_domain(spec, grid)?;
    let generator = PathGenerator::for_spec(spec, grid)?;
    let star = grid.argmax_by(|t| spec.sigma(t));
    let var_star = {
        let s = spec.sigma(grid.points()[star]);
        s * s
    };
    let shift: Vec<f64> = (0..grid.len())
        .map(|i| u * generator.cov_entry(i, star) / var_star)
        .collect();
    let log_norm = u * u / (2.0 * var_star);

    // per path: (weighted hit, weight)
    let rows: Vec<(f64, f64)> =
        generator.map_paths(n, seed, streams::IMPORTANCE_TAIL, Some(&shift), |_, values| {
            let w = (-u * values[star] / var_star + log_norm).exp();
            let hit = values.iter().any(|&v| v > u);
            (if hit { w } else { 0.0 }, w)
        });

    let nf = n as f64;
    let p = rows.iter().map(|r| r.0).sum::<f64>() / nf;
    let var = rows.iter().map(|r| (r.0 - p) * (r.0 - p)).sum::<f64>() / (nf - 1.0);
    let w_sum: f64 = rows.iter().map(|r| r.1).sum();
    let w_sq: f64 = rows.iter().map(|r| r.1 * r.1).sum();
    let ess = w_sum * w_sum / w_sq;
    let k = rows.iter().filter(|r| r.0 > 0.0).count();
    Ok(TailEstimate {
        u,
        p_hat: p,
        std_error: (var / nf).sqrt(),
        n,
        method: TailMethod::Importance,
        grid: grid.clone(),
        ess: Some(ess),
        ill_tilted: ess < ESS_WARN_FRACTION * nf,
        exceedances: k,
    })
}

/// Mean importance weight over the tilted sample; a self-normalization
/// diagnostic that should sit near 1.
pub fn mean_importance_weight(
    spec: &ProcessSpec,
    grid: &Grid,
    u: f64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let generator = PathGenerator::for_spec(spec, grid)?;
    let star = grid.argmax_by(|t| spec.sigma(t));
    let var_star = {
        let s = spec.sigma(grid.points()[star]);
        s * s
    };
    let shift: Vec<f64> = (0..grid.len())
        .map(|i| u * generator.cov_entry(i, star) / var_star)
        .collect();
    let log_norm = u * u / (2.0 * var_star);
    let ws: Vec<f64> =
        generator.map_paths(n, seed, streams::IMPORTANCE_TAIL, Some(&shift), |_, values| {
            (-u * values[star] / var_star + log_norm).exp()
        });
    let nf = n as f64;
    let mean = ws.iter().sum::<f64>() / nf;
    let var = ws.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}

/// One row of the theory-versus-empirics table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub u: f64,
    pub p_emp: f64,
    pub se: f64,
    pub p_theory: f64,
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub mesh: f64,
    pub n: usize,
    pub method: TailMethod,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// RFC-4180-style CSV with the documented column order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,p_emp,se,p_theory,ratio,ratio_lo,ratio_hi,mesh,n,method\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.u, r.p_emp, r.se, r.p_theory, r.ratio, r.ratio_lo, r.ratio_hi, r.mesh, r.n,
                r.method
            ));
        }
        out
    }
}

/// Settings for the comparison runner.
#[derive(Debug, Clone, Serialize)]
pub struct CompareConfig {
    pub n_samples: usize,
    /// Mesh ≤ mesh_factor·u^(−2/α₀); the proof-block scale.
    pub mesh_factor: f64,
    /// Hard cap on grid size (dense factorization cost guard).
    pub max_grid_points: usize,
    pub method: TailMethod,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            n_samples: 100_000,
            mesh_factor: MESH_GUIDANCE_FACTOR,
            max_grid_points: 4096,
            method: TailMethod::Importance,
        }
    }
}

/// Grid over the full domain obeying the u^(−2/α) mesh guidance, capped.
pub fn guided_grid(spec: &ProcessSpec, u: f64, cfg: &CompareConfig) -> Result<Grid> {
    let target_mesh = cfg.mesh_factor * u.powf(-2.0 / spec.index().alpha0);
    let span = spec.horizon();
    let n = ((span / target_mesh).ceil() as usize + 1).clamp(2, cfg.max_grid_points);
    Grid::uniform(spec.start(), spec.end(), n)
}

/// For each threshold: empirical exceedance on a guidance-mesh grid, the
/// closed-form value (stationary baseline for recognized stationary specs,
/// the regime formula otherwise), and their ratio with a ±3·SE band.
pub fn compare_to_theory(
    spec: &ProcessSpec,
    u_ladder: &[f64],
    h_alpha: f64,
    cfg: &CompareConfig,
    seed: u64,
) -> Result<ComparisonTable> {
    if u_ladder.is_empty() {
        return Err(Error::invalid("u ladder must be nonempty"));
    }
    if !u_ladder.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::invalid("u ladder must be increasing"));
    }
    let stationary = spec.stationary_autocovariance();
    let params = spec.regime_params();
    let mut rows = Vec::with_capacity(u_ladder.len());
    for (i, &u) in u_ladder.iter().enumerate() {
        if !(u > std::f64::consts::E) {
            return Err(Error::AsymptoticDomain(u));
        }
        let grid = guided_grid(spec, u, cfg)?;
        let est = match cfg.method {
            TailMethod::Importance => importance_tail(spec, &grid, u, cfg.n_samples, seed + i as u64)?,
            TailMethod::Crude => crude_tail(spec, &grid, u, cfg.n_samples, seed + i as u64)?,
        };
        let p_theory = match stationary {
            Some(crate::model::StationaryCov::PowerExp { a, alpha }) => {
                stationary_tail(spec.horizon(), a, alpha, h_alpha, u)?.value
            }
            None => regime_tail(&params, h_alpha, u)?.value,
        };
        let ratio = est.p_hat / p_theory;
        rows.push(ComparisonRow {
            u,
            p_emp: est.p_hat,
            se: est.std_error,
            p_theory,
            ratio,
            ratio_lo: ((est.p_hat - 3.0 * est.std_error) / p_theory).max(0.0),
            ratio_hi: (est.p_hat + 3.0 * est.std_error) / p_theory,
            mesh: grid.mesh().unwrap_or(0.0),
            n: est.n,
            method: est.method,
        });
    }
    Ok(ComparisonTable { rows })
}

/// Exceedance estimate for one outer segment of the localization split.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentEstimate {
    pub range: (f64, f64),
    pub p_hat: f64,
    pub std_error: f64,
    pub exceedances: usize,
    /// Point estimate when exceedances were observed; otherwise the 95%
    /// zero-count upper bound — never 0 ± 0.
    pub upper_bound_95: f64,
}

/// Result of the localization diagnostic: exceedance mass inside the
/// window [t₀ − δ(u), t₀ + δ(u)] versus the rest of the domain.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub u: f64,
    pub delta: f64,
    pub window: (f64, f64),
    pub inner_p: f64,
    pub inner_se: f64,
    pub outer_segments: Vec<SegmentEstimate>,
    /// Union bound over the outer segments (point estimates where
    /// available, zero-count upper bounds otherwise).
    pub outer_upper: f64,
    /// outer_upper / inner_p.
    pub ratio_upper: f64,
    /// Single-point lower bound Ψ(u) that the inner mass must dominate.
    pub inner_floor: f64,
    /// Reference envelope shape C·T·u^(2/α)·(ln u)^(−4/(3β))·Ψ(u) for the
    /// outer mass, at the configured C.
    pub bound_shape: f64,
}

/// Split the domain at the localization window δ(u) (δ₁ for γ ≤ β, δ₂ for
/// γ > β), estimate exceedance mass inside and outside, and report the
/// outer/inner ratio together with the envelope shape value.
pub fn localization_check(
    spec: &ProcessSpec,
    u: f64,
    q: f64,
    n: usize,
    seed: u64,
    envelope_c: f64,
) -> Result<LocalizationReport> {
    let params = spec.regime_params();
    let delta = localization_delta(&params, u, q)?;
    let t0 = spec.t0();
    let (lo, hi) = ((t0 - delta).max(spec.start()), (t0 + delta).min(spec.end()));
    if lo >= hi {
        return Err(Error::invalid(
            "localization window degenerate: delta too small for this spec/threshold",
        ));
    }
    let mesh_target = MESH_GUIDANCE_FACTOR * u.powf(-2.0 / params.alpha0);

    let inner_grid = Grid::with_max_mesh(lo, hi, mesh_target)?;
    let inner = importance_tail(spec, &inner_grid, u, n, seed)?;

    let mut outer_segments = Vec::new();
    let mut outer_upper = 0.0;
    for (i, (a, b)) in [(spec.start(), lo), (hi, spec.end())].into_iter().enumerate() {
        if b - a < 1e-9 {
            continue;
        }
        let grid = Grid::with_max_mesh(a, b, mesh_target)?;
        let est = importance_tail(spec, &grid, u, n, seed + 1 + i as u64)?;
        let upper = if est.exceedances > 0 { est.p_hat } else { est.upper_bound_95() };
        outer_upper += upper;
        outer_segments.push(SegmentEstimate {
            range: (a, b),
            p_hat: est.p_hat,
            std_error: est.std_error,
            exceedances: est.exceedances,
            upper_bound_95: est.upper_bound_95(),
        });
    }

    let alpha0 = params.alpha0;
    let beta = params.beta;
    let bound_shape = envelope_c
        * params.horizon
        * u.powf(2.0 / alpha0)
        * u.ln().powf(-4.0 / (3.0 * beta))
        * survival(u)?;
    Ok(LocalizationReport {
        u,
        delta,
        window: (lo, hi),
        inner_p: inner.p_hat,
        inner_se: inner.std_error,
        outer_segments,
        outer_upper,
        ratio_upper: outer_upper / inner.p_hat,
        inner_floor: survival(u)?,
        bound_shape,
    })
}

/// Settings for the Slepian sandwich diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichConfig {
    pub u: f64,
    pub nu: f64,
    pub s_horizon: f64,
    pub n_samples: usize,
    pub grid_points: usize,
    pub q: f64,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        SandwichConfig {
            u: 3.0,
            nu: 0.3,
            s_horizon: 4.0,
            n_samples: 100_000,
            grid_points: 257,
            q: DEFAULT_Q,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichArm {
    pub p_hat: f64,
    pub std_error: f64,
}

/// Empirical Slepian sandwich at one test point.
///
/// The standardized target is taken over the first proof block
/// [t₀, t₀ + S·u^(−2/α₀)] (time-rescaled onto [0, S]); the comparison
/// processes live on [0, S] with matching grids. The lower-kind process is
/// more correlated than the rescaled target, the upper-kind less, so the
/// exceedance ordering is lower ≤ target ≤ upper.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub u: f64,
    pub nu: f64,
    pub s_horizon: f64,
    pub delta: f64,
    pub lower: SandwichArm,
    pub target: SandwichArm,
    pub upper: SandwichArm,
    /// target ≥ lower within 3 pooled SE.
    pub lower_ok: bool,
    /// upper ≥ target within 3 pooled SE.
    pub upper_ok: bool,
}

pub fn slepian_sandwich(
    spec: &ProcessSpec,
    cfg: &SandwichConfig,
    seed: u64,
) -> Result<SandwichReport> {
    let params = spec.regime_params();
    let delta = localization_delta(&params, cfg.u, cfg.q)?;
    let block_len = cfg.s_horizon * cfg.u.powf(-2.0 / params.alpha0);
    let t0 = spec.t0();
    let block_end = t0 + block_len;
    if block_end > spec.end() + 1e-12 {
        return Err(Error::invalid(format!(
            "proof block [{t0}, {block_end}] escapes the domain; shrink S or u"
        )));
    }

    // Standardized target: correlation-only covariance on the block grid.
    let block_grid = Grid::uniform(t0, block_end, cfg.grid_points)?;
    let pts = block_grid.points();
    let nq = pts.len();
    let mut m = nalgebra::DMatrix::zeros(nq, nq);
    for i in 0..nq {
        m[(i, i)] = 1.0;
        for j in (i + 1)..nq {
            let r = spec.correlation(pts[i], pts[j])?;
            m[(i, j)] = r;
            m[(j, i)] = r;
        }
    }
    let target_cov = crate::sampler::CovarianceMatrix::from_dense(block_grid, m)?;
    let target_gen = PathGenerator::Dense(target_cov);
    let target_hits: Vec<bool> =
        target_gen.map_paths(cfg.n_samples, seed, streams::SANDWICH, None, |_, values| {
            values.iter().any(|&v| v > cfg.u)
        });

    // Comparison processes on [0, S], same point count.
    let s_grid = Grid::uniform(0.0, cfg.s_horizon, cfg.grid_points)?;
    let mut arms = Vec::with_capacity(2);
    for (i, kind) in [ComparisonKind::Lower, ComparisonKind::Upper].into_iter().enumerate() {
        let cov = comparison_process_cov(
            kind,
            cfg.nu,
            cfg.u,
            &params,
            cfg.s_horizon,
            delta,
            &s_grid,
        )?;
        let generator = PathGenerator::Dense(cov);
        let hits: Vec<bool> = generator.map_paths(
            cfg.n_samples,
            seed + 1 + i as u64,
            streams::SANDWICH,
            None,
            |_, values| values.iter().any(|&v| v > cfg.u),
        );
        arms.push(binomial_arm(&hits));
    }
    let target = binomial_arm(&target_hits);
    let (lower, upper) = (arms[0].clone(), arms[1].clone());

    let pooled_lt = (lower.std_error * lower.std_error + target.std_error * target.std_error)
        .sqrt();
    let pooled_tu = (target.std_error * target.std_error + upper.std_error * upper.std_error)
        .sqrt();
    Ok(SandwichReport {
        u: cfg.u,
        nu: cfg.nu,
        s_horizon: cfg.s_horizon,
        delta,
        lower_ok: target.p_hat >= lower.p_hat - 3.0 * pooled_lt,
        upper_ok: upper.p_hat >= target.p_hat - 3.0 * pooled_tu,
        lower,
        target,
        upper,
    })
}

fn binomial_arm(hits: &[bool]) -> SandwichArm {
    let n = hits.len() as f64;
    let p = hits.iter().filter(|&&h| h).count() as f64 / n;
    SandwichArm { p_hat: p, std_error: (p * (1.0 - p) / n).sqrt() }
}
