//! Numerical validation that a process specification satisfies the standing
//! assumptions: index range and continuity, scale bounds, the local
//! correlation expansion, the variance shape around its unique maximum, and
//! the index expansion at the maximizer.
//!
//! Little-o conditions can only be checked as trends at finite resolution;
//! each check fits the leading term over a shrinking probe ladder and
//! reports the worst relative residual at the finest usable probe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ProcessSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    /// Geometric probe offsets for the correlation and index expansions.
    pub h_ladder: Vec<f64>,
    /// Exponent targets E for the variance expansion; probed at offsets
    /// s = E^(−1/γ) so that exp(−|s|^(−γ)) = exp(−E) stays representable.
    pub variance_exponent_targets: Vec<f64>,
    /// Relative residual tolerance for the correlation expansion at the
    /// smallest probe offset.
    pub tol_correlation: f64,
    /// Relative residual tolerance for the variance expansion.
    pub tol_variance: f64,
    /// Relative residual tolerance for the index expansion.
    pub tol_index: f64,
    /// Probe-grid resolution for range/bound/uniqueness checks.
    pub probe_points: usize,
    /// Values of σ within this drop of the maximum count as maximal for
    /// the uniqueness check.
    pub uniqueness_drop: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            h_ladder: vec![1e-2, 1e-3, 1e-4],
            variance_exponent_targets: vec![5.0, 10.0, 20.0],
            tol_correlation: 0.05,
            tol_variance: 0.05,
            tol_index: 0.05,
            probe_points: 257,
            uniqueness_drop: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub worst_rel_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn validate_assumptions(
    spec: &ProcessSpec,
    cfg: &ValidationConfig,
) -> Result<ValidationReport> {
    if cfg.probe_points < 3 {
        return Err(Error::invalid("validation needs at least 3 probe points"));
    }
    if cfg.h_ladder.is_empty() || cfg.variance_exponent_targets.is_empty() {
        return Err(Error::invalid("validation probe ladders must be nonempty"));
    }
    let checks = vec![
        index_range_check(spec, cfg)?,
        scale_bounds_check(spec, cfg)?,
        correlation_expansion_check(spec, cfg)?,
        variance_maximum_check(spec, cfg)?,
        variance_expansion_check(spec, cfg)?,
        index_expansion_check(spec, cfg)?,
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport { checks, pass })
}

fn probe_grid(spec: &ProcessSpec, n: usize) -> Vec<f64> {
    let (a, b) = (spec.start(), spec.end());
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn index_range_check(spec: &ProcessSpec, cfg: &ValidationConfig) -> Result<AssumptionCheck> {
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for t in probe_grid(spec, cfg.probe_points) {
        let a = spec.alpha(t);
        if !a.is_finite() {
            return Err(Error::model(format!("alpha({t}) is not finite")));
        }
        // distance outside (0, 2], as a residual
        let violation = if a <= 0.0 {
            -a + f64::MIN_POSITIVE
        } else if a > 2.0 {
            a - 2.0
        } else {
            0.0
        };
        if violation > worst {
            worst = violation;
            detail = format!("alpha({t}) = {a} outside (0, 2]");
        }
    }
    let pass = worst == 0.0;
    Ok(AssumptionCheck {
        name: "index-range",
        worst_rel_residual: worst,
        tolerance: 0.0,
        pass,
        detail: if pass { "alpha(t) in (0, 2] on probe grid".into() } else { detail },
    })
}

fn scale_bounds_check(spec: &ProcessSpec, cfg: &ValidationConfig) -> Result<AssumptionCheck> {
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for t in probe_grid(spec, cfg.probe_points) {
        let a = spec.a(t);
        if !a.is_finite() {
            return Err(Error::model(format!("a({t}) is not finite")));
        }
        min = min.min(a);
        max = max.max(a);
    }
    let pass = min > 0.0;
    Ok(AssumptionCheck {
        name: "scale-bounds",
        worst_rel_residual: if pass { 0.0 } else { -min },
        tolerance: 0.0,
        pass,
        detail: format!("a(t) in [{min:.6e}, {max:.6e}] on probe grid"),
    })
}

fn correlation_expansion_check(
    spec: &ProcessSpec,
    cfg: &ValidationConfig,
) -> Result<AssumptionCheck> {
    // 1 − r(t, t+h) against a(t)·h^α(t) at interior anchor points, for h
    // descending through the ladder; judged at the smallest h.
    let span = spec.horizon();
    let anchors: Vec<f64> = [0.15, 0.35, 0.5, 0.65, 0.85]
        .iter()
        .map(|f| spec.start() + f * span)
        .collect();
    let h_min = cfg.h_ladder.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for &t in &anchors {
        for &h in &cfg.h_ladder {
            if t + h > spec.end() {
                continue;
            }
            let r = spec.correlation(t, t + h)?;
            if !r.is_finite() {
                return Err(Error::model(format!("r({t}, {}) not finite", t + h)));
            }
            let lead = spec.a(t) * h.powf(spec.alpha(t));
            let resid = ((1.0 - r) / lead - 1.0).abs();
            if h == h_min && resid > worst {
                worst = resid;
                detail = format!("worst at t = {t}, h = {h}: residual {resid:.3e}");
            }
        }
    }
    Ok(AssumptionCheck {
        name: "correlation-expansion",
        worst_rel_residual: worst,
        tolerance: cfg.tol_correlation,
        pass: worst <= cfg.tol_correlation,
        detail,
    })
}

fn variance_maximum_check(spec: &ProcessSpec, cfg: &ValidationConfig) -> Result<AssumptionCheck> {
    // σ must peak at 1 exactly at t0, and the near-maximal set must be one
    // contiguous cluster around t0.
    let grid = probe_grid(spec, cfg.probe_points);
    let sigmas: Vec<f64> = grid.iter().map(|&t| spec.sigma(t)).collect();
    if sigmas.iter().any(|s| !s.is_finite()) {
        return Err(Error::model("sigma(t) not finite on probe grid"));
    }
    let sigma_max = sigmas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<usize> = (0..grid.len())
        .filter(|&i| sigmas[i] >= sigma_max - cfg.uniqueness_drop)
        .collect();
    let contiguous = near.windows(2).all(|w| w[1] == w[0] + 1);
    let mesh = (spec.end() - spec.start()) / (cfg.probe_points - 1) as f64;
    let t0 = spec.t0();
    let covers_t0 = near
        .first()
        .zip(near.last())
        .map(|(&lo, &hi)| grid[lo] - mesh <= t0 && t0 <= grid[hi] + mesh)
        .unwrap_or(false);
    let peak_is_one = (spec.sigma(t0) - 1.0).abs() <= 1e-9 && sigma_max <= 1.0 + 1e-9;
    let pass = contiguous && covers_t0 && peak_is_one;
    Ok(AssumptionCheck {
        name: "variance-unique-maximum",
        worst_rel_residual: (sigma_max - 1.0).abs(),
        tolerance: 1e-9,
        pass,
        detail: format!(
            "near-maximal probes: {} ({}), peak sigma = {sigma_max:.12}",
            near.len(),
            if contiguous { "contiguous" } else { "split" },
        ),
    })
}

fn variance_expansion_check(
    spec: &ProcessSpec,
    cfg: &ValidationConfig,
) -> Result<AssumptionCheck> {
    // 1/σ(t0 ± s) − 1 against c·exp(−s^(−γ)), probing offsets where the
    // exponential stays representable.
    let p = spec.variance();
    let (c, gamma, t0) = (p.c, p.gamma, p.t0);
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    let mut probed = false;
    for &target in &cfg.variance_exponent_targets {
        let s = target.powf(-1.0 / gamma);
        for sign in [-1.0, 1.0] {
            let t = t0 + sign * s;
            if t < spec.start() || t > spec.end() || t == t0 {
                continue;
            }
            probed = true;
            let sigma = spec.sigma(t);
            if !(sigma > 0.0) {
                return Err(Error::model(format!("sigma({t}) = {sigma} not positive")));
            }
            let lead = c * (-s.powf(-gamma)).exp();
            let resid = ((1.0 / sigma - 1.0) / lead - 1.0).abs();
            if resid > worst {
                worst = resid;
                detail = format!("worst at offset {}{s:.4e}: residual {resid:.3e}", if sign < 0.0 { "-" } else { "+" });
            }
        }
    }
    if !probed {
        return Err(Error::invalid(
            "no variance probe offsets fall inside the domain; adjust exponent targets",
        ));
    }
    Ok(AssumptionCheck {
        name: "variance-expansion",
        worst_rel_residual: worst,
        tolerance: cfg.tol_variance,
        pass: worst <= cfg.tol_variance,
        detail,
    })
}

fn index_expansion_check(spec: &ProcessSpec, cfg: &ValidationConfig) -> Result<AssumptionCheck> {
    // α(t0 ± s) − α0 against b·s^β on the h ladder.
    let idx = spec.index();
    let t0 = spec.t0();
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    let mut probed = false;
    for &s in &cfg.h_ladder {
        for sign in [-1.0, 1.0] {
            let t = t0 + sign * s;
            if t < spec.start() || t > spec.end() {
                continue;
            }
            probed = true;
            let lead = idx.b * s.powf(idx.beta);
            let resid = ((spec.alpha(t) - idx.alpha0) / lead - 1.0).abs();
            if resid > worst {
                worst = resid;
                detail = format!("worst at offset {}{s:.1e}: residual {resid:.3e}", if sign < 0.0 { "-" } else { "+" });
            }
        }
    }
    if !probed {
        return Err(Error::invalid(
            "no index probe offsets fall inside the domain; adjust the h ladder",
        ));
    }
    Ok(AssumptionCheck {
        name: "index-expansion",
        worst_rel_residual: worst,
        tolerance: cfg.tol_index,
        pass: worst <= cfg.tol_index,
        detail,
    })
}
