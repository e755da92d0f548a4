//! Closed-form tail asymptotics: the stationary baseline formula, the
//! three-regime limit formula for the non-constant-variance class, and the
//! regime constants they share.
//!
//! The Pickands constant H_α is always an input — either a Monte Carlo
//! estimate from [`crate::pickands`] or a known closed form (H₁ = 1,
//! H₂ = 1/√π).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{classify_regime, Regime, RegimeParams};
use crate::specfun::{regime_integral, survival};

/// A factorized tail approximation: `value` is always the product of the
/// component fields, kept separately for factor-by-factor diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailApprox {
    pub value: f64,
    /// Î·a^(1/α)·H_α (or T·H_α·a^(1/α) in the stationary baseline).
    pub prefactor: f64,
    /// u^(2/α)
    pub power: f64,
    /// (ln u)^(−1/(γ∧β)); 1 when the formula carries no log factor.
    pub log_factor: f64,
    /// Ψ(u)
    pub survival: f64,
    /// Regime constant C; 1 when the formula carries no regime constant.
    pub regime_const: f64,
}

impl TailApprox {
    fn assemble(
        prefactor: f64,
        power: f64,
        log_factor: f64,
        survival: f64,
        regime_const: f64,
    ) -> TailApprox {
        TailApprox {
            value: prefactor * power * log_factor * survival * regime_const,
            prefactor,
            power,
            log_factor,
            survival,
            regime_const,
        }
    }

    /// Product of the stored components; equals `value` by construction.
    pub fn component_product(&self) -> f64 {
        self.prefactor * self.power * self.log_factor * self.survival * self.regime_const
    }
}

/// Stationary unit-variance baseline: P(sup over [0,T] > u) ≈
/// T·H_α·a^(1/α)·u^(2/α)·Ψ(u).
pub fn stationary_tail(
    horizon: f64,
    a: f64,
    alpha: f64,
    h_alpha: f64,
    u: f64,
) -> Result<TailApprox> {
    for (name, v) in [("horizon", horizon), ("a", a), ("h_alpha", h_alpha)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!(
                "stationary_tail: {name} must be positive, got {v}"
            )));
        }
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::invalid(format!(
            "stationary_tail: alpha must lie in (0, 2], got {alpha}"
        )));
    }
    if !(u > 0.0) {
        return Err(Error::invalid(format!("stationary_tail: u must be positive, got {u}")));
    }
    Ok(TailApprox::assemble(
        horizon * h_alpha * a.powf(1.0 / alpha),
        u.powf(2.0 / alpha),
        1.0,
        survival(u)?,
        1.0,
    ))
}

/// The bracketed regime constant:
///
/// * γ < β: 2^(−1/γ)
/// * γ = β: ∫₀^(2^(−1/γ)) exp(−2b·xᵝ/α²) dx
/// * γ > β: ∫₀^∞ exp(−2b·xᵝ/α²) dx
pub fn regime_constant(p: &RegimeParams) -> Result<f64> {
    p.validate()?;
    let cap = 2.0f64.powf(-1.0 / p.gamma);
    match classify_regime(p.gamma, p.beta)? {
        Regime::VarianceDominated => Ok(cap),
        Regime::Balanced => regime_integral(p.b, p.beta, p.alpha0, cap),
        Regime::IndexDominated => regime_integral(p.b, p.beta, p.alpha0, f64::INFINITY),
    }
}

/// Full limit formula:
/// Î·a₀^(1/α₀)·H_α·u^(2/α₀)·(ln u)^(−1/(γ∧β))·Ψ(u)·C(regime).
///
/// Requires u > e so the log factor and the localization windows live on
/// one consistent asymptotic domain.
pub fn regime_tail(p: &RegimeParams, h_alpha: f64, u: f64) -> Result<TailApprox> {
    p.validate()?;
    if !(h_alpha > 0.0) || !h_alpha.is_finite() {
        return Err(Error::invalid(format!(
            "regime_tail: h_alpha must be positive, got {h_alpha}"
        )));
    }
    if !(u > std::f64::consts::E) {
        return Err(Error::AsymptoticDomain(u));
    }
    let min_rate = p.gamma.min(p.beta);
    Ok(TailApprox::assemble(
        p.ihat as f64 * p.a0.powf(1.0 / p.alpha0) * h_alpha,
        u.powf(2.0 / p.alpha0),
        u.ln().powf(-1.0 / min_rate),
        survival(u)?,
        regime_constant(p)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::regime_integral;

    fn rel_err(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    fn params(alpha0: f64, b: f64, beta: f64, gamma: f64, ihat: u8) -> RegimeParams {
        RegimeParams {
            alpha0,
            a0: 1.0,
            b,
            beta,
            gamma,
            c: 1.0,
            t0: if ihat == 2 { 0.5 } else { 0.0 },
            horizon: 1.0,
            ihat,
        }
    }

    #[test]
    fn stationary_tail_reference_point() {
        // T=1, a=1, α=1, H=1, u=4: 16·Ψ(4)
        let t = stationary_tail(1.0, 1.0, 1.0, 1.0, 4.0).unwrap();
        let want = 16.0 * survival(4.0).unwrap();
        assert!(rel_err(t.value, want) < 1e-14, "got {}, want {want}", t.value);
        assert!(rel_err(t.value, 5.0674e-4) < 1e-3);
    }

    #[test]
    fn stationary_tail_linear_in_horizon() {
        let t1 = stationary_tail(1.0, 0.7, 1.3, 0.9, 5.0).unwrap();
        let t2 = stationary_tail(2.0, 0.7, 1.3, 0.9, 5.0).unwrap();
        assert_eq!(t2.value, 2.0 * t1.value);
    }

    #[test]
    fn stationary_tail_alpha_two_component_product() {
        // α = 2 ⇒ u^{2/α} = u, not u². (T=1, a=1, H=1/√π, u=3.)
        let h2 = 1.0 / std::f64::consts::PI.sqrt();
        let t = stationary_tail(1.0, 1.0, 2.0, h2, 3.0).unwrap();
        let want = 3.0 * h2 * survival(3.0).unwrap();
        assert!(rel_err(t.value, want) < 1e-14);
        assert!((t.power - 3.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_tail_rejects_bad_arguments() {
        assert!(stationary_tail(0.0, 1.0, 1.0, 1.0, 4.0).is_err());
        assert!(stationary_tail(1.0, -1.0, 1.0, 1.0, 4.0).is_err());
        assert!(stationary_tail(1.0, 1.0, 2.5, 1.0, 4.0).is_err());
        assert!(stationary_tail(1.0, 1.0, 1.0, 0.0, 4.0).is_err());
        assert!(stationary_tail(1.0, 1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn regime_constant_three_cases() {
        // γ < β: 2^{-1/γ}
        let p = params(1.0, 1.0, 2.0, 1.0, 2);
        assert!(rel_err(regime_constant(&p).unwrap(), 0.5) < 1e-15);

        // γ = β = 1, b = 1, α₀ = 1: (1 − e⁻¹)/2
        let p = params(1.0, 1.0, 1.0, 1.0, 2);
        let want = (1.0 - (-1.0f64).exp()) / 2.0;
        assert!(rel_err(regime_constant(&p).unwrap(), want) < 1e-13);

        // γ = 2 > β = 1, b = 1, α₀ = 1: ∫₀^∞ e^{-2x} dx = 1/2
        let p = params(1.0, 1.0, 1.0, 2.0, 2);
        assert!(rel_err(regime_constant(&p).unwrap(), 0.5) < 1e-13);
    }

    #[test]
    fn regime_constant_continuity_as_b_vanishes() {
        // As b → 0 with γ = β, the balanced constant approaches the
        // variance-dominated constant 2^{-1/γ}.
        for gamma in [0.5, 1.0, 2.0] {
            let p = params(1.0, 1e-10, gamma, gamma, 2);
            let c = regime_constant(&p).unwrap();
            let lim = 2.0f64.powf(-1.0 / gamma);
            assert!(
                (c - lim).abs() <= 1e-8,
                "γ = {gamma}: |{c} − {lim}| = {:e}",
                (c - lim).abs()
            );
        }
    }

    #[test]
    fn balanced_constant_below_index_dominated() {
        // Positive integrand over a strictly larger interval.
        for (b, beta, alpha0) in [(1.0, 1.0, 1.0), (0.3, 2.0, 0.8), (2.0, 0.5, 1.5)] {
            let balanced = params(alpha0, b, beta, beta, 2);
            let dominated = params(alpha0, b, beta, 2.0 * beta, 2);
            assert!(
                regime_constant(&balanced).unwrap() < regime_constant(&dominated).unwrap(),
                "b={b}, beta={beta}"
            );
        }
    }

    #[test]
    fn variance_dominated_constant_ignores_b_and_alpha() {
        let p1 = params(1.0, 1.0, 2.0, 1.0, 2);
        let p2 = params(0.5, 17.0, 2.0, 1.0, 2);
        assert_eq!(regime_constant(&p1).unwrap(), regime_constant(&p2).unwrap());
    }

    #[test]
    fn regime_tail_reference_point() {
        // α₀=1, a₀=1, b=1, β=1, γ=2 (index-dominated, C = 1/2), interior
        // t₀ so Î=2, H=1, u=5: 2·25·(ln 5)^{-1}·Ψ(5)·(1/2).
        let p = params(1.0, 1.0, 1.0, 2.0, 2);
        let t = regime_tail(&p, 1.0, 5.0).unwrap();
        let want = 2.0 * 25.0 * 5.0f64.ln().recip() * survival(5.0).unwrap() * 0.5;
        assert!(rel_err(t.value, want) < 1e-14, "got {}, want {want}", t.value);
        assert!(rel_err(t.value, 4.4528e-6) < 1e-3, "got {}", t.value);
    }

    #[test]
    fn boundary_maximizer_halves_the_tail() {
        let interior = params(1.2, 0.7, 1.1, 0.9, 2);
        let boundary = params(1.2, 0.7, 1.1, 0.9, 1);
        let ti = regime_tail(&interior, 0.8, 6.0).unwrap();
        let tb = regime_tail(&boundary, 0.8, 6.0).unwrap();
        assert_eq!(ti.value, 2.0 * tb.value);
    }

    #[test]
    fn regime_tail_requires_asymptotic_domain() {
        let p = params(1.0, 1.0, 1.0, 2.0, 2);
        assert!(matches!(
            regime_tail(&p, 1.0, std::f64::consts::E),
            Err(Error::AsymptoticDomain(_))
        ));
        assert!(regime_tail(&p, 1.0, 2.0).is_err());
        assert!(regime_tail(&p, 1.0, 2.8).is_ok());
    }

    #[test]
    fn regime_tail_linear_in_h_and_eventually_decreasing_in_u() {
        let p = params(1.4, 0.6, 1.7, 1.2, 2);
        let t1 = regime_tail(&p, 0.5, 7.0).unwrap();
        let t2 = regime_tail(&p, 1.5, 7.0).unwrap();
        assert!(rel_err(t2.value, 3.0 * t1.value) < 1e-14);

        // decreasing in u beyond u = 3 for these parameters
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let u = 3.0 + k as f64 * 0.5;
            let v = regime_tail(&p, 1.0, u).unwrap().value;
            assert!(v < prev, "tail not decreasing at u = {u}");
            prev = v;
        }
    }

    #[test]
    fn component_product_reconstructs_value() {
        let p = params(0.9, 1.3, 0.8, 0.8, 2);
        let t = regime_tail(&p, 0.73, 9.0).unwrap();
        assert!(rel_err(t.component_product(), t.value) < 1e-14);
        assert!(t.prefactor > 0.0 && t.power > 0.0 && t.log_factor > 0.0);
        assert!(t.survival > 0.0 && t.regime_const > 0.0);

        let s = stationary_tail(1.0, 1.0, 1.0, 1.0, 4.0).unwrap();
        assert_eq!(s.log_factor, 1.0);
        assert_eq!(s.regime_const, 1.0);
        assert!(rel_err(s.component_product(), s.value) < 1e-14);
    }

    #[test]
    fn balanced_constant_matches_direct_integral() {
        // Cross-check the dispatch against regime_integral called directly.
        let p = params(1.3, 0.9, 1.6, 1.6, 2);
        let cap = 2.0f64.powf(-1.0 / 1.6);
        let want = regime_integral(0.9, 1.6, 1.3, cap).unwrap();
        assert_eq!(regime_constant(&p).unwrap(), want);
    }
}
