//! Process-class data model: index/variance/scale profiles, regime
//! classification, localization windows, the multifractional worked
//! example, and numerical validation of the standing assumptions.

mod mfbm;
mod validate;

pub use mfbm::{mfbm_correlation, mfbm_covariance, mfbm_to_process_spec, MfbmSpec};
pub use validate::{
    validate_assumptions, AssumptionCheck, ValidationConfig, ValidationReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;

/// Default constant q > 1 in the first localization window. The theorem's
/// constants are q-free, so any fixed q > 1 is admissible.
pub const DEFAULT_Q: f64 = 2.0;

/// Local Hölder-index structure around the variance maximizer:
/// α(t₀ + t) = α₀ + b·|t|^β + o(|t|^(β+δ)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexProfile {
    pub alpha0: f64,
    pub b: f64,
    pub beta: f64,
    pub delta: f64,
    pub profile: Profile,
}

/// Variance structure: σ attains its unique maximum 1 at t₀, with
/// 1/σ(t) = 1 + c·exp(−|t − t₀|^(−γ))·(1 + o(1)) as t → t₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceProfile {
    pub c: f64,
    pub gamma: f64,
    pub t0: f64,
    pub profile: Profile,
}

/// Local correlation scale a(t), bounded away from 0 and ∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalScale {
    pub a0: f64,
    pub profile: Profile,
}

/// Correlation kernels expressible in config documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationSpec {
    /// r(s,t) = exp(−a(m)·|s−t|^α(m)) with m = (s+t)/2, built from the
    /// spec's own index and scale profiles. Midpoint evaluation keeps the
    /// kernel symmetric while reproducing 1 − r(t,t+h) ~ a(t)|h|^α(t).
    LocalExp,
    /// Correlation of a standardized multifractional field.
    Mfbm { spec: MfbmSpec },
}

/// Full description of one process instance on `[start, end]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawProcessSpec", deny_unknown_fields)]
pub struct ProcessSpec {
    start: f64,
    end: f64,
    index: IndexProfile,
    variance: VarianceProfile,
    scale: LocalScale,
    correlation: CorrelationSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcessSpec {
    start: f64,
    end: f64,
    index: IndexProfile,
    variance: VarianceProfile,
    scale: LocalScale,
    correlation: CorrelationSpec,
}

impl TryFrom<RawProcessSpec> for ProcessSpec {
    type Error = Error;

    fn try_from(raw: RawProcessSpec) -> Result<ProcessSpec> {
        ProcessSpec::new(raw.start, raw.end, raw.index, raw.variance, raw.scale, raw.correlation)
    }
}

/// Profile consistency at t₀ is enforced to this tolerance at construction.
const PROFILE_CONSISTENCY_TOL: f64 = 1e-12;

impl ProcessSpec {
    pub fn new(
        start: f64,
        end: f64,
        index: IndexProfile,
        variance: VarianceProfile,
        scale: LocalScale,
        correlation: CorrelationSpec,
    ) -> Result<ProcessSpec> {
        if !start.is_finite() || !end.is_finite() || !(end > start) {
            return Err(Error::invalid(format!(
                "process domain must be a finite interval, got [{start}, {end}]"
            )));
        }
        index.profile.validate()?;
        variance.profile.validate()?;
        scale.profile.validate()?;

        // The index must stay strictly below 2 at the variance maximizer;
        // the expansion α(t₀+t) = α₀ + b|t|^β forces this locally anyway.
        if !(index.alpha0 > 0.0 && index.alpha0 < 2.0) {
            return Err(Error::invalid(format!(
                "alpha0 must lie in (0, 2), got {}",
                index.alpha0
            )));
        }
        for (name, v) in [
            ("b", index.b),
            ("beta", index.beta),
            ("delta", index.delta),
            ("c", variance.c),
            ("gamma", variance.gamma),
            ("a0", scale.a0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let t0 = variance.t0;
        if !(start..=end).contains(&t0) {
            return Err(Error::invalid(format!(
                "t0 = {t0} outside the domain [{start}, {end}]"
            )));
        }
        let alpha_at_t0 = index.profile.eval(t0);
        if (alpha_at_t0 - index.alpha0).abs() > PROFILE_CONSISTENCY_TOL {
            return Err(Error::invalid(format!(
                "index profile at t0 is {alpha_at_t0}, inconsistent with alpha0 = {}",
                index.alpha0
            )));
        }
        let a_at_t0 = scale.profile.eval(t0);
        if (a_at_t0 - scale.a0).abs() > PROFILE_CONSISTENCY_TOL * scale.a0.max(1.0) {
            return Err(Error::invalid(format!(
                "scale profile at t0 is {a_at_t0}, inconsistent with a0 = {}",
                scale.a0
            )));
        }
        let sigma_at_t0 = variance.profile.eval(t0);
        if (sigma_at_t0 - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "variance profile must equal 1 at t0, got {sigma_at_t0}"
            )));
        }
        if let CorrelationSpec::Mfbm { spec } = &correlation {
            if (start, end) != (spec.t1(), spec.t2()) {
                return Err(Error::invalid(
                    "multifractional correlation domain disagrees with the process domain",
                ));
            }
        }
        Ok(ProcessSpec { start, end, index, variance, scale, correlation })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn horizon(&self) -> f64 {
        self.end - self.start
    }

    pub fn t0(&self) -> f64 {
        self.variance.t0
    }

    pub fn index(&self) -> &IndexProfile {
        &self.index
    }

    pub fn variance(&self) -> &VarianceProfile {
        &self.variance
    }

    pub fn scale(&self) -> &LocalScale {
        &self.scale
    }

    pub fn correlation_spec(&self) -> &CorrelationSpec {
        &self.correlation
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.variance.profile.eval(t)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        self.index.profile.eval(t)
    }

    pub fn a(&self, t: f64) -> f64 {
        self.scale.profile.eval(t)
    }

    /// Correlation r(s, t); exactly 1 on the diagonal.
    pub fn correlation(&self, s: f64, t: f64) -> Result<f64> {
        if s == t {
            return Ok(1.0);
        }
        match &self.correlation {
            CorrelationSpec::LocalExp => {
                let m = 0.5 * (s + t);
                let r = (-self.a(m) * (s - t).abs().powf(self.alpha(m))).exp();
                if !r.is_finite() {
                    return Err(Error::model(format!(
                        "correlation kernel non-finite at ({s}, {t})"
                    )));
                }
                Ok(r)
            }
            CorrelationSpec::Mfbm { spec } => mfbm_correlation(spec, s, t),
        }
    }

    /// Covariance σ(s)σ(t)r(s,t).
    pub fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.sigma(s) * self.sigma(t) * self.correlation(s, t)?)
    }

    /// The scalar tuple consumed by the closed-form evaluators.
    pub fn regime_params(&self) -> RegimeParams {
        let t0 = self.variance.t0;
        let ihat = if t0 == self.start || t0 == self.end { 1 } else { 2 };
        RegimeParams {
            alpha0: self.index.alpha0,
            a0: self.scale.a0,
            b: self.index.b,
            beta: self.index.beta,
            gamma: self.variance.gamma,
            c: self.variance.c,
            t0,
            horizon: self.horizon(),
            ihat,
        }
    }

    /// Stationary autocovariance ρ(h), when the spec is actually a
    /// unit-variance stationary process (constant profiles, local-exp
    /// kernel). Enables the fast circulant sampling path.
    pub fn stationary_autocovariance(&self) -> Option<StationaryCov> {
        if !matches!(self.correlation, CorrelationSpec::LocalExp) {
            return None;
        }
        let alpha = match self.index.profile {
            Profile::Constant { value } => value,
            _ => return None,
        };
        let a = match self.scale.profile {
            Profile::Constant { value } => value,
            _ => return None,
        };
        match self.variance.profile {
            Profile::Constant { value: 1.0 } => {}
            _ => return None,
        }
        Some(StationaryCov::PowerExp { a, alpha })
    }
}

/// Stationary kernels recognized for the fast sampling path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationaryCov {
    /// ρ(h) = exp(−a·|h|^α)
    PowerExp { a: f64, alpha: f64 },
}

impl StationaryCov {
    pub fn eval(&self, h: f64) -> f64 {
        match self {
            StationaryCov::PowerExp { a, alpha } => (-a * h.abs().powf(*alpha)).exp(),
        }
    }
}

/// Scalar parameters of the limit formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeParams {
    pub alpha0: f64,
    pub a0: f64,
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
    pub t0: f64,
    pub horizon: f64,
    /// 1 when t₀ sits on the boundary of the interval, 2 when interior.
    pub ihat: u8,
}

impl RegimeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0 < 2.0) {
            return Err(Error::invalid(format!("alpha0 out of (0,2): {}", self.alpha0)));
        }
        for (name, v) in [
            ("a0", self.a0),
            ("b", self.b),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("c", self.c),
            ("horizon", self.horizon),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.ihat != 1 && self.ihat != 2 {
            return Err(Error::invalid(format!("ihat must be 1 or 2, got {}", self.ihat)));
        }
        Ok(())
    }

    pub fn regime(&self) -> Result<Regime> {
        classify_regime(self.gamma, self.beta)
    }
}

/// Which of the variance decay rate γ and index growth rate β dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// γ < β: the variance profile sets the log-rate.
    VarianceDominated,
    /// γ = β: both scales contribute; truncated integral constant.
    Balanced,
    /// γ > β: the index profile sets the log-rate; full integral constant.
    IndexDominated,
}

/// Exact trichotomy on γ − β. Equality is exact-value comparison: specs
/// that intend balance must set both rates from one field.
pub fn classify_regime(gamma: f64, beta: f64) -> Result<Regime> {
    if !(gamma > 0.0) || !gamma.is_finite() || !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!(
            "regime classification requires positive rates, got gamma = {gamma}, beta = {beta}"
        )));
    }
    Ok(if gamma < beta {
        Regime::VarianceDominated
    } else if gamma == beta {
        Regime::Balanced
    } else {
        Regime::IndexDominated
    })
}

/// First localization window δ₁(u) = (2·ln u − q·ln ln u)^(−1/γ).
///
/// Requires u > e strictly (so ln ln u > 0) and a positive denominator.
pub fn delta1(u: f64, gamma: f64, q: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("delta1 requires gamma > 0, got {gamma}")));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::invalid(format!("delta1 requires q > 1, got {q}")));
    }
    if !(u > std::f64::consts::E) {
        return Err(Error::WindowUndefined(format!(
            "delta1 requires u > e, got u = {u}"
        )));
    }
    let denom = 2.0 * u.ln() - q * u.ln().ln();
    if !(denom > 0.0) {
        return Err(Error::WindowUndefined(format!(
            "delta1 denominator 2·ln u − q·ln ln u = {denom} not positive at u = {u}, q = {q}"
        )));
    }
    Ok(denom.powf(-1.0 / gamma))
}

/// Second localization window δ₂(u) = (α²·ln ln u / (β·ln u))^(1/β).
pub fn delta2(u: f64, alpha0: f64, beta: f64) -> Result<f64> {
    if !(alpha0 > 0.0) || !alpha0.is_finite() {
        return Err(Error::invalid(format!("delta2 requires alpha0 > 0, got {alpha0}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("delta2 requires beta > 0, got {beta}")));
    }
    if !(u > std::f64::consts::E) {
        return Err(Error::WindowUndefined(format!(
            "delta2 requires u > e, got u = {u}"
        )));
    }
    Ok((alpha0 * alpha0 * u.ln().ln() / (beta * u.ln())).powf(1.0 / beta))
}

/// The window δ(u) that the supremum localizes to: δ₁ when γ ≤ β, δ₂ when
/// γ > β.
pub fn localization_delta(p: &RegimeParams, u: f64, q: f64) -> Result<f64> {
    if p.gamma <= p.beta {
        delta1(u, p.gamma, q)
    } else {
        delta2(u, p.alpha0, p.beta)
    }
}


#[cfg(test)]
mod tests {
    use super::tests_support::canonical_spec;
    use super::*;

    fn rel_err(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    #[test]
    fn classify_regime_trichotomy() {
        assert_eq!(classify_regime(1.0, 2.0).unwrap(), Regime::VarianceDominated);
        assert_eq!(classify_regime(2.0, 2.0).unwrap(), Regime::Balanced);
        assert_eq!(classify_regime(3.0, 2.0).unwrap(), Regime::IndexDominated);
        assert!(classify_regime(0.0, 1.0).is_err());
        assert!(classify_regime(1.0, -2.0).is_err());
        assert!(classify_regime(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn regime_equality_is_exact() {
        // No tolerance on γ = β: 0.1 + 0.2 exceeds 0.3 by one rounding step
        // and must classify as index-dominated, not balanced.
        assert_eq!(
            classify_regime(0.1 + 0.2, 0.3).unwrap(),
            Regime::IndexDominated
        );
        // Scaling both rates by a common factor preserves balance exactly
        // only when applied to the same stored value.
        let g = 0.7;
        assert_eq!(classify_regime(3.0 * g, 3.0 * g).unwrap(), Regime::Balanced);
    }

    #[test]
    fn delta1_reference_values() {
        let u = 10.0f64.exp(); // ln u = 10
        let v = delta1(u, 1.0, 2.0).unwrap();
        assert!(rel_err(v, 0.064_956_872_669_669_29) < 1e-12, "got {v}");
        let v2 = delta1(u, 2.0, 2.0).unwrap();
        assert!(rel_err(v2, v.sqrt()) < 1e-12);
    }

    #[test]
    fn delta1_boundary_rejection() {
        // u = e sits on the ln ln u = 0 boundary; the window is only
        // defined strictly inside the asymptotic regime.
        assert!(matches!(
            delta1(std::f64::consts::E, 1.0, 2.0),
            Err(Error::WindowUndefined(_))
        ));
        assert!(delta1(1.5, 1.0, 2.0).is_err());
        assert!(delta1(100.0, 1.0, 0.9).is_err());
    }

    #[test]
    fn delta2_reference_values() {
        let u = (10.0f64).exp();
        let v = delta2(u, 1.0, 1.0).unwrap();
        assert!(rel_err(v, 10.0f64.ln() / 10.0) < 1e-13, "got {v}");

        // β = 2: (ln ln u / (2 ln u))^{1/2}
        let v2 = delta2(u, 1.0, 2.0).unwrap();
        let want = (10.0f64.ln() / 20.0).sqrt();
        assert!(rel_err(v2, want) < 1e-13, "got {v2}, want {want}");

        // u = e^e is accepted: ln ln u = 1 > 0
        let v3 = delta2(std::f64::consts::E.exp(), 1.0, 1.0).unwrap();
        assert!(rel_err(v3, 1.0 / std::f64::consts::E) < 1e-13);

        assert!(delta2(std::f64::consts::E, 1.0, 1.0).is_err());
    }

    #[test]
    fn windows_shrink_along_u_ladder() {
        // δ₁, δ₂ → 0 and strictly decrease on the documented ladder e³…e⁴⁰.
        let mut prev1 = f64::INFINITY;
        let mut prev2 = f64::INFINITY;
        for k in 3..=40 {
            let u = (k as f64).exp();
            let d1 = delta1(u, 1.3, DEFAULT_Q).unwrap();
            let d2 = delta2(u, 1.1, 0.8).unwrap();
            assert!(d1 < prev1, "delta1 not decreasing at k = {k}");
            assert!(d2 < prev2, "delta2 not decreasing at k = {k}");
            prev1 = d1;
            prev2 = d2;
        }
        assert!(prev1 < 0.05);
        assert!(prev2 < 0.35);
    }

    #[test]
    fn delta1_negligible_against_delta2_when_gamma_le_beta() {
        // γ ≤ β ⇒ δ₁(u) = o(δ₂(u)): the ratio decreases to 0 on the ladder.
        for (gamma, beta) in [(1.0, 1.0), (0.7, 1.3), (2.0, 2.0)] {
            let mut prev_ratio = f64::INFINITY;
            for k in [3.0f64, 6.0, 12.0, 24.0, 40.0] {
                let u = k.exp();
                let ratio = delta1(u, gamma, DEFAULT_Q).unwrap() / delta2(u, 1.0, beta).unwrap();
                assert!(ratio < prev_ratio, "ratio not decreasing (γ={gamma}, β={beta})");
                prev_ratio = ratio;
            }
            // at γ = β the ratio decays like 1/√(ln ln u): slow but monotone
            assert!(prev_ratio < 0.6, "ratio {prev_ratio} not small (γ={gamma}, β={beta})");
        }
    }

    #[test]
    fn localization_delta_dispatches_on_regime() {
        let mut p = canonical_spec().regime_params();
        let u = 8.0f64.exp();
        p.gamma = 0.5;
        p.beta = 1.0;
        assert_eq!(localization_delta(&p, u, 2.0).unwrap(), delta1(u, 0.5, 2.0).unwrap());
        p.gamma = 2.0;
        assert_eq!(
            localization_delta(&p, u, 2.0).unwrap(),
            delta2(u, p.alpha0, 1.0).unwrap()
        );
    }

    #[test]
    fn process_spec_construction_and_regime_params() {
        let spec = canonical_spec();
        let p = spec.regime_params();
        assert_eq!(p.ihat, 2);
        assert_eq!(p.t0, 1.0);
        assert_eq!(p.horizon, 2.0);
        assert_eq!(spec.sigma(1.0), 1.0);
        assert_eq!(spec.correlation(0.5, 0.5).unwrap(), 1.0);

        // boundary t0 gives ihat = 1
        let spec_b = ProcessSpec::new(
            0.0,
            1.0,
            IndexProfile {
                alpha0: 1.0,
                b: 1.0,
                beta: 1.0,
                delta: 0.5,
                profile: Profile::Power { base: 1.0, coeff: 1.0, center: 0.0, power: 1.0 },
            },
            VarianceProfile {
                c: 1.0,
                gamma: 1.0,
                t0: 0.0,
                profile: Profile::FlatPeakRecip { c: 1.0, t0: 0.0, gamma: 1.0 },
            },
            LocalScale { a0: 2.0, profile: Profile::constant(2.0) },
            CorrelationSpec::LocalExp,
        )
        .unwrap();
        assert_eq!(spec_b.regime_params().ihat, 1);
    }

    #[test]
    fn process_spec_rejects_inconsistent_profiles() {
        // alpha0 disagrees with the profile at t0
        let err = ProcessSpec::new(
            0.0,
            2.0,
            IndexProfile {
                alpha0: 1.5,
                b: 1.0,
                beta: 1.0,
                delta: 0.5,
                profile: Profile::Power { base: 1.0, coeff: 1.0, center: 1.0, power: 1.0 },
            },
            VarianceProfile {
                c: 1.0,
                gamma: 1.0,
                t0: 1.0,
                profile: Profile::FlatPeakRecip { c: 1.0, t0: 1.0, gamma: 1.0 },
            },
            LocalScale { a0: 1.0, profile: Profile::constant(1.0) },
            CorrelationSpec::LocalExp,
        );
        assert!(err.is_err());

        // alpha0 = 2 is rejected outright
        let err = ProcessSpec::new(
            0.0,
            2.0,
            IndexProfile {
                alpha0: 2.0,
                b: 1.0,
                beta: 1.0,
                delta: 0.5,
                profile: Profile::constant(2.0),
            },
            VarianceProfile {
                c: 1.0,
                gamma: 1.0,
                t0: 1.0,
                profile: Profile::FlatPeakRecip { c: 1.0, t0: 1.0, gamma: 1.0 },
            },
            LocalScale { a0: 1.0, profile: Profile::constant(1.0) },
            CorrelationSpec::LocalExp,
        );
        assert!(err.is_err());
    }

    #[test]
    fn local_exp_correlation_is_symmetric_with_unit_diagonal() {
        let spec = canonical_spec();
        for (s, t) in [(0.1, 0.9), (0.5, 1.5), (1.0, 1.7)] {
            let r_st = spec.correlation(s, t).unwrap();
            let r_ts = spec.correlation(t, s).unwrap();
            assert_eq!(r_st, r_ts);
            assert!(r_st < 1.0 && r_st > 0.0);
        }
    }

    #[test]
    fn stationary_detection() {
        let spec = canonical_spec();
        assert!(spec.stationary_autocovariance().is_none());

        let st = ProcessSpec::new(
            0.0,
            1.0,
            IndexProfile {
                alpha0: 1.0,
                b: 1.0,
                beta: 1.0,
                delta: 0.5,
                profile: Profile::constant(1.0),
            },
            VarianceProfile {
                c: 1.0,
                gamma: 1.0,
                t0: 0.5,
                profile: Profile::constant(1.0),
            },
            LocalScale { a0: 1.0, profile: Profile::constant(1.0) },
            CorrelationSpec::LocalExp,
        )
        .unwrap();
        let k = st.stationary_autocovariance().unwrap();
        assert!((k.eval(1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(k.eval(0.0), 1.0);
    }

    #[test]
    fn process_spec_serde_round_trip_revalidates() {
        let spec = canonical_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ProcessSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.regime_params(), spec.regime_params());

        // Tampered document fails validation on deserialize.
        let bad = json.replace("\"alpha0\":1.0", "\"alpha0\":1.9");
        assert!(serde_json::from_str::<ProcessSpec>(&bad).is_err());
    }
}
