//! Multifractional Brownian motion: covariance kernel, normalization, and
//! reduction of the standardized field to a `ProcessSpec`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::specfun::mfbm_normalizer;

use super::{CorrelationSpec, IndexProfile, LocalScale, ProcessSpec, VarianceProfile};

/// A multifractional field with index function H(t), standardized to unit
/// variance and modulated by the flat-peak variance profile on [t1, t2].
///
/// H must satisfy 0 < H(t) < min(1, λ) where λ is its Hölder exponent, and
/// expand as H(t₀ + t) = H(t₀) + b·t^β + o(t^(β+δ)) around t₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMfbmSpec", deny_unknown_fields)]
pub struct MfbmSpec {
    h: Profile,
    holder_exponent: f64,
    t1: f64,
    t2: f64,
    t0: f64,
    gamma: f64,
    b: f64,
    beta: f64,
    delta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMfbmSpec {
    h: Profile,
    holder_exponent: f64,
    t1: f64,
    t2: f64,
    t0: f64,
    gamma: f64,
    b: f64,
    beta: f64,
    delta: f64,
}

impl TryFrom<RawMfbmSpec> for MfbmSpec {
    type Error = Error;

    fn try_from(raw: RawMfbmSpec) -> Result<MfbmSpec> {
        MfbmSpec::new(
            raw.h,
            raw.holder_exponent,
            (raw.t1, raw.t2),
            raw.t0,
            raw.gamma,
            raw.b,
            raw.beta,
            raw.delta,
        )
    }
}

impl MfbmSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        h: Profile,
        holder_exponent: f64,
        interval: (f64, f64),
        t0: f64,
        gamma: f64,
        b: f64,
        beta: f64,
        delta: f64,
    ) -> Result<MfbmSpec> {
        h.validate()?;
        let (t1, t2) = interval;
        if !(t1 > 0.0 && t2 > t1) || !t1.is_finite() || !t2.is_finite() {
            return Err(Error::invalid(format!(
                "mfbm interval must satisfy 0 < t1 < t2, got [{t1}, {t2}]"
            )));
        }
        if !(t0 > t1 && t0 < t2) {
            return Err(Error::invalid(format!(
                "mfbm t0 must be interior to [{t1}, {t2}], got {t0}"
            )));
        }
        for (name, v) in [
            ("holder_exponent", holder_exponent),
            ("gamma", gamma),
            ("b", b),
            ("beta", beta),
            ("delta", delta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("mfbm {name} must be positive, got {v}")));
            }
        }
        let h_cap = holder_exponent.min(1.0);
        // Probe H over the interval: the index must stay in (0, min(1, λ)).
        let n_probe = 129;
        for i in 0..n_probe {
            let t = t1 + (t2 - t1) * i as f64 / (n_probe - 1) as f64;
            let hv = h.eval(t);
            if !(hv > 0.0 && hv < h_cap) {
                return Err(Error::invalid(format!(
                    "H({t}) = {hv} outside (0, {h_cap})"
                )));
            }
        }
        Ok(MfbmSpec { h, holder_exponent, t1, t2, t0, gamma, b, beta, delta })
    }

    pub fn h(&self, t: f64) -> f64 {
        self.h.eval(t)
    }

    pub fn h_profile(&self) -> &Profile {
        &self.h
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Pointwise variance D(2H(t))·t^(2H(t)) of the unstandardized field.
    pub fn variance_at(&self, t: f64) -> Result<f64> {
        let ht = self.h(t);
        Ok(mfbm_normalizer(2.0 * ht)? * t.abs().powf(2.0 * ht))
    }
}

/// Covariance ½·D(H(s)+H(t))·(|s|^κ + |t|^κ − |t−s|^κ) with κ = H(s)+H(t).
pub fn mfbm_covariance(spec: &MfbmSpec, s: f64, t: f64) -> Result<f64> {
    if s < 0.0 || t < 0.0 || s.is_nan() || t.is_nan() {
        return Err(Error::invalid(format!(
            "mfbm covariance requires s, t >= 0, got ({s}, {t})"
        )));
    }
    let kappa = spec.h(s) + spec.h(t);
    let d = mfbm_normalizer(kappa)?;
    Ok(0.5 * d * (s.powf(kappa) + t.powf(kappa) - (t - s).abs().powf(kappa)))
}

/// Correlation of the standardized field; exactly 1 on the diagonal.
pub fn mfbm_correlation(spec: &MfbmSpec, s: f64, t: f64) -> Result<f64> {
    if s == t {
        return Ok(1.0);
    }
    let cov = mfbm_covariance(spec, s, t)?;
    let vs = spec.variance_at(s)?;
    let vt = spec.variance_at(t)?;
    if !(vs > 0.0 && vt > 0.0) {
        return Err(Error::model(format!(
            "mfbm variance not positive at s = {s} or t = {t}"
        )));
    }
    let r = cov / (vs * vt).sqrt();
    if !r.is_finite() {
        return Err(Error::model(format!(
            "mfbm correlation non-finite at ({s}, {t})"
        )));
    }
    Ok(r)
}

/// The standardized, variance-modulated field σ(t)·B̄(t) as a process
/// specification on [t1, t2]:
///
/// * index α(t) = 2H(t), so α₀ = 2H(t₀) and the index growth coefficient
///   doubles to 2b (β, δ unchanged);
/// * local scale a(t) = ½·t^(−2H(t)), so a₀ = ½·t₀^(−2H(t₀));
/// * variance σ(t) = 1 − exp(−|t − t₀|^(−γ)), which has reciprocal
///   modulation depth c = 1;
/// * correlation from the normalized multifractional covariance.
pub fn mfbm_to_process_spec(spec: &MfbmSpec) -> Result<ProcessSpec> {
    let h0 = spec.h(spec.t0);
    let alpha_profile = spec.h.scaled(2.0)?;
    let a_profile = Profile::VaryingPower {
        coeff: 0.5,
        exponent: Box::new(alpha_profile.clone()),
    };
    let a0 = 0.5 * spec.t0.powf(-2.0 * h0);
    ProcessSpec::new(
        spec.t1,
        spec.t2,
        IndexProfile {
            alpha0: 2.0 * h0,
            b: 2.0 * spec.b,
            beta: spec.beta,
            delta: spec.delta,
            profile: alpha_profile,
        },
        VarianceProfile {
            c: 1.0,
            gamma: spec.gamma,
            t0: spec.t0,
            profile: Profile::FlatPeak { t0: spec.t0, gamma: spec.gamma },
        },
        LocalScale { a0, profile: a_profile },
        CorrelationSpec::Mfbm { spec: spec.clone() },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    fn constant_h_spec(h: f64) -> MfbmSpec {
        MfbmSpec::new(
            Profile::constant(h),
            1.0,
            (0.5, 2.0),
            1.0,
            1.0,
            0.1,
            1.0,
            0.5,
        )
        .unwrap()
    }

    fn varying_h_spec() -> MfbmSpec {
        // H(t) = 0.4 + 0.1·|t − 1|^1.2 on [0.5, 2], t0 = 1
        MfbmSpec::new(
            Profile::Power { base: 0.4, coeff: 0.1, center: 1.0, power: 1.2 },
            1.0,
            (0.5, 2.0),
            1.0,
            0.8,
            0.1,
            1.2,
            0.4,
        )
        .unwrap()
    }

    #[test]
    fn covariance_at_unit_point_with_half_index() {
        // H ≡ 1/2, s = t = 1: ½·D(1)·(1 + 1 − 0) = D(1) = 2π
        let spec = constant_h_spec(0.5);
        let v = mfbm_covariance(&spec, 1.0, 1.0).unwrap();
        assert!(rel_err(v, 2.0 * std::f64::consts::PI) < 1e-13, "got {v}");
    }

    #[test]
    fn covariance_vanishes_at_origin() {
        let spec = varying_h_spec();
        for t in [0.5, 1.0, 1.7] {
            let v = mfbm_covariance(&spec, 0.0, t).unwrap();
            assert_eq!(v, 0.0, "cov(0, {t}) = {v}");
        }
    }

    #[test]
    fn constant_h_reduces_to_scaled_fbm_covariance() {
        // For H ≡ const, the kernel is D(2H) times the fBm covariance.
        let h = 0.7;
        let spec = constant_h_spec(h);
        let d = mfbm_normalizer(2.0 * h).unwrap();
        for (s, t) in [(0.6, 0.6), (0.5, 1.3), (0.9, 1.9), (1.0, 1.0)] {
            let got = mfbm_covariance(&spec, s, t).unwrap();
            let kappa = 2.0 * h;
            let fbm = 0.5 * (s.powf(kappa) + t.powf(kappa) - (t - s).abs().powf(kappa));
            assert!(
                (got - d * fbm).abs() <= 1e-12 * got.abs().max(1.0),
                "cov({s},{t}) = {got} vs {}",
                d * fbm
            );
        }
    }

    #[test]
    fn covariance_is_symmetric_on_a_grid() {
        let spec = varying_h_spec();
        let ts: Vec<f64> = (0..16).map(|i| 0.5 + 1.5 * i as f64 / 15.0).collect();
        for &s in &ts {
            for &t in &ts {
                let a = mfbm_covariance(&spec, s, t).unwrap();
                let b = mfbm_covariance(&spec, t, s).unwrap();
                assert_eq!(a, b, "asymmetry at ({s}, {t})");
            }
        }
    }

    #[test]
    fn correlation_diagonal_and_range() {
        let spec = varying_h_spec();
        assert_eq!(mfbm_correlation(&spec, 1.3, 1.3).unwrap(), 1.0);
        let r = mfbm_correlation(&spec, 0.8, 1.4).unwrap();
        assert!(r > 0.0 && r < 1.0, "r = {r}");
    }

    #[test]
    fn to_process_spec_induced_parameters() {
        // H ≡ 1/2, t0 = 1 ⇒ α₀ = 1, a₀ = ½·1⁻¹ = ½, interior t₀ ⇒ Î = 2.
        let spec = constant_h_spec(0.5);
        let ps = mfbm_to_process_spec(&spec).unwrap();
        let p = ps.regime_params();
        assert!((p.alpha0 - 1.0).abs() < 1e-15);
        assert!((p.a0 - 0.5).abs() < 1e-15);
        assert_eq!(p.ihat, 2);
        assert_eq!(p.gamma, spec.gamma());
        assert_eq!(p.beta, spec.beta());
        assert!((p.b - 2.0 * spec.b()).abs() < 1e-15);
    }

    #[test]
    fn to_process_spec_prefactor_and_exponent_identities() {
        // Î·a₀^(1/α₀) = 2^(1 − 1/(2H)) / t₀ and 2·b_index/α₀² = b/H².
        for (h0, t0) in [(0.3, 0.8), (0.5, 1.2), (0.65, 1.5)] {
            let spec = MfbmSpec::new(
                Profile::Power { base: h0, coeff: 0.05, center: t0, power: 1.1 },
                1.0,
                (0.5, 2.0),
                t0,
                1.0,
                0.05,
                1.1,
                0.3,
            )
            .unwrap();
            let p = mfbm_to_process_spec(&spec).unwrap().regime_params();
            let prefactor = p.ihat as f64 * p.a0.powf(1.0 / p.alpha0);
            let want = 2.0f64.powf(1.0 - 1.0 / (2.0 * h0)) / t0;
            assert!(
                rel_err(prefactor, want) < 1e-12,
                "prefactor {prefactor} vs {want} (H = {h0}, t0 = {t0})"
            );

            let exponent = 2.0 * p.b / (p.alpha0 * p.alpha0);
            let want = 0.05 / (h0 * h0);
            assert!(
                rel_err(exponent, want) < 1e-12,
                "exponent {exponent} vs {want} (H = {h0})"
            );
        }
    }

    #[test]
    fn rejects_bad_intervals_and_indices() {
        // t0 outside the interval
        assert!(MfbmSpec::new(
            Profile::constant(0.5),
            1.0,
            (0.5, 2.0),
            2.5,
            1.0,
            0.1,
            1.0,
            0.5
        )
        .is_err());
        // interval starting at 0
        assert!(MfbmSpec::new(
            Profile::constant(0.5),
            1.0,
            (0.0, 2.0),
            1.0,
            1.0,
            0.1,
            1.0,
            0.5
        )
        .is_err());
        // H exceeding min(1, λ) somewhere
        assert!(MfbmSpec::new(
            Profile::Power { base: 0.6, coeff: 0.5, center: 1.0, power: 1.0 },
            1.0,
            (0.5, 2.0),
            1.0,
            1.0,
            0.5,
            1.0,
            0.5
        )
        .is_err());
    }

    #[test]
    fn mfbm_spec_serde_round_trip() {
        let spec = varying_h_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back: MfbmSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
