//! Scalar profile vocabulary for declarative process specifications.
//!
//! Variance, local-index and local-scale profiles are expressed in a small
//! closed vocabulary (constants, centered power laws, centered exponentials,
//! the flat-peak variance shapes, and piecewise-linear tables) so that a
//! process specification can round-trip through a config document.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// f(t) = value
    Constant { value: f64 },
    /// f(t) = base + coeff·|t − center|^power
    Power {
        base: f64,
        coeff: f64,
        center: f64,
        power: f64,
    },
    /// f(t) = scale·exp(coeff·|t − center|^power)
    ///
    /// With power < 0 the exponent blows down at `center` (|0|^p = +∞ for
    /// p < 0), so e.g. coeff = −1 gives a factor that vanishes to all
    /// orders at the center.
    Exp {
        scale: f64,
        coeff: f64,
        center: f64,
        power: f64,
    },
    /// σ(t) = 1 − exp(−|t − t0|^(−gamma)): unit maximum at t0, flat to all
    /// polynomial orders.
    FlatPeak { t0: f64, gamma: f64 },
    /// σ(t) = 1 / (1 + c·exp(−|t − t0|^(−gamma))): unit maximum at t0 with
    /// reciprocal modulation depth c.
    FlatPeakRecip { c: f64, t0: f64, gamma: f64 },
    /// f(t) = coeff·t^(−g(t)) with a profile-valued exponent; the local
    /// scale of a standardized multifractional field has this shape.
    VaryingPower { coeff: f64, exponent: Box<Profile> },
    /// Piecewise-linear interpolation through (t, value) knots; clamped
    /// outside the knot range.
    Piecewise { knots: Vec<(f64, f64)> },
}

impl Profile {
    pub fn constant(value: f64) -> Profile {
        Profile::Constant { value }
    }

    /// Validate structural requirements (finite parameters, ordered knots).
    pub fn validate(&self) -> Result<()> {
        let all_finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        match self {
            Profile::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid("constant profile value must be finite"));
                }
            }
            Profile::Power { base, coeff, center, power } => {
                if !all_finite(&[*base, *coeff, *center, *power]) {
                    return Err(Error::invalid("power profile parameters must be finite"));
                }
            }
            Profile::Exp { scale, coeff, center, power } => {
                if !all_finite(&[*scale, *coeff, *center, *power]) {
                    return Err(Error::invalid("exp profile parameters must be finite"));
                }
            }
            Profile::FlatPeak { t0, gamma } | Profile::FlatPeakRecip { t0, gamma, .. } => {
                if !t0.is_finite() || !(*gamma > 0.0) {
                    return Err(Error::invalid("flat peak requires finite t0 and gamma > 0"));
                }
                if let Profile::FlatPeakRecip { c, .. } = self {
                    if !(*c > 0.0) {
                        return Err(Error::invalid("flat peak requires c > 0"));
                    }
                }
            }
            Profile::VaryingPower { coeff, exponent } => {
                if !coeff.is_finite() {
                    return Err(Error::invalid("varying power coeff must be finite"));
                }
                exponent.validate()?;
            }
            Profile::Piecewise { knots } => {
                if knots.len() < 2 {
                    return Err(Error::invalid("piecewise profile needs >= 2 knots"));
                }
                if !knots.iter().all(|(t, v)| t.is_finite() && v.is_finite()) {
                    return Err(Error::invalid("piecewise knots must be finite"));
                }
                if !knots.windows(2).all(|w| w[1].0 > w[0].0) {
                    return Err(Error::invalid("piecewise knots must be strictly increasing"));
                }
            }
        }
        Ok(())
    }

    /// Pointwise scaling `factor·f(t)` within the vocabulary. Supported for
    /// the shapes a local-index profile can take (constant, power law,
    /// piecewise); the peak shapes do not scale without leaving the family.
    pub fn scaled(&self, factor: f64) -> Result<Profile> {
        match self {
            Profile::Constant { value } => Ok(Profile::Constant { value: factor * value }),
            Profile::Power { base, coeff, center, power } => Ok(Profile::Power {
                base: factor * base,
                coeff: factor * coeff,
                center: *center,
                power: *power,
            }),
            Profile::Piecewise { knots } => Ok(Profile::Piecewise {
                knots: knots.iter().map(|&(t, v)| (t, factor * v)).collect(),
            }),
            _ => Err(Error::invalid(
                "profile scaling is only defined for constant, power, and piecewise shapes",
            )),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Power { base, coeff, center, power } => {
                base + coeff * (t - center).abs().powf(*power)
            }
            Profile::Exp { scale, coeff, center, power } => {
                scale * (coeff * (t - center).abs().powf(*power)).exp()
            }
            Profile::FlatPeak { t0, gamma } => 1.0 - (-(t - t0).abs().powf(-gamma)).exp(),
            Profile::FlatPeakRecip { c, t0, gamma } => {
                1.0 / (1.0 + c * (-(t - t0).abs().powf(-gamma)).exp())
            }
            Profile::VaryingPower { coeff, exponent } => coeff * t.powf(-exponent.eval(t)),
            Profile::Piecewise { knots } => {
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                if t >= knots[knots.len() - 1].0 {
                    return knots[knots.len() - 1].1;
                }
                let idx = knots.partition_point(|(kt, _)| *kt <= t);
                let (t0, v0) = knots[idx - 1];
                let (t1, v1) = knots[idx];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}
