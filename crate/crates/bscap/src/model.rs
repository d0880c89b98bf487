//! Circuit-level quantities of a load-modulated backscatter tag and the
//! bijective maps between load impedance, reflection coefficient, and tag
//! current.
//!
//! The reference impedance is the tag-antenna resistance, so the normalized
//! load impedance `z` lives in the right half-plane and its Möbius image
//! Γ = (z−1)/(z+1) on the closed unit disk. All operations here are pure and
//! the value types immutable, so they can be evaluated concurrently.

use crate::{Error, EPS_TOL};
use num_complex::Complex64;

/// Signal-to-noise ratio of the backscatter link, stored as a linear ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr {
    linear: f64,
}

impl Snr {
    /// Build from a linear power ratio. Must be positive and finite.
    pub fn from_linear(linear: f64) -> Result<Self, Error> {
        if !(linear > 0.0) || !linear.is_finite() {
            return Err(Error::invalid(format!(
                "SNR must be a positive finite ratio, got {linear}"
            )));
        }
        Ok(Snr { linear })
    }

    /// Build from a decibel value.
    pub fn from_db(db: f64) -> Result<Self, Error> {
        Snr::from_linear(10f64.powf(db / 10.0))
    }

    /// Linear power ratio ρ.
    pub fn linear(self) -> f64 {
        self.linear
    }

    /// Decibel value 10·log10(ρ).
    pub fn db(self) -> f64 {
        10.0 * self.linear.log10()
    }
}

/// Load reflection coefficient Γ, a point on the closed complex unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionCoefficient {
    value: Complex64,
}

impl ReflectionCoefficient {
    /// Validates `|Γ| ≤ 1` up to [`EPS_TOL`] slack.
    pub fn new(value: Complex64) -> Result<Self, Error> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::invalid("reflection coefficient must be finite"));
        }
        if value.norm() > 1.0 + EPS_TOL {
            return Err(Error::invalid(format!(
                "reflection coefficient magnitude {} exceeds the unit disk",
                value.norm()
            )));
        }
        Ok(ReflectionCoefficient { value })
    }

    pub fn value(self) -> Complex64 {
        self.value
    }

    pub fn magnitude(self) -> f64 {
        self.value.norm()
    }
}

/// Load impedance divided by the tag-antenna resistance; right half-plane
/// for passive loads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedImpedance {
    value: Complex64,
}

impl NormalizedImpedance {
    /// Validates passivity `Re(z) ≥ −EPS_TOL`.
    pub fn new(value: Complex64) -> Result<Self, Error> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::invalid("impedance must be finite"));
        }
        if value.re < -EPS_TOL {
            return Err(Error::invalid(format!(
                "non-passive load: Re(z) = {} < 0",
                value.re
            )));
        }
        Ok(NormalizedImpedance { value })
    }

    pub fn value(self) -> Complex64 {
        self.value
    }

    /// Normalized resistance Re(z).
    pub fn resistance(self) -> f64 {
        self.value.re
    }

    /// Normalized reactance Im(z).
    pub fn reactance(self) -> f64 {
        self.value.im
    }
}

/// Electrical parameters of the tag/receiver pair that set the link SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TagCircuitParams {
    /// Tag-antenna resistance in ohm.
    pub r_tx: f64,
    /// Tag-antenna reactance in ohm (equals the coil Q-factor once
    /// normalized by `r_tx`).
    pub x_tx: f64,
    /// Induced voltage phasor at the tag antenna, in volt.
    pub v_ind_tx: Complex64,
    /// Mutual impedance between tag and receiver antennas, in ohm.
    pub z_mutual: Complex64,
    /// Receiver noise variance in volt².
    pub noise_var: f64,
}

impl TagCircuitParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.r_tx > 0.0) {
            return Err(Error::invalid("antenna resistance must be positive"));
        }
        if !(self.noise_var > 0.0) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        Ok(())
    }
}

/// Tag current phasor with a matched load (z = 1), in ampere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedCurrent {
    pub i_pm: Complex64,
}

impl MatchedCurrent {
    /// i_PM = v_ind / (2 R_T).
    pub fn from_params(p: &TagCircuitParams) -> Result<Self, Error> {
        p.validate()?;
        Ok(MatchedCurrent {
            i_pm: p.v_ind_tx / (2.0 * p.r_tx),
        })
    }
}

/// Γ = (z − 1) / (z + 1), mapping the passive right half-plane onto the
/// closed unit disk. A pure reactance lands on the unit circle.
pub fn gamma_from_z(z: NormalizedImpedance) -> ReflectionCoefficient {
    let zv = z.value();
    let g = (zv - 1.0) / (zv + 1.0);
    // Passivity of z guarantees |Γ| ≤ 1; clamp the arithmetic residue.
    let mag = g.norm();
    let g = if mag > 1.0 { g / mag } else { g };
    ReflectionCoefficient { value: g }
}

/// z = (1 + Γ) / (1 − Γ). Γ = 1 is the open-circuit state and is reported
/// as [`Error::OpenCircuit`] instead of an infinite value.
pub fn z_from_gamma(g: ReflectionCoefficient) -> Result<NormalizedImpedance, Error> {
    let gv = g.value();
    if gv == Complex64::new(1.0, 0.0) {
        return Err(Error::OpenCircuit);
    }
    let z = (1.0 + gv) / (1.0 - gv);
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::OpenCircuit);
    }
    // |Γ| ≤ 1 guarantees Re(z) ≥ 0; clamp the arithmetic residue.
    let z = Complex64::new(z.re.max(0.0), z.im);
    Ok(NormalizedImpedance { value: z })
}

/// Tag current i_T = (1 − Γ) · i_PM realized by load state Γ.
///
/// The image of the unit disk is the disk |i_T − i_PM| ≤ |i_PM|.
pub fn tag_current(g: ReflectionCoefficient, i_pm: MatchedCurrent) -> Complex64 {
    (1.0 - g.value()) * i_pm.i_pm
}

/// Link SNR ρ = |Z_RT|² |v_ind|² / (4 R_T² σ²).
pub fn link_snr(p: &TagCircuitParams) -> Result<Snr, Error> {
    p.validate()?;
    let num = p.z_mutual.norm_sqr() * p.v_ind_tx.norm_sqr();
    let den = 4.0 * p.r_tx * p.r_tx * p.noise_var;
    Snr::from_linear(num / den)
}
