//! Linearly chirped Gaussian pulses.
//!
//! All fields are atomic units. `coupling` is the constant strength W_L that
//! multiplies the envelope in the off-diagonal block of the coupled
//! Hamiltonian; `chirp` is signed and in au_time⁻².

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::HBAR;

/// Accepted relative mismatch between τ_C/τ_L and √(1 + χ²τ_C⁴/(4 ln 2)²).
///
/// Published parameter sets are rounded to two or three digits, so they
/// satisfy the stretch relation only to a fraction of a percent.
pub const STRETCH_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpedPulse {
    pub coupling: f64,
    pub omega_l: f64,
    pub t_peak: f64,
    pub tau_l: f64,
    pub tau_c: f64,
    pub chirp: f64,
}

impl ChirpedPulse {
    pub fn new(
        coupling: f64,
        omega_l: f64,
        t_peak: f64,
        tau_l: f64,
        tau_c: f64,
        chirp: f64,
    ) -> Result<Self> {
        let p = ChirpedPulse {
            coupling,
            omega_l,
            t_peak,
            tau_l,
            tau_c,
            chirp,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds the pulse with |χ| chosen to satisfy the stretch relation exactly.
    pub fn from_widths(
        coupling: f64,
        omega_l: f64,
        t_peak: f64,
        tau_l: f64,
        tau_c: f64,
        positive_chirp: bool,
    ) -> Result<Self> {
        check_widths(tau_l, tau_c)?;
        let magnitude = chirp_for_widths(tau_l, tau_c);
        let chirp = if positive_chirp { magnitude } else { -magnitude };
        Self::new(coupling, omega_l, t_peak, tau_l, tau_c, chirp)
    }

    pub fn validate(&self) -> Result<()> {
        check_widths(self.tau_l, self.tau_c)?;
        if !(self.coupling.is_finite() && self.omega_l.is_finite() && self.t_peak.is_finite()) {
            return Err(Error::InvalidPulse("non-finite pulse parameter".into()));
        }
        let residual = self.stretch_residual();
        if residual > STRETCH_TOLERANCE {
            return Err(Error::InvalidPulse(format!(
                "stretch relation violated: tau_C/tau_L = {:.6} but the chirp implies {:.6} \
                 (relative mismatch {residual:.2e})",
                self.stretch_ratio(),
                self.stretch_ratio_from_chirp()
            )));
        }
        Ok(())
    }

    /// f(t) = √(τ_L/τ_C)·exp(−2 ln 2 ((t − t_P)/τ_C)²)
    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.t_peak) / self.tau_c;
        self.peak_envelope() * (-2.0 * LN_2 * x * x).exp()
    }

    pub fn peak_envelope(&self) -> f64 {
        (self.tau_l / self.tau_c).sqrt()
    }

    /// φ(t) = ½χ(t − t_P)² and ω(t) = ω_L + χ(t − t_P).
    pub fn phase_and_frequency(&self, t: f64) -> (f64, f64) {
        let dt = t - self.t_peak;
        (0.5 * self.chirp * dt * dt, self.omega_l + self.chirp * dt)
    }

    pub fn phase(&self, t: f64) -> f64 {
        self.phase_and_frequency(t).0
    }

    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.phase_and_frequency(t).1
    }

    /// Spectral width ħ·4 ln 2/τ_L as an energy.
    pub fn spectral_width(&self) -> f64 {
        HBAR * 4.0 * LN_2 / self.tau_l
    }

    pub fn stretch_ratio(&self) -> f64 {
        self.tau_c / self.tau_l
    }

    /// √(1 + χ²τ_C⁴/(4 ln 2)²)
    pub fn stretch_ratio_from_chirp(&self) -> f64 {
        let x = self.chirp * self.tau_c * self.tau_c / (4.0 * LN_2);
        (1.0 + x * x).sqrt()
    }

    pub fn stretch_residual(&self) -> f64 {
        (self.stretch_ratio() / self.stretch_ratio_from_chirp() - 1.0).abs()
    }

    /// Energy window 2ħ|χ|τ_C swept by the instantaneous frequency.
    pub fn sweep_range(&self) -> f64 {
        2.0 * HBAR * self.chirp.abs() * self.tau_c
    }

    /// W_L f(t) e^{−iφ(t)}
    pub fn coupling_amplitude(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.coupling * self.envelope(t), -self.phase(t))
    }

    /// Time after which f(t) < `fraction`·f(t_P).
    pub fn end_time(&self, fraction: f64) -> f64 {
        self.t_peak + self.tau_c * (-fraction.ln() / (2.0 * LN_2)).sqrt()
    }
}

fn check_widths(tau_l: f64, tau_c: f64) -> Result<()> {
    if !(tau_l > 0.0) {
        return Err(Error::InvalidPulse(format!("tau_L must be positive (got {tau_l})")));
    }
    if !(tau_c >= tau_l) {
        return Err(Error::InvalidPulse(format!(
            "stretch relation violated: tau_C = {tau_c} is shorter than tau_L = {tau_l}"
        )));
    }
    Ok(())
}

/// |χ| = 4 ln 2·√(r² − 1)/τ_C² with r = τ_C/τ_L.
pub fn chirp_for_widths(tau_l: f64, tau_c: f64) -> f64 {
    let r = tau_c / tau_l;
    4.0 * LN_2 * (r * r - 1.0).max(0.0).sqrt() / (tau_c * tau_c)
}
