//! Presentation units and their conversion to atomic units.
//!
//! Everything inside the crate runs in Hartree atomic units (ħ = mₑ = a₀ = 1).
//! Wavenumbers, picoseconds and atomic mass units only appear at the edges:
//! config files, CSV columns and the CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// CODATA 2018 recommended values.
/// Hartree energy in cm⁻¹ (hc R∞ · 2 / hc).
pub const HARTREE_IN_WAVENUMBER: f64 = 219_474.631_363_20;
/// Atomic unit of time ħ/Eₕ in picoseconds.
pub const AU_TIME_IN_PS: f64 = 2.418_884_326_585_7e-5;
/// Unified atomic mass unit in electron masses.
pub const AMU_IN_ELECTRON_MASS: f64 = 1_822.888_486_209;

/// ħ = 1 in atomic units.
pub const HBAR: f64 = 1.0;
/// ħ expressed in cm⁻¹·ps (≈ 5.3088).
pub const HBAR_WAVENUMBER_PS: f64 = HARTREE_IN_WAVENUMBER * AU_TIME_IN_PS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Energy,
    Time,
    Length,
    InverseLength,
    Mass,
    /// Time⁻², or energy per time once multiplied by ħ.
    Chirp,
    AngularFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    Wavenumber,
    Hartree,
    Picosecond,
    Femtosecond,
    AtomicTime,
    Bohr,
    InverseBohr,
    Amu,
    ElectronMass,
    PerPsSquared,
    AtomicChirp,
    /// ħχ in cm⁻¹/ps.
    WavenumberPerPs,
    /// Angular frequency in rad/ps.
    PerPs,
    AtomicFrequency,
}

impl Unit {
    pub const ALL: [Unit; 14] = [
        Unit::Wavenumber,
        Unit::Hartree,
        Unit::Picosecond,
        Unit::Femtosecond,
        Unit::AtomicTime,
        Unit::Bohr,
        Unit::InverseBohr,
        Unit::Amu,
        Unit::ElectronMass,
        Unit::PerPsSquared,
        Unit::AtomicChirp,
        Unit::WavenumberPerPs,
        Unit::PerPs,
        Unit::AtomicFrequency,
    ];

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Wavenumber | Unit::Hartree => Dimension::Energy,
            Unit::Picosecond | Unit::Femtosecond | Unit::AtomicTime => Dimension::Time,
            Unit::Bohr => Dimension::Length,
            Unit::InverseBohr => Dimension::InverseLength,
            Unit::Amu | Unit::ElectronMass => Dimension::Mass,
            Unit::PerPsSquared | Unit::AtomicChirp | Unit::WavenumberPerPs => Dimension::Chirp,
            Unit::PerPs | Unit::AtomicFrequency => Dimension::AngularFrequency,
        }
    }

    /// Multiply a value in this unit by the factor to get atomic units.
    pub fn au_factor(self) -> f64 {
        match self {
            Unit::Wavenumber => 1.0 / HARTREE_IN_WAVENUMBER,
            Unit::Hartree => 1.0,
            Unit::Picosecond => 1.0 / AU_TIME_IN_PS,
            Unit::Femtosecond => 1e-3 / AU_TIME_IN_PS,
            Unit::AtomicTime => 1.0,
            Unit::Bohr => 1.0,
            Unit::InverseBohr => 1.0,
            Unit::Amu => AMU_IN_ELECTRON_MASS,
            Unit::ElectronMass => 1.0,
            Unit::PerPsSquared => AU_TIME_IN_PS * AU_TIME_IN_PS,
            Unit::AtomicChirp => 1.0,
            Unit::WavenumberPerPs => AU_TIME_IN_PS / (HARTREE_IN_WAVENUMBER * HBAR),
            Unit::PerPs => AU_TIME_IN_PS,
            Unit::AtomicFrequency => 1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Unit::Wavenumber => "cm-1",
            Unit::Hartree => "hartree",
            Unit::Picosecond => "ps",
            Unit::Femtosecond => "fs",
            Unit::AtomicTime => "aut",
            Unit::Bohr => "a0",
            Unit::InverseBohr => "a0-1",
            Unit::Amu => "amu",
            Unit::ElectronMass => "me",
            Unit::PerPsSquared => "ps-2",
            Unit::AtomicChirp => "aut-2",
            Unit::WavenumberPerPs => "cm-1/ps",
            Unit::PerPs => "ps-1",
            Unit::AtomicFrequency => "aut-1",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Unit::ALL
            .into_iter()
            .find(|u| u.tag() == s)
            .or(match s {
                "Eh" => Some(Unit::Hartree),
                "bohr" => Some(Unit::Bohr),
                "u" => Some(Unit::Amu),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownUnit(s.to_string()))
    }
}

/// Energy and angular frequency are interchangeable through E = ħω.
fn compatible(a: Dimension, b: Dimension) -> bool {
    use Dimension::*;
    a == b || matches!((a, b), (Energy, AngularFrequency) | (AngularFrequency, Energy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    pub fn from_au(value: f64, unit: Unit) -> Self {
        Quantity {
            value: value / unit.au_factor(),
            unit,
        }
    }

    pub fn to_au(self) -> f64 {
        self.value * self.unit.au_factor()
    }

    pub fn dimension(self) -> Dimension {
        self.unit.dimension()
    }

    pub fn convert(self, target: Unit) -> Result<Quantity> {
        if !compatible(self.unit.dimension(), target.dimension()) {
            return Err(Error::IncompatibleDimension {
                from: self.unit.dimension(),
                to: target.dimension(),
            });
        }
        if self.unit == target {
            return Ok(self);
        }
        Ok(Quantity::from_au(self.to_au(), target))
    }

    /// Converts to atomic units, checking the dimension on the way.
    pub fn au_as(self, dim: Dimension) -> Result<f64> {
        if !compatible(self.unit.dimension(), dim) {
            return Err(Error::IncompatibleDimension {
                from: self.unit.dimension(),
                to: dim,
            });
        }
        Ok(self.to_au())
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl FromStr for Quantity {
    type Err = Error;

    /// Parses `"<number> <unit>"`, e.g. `10695 cm-1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let number = parts
            .next()
            .ok_or_else(|| Error::UnknownUnit(String::new()))?;
        let value: f64 = number
            .parse()
            .map_err(|_| Error::UnknownUnit(format!("{s} (bad number `{number}`)")))?;
        let unit: Unit = parts
            .next()
            .ok_or_else(|| Error::UnknownUnit(format!("{s} (missing unit)")))?
            .parse()?;
        if let Some(extra) = parts.next() {
            return Err(Error::UnknownUnit(format!("{s} (trailing `{extra}`)")));
        }
        Ok(Quantity::new(value, unit))
    }
}

pub fn wavenumber(value: f64) -> f64 {
    value / HARTREE_IN_WAVENUMBER
}

pub fn to_wavenumber(energy_au: f64) -> f64 {
    energy_au * HARTREE_IN_WAVENUMBER
}

pub fn ps(value: f64) -> f64 {
    value / AU_TIME_IN_PS
}

pub fn fs(value: f64) -> f64 {
    value * 1e-3 / AU_TIME_IN_PS
}

pub fn to_ps(time_au: f64) -> f64 {
    time_au * AU_TIME_IN_PS
}

pub fn amu(value: f64) -> f64 {
    value * AMU_IN_ELECTRON_MASS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hartree_in_wavenumbers() {
        let q = Quantity::new(1.0, Unit::Hartree)
            .convert(Unit::Wavenumber)
            .unwrap();
        assert!((q.value - 219_474.631).abs() < 1e-3);
    }

    #[test]
    fn zero_maps_to_zero() {
        let q = Quantity::new(0.0, Unit::Wavenumber)
            .convert(Unit::Hartree)
            .unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn hbar_chirp_product() {
        let q = Quantity::new(4.35, Unit::PerPsSquared)
            .convert(Unit::WavenumberPerPs)
            .unwrap();
        assert!((q.value - 23.11).abs() / 23.11 < 1e-3, "{}", q.value);
    }

    #[test]
    fn hbar_in_wavenumber_ps() {
        // 1/(2πc) with c in cm/ps
        let independent = 1.0 / (2.0 * std::f64::consts::PI * 0.029_979_245_8);
        assert!((HBAR_WAVENUMBER_PS - independent).abs() / independent < 1e-9);
        assert!((HBAR_WAVENUMBER_PS - 5.3088).abs() / 5.3088 < 1e-4);
    }

    #[test]
    fn energy_and_frequency_interconvert() {
        let w = Quantity::new(10695.0, Unit::Wavenumber)
            .convert(Unit::PerPs)
            .unwrap();
        assert!((w.value - 10695.0 / HBAR_WAVENUMBER_PS).abs() < 1e-9);
    }

    #[test]
    fn incompatible_dimension() {
        let err = Quantity::new(1.0, Unit::Bohr).convert(Unit::Picosecond);
        assert!(matches!(err, Err(Error::IncompatibleDimension { .. })));
    }

    #[test]
    fn round_trip_every_compatible_pair() {
        for a in Unit::ALL {
            for b in Unit::ALL {
                if !compatible(a.dimension(), b.dimension()) {
                    continue;
                }
                for v in [1.0, -3.7e5, 2.5e-9, 123.456] {
                    let back = Quantity::new(v, a).convert(b).unwrap().convert(a).unwrap();
                    assert!((back.value - v).abs() <= 1e-14 * v.abs(), "{a} -> {b}");
                }
            }
        }
    }

    #[test]
    fn parse_quantity() {
        let q: Quantity = "10695 cm-1".parse().unwrap();
        assert_eq!(q, Quantity::new(10695.0, Unit::Wavenumber));
        assert!("3 parsecs".parse::<Quantity>().is_err());
        assert!("12".parse::<Quantity>().is_err());
    }
}
