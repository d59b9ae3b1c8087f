//! Electronic potential curves V_α(R).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::units;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialCurve {
    /// `offset + depth·(1 − e^{−alpha(R − r_e)})²`
    Morse {
        depth: f64,
        alpha: f64,
        r_e: f64,
        offset: f64,
    },
    /// `offset + ½·mass·omega²·(R − r_e)²`
    Harmonic {
        omega: f64,
        mass: f64,
        r_e: f64,
        offset: f64,
    },
    Flat {
        value: f64,
    },
    Tabulated(TabulatedCurve),
}

impl PotentialCurve {
    pub fn morse(depth: f64, alpha: f64, r_e: f64) -> Result<Self> {
        if !(depth > 0.0 && alpha > 0.0 && r_e.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "morse needs depth > 0 and alpha > 0 (got D = {depth}, a = {alpha})"
            )));
        }
        Ok(PotentialCurve::Morse {
            depth,
            alpha,
            r_e,
            offset: 0.0,
        })
    }

    /// Morse curve from its harmonic frequency, a = ω_e·√(μ/2D).
    pub fn morse_from_frequency(depth: f64, omega_e: f64, r_e: f64, mass: f64) -> Result<Self> {
        Self::morse(depth, omega_e * (mass / (2.0 * depth)).sqrt(), r_e)
    }

    pub fn harmonic(omega: f64, mass: f64, r_e: f64) -> Result<Self> {
        if !(omega > 0.0 && mass > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "harmonic needs omega > 0 and mass > 0 (got {omega}, {mass})"
            )));
        }
        Ok(PotentialCurve::Harmonic {
            omega,
            mass,
            r_e,
            offset: 0.0,
        })
    }

    pub fn flat(value: f64) -> Self {
        PotentialCurve::Flat { value }
    }

    pub fn evaluate(&self, r: f64) -> Result<f64> {
        Ok(match self {
            PotentialCurve::Morse {
                depth,
                alpha,
                r_e,
                offset,
            } => {
                let x = 1.0 - (-alpha * (r - r_e)).exp();
                offset + depth * x * x
            }
            PotentialCurve::Harmonic {
                omega,
                mass,
                r_e,
                offset,
            } => offset + 0.5 * mass * omega * omega * (r - r_e) * (r - r_e),
            PotentialCurve::Flat { value } => *value,
            PotentialCurve::Tabulated(table) => table.evaluate(r)?,
        })
    }

    /// Dissociation limit, or +∞ for a confining well.
    pub fn asymptote(&self) -> f64 {
        match self {
            PotentialCurve::Morse { depth, offset, .. } => offset + depth,
            PotentialCurve::Harmonic { .. } => f64::INFINITY,
            PotentialCurve::Flat { value } => *value,
            PotentialCurve::Tabulated(t) => *t.values.last().expect("non-empty table"),
        }
    }

    /// Pointwise shift by a constant energy; the shape is untouched.
    pub fn dress(&self, shift: f64) -> PotentialCurve {
        let mut out = self.clone();
        match &mut out {
            PotentialCurve::Morse { offset, .. } | PotentialCurve::Harmonic { offset, .. } => {
                *offset += shift
            }
            PotentialCurve::Flat { value } => *value += shift,
            PotentialCurve::Tabulated(t) => {
                for v in &mut t.values {
                    *v += shift;
                }
            }
        }
        out
    }

    pub fn sample(&self, grid: &SpatialGrid) -> Result<Vec<f64>> {
        grid.points().map(|r| self.evaluate(r)).collect()
    }
}

/// Sampled curve with monotone (Fritsch–Carlson) piecewise-cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCurve {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedCurve {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidPotential(
                "table columns differ in length".into(),
            ));
        }
        if knots.len() < 2 {
            return Err(Error::InvalidPotential(
                "table needs at least two rows".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential(
                "table R values must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("table contains non-finite V".into()));
        }
        let slopes = monotone_slopes(&knots, &values);
        Ok(TabulatedCurve {
            knots,
            values,
            slopes,
        })
    }

    /// Reads two whitespace-separated columns, R in a₀ and V in cm⁻¹; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut knots = Vec::new();
        let mut values = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::InvalidPotential(format!(
                    "line {}: expected two columns, found {}",
                    no + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidPotential(format!("line {}: bad number `{s}`", no + 1))
                })
            };
            knots.push(parse(cols[0])?);
            values.push(units::wavenumber(parse(cols[1])?));
        }
        Self::new(knots, values)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn evaluate(&self, r: f64) -> Result<f64> {
        let (min, max) = self.range();
        if !(r >= min && r <= max) {
            return Err(Error::OutOfRange { r, min, max });
        }
        let k = match self.knots.partition_point(|&x| x <= r) {
            0 => 0,
            i if i >= self.knots.len() => self.knots.len() - 2,
            i => i - 1,
        };
        let h = self.knots[k + 1] - self.knots[k];
        let t = (r - self.knots[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.values[k]
            + h10 * h * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.slopes[k + 1])
    }
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            // weighted harmonic mean
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
