use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{eigensolve_sampled, KineticOperator, SpatialGrid};
use crate::potentials::PotentialCurve;
use crate::pulses::ChirpedPulse;
use crate::state::VibronicBasisSet;

/// One Born–Oppenheimer channel in the rotating frame.
///
/// `dressing` is the frame energy added to the bare curve: the propagated
/// wave packet is ψ'_α = e^{−i·dressing·t/ħ} ψ_α(lab).
#[derive(Debug, Clone)]
pub struct Channel {
    pub label: String,
    pub potential: PotentialCurve,
    pub dressing: f64,
    bare: Vec<f64>,
    dressed: Vec<f64>,
}

impl Channel {
    pub fn new(
        grid: &SpatialGrid,
        label: impl Into<String>,
        potential: PotentialCurve,
        dressing: f64,
    ) -> Result<Self> {
        let bare = potential.sample(grid)?;
        let dressed = bare.iter().map(|v| v + dressing).collect();
        Ok(Channel {
            label: label.into(),
            potential,
            dressing,
            bare,
            dressed,
        })
    }

    /// V_α on the grid.
    pub fn bare_samples(&self) -> &[f64] {
        &self.bare
    }

    /// V'_α = V_α + dressing on the grid.
    pub fn dressed_samples(&self) -> &[f64] {
        &self.dressed
    }

    pub fn dressed_curve(&self) -> PotentialCurve {
        self.potential.dress(self.dressing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Drive {
    Chirped(ChirpedPulse),
    /// Time-independent strength W, optionally at a carrier that differs
    /// from the frame (None means exactly resonant with the frame).
    Constant { strength: f64, carrier: Option<f64> },
}

impl Drive {
    /// W f(t) e^{−iφ(t)} before the frame detuning factor.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        match self {
            Drive::Chirped(p) => p.coupling_amplitude(t),
            Drive::Constant { strength, .. } => Complex64::new(*strength, 0.0),
        }
    }

    pub fn carrier(&self) -> Option<f64> {
        match self {
            Drive::Chirped(p) => Some(p.omega_l),
            Drive::Constant { carrier, .. } => *carrier,
        }
    }

    pub fn max_strength(&self) -> f64 {
        match self {
            Drive::Chirped(p) => p.coupling.abs() * p.peak_envelope(),
            Drive::Constant { strength, .. } => strength.abs(),
        }
    }

    /// Time after which the drive is negligible, if it ever switches off.
    pub fn end_time(&self) -> Option<f64> {
        match self {
            Drive::Chirped(p) => Some(p.end_time(1e-6)),
            Drive::Constant { .. } => None,
        }
    }
}

/// Laser coupling between an upper and a lower channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub upper: usize,
    pub lower: usize,
    pub drive: Drive,
}

/// T + V'_α on the diagonal, laser couplings off the diagonal.
#[derive(Debug, Clone)]
pub struct CoupledHamiltonian {
    grid: SpatialGrid,
    kinetic: KineticOperator,
    channels: Vec<Channel>,
    couplings: Vec<Coupling>,
}

impl CoupledHamiltonian {
    pub fn new(grid: SpatialGrid, channels: Vec<Channel>, couplings: Vec<Coupling>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidState("Hamiltonian needs a channel".into()));
        }
        for c in &couplings {
            if c.upper >= channels.len() || c.lower >= channels.len() || c.upper == c.lower {
                return Err(Error::InvalidState(format!(
                    "coupling between channels {} and {} is invalid",
                    c.upper, c.lower
                )));
            }
        }
        Ok(CoupledHamiltonian {
            kinetic: KineticOperator::new(&grid),
            grid,
            channels,
            couplings,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn kinetic(&self) -> &KineticOperator {
        &self.kinetic
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Residual carrier detuning in the chosen frame,
    /// ω_L − (dressing_lower − dressing_upper)/ħ.
    pub fn frame_detuning(&self, coupling: &Coupling) -> f64 {
        match coupling.drive.carrier() {
            Some(w) => {
                w - (self.channels[coupling.lower].dressing - self.channels[coupling.upper].dressing)
            }
            None => 0.0,
        }
    }

    /// Off-diagonal electronic coupling matrix at time t; entry (upper, lower)
    /// is W f(t) e^{−i(φ(t) + δt)}.
    pub fn coupling_matrix(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.n_channels();
        let mut m = DMatrix::zeros(n, n);
        for c in &self.couplings {
            let delta = self.frame_detuning(c);
            let z = c.drive.amplitude(t) * Complex64::from_polar(1.0, -delta * t);
            m[(c.upper, c.lower)] += z;
            m[(c.lower, c.upper)] += z.conj();
        }
        m
    }

    pub fn max_coupling(&self) -> f64 {
        self.couplings.iter().map(|c| c.drive.max_strength()).sum()
    }

    /// Spectral bracket [E_min, E_max] before the safety margin: potential
    /// extremes, kinetic cutoff and the summed peak coupling.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let m = self.grid.n_points() - 1;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for ch in &self.channels {
            for &v in &ch.dressed[1..m] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let w = self.max_coupling();
        (lo - w, hi + self.kinetic.max_eigenvalue() + w)
    }

    /// Time after which every coupling is negligible.
    pub fn drives_end(&self) -> Option<f64> {
        if self.couplings.is_empty() {
            return None;
        }
        let mut end = f64::NEG_INFINITY;
        for c in &self.couplings {
            end = end.max(c.drive.end_time()?);
        }
        Some(end)
    }

    /// Vibrational eigenbases of the dressed curves, `sizes[α]` levels each.
    pub fn vibronic_bases(&self, sizes: &[usize]) -> Result<VibronicBasisSet> {
        if sizes.len() != self.n_channels() {
            return Err(Error::InvalidState(format!(
                "{} basis sizes for {} channels",
                sizes.len(),
                self.n_channels()
            )));
        }
        let mut bases = Vec::with_capacity(sizes.len());
        for (ch, &n) in self.channels.iter().zip(sizes) {
            let mut b = eigensolve_sampled(&self.grid, &ch.dressed, n)?;
            b.label = ch.label.clone();
            bases.push(b);
        }
        VibronicBasisSet::new(self.grid, bases)
    }

    /// out = H(frozen coupling) · psi
    pub fn apply(
        &self,
        coupling: &DMatrix<Complex64>,
        psi: &[Vec<Complex64>],
        out: &mut [Vec<Complex64>],
    ) {
        for (a, ch) in self.channels.iter().enumerate() {
            let o = &mut out[a];
            self.kinetic.apply(&psi[a], o);
            for ((z, v), p) in o.iter_mut().zip(&ch.dressed).zip(&psi[a]) {
                *z += p * *v;
            }
            for b in 0..self.channels.len() {
                let c = coupling[(a, b)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (z, p) in o.iter_mut().zip(&psi[b]) {
                    *z += c * p;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(5.0, 12.0, 64, units::amu(20.0)).unwrap()
    }

    fn hamiltonian(couplings: Vec<Coupling>) -> CoupledHamiltonian {
        let g = grid();
        let mass = g.reduced_mass();
        let curves = [
            PotentialCurve::harmonic(units::wavenumber(150.0), mass, 8.0).unwrap(),
            PotentialCurve::harmonic(units::wavenumber(120.0), mass, 8.4).unwrap(),
            PotentialCurve::flat(units::wavenumber(300.0)),
        ];
        let dressings = [0.0, units::wavenumber(-9000.0), units::wavenumber(-9500.0)];
        let channels = curves
            .iter()
            .zip(dressings)
            .enumerate()
            .map(|(a, (c, d))| Channel::new(&g, format!("c{a}"), c.clone(), d).unwrap())
            .collect();
        CoupledHamiltonian::new(g, channels, couplings).unwrap()
    }

    fn pulses() -> Vec<Coupling> {
        let p = ChirpedPulse::from_widths(
            units::wavenumber(20.0),
            units::wavenumber(9000.0),
            units::ps(1.0),
            units::ps(0.2),
            units::ps(0.5),
            true,
        )
        .unwrap();
        vec![
            Coupling { upper: 1, lower: 0, drive: Drive::Chirped(p) },
            Coupling {
                upper: 2,
                lower: 0,
                drive: Drive::Constant { strength: units::wavenumber(5.0), carrier: Some(units::wavenumber(9510.0)) },
            },
        ]
    }

    fn wave(n: usize, seed: f64) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let x = i as f64 + seed;
                Complex64::new((1.7 * x).sin(), (0.9 * x * x).cos())
            })
            .collect()
    }

    #[test]
    fn detuning_follows_the_frame() {
        let h = hamiltonian(pulses());
        assert!(h.frame_detuning(&h.couplings()[0]).abs() < 1e-18);
        let d = h.frame_detuning(&h.couplings()[1]);
        assert!((d - units::wavenumber(10.0)).abs() < 1e-15);
    }

    #[test]
    fn coupling_matrix_is_hermitian() {
        let h = hamiltonian(pulses());
        for t in [0.0, units::ps(0.8), units::ps(1.0), units::ps(1.7)] {
            let m = h.coupling_matrix(t);
            assert!((&m - m.adjoint()).norm() < 1e-18);
            assert_eq!(m[(0, 0)], Complex64::new(0.0, 0.0));
            assert_eq!(m[(1, 2)], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn apply_is_self_adjoint_and_bounded() {
        let h = hamiltonian(pulses());
        let g = grid();
        let n = g.n_points();
        let clear = |mut v: Vec<Complex64>| {
            v[0] = Complex64::new(0.0, 0.0);
            v[n - 1] = Complex64::new(0.0, 0.0);
            v
        };
        let phi: Vec<_> = (0..3).map(|a| clear(wave(n, a as f64))).collect();
        let psi: Vec<_> = (0..3).map(|a| clear(wave(n, 10.0 + a as f64))).collect();
        let c = h.coupling_matrix(units::ps(1.0));
        let mut h_phi = vec![vec![Complex64::new(0.0, 0.0); n]; 3];
        let mut h_psi = h_phi.clone();
        h.apply(&c, &phi, &mut h_phi);
        h.apply(&c, &psi, &mut h_psi);
        let dot = |a: &[Vec<Complex64>], b: &[Vec<Complex64>]| -> Complex64 {
            a.iter().zip(b).map(|(x, y)| g.inner(x, y)).sum()
        };
        let lhs = dot(&phi, &h_psi);
        let rhs = dot(&h_phi, &psi);
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());

        let (lo, hi) = h.spectral_bounds();
        let rayleigh = dot(&psi, &h_psi).re / dot(&psi, &psi).re;
        assert!(lo <= rayleigh && rayleigh <= hi);
    }

    #[test]
    fn drive_end_needs_every_pulse_to_switch_off() {
        assert_eq!(hamiltonian(Vec::new()).drives_end(), None);
        assert_eq!(hamiltonian(pulses()).drives_end(), None);
        let chirped = pulses().into_iter().take(1).collect();
        let end = hamiltonian(chirped).drives_end().unwrap();
        assert!(end > units::ps(1.0) && end < units::ps(3.0));
    }

    #[test]
    fn bases_carry_the_dressing_shift() {
        let h = hamiltonian(Vec::new());
        let b = h.vibronic_bases(&[3, 3, 2]).unwrap();
        let bare = crate::grid::eigensolve(&grid(), &h.channels()[1].potential, 3).unwrap();
        for (e, e0) in b.energies(1).iter().zip(&bare.energies) {
            assert!((e - e0 - units::wavenumber(-9000.0)).abs() < 1e-12);
        }
        assert_eq!(b.basis(2).label, "c2");
        assert!(h.vibronic_bases(&[3, 3]).is_err());
    }
}
