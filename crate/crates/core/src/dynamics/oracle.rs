//! Dense propagation in a truncated vibronic basis.
//!
//! The Hamiltonian projected onto {|α⟩|χ_vα⟩} is diag(E_vα) plus coupling
//! blocks C_αβ(t)·⟨χ_vα|χ_v'β⟩. Each midpoint-frozen step is exponentiated
//! exactly through a Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::chebyshev::step_count;
use super::hamiltonian::CoupledHamiltonian;
use crate::error::{Error, Result};
use crate::state::{VibronicBasisSet, VibronicCoefficients};
use crate::units::HBAR;

/// Largest per-channel basis the dense oracle accepts.
pub const MAX_LEVELS_PER_CHANNEL: usize = 64;

#[derive(Debug, Clone)]
pub struct VibronicHamiltonian<'a> {
    hamiltonian: &'a CoupledHamiltonian,
    bases: &'a VibronicBasisSet,
    offsets: Vec<usize>,
    energies: Vec<f64>,
}

impl<'a> VibronicHamiltonian<'a> {
    /// `bases` must hold eigenstates of the dressed channel potentials.
    pub fn new(hamiltonian: &'a CoupledHamiltonian, bases: &'a VibronicBasisSet) -> Result<Self> {
        if bases.n_channels() != hamiltonian.n_channels() {
            return Err(Error::InvalidState(format!(
                "basis set has {} channels, Hamiltonian has {}",
                bases.n_channels(),
                hamiltonian.n_channels()
            )));
        }
        if let Some(b) = bases.bases().iter().find(|b| b.len() > MAX_LEVELS_PER_CHANNEL) {
            return Err(Error::BasisTooLarge {
                size: b.len(),
                limit: MAX_LEVELS_PER_CHANNEL,
            });
        }
        let mut offsets = Vec::with_capacity(bases.n_channels());
        let mut energies = Vec::with_capacity(bases.total_size());
        for b in bases.bases() {
            offsets.push(energies.len());
            energies.extend_from_slice(&b.energies);
        }
        Ok(VibronicHamiltonian {
            hamiltonian,
            bases,
            offsets,
            energies,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn bases(&self) -> &VibronicBasisSet {
        self.bases
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bases.bases().iter().map(|b| b.len()).collect()
    }

    /// Projected Hamiltonian at time t.
    pub fn matrix(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut h = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            self.energies.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        let c = self.hamiltonian.coupling_matrix(t);
        let nc = self.bases.n_channels();
        for a in 0..nc {
            for b in 0..nc {
                let z = c[(a, b)];
                if a == b || z == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let s = self.bases.overlap(a, b);
                for v in 0..s.nrows() {
                    for w in 0..s.ncols() {
                        h[(self.offsets[a] + v, self.offsets[b] + w)] += z * s[(v, w)];
                    }
                }
            }
        }
        h
    }

    fn step(&self, c: &DVector<Complex64>, t: f64, dt: f64) -> DVector<Complex64> {
        let eig = SymmetricEigen::new(self.matrix(t + 0.5 * dt));
        let u = &eig.eigenvectors;
        let mut y = u.adjoint() * c;
        for (k, z) in y.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -eig.eigenvalues[k] * dt / HBAR);
        }
        u * y
    }
}

/// Coefficient snapshots from [`propagate_exact`].
#[derive(Debug, Clone, Default)]
pub struct CoefficientTrajectory {
    pub times: Vec<f64>,
    pub coefficients: Vec<VibronicCoefficients>,
}

impl CoefficientTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Dense-basis propagation with the same step and stride conventions as the
/// grid propagator. With no couplings the evolution is the exact phase
/// c_vα(t) = c_vα(t0)·e^{−iE_vα(t−t0)/ħ}.
pub fn propagate_exact(
    h: &VibronicHamiltonian,
    initial: &VibronicCoefficients,
    t0: f64,
    t1: f64,
    dt: f64,
    stride: usize,
) -> Result<CoefficientTrajectory> {
    let sizes = h.sizes();
    if initial.n_channels() != sizes.len()
        || initial.channels().iter().zip(&sizes).any(|(c, &n)| c.len() != n)
    {
        return Err(Error::InvalidState(
            "initial coefficients do not match the basis sizes".into(),
        ));
    }
    let steps = step_count(t0, t1, dt)?;
    let stride = stride.max(1);
    let step = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
    let field_free = h.hamiltonian.couplings().is_empty();
    let c0 = DVector::from_vec(initial.flatten());
    let mut c = c0.clone();
    let mut out = CoefficientTrajectory::default();
    out.times.push(t0);
    out.coefficients.push(initial.clone());
    for k in 0..steps {
        let t = t0 + k as f64 * step;
        let t_next = t0 + (k + 1) as f64 * step;
        if field_free {
            if (k + 1) % stride == 0 {
                c = DVector::from_iterator(
                    c0.len(),
                    c0.iter().zip(&h.energies).map(|(z, e)| {
                        z * Complex64::from_polar(1.0, -e * (t_next - t0) / HBAR)
                    }),
                );
            }
        } else {
            c = h.step(&c, t, step);
        }
        if (k + 1) % stride == 0 {
            out.times.push(t_next);
            out.coefficients
                .push(VibronicCoefficients::from_flat(c.as_slice(), &sizes));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::hamiltonian::{Channel, Coupling, Drive};
    use crate::grid::SpatialGrid;
    use crate::potentials::PotentialCurve;
    use crate::units;

    fn model(coupling: Option<f64>) -> (CoupledHamiltonian, VibronicBasisSet) {
        let mass = units::amu(50.0);
        let grid = SpatialGrid::new(4.0, 12.0, 128, mass).unwrap();
        let w = units::wavenumber(100.0);
        let g = PotentialCurve::harmonic(w, mass, 7.8).unwrap();
        let e = PotentialCurve::harmonic(w, mass, 8.2).unwrap();
        let channels = vec![
            Channel::new(&grid, "g", g, 0.0).unwrap(),
            Channel::new(&grid, "e", e, units::wavenumber(20.0)).unwrap(),
        ];
        let couplings = coupling
            .map(|s| {
                vec![Coupling {
                    upper: 1,
                    lower: 0,
                    drive: Drive::Constant {
                        strength: units::wavenumber(s),
                        carrier: None,
                    },
                }]
            })
            .unwrap_or_default();
        let h = CoupledHamiltonian::new(grid, channels, couplings).unwrap();
        let bases = h.vibronic_bases(&[6, 6]).unwrap();
        (h, bases)
    }

    fn initial() -> VibronicCoefficients {
        let mut g = vec![Complex64::new(0.0, 0.0); 6];
        let mut e = g.clone();
        g[0] = Complex64::new(0.8, 0.0);
        e[1] = Complex64::new(0.0, 0.6);
        VibronicCoefficients::new(vec![g, e])
    }

    #[test]
    fn field_free_is_pure_phase() {
        let (h, bases) = model(None);
        let vh = VibronicHamiltonian::new(&h, &bases).unwrap();
        let c0 = initial();
        let traj = propagate_exact(&vh, &c0, 0.0, units::ps(1.0), units::ps(0.01), 10).unwrap();
        assert_eq!(traj.len(), 11);
        for (t, c) in traj.times.iter().zip(&traj.coefficients) {
            for a in 0..2 {
                for v in 0..6 {
                    let expected = c0.get(a, v)
                        * Complex64::from_polar(1.0, -bases.energies(a)[v] * t);
                    assert!((c.get(a, v) - expected).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn projected_matrix_is_hermitian_and_unitary_step() {
        let (h, bases) = model(Some(5.0));
        let vh = VibronicHamiltonian::new(&h, &bases).unwrap();
        let m = vh.matrix(3.0);
        assert!((&m - m.adjoint()).norm() < 1e-18);
        let traj = propagate_exact(&vh, &initial(), 0.0, units::ps(2.0), units::fs(5.0), 40).unwrap();
        for c in &traj.coefficients {
            let n: f64 = c.populations().iter().sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        // coupling moves population
        let last = traj.coefficients.last().unwrap();
        assert!((last.population(0) - 0.64).abs() > 1e-3);
    }

    #[test]
    fn rejects_oversized_basis() {
        let mass = units::amu(50.0);
        let grid = SpatialGrid::new(4.0, 12.0, 160, mass).unwrap();
        let ch = Channel::new(&grid, "g", PotentialCurve::flat(0.0), 0.0).unwrap();
        let h = CoupledHamiltonian::new(grid, vec![ch], vec![]).unwrap();
        let bases = h.vibronic_bases(&[65]).unwrap();
        assert!(matches!(
            VibronicHamiltonian::new(&h, &bases),
            Err(Error::BasisTooLarge { size: 65, .. })
        ));
    }
}
