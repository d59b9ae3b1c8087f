//! Uniform radial grid with hard walls, the sine-basis kinetic operator and
//! single-channel vibrational eigenbases.
//!
//! Grid vectors carry all `n_points` samples, endpoints included. The two
//! endpoints sit on the walls and are always zero; the `n_points - 2`
//! interior samples form a sine discrete variable representation whose
//! basis functions are `sin(πk(R − r_min)/L)` for `k = 1..=n_points - 2`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::PotentialCurve;
use crate::units::HBAR;

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    r_min: f64,
    r_max: f64,
    n_points: usize,
    reduced_mass: f64,
}

impl SpatialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize, reduced_mass: f64) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points}, need at least {MIN_POINTS}"
            )));
        }
        if !(r_min.is_finite() && r_max.is_finite() && r_min < r_max) {
            return Err(Error::InvalidGrid(format!(
                "need r_min < r_max (got {r_min}, {r_max})"
            )));
        }
        if !(reduced_mass > 0.0 && reduced_mass.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "reduced mass must be positive (got {reduced_mass})"
            )));
        }
        Ok(SpatialGrid {
            r_min,
            r_max,
            n_points,
            reduced_mass,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }

    pub fn length(&self) -> f64 {
        self.r_max - self.r_min
    }

    pub fn spacing(&self) -> f64 {
        self.length() / (self.n_points - 1) as f64
    }

    /// Number of free (non-wall) samples.
    pub fn interior_len(&self) -> usize {
        self.n_points - 2
    }

    pub fn point(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Largest kinetic eigenvalue representable, ħ²π²(M/L)²/(2μ).
    pub fn kinetic_cutoff(&self) -> f64 {
        let k = self.interior_len() as f64;
        HBAR * HBAR * PI * PI * k * k / (2.0 * self.reduced_mass * self.length().powi(2))
    }

    /// ⟨a|b⟩ under trapezoid quadrature (the walls contribute nothing).
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let sum: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        sum * self.spacing()
    }

    pub fn inner_real(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.spacing()
    }

    pub fn norm_sqr(&self, a: &[Complex64]) -> f64 {
        a.iter().map(|x| x.norm_sqr()).sum::<f64>() * self.spacing()
    }
}

/// −ħ²/(2μ) d²/dR² applied spectrally through a sine transform.
#[derive(Clone)]
pub struct KineticOperator {
    grid: SpatialGrid,
    eigenvalues: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for KineticOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KineticOperator")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl KineticOperator {
    pub fn new(grid: &SpatialGrid) -> Self {
        let m = grid.interior_len();
        let scale = HBAR * HBAR * PI * PI / (2.0 * grid.reduced_mass() * grid.length().powi(2));
        let eigenvalues = (1..=m).map(|k| scale * (k * k) as f64).collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        KineticOperator {
            grid: *grid,
            eigenvalues,
            fft,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Kinetic energy of sine mode k (1-based).
    pub fn mode_energy(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Writes T·input into output. Both slices span the full grid.
    pub fn apply(&self, input: &[Complex64], output: &mut [Complex64]) {
        let n = self.grid.n_points;
        assert_eq!(input.len(), n);
        assert_eq!(output.len(), n);
        let m = n - 2;
        let len = 2 * (m + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];

        load_odd_extension(&input[1..=m], &mut buf);
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        // buf[k] = −2i·Σ_j x_j sin(πjk/(m+1))
        let modes: Vec<Complex64> = (1..=m)
            .map(|k| buf[k] * self.eigenvalues[k - 1])
            .collect();
        load_odd_extension(&modes, &mut buf);
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        // two transforms give (−2i)² = −4 times the sine sum; inverse DST carries 2/(m+1)
        let norm = -1.0 / (2.0 * (m + 1) as f64);
        output[0] = Complex64::new(0.0, 0.0);
        output[n - 1] = Complex64::new(0.0, 0.0);
        for k in 1..=m {
            output[k] = buf[k] * norm;
        }
    }

    pub fn apply_real(&self, input: &[f64]) -> Vec<f64> {
        let c: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
        let mut masked = c;
        masked[0] = Complex64::new(0.0, 0.0);
        let last = masked.len() - 1;
        masked[last] = Complex64::new(0.0, 0.0);
        self.apply(&masked, &mut out);
        out.into_iter().map(|z| z.re).collect()
    }

    /// Dense kinetic matrix on the interior points (closed-form sine-DVR elements).
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let m = self.grid.interior_len();
        let n = (m + 1) as f64;
        let pref = HBAR * HBAR / (2.0 * self.grid.reduced_mass())
            * (PI / self.grid.length()).powi(2)
            * 0.5;
        DMatrix::from_fn(m, m, |a, b| {
            let i = (a + 1) as f64;
            let j = (b + 1) as f64;
            if a == b {
                pref * ((2.0 * n * n + 1.0) / 3.0 - 1.0 / (PI * i / n).sin().powi(2))
            } else {
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                pref * sign
                    * (1.0 / (PI * (i - j) / (2.0 * n)).sin().powi(2)
                        - 1.0 / (PI * (i + j) / (2.0 * n)).sin().powi(2))
            }
        })
    }
}

fn load_odd_extension(x: &[Complex64], buf: &mut [Complex64]) {
    let m = x.len();
    let len = buf.len();
    buf[0] = Complex64::new(0.0, 0.0);
    buf[m + 1] = Complex64::new(0.0, 0.0);
    for (j, &v) in x.iter().enumerate() {
        buf[j + 1] = v;
        buf[len - j - 1] = -v;
    }
}

/// Lowest eigenpairs of T + V for one electronic channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibrationalBasis {
    pub label: String,
    /// Ascending eigenvalues, atomic units.
    pub energies: Vec<f64>,
    /// Real eigenfunctions on the full grid, normalized under grid quadrature.
    pub vectors: Vec<Vec<f64>>,
}

impl VibrationalBasis {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Same eigenfunctions, every energy shifted (what dressing the potential does).
    pub fn shifted(&self, shift: f64) -> VibrationalBasis {
        VibrationalBasis {
            label: self.label.clone(),
            energies: self.energies.iter().map(|e| e + shift).collect(),
            vectors: self.vectors.clone(),
        }
    }
}

pub fn eigensolve(
    grid: &SpatialGrid,
    potential: &PotentialCurve,
    n_states: usize,
) -> Result<VibrationalBasis> {
    let samples = potential.sample(grid)?;
    eigensolve_sampled(grid, &samples, n_states)
}

/// Eigenpairs of the dense grid Hamiltonian for a potential already sampled on the grid.
pub fn eigensolve_sampled(
    grid: &SpatialGrid,
    potential: &[f64],
    n_states: usize,
) -> Result<VibrationalBasis> {
    let m = grid.interior_len();
    if n_states > m {
        return Err(Error::TooManyStates {
            requested: n_states,
            available: m,
        });
    }
    assert_eq!(potential.len(), grid.n_points());
    let kinetic = KineticOperator::new(grid);
    let mut h = kinetic.dense_matrix();
    for i in 0..m {
        h[(i, i)] += potential[i + 1];
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let v_min = potential[1..=m]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let cutoff = grid.kinetic_cutoff();
    if let Some(&top) = order.get(n_states.wrapping_sub(1)) {
        let level = eig.eigenvalues[top] - v_min;
        if level > 0.5 * cutoff {
            return Err(Error::GridTooCoarse {
                level_energy: level,
                cutoff,
            });
        }
    }

    let scale = 1.0 / grid.spacing().sqrt();
    let mut energies = Vec::with_capacity(n_states);
    let mut vectors = Vec::with_capacity(n_states);
    for &idx in order.iter().take(n_states) {
        let col = eig.eigenvectors.column(idx);
        let mut v = vec![0.0; grid.n_points()];
        for i in 0..m {
            v[i + 1] = col[i] * scale;
        }
        if first_lobe_sign(&v) < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        energies.push(eig.eigenvalues[idx]);
        vectors.push(v);
    }
    Ok(VibrationalBasis {
        label: String::new(),
        energies,
        vectors,
    })
}

/// Sign of the first local extremum of |v| scanning outward from r_min.
fn first_lobe_sign(v: &[f64]) -> f64 {
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = 1e-3 * peak;
    for j in 1..v.len() - 1 {
        if v[j].abs() > floor && v[j].abs() >= v[j + 1].abs() && v[j].abs() >= v[j - 1].abs() {
            return v[j].signum();
        }
    }
    1.0
}
