//! Entanglement and coherence quantifiers of the electronic–vibrational state.
//!
//! Pair sums over distinct channels run over unordered pairs α < β unless a
//! function says otherwise; the l1 norms sum every ordered off-diagonal entry.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::state::{BipartiteState, ReducedElectronicDensity, VibronicBasisSet, VibronicCoefficients};
use crate::units::HBAR;

/// −Σ λ log₂ λ over the eigenvalues of ρ_el.
pub fn von_neumann_entropy(rho: &ReducedElectronicDensity) -> Result<f64> {
    let (values, _) = rho.clipped_eigen()?;
    Ok(entropy_bits(&values))
}

/// −Σ P_α log₂ P_α over the channel populations.
pub fn von_neumann_entropy_populations(populations: &[f64]) -> f64 {
    entropy_bits(populations)
}

fn entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// L = 1 − Tr ρ_el²
pub fn linear_entropy(state: &BipartiteState) -> f64 {
    1.0 - state.reduced_density().purity()
}

/// L = 2 Σ_{α<β} (P_α P_β − |⟨ψ_α|ψ_β⟩|²)
pub fn linear_entropy_pairwise(state: &BipartiteState) -> f64 {
    let p = state.populations();
    let n = p.len();
    let mut l = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            l += p[a] * p[b] - state.overlap(a, b).norm_sqr();
        }
    }
    2.0 * l
}

/// Pairwise linear entropy with populations and overlaps built from the
/// vibronic coefficients and the Franck–Condon tables.
pub fn linear_entropy_coefficients(c: &VibronicCoefficients, bases: &VibronicBasisSet) -> f64 {
    let p = c.populations();
    let n = p.len();
    let mut l = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            l += p[a] * p[b] - c.overlap(bases, a, b).norm_sqr();
        }
    }
    2.0 * l
}

/// l1-norm coherence of ρ_el,vib in the vibronic basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Coherence {
    pub total: f64,
    /// Entries with α ≠ β.
    pub vibronic: f64,
    /// Entries inside one channel block.
    pub vibrational: f64,
}

/// Σ_{i≠j} |c_i||c_j| split into inter- and intra-channel parts.
pub fn l1_coherence_vibronic(c: &VibronicCoefficients) -> L1Coherence {
    let mut sums = Vec::with_capacity(c.n_channels());
    let mut vibrational = 0.0;
    for ch in c.channels() {
        let a: f64 = ch.iter().map(|z| z.norm()).sum();
        let q: f64 = ch.iter().map(|z| z.norm_sqr()).sum();
        vibrational += a * a - q;
        sums.push(a);
    }
    let mut vibronic = 0.0;
    for (i, a) in sums.iter().enumerate() {
        for b in &sums[i + 1..] {
            vibronic += 2.0 * a * b;
        }
    }
    L1Coherence {
        total: vibronic + vibrational,
        vibronic,
        vibrational,
    }
}

/// Σ_{α≠β} |ρ_el,αβ|
pub fn l1_coherence_electronic(rho: &ReducedElectronicDensity) -> f64 {
    let n = rho.dim();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                s += rho.get(a, b).norm();
            }
        }
    }
    s
}

fn flat_weights(c: &VibronicCoefficients, bases: &VibronicBasisSet) -> (Vec<f64>, Vec<f64>) {
    let mut e = Vec::new();
    let mut w = Vec::new();
    for (a, ch) in c.channels().iter().enumerate() {
        e.extend_from_slice(&bases.energies(a)[..ch.len()]);
        w.extend(ch.iter().map(|z| z.norm_sqr()));
    }
    (e, w)
}

fn pairwise_spread(energies: &[f64], weights: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..energies.len() {
        for j in i + 1..energies.len() {
            let d = energies[i] - energies[j];
            s += d * d * weights[i] * weights[j];
        }
    }
    s
}

/// (ΔH_mol)² = ½ Σ_{ij} (E_i − E_j)² |c_i|²|c_j|²
pub fn energy_variance(c: &VibronicCoefficients, bases: &VibronicBasisSet) -> f64 {
    let (e, w) = flat_weights(c, bases);
    pairwise_spread(&e, &w)
}

/// ⟨H²⟩ − ⟨H⟩² evaluated from moments (weights need not sum to one; the
/// result is scaled as Σw·Σw E² − (Σw E)²).
pub fn energy_variance_moments(c: &VibronicCoefficients, bases: &VibronicBasisSet) -> f64 {
    let (e, w) = flat_weights(c, bases);
    let n: f64 = w.iter().sum();
    let m1: f64 = e.iter().zip(&w).map(|(e, w)| e * w).sum();
    let m2: f64 = e.iter().zip(&w).map(|(e, w)| e * e * w).sum();
    n * m2 - m1 * m1
}

/// I_S(ρ, H_mol) = −½ Tr[√ρ, H_mol]² for the pure state ρ = √ρ.
pub fn skew_information_hmol(c: &VibronicCoefficients, bases: &VibronicBasisSet) -> f64 {
    let (e, w) = flat_weights(c, bases);
    pairwise_spread(&e, &w)
}

/// Tr[(dρ/dt)²] from the commutator, Σ_ij (E_i − E_j)²|ρ_ij|²/ħ².
pub fn state_velocity_sq(c: &VibronicCoefficients, bases: &VibronicBasisSet) -> f64 {
    let (e, w) = flat_weights(c, bases);
    let mut s = 0.0;
    for i in 0..e.len() {
        for j in 0..e.len() {
            let d = e[i] - e[j];
            s += d * d * w[i] * w[j];
        }
    }
    s / (HBAR * HBAR)
}

/// A quantity sampled on the radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn from_fn(grid: &SpatialGrid, f: impl Fn(usize) -> f64) -> Self {
        RadialProfile {
            r: grid.points().collect(),
            values: (0..grid.n_points()).map(f).collect(),
        }
    }

    /// Linear interpolation between grid points.
    pub fn at(&self, r: f64) -> Result<f64> {
        let (lo, hi) = (self.r[0], self.r[self.r.len() - 1]);
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfRange { r, min: lo, max: hi });
        }
        let h = (hi - lo) / (self.r.len() - 1) as f64;
        let i = (((r - lo) / h).floor() as usize).min(self.r.len() - 2);
        let x = (r - self.r[i]) / h;
        Ok(self.values[i] * (1.0 - x) + self.values[i + 1] * x)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_potentials(state: &BipartiteState, potentials: &[&[f64]]) {
    assert_eq!(potentials.len(), state.n_channels(), "one potential per channel");
    for v in potentials {
        assert_eq!(v.len(), state.grid().n_points(), "potential must be sampled on the grid");
    }
}

/// I_S(ρ_el,vib, H_el ⊗ I) at each R: Σ_{α<β} [V_α(R) − V_β(R)]² P_α P_β.
pub fn skew_information_local(state: &BipartiteState, potentials: &[&[f64]]) -> RadialProfile {
    check_potentials(state, potentials);
    let p = state.populations();
    let n = p.len();
    RadialProfile::from_fn(state.grid(), |i| {
        let mut s = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                let d = potentials[a][i] - potentials[b][i];
                s += d * d * p[a] * p[b];
            }
        }
        s
    })
}

/// I_S(ρ_el, H_el) at each R: Σ_{α<β} [V_α(R) − V_β(R)]² |⟨α|√ρ_el|β⟩|².
pub fn skew_information_reduced(
    state: &BipartiteState,
    potentials: &[&[f64]],
) -> Result<RadialProfile> {
    check_potentials(state, potentials);
    let root = state.reduced_density().sqrt()?;
    Ok(reduced_profile(state.grid(), &root, potentials))
}

fn reduced_profile(grid: &SpatialGrid, root: &DMatrix<Complex64>, potentials: &[&[f64]]) -> RadialProfile {
    let n = root.nrows();
    RadialProfile::from_fn(grid, |i| {
        let mut s = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                let d = potentials[a][i] - potentials[b][i];
                s += d * d * root[(a, b)].norm_sqr();
            }
        }
        s
    })
}

/// Two-channel closed form [V_g − V_e]² |⟨ψ_g|ψ_e⟩|² / (1 + √(2L)).
pub fn skew_information_reduced_two_channel(
    state: &BipartiteState,
    potentials: &[&[f64]],
) -> RadialProfile {
    check_potentials(state, potentials);
    assert_eq!(state.n_channels(), 2, "closed form needs two channels");
    let s2 = state.overlap(0, 1).norm_sqr();
    let l = linear_entropy_pairwise(state).max(0.0);
    let k = s2 / (1.0 + (2.0 * l).sqrt());
    RadialProfile::from_fn(state.grid(), |i| {
        let d = potentials[0][i] - potentials[1][i];
        d * d * k
    })
}

/// Variance of H_el(R) = diag(V_α(R)) in ρ_el at each R.
pub fn electronic_variance(state: &BipartiteState, potentials: &[&[f64]]) -> RadialProfile {
    check_potentials(state, potentials);
    let p = state.populations();
    RadialProfile::from_fn(state.grid(), |i| {
        let m1: f64 = p.iter().zip(potentials).map(|(p, v)| p * v[i]).sum();
        let m2: f64 = p.iter().zip(potentials).map(|(p, v)| p * v[i] * v[i]).sum();
        m2 - m1 * m1
    })
}

/// L − (2 P_g P_e − ½ C_l1(ρ_el)²) for two channels.
pub fn l1_linear_entropy_residual(state: &BipartiteState) -> f64 {
    assert_eq!(state.n_channels(), 2, "identity holds for two channels");
    let rho = state.reduced_density();
    let p = rho.populations();
    let c = l1_coherence_electronic(&rho);
    linear_entropy(state) - (2.0 * p[0] * p[1] - 0.5 * c * c)
}

/// Pointwise I_S(local) − (1 + √(2L))·I_S(reduced) − [V_g − V_e]² L/2 for two channels.
pub fn skew_identity_residual(state: &BipartiteState, potentials: &[&[f64]]) -> Result<RadialProfile> {
    assert_eq!(state.n_channels(), 2, "identity holds for two channels");
    let local = skew_information_local(state, potentials);
    let reduced = skew_information_reduced(state, potentials)?;
    let l = linear_entropy(state);
    let k = 1.0 + (2.0 * l.max(0.0)).sqrt();
    Ok(RadialProfile::from_fn(state.grid(), |i| {
        let d = potentials[0][i] - potentials[1][i];
        local.values[i] - k * reduced.values[i] - d * d * l / 2.0
    }))
}

/// Both sides of Tr[(dρ/dt)²] = 2(ΔH)²/ħ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

/// Central-difference state velocity from three equally spaced coefficient sets.
pub fn velocity_identity_coefficients(
    before: &VibronicCoefficients,
    at: &VibronicCoefficients,
    after: &VibronicCoefficients,
    spacing: f64,
    bases: &VibronicBasisSet,
) -> VelocityCheck {
    let m = before.flatten();
    let p = after.flatten();
    let mut lhs = 0.0;
    for i in 0..m.len() {
        for j in 0..m.len() {
            let d = (p[i] * p[j].conj() - m[i] * m[j].conj()) / (2.0 * spacing);
            lhs += d.norm_sqr();
        }
    }
    let rhs = 2.0 * energy_variance(at, bases) / (HBAR * HBAR);
    let scale = lhs.abs().max(rhs.abs());
    VelocityCheck {
        lhs,
        rhs,
        relative_error: if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale },
    }
}

/// Velocity identity at snapshot `index` of a field-free trajectory.
pub fn velocity_identity_check(
    traj: &Trajectory,
    bases: &VibronicBasisSet,
    index: usize,
) -> Result<VelocityCheck> {
    if index == 0 || index + 1 >= traj.len() {
        return Err(Error::InsufficientSnapshots(format!(
            "central difference at snapshot {index} needs neighbours in a trajectory of {}",
            traj.len()
        )));
    }
    let h1 = traj.times[index] - traj.times[index - 1];
    let h2 = traj.times[index + 1] - traj.times[index];
    if (h1 - h2).abs() > 1e-9 * h1.abs().max(h2.abs()) {
        return Err(Error::NonuniformSampling(format!(
            "snapshot spacings {h1:e} and {h2:e} differ around index {index}"
        )));
    }
    let c = |k: usize| traj.states[k].project(bases).map(|p| p.coefficients);
    Ok(velocity_identity_coefficients(
        &c(index - 1)?,
        &c(index)?,
        &c(index + 1)?,
        h1,
        bases,
    ))
}

/// Skew-information profiles for the local and reduced electronic observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewProfiles {
    pub local: RadialProfile,
    pub reduced: RadialProfile,
}

/// All measures at one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub time: f64,
    pub populations: Vec<f64>,
    /// Entropy from the eigenvalues of ρ_el.
    pub s_vn_eigen: f64,
    /// Entropy from the channel populations alone.
    pub s_vn_pop: f64,
    pub purity: f64,
    pub linear_entropy: f64,
    pub c_l1_el: f64,
    pub c_l1_vibronic: f64,
    pub variance_hmol: f64,
    pub velocity_sq: f64,
    pub skew_hmol: f64,
    /// Population outside the vibronic basis.
    pub truncation: f64,
    pub profiles: Option<SkewProfiles>,
}

impl MeasureRecord {
    /// `potentials` are the bare channel curves sampled on the grid; they are
    /// only needed when `with_profiles` is set.
    pub fn compute(
        state: &BipartiteState,
        bases: &VibronicBasisSet,
        potentials: &[&[f64]],
        with_profiles: bool,
    ) -> Result<Self> {
        let rho = state.reduced_density();
        let purity = rho.purity();
        let projection = state.project(bases)?;
        let c = &projection.coefficients;
        let populations = rho.populations();
        let profiles = if with_profiles {
            Some(SkewProfiles {
                local: skew_information_local(state, potentials),
                reduced: skew_information_reduced(state, potentials)?,
            })
        } else {
            None
        };
        Ok(MeasureRecord {
            time: state.time(),
            s_vn_eigen: von_neumann_entropy(&rho)?,
            s_vn_pop: von_neumann_entropy_populations(&populations),
            populations,
            purity,
            linear_entropy: 1.0 - purity,
            c_l1_el: l1_coherence_electronic(&rho),
            c_l1_vibronic: l1_coherence_vibronic(c).total,
            variance_hmol: energy_variance(c, bases),
            velocity_sq: state_velocity_sq(c, bases),
            skew_hmol: skew_information_hmol(c, bases),
            truncation: projection.total_residual(),
            profiles,
        })
    }
}

/// Scalar columns of a [`MeasureSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Population(usize),
    SvnEigen,
    SvnPop,
    Purity,
    LinearEntropy,
    CoherenceElectronic,
    CoherenceVibronic,
    Variance,
}

impl Field {
    pub fn get(self, r: &MeasureRecord) -> f64 {
        match self {
            Field::Population(a) => r.populations[a],
            Field::SvnEigen => r.s_vn_eigen,
            Field::SvnPop => r.s_vn_pop,
            Field::Purity => r.purity,
            Field::LinearEntropy => r.linear_entropy,
            Field::CoherenceElectronic => r.c_l1_el,
            Field::CoherenceVibronic => r.c_l1_vibronic,
            Field::Variance => r.variance_hmol,
        }
    }
}

/// Time-ordered measure records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureSeries {
    pub records: Vec<MeasureRecord>,
}

impl MeasureSeries {
    /// Measures of every snapshot, each renormalized to unit norm first.
    pub fn from_trajectory(
        traj: &Trajectory,
        bases: &VibronicBasisSet,
        potentials: &[&[f64]],
        with_profiles: bool,
    ) -> Result<Self> {
        let records = traj
            .states
            .iter()
            .map(|s| MeasureRecord::compute(&s.renormalized()?, bases, potentials, with_profiles))
            .collect::<Result<_>>()?;
        Ok(MeasureSeries { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.records.first().map_or(0, |r| r.populations.len())
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn values(&self, field: Field) -> Vec<f64> {
        self.records.iter().map(|r| field.get(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialCurve;
    use crate::grid::eigensolve;
    use crate::units;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(4.0, 14.0, 201, units::amu(30.0)).unwrap()
    }

    fn gaussian(g: &SpatialGrid, center: f64, width: f64, scale: Complex64) -> Vec<Complex64> {
        let raw: Vec<f64> = g
            .points()
            .map(|r| (-(r - center).powi(2) / (4.0 * width * width)).exp())
            .collect();
        let n = g.inner_real(&raw, &raw).sqrt();
        raw.iter().map(|x| scale * (x / n)).collect()
    }

    fn two_channel(pg: f64, shift: f64) -> BipartiteState {
        let g = grid();
        let a = Complex64::new(pg.sqrt(), 0.0);
        let b = Complex64::new(0.0, (1.0 - pg).sqrt());
        BipartiteState::new(g, vec![gaussian(&g, 7.5, 0.3, a), gaussian(&g, 7.5 + shift, 0.3, b)], 0.0)
            .unwrap()
    }

    fn flat(g: &SpatialGrid, v: f64) -> Vec<f64> {
        vec![v; g.n_points()]
    }

    #[test]
    fn entropy_reference_values() {
        let s = |p: &[f64]| von_neumann_entropy(&ReducedElectronicDensity::diagonal(p)).unwrap();
        assert_eq!(s(&[1.0, 0.0]), 0.0);
        assert!((s(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert!((s(&[0.25; 4]) - 2.0).abs() < 1e-15);
        let p = [0.3, 0.7];
        let pop = -0.3f64 * 0.3f64.log2() - 0.7 * 0.7f64.log2();
        assert!((s(&p) - pop).abs() < 1e-14);
        assert!((von_neumann_entropy_populations(&p) - pop).abs() < 1e-15);
    }

    #[test]
    fn linear_entropy_cases() {
        let single = two_channel(1.0, 0.0);
        assert!(linear_entropy(&single).abs() < 1e-14);
        let split = two_channel(0.5, 3.5);
        assert!((linear_entropy(&split) - 0.5).abs() < 1e-12, "{} {:?}", linear_entropy(&split), split.populations());
        assert!((linear_entropy_pairwise(&split) - 0.5).abs() < 1e-12);
        // identical packets in both channels: L = 2 P_g P_e (1 − 1)
        let same = two_channel(0.5, 0.0);
        assert!(linear_entropy(&same).abs() < 1e-12);
    }

    #[test]
    fn single_level_overlap_formula() {
        // L = 2|c_g|²|c_e|²(1 − |S|²) with |S| = 0.6 → 0.32
        let g = grid();
        let chi: Vec<f64> = gaussian(&g, 8.0, 0.4, Complex64::new(1.0, 0.0)).iter().map(|z| z.re).collect();
        let other: Vec<f64> = gaussian(&g, 9.0, 0.4, Complex64::new(1.0, 0.0)).iter().map(|z| z.re).collect();
        let s = g.inner_real(&chi, &other);
        // orthonormal partner of χ inside span{χ, other}
        let perp: Vec<f64> = other.iter().zip(&chi).map(|(o, c)| o - s * c).collect();
        let np = g.inner_real(&perp, &perp).sqrt();
        let e: Vec<Complex64> = chi
            .iter()
            .zip(&perp)
            .map(|(c, p)| Complex64::new(0.6 * c + 0.8 * p / np, 0.0) * 0.5f64.sqrt())
            .collect();
        let gch: Vec<Complex64> = chi.iter().map(|c| Complex64::new(c * 0.5f64.sqrt(), 0.0)).collect();
        let st = BipartiteState::new(g, vec![gch, e], 0.0).unwrap();
        assert!((st.overlap(0, 1).norm() - 0.3).abs() < 1e-12);
        assert!((linear_entropy(&st) - 0.32).abs() < 1e-12);
    }

    #[test]
    fn coefficient_form_matches_grid() {
        let g = grid();
        let mass = g.reduced_mass();
        let w = units::wavenumber(80.0);
        let bg = eigensolve(&g, &PotentialCurve::harmonic(w, mass, 8.0).unwrap(), 3).unwrap();
        let be = eigensolve(&g, &PotentialCurve::harmonic(w, mass, 8.3).unwrap(), 3).unwrap();
        let bases = VibronicBasisSet::new(g, vec![bg, be]).unwrap();
        let c = VibronicCoefficients::new(vec![
            vec![Complex64::new(0.5, 0.1), Complex64::new(0.0, 0.3), Complex64::new(0.2, 0.0)],
            vec![Complex64::new(0.1, -0.4), Complex64::new(0.3, 0.3), Complex64::new(-0.2, 0.2)],
        ]);
        let norm: f64 = c.populations().iter().sum();
        let c = VibronicCoefficients::new(
            c.channels().iter().map(|ch| ch.iter().map(|z| z / norm.sqrt()).collect()).collect(),
        );
        let st = c.reconstruct(&bases, 0.0).unwrap();
        assert!((linear_entropy_coefficients(&c, &bases) - linear_entropy(&st)).abs() < 1e-12);
        // two eigenstates of disjoint wells: zero overlap term
        let single = VibronicCoefficients::new(vec![vec![Complex64::new(1.0, 0.0)]]);
        let one = VibronicBasisSet::new(g, vec![bases.basis(0).clone()]).unwrap();
        let trimmed = VibronicBasisSet::new(
            g,
            vec![crate::grid::VibrationalBasis {
                label: String::new(),
                energies: vec![one.energies(0)[0]],
                vectors: vec![one.basis(0).vectors[0].clone()],
            }],
        )
        .unwrap();
        assert_eq!(linear_entropy_coefficients(&single, &trimmed), 0.0);
    }

    #[test]
    fn l1_norms() {
        let one = VibronicCoefficients::new(vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]]);
        assert_eq!(l1_coherence_vibronic(&one).total, 0.0);
        let h = 0.5f64.sqrt();
        let two = VibronicCoefficients::new(vec![vec![Complex64::new(h, 0.0)], vec![Complex64::new(0.0, h)]]);
        let l1 = l1_coherence_vibronic(&two);
        assert!((l1.total - 1.0).abs() < 1e-15);
        assert!((l1.vibronic - 1.0).abs() < 1e-15);
        assert_eq!(l1.vibrational, 0.0);
        let intra = VibronicCoefficients::new(vec![vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]]);
        assert!((l1_coherence_vibronic(&intra).vibrational - 1.0).abs() < 1e-15);

        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.0),
            Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.0),
        ]);
        let rho = ReducedElectronicDensity::from_matrix(m).unwrap();
        assert!((l1_coherence_electronic(&rho) - 0.6).abs() < 1e-15);
        assert_eq!(l1_coherence_electronic(&ReducedElectronicDensity::diagonal(&[0.5, 0.5])), 0.0);
    }

    #[test]
    fn l1_identity_on_gaussians() {
        for (pg, shift) in [(0.3, 0.2), (0.5, 0.7), (0.9, 1.5)] {
            assert!(l1_linear_entropy_residual(&two_channel(pg, shift)).abs() < 1e-12);
        }
    }

    fn two_level(de: f64) -> (VibronicCoefficients, VibronicBasisSet) {
        let g = grid();
        let b = eigensolve(&g, &PotentialCurve::harmonic(de, g.reduced_mass(), 8.0).unwrap(), 2).unwrap();
        let h = 0.5f64.sqrt();
        let c = VibronicCoefficients::new(vec![vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]]);
        (c, VibronicBasisSet::new(g, vec![b]).unwrap())
    }

    #[test]
    fn variance_and_skew() {
        let (c, bases) = two_level(units::wavenumber(100.0));
        let de = bases.energies(0)[1] - bases.energies(0)[0];
        let v = energy_variance(&c, &bases);
        assert!((v - de * de / 4.0).abs() < 1e-12 * de * de);
        assert_eq!(v.to_bits(), skew_information_hmol(&c, &bases).to_bits());
        assert!((energy_variance_moments(&c, &bases) - v).abs() < 1e-10 * v);
        assert!((state_velocity_sq(&c, &bases) - 2.0 * v).abs() < 1e-12 * v);
        let eig = VibronicCoefficients::new(vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]]);
        assert_eq!(energy_variance(&eig, &bases), 0.0);
    }

    #[test]
    fn two_level_velocity_oracle() {
        // c(t) = (e^{−iE₀t}, e^{−iE₁t})/√2 exactly; dρ/dt has entries ±iΔE/2 e^{∓iΔEt}
        let (c, bases) = two_level(units::wavenumber(100.0));
        let e = bases.energies(0).to_vec();
        let at = |t: f64| {
            VibronicCoefficients::new(vec![c
                .channel(0)
                .iter()
                .zip(&e)
                .map(|(z, e)| z * Complex64::from_polar(1.0, -e * t))
                .collect()])
        };
        let h = 1.0;
        let check = velocity_identity_coefficients(&at(-h), &at(0.0), &at(h), h, &bases);
        let de = e[1] - e[0];
        let exact = 2.0 * (de / 2.0).powi(2);
        assert!((check.rhs - exact).abs() < 1e-12 * exact);
        assert!(check.relative_error < 1e-6);
        let eig = VibronicCoefficients::new(vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]]);
        let still = velocity_identity_coefficients(&eig, &eig, &eig, h, &bases);
        assert_eq!((still.lhs, still.relative_error), (0.0, 0.0));
    }

    #[test]
    fn skew_profiles() {
        let g = grid();
        let delta = 0.01;
        let (vg, ve) = (flat(&g, 0.0), flat(&g, delta));
        let pots: [&[f64]; 2] = [&vg, &ve];
        let split = two_channel(0.5, 3.5);
        let local = skew_information_local(&split, &pots);
        assert!((local.at(7.3).unwrap() - delta * delta / 4.0).abs() < 1e-15);
        let red = skew_information_reduced(&split, &pots).unwrap();
        assert!(red.max() < 1e-12 * delta * delta);
        assert!(skew_information_local(&two_channel(1.0, 0.0), &pots).max() == 0.0);

        // crossing curves: profile vanishes at the crossing
        let vc: Vec<f64> = g.points().map(|r| 0.001 * (r - 9.0)).collect();
        let pots: [&[f64]; 2] = [&vg, &vc];
        let st = two_channel(0.4, 0.5);
        let local = skew_information_local(&st, &pots);
        assert!(local.at(9.0).unwrap().abs() < 1e-20);
        let red = skew_information_reduced(&st, &pots).unwrap();
        let closed = skew_information_reduced_two_channel(&st, &pots);
        let var = electronic_variance(&st, &pots);
        for i in 0..g.n_points() {
            assert!((red.values[i] - closed.values[i]).abs() < 1e-10 * closed.values[i].max(1e-12));
            assert!(red.values[i] <= var.values[i] + 1e-18);
        }
        let resid = skew_identity_residual(&st, &pots).unwrap();
        assert!(resid.values.iter().all(|r| r.abs() < 1e-18));
    }

    #[test]
    fn reduced_skew_two_by_two_square_root() {
        // ρ = [[½, ½·s], [½·s, ½]] with real s; √ρ off-diagonal = (√λ₊ − √λ₋)/2
        let g = grid();
        let st = two_channel(0.5, 0.8);
        let s = st.overlap(0, 1).norm();
        let (lp, lm) = (0.5 + s, 0.5 - s);
        let off = (lp.sqrt() - lm.sqrt()) / 2.0;
        let (vg, ve) = (flat(&g, 0.0), flat(&g, 1.0));
        let red = skew_information_reduced(&st, &[&vg, &ve]).unwrap();
        assert!((red.values[50] - off * off).abs() < 1e-12);
    }

    #[test]
    fn radial_profile_interpolation() {
        let g = SpatialGrid::new(0.0, 9.0, 10, 1.0).unwrap();
        let p = RadialProfile::from_fn(&g, |i| i as f64 * 2.0);
        assert!((p.at(3.5).unwrap() - 7.0).abs() < 1e-14);
        assert_eq!(p.at(9.0).unwrap(), 18.0);
        assert!(p.at(9.5).is_err());
    }

    #[test]
    fn velocity_check_on_exact_phases() {
        let g = grid();
        let mass = g.reduced_mass();
        let w = units::wavenumber(200.0);
        let bases = VibronicBasisSet::new(
            g,
            vec![
                eigensolve(&g, &PotentialCurve::harmonic(w, mass, 8.5).unwrap(), 3).unwrap(),
                eigensolve(&g, &PotentialCurve::harmonic(0.8 * w, mass, 9.0).unwrap(), 3).unwrap(),
            ],
        )
        .unwrap();
        let c0 = [[0.5, 0.3, 0.1], [0.4, 0.6, 0.35]];
        let at = |t: f64| {
            let channels = (0..2)
                .map(|a| {
                    (0..3)
                        .map(|v| Complex64::from_polar(c0[a][v], -bases.energies(a)[v] * t))
                        .collect()
                })
                .collect();
            let c = VibronicCoefficients::new(channels);
            let norm = c.populations().iter().sum::<f64>().sqrt();
            let c = VibronicCoefficients::new(
                c.channels().iter().map(|ch| ch.iter().map(|z| z / norm).collect()).collect(),
            );
            c.reconstruct(&bases, t).unwrap()
        };
        let h = units::fs(0.1);
        let mut traj = Trajectory::default();
        for k in 0..3 {
            traj.push(at(k as f64 * h));
        }
        let check = velocity_identity_check(&traj, &bases, 1).unwrap();
        // central difference of stationary phases: Σ_ij p_i p_j sin²(ΔE_ij h)/h²
        let norm: f64 = c0.iter().flatten().map(|x| x * x).sum();
        let levels: Vec<(f64, f64)> = (0..2)
            .flat_map(|a| (0..3).map(move |v| (a, v)))
            .map(|(a, v)| (c0[a][v] * c0[a][v] / norm, bases.energies(a)[v]))
            .collect();
        let mut expected = 0.0;
        for &(pi, ei) in &levels {
            for &(pj, ej) in &levels {
                expected += pi * pj * ((ei - ej) * h).sin().powi(2) / (h * h);
            }
        }
        assert!((check.lhs - expected).abs() < 1e-9 * expected, "{check:?} vs {expected:e}");
        assert!(check.relative_error < 1e-4, "{check:?}");
        assert!(matches!(velocity_identity_check(&traj, &bases, 0), Err(Error::InsufficientSnapshots(_))));
        let mut skewed = Trajectory::default();
        for t in [0.0, h, 2.5 * h] {
            skewed.push(at(t));
        }
        assert!(matches!(velocity_identity_check(&skewed, &bases, 1), Err(Error::NonuniformSampling(_))));
    }
}
