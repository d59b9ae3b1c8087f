//! The electronic–vibrational pure state and its density-operator views.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, VibrationalBasis};

/// Eigenvalues of a density matrix more negative than this are a hard error.
pub const PSD_TOLERANCE: f64 = 1e-12;
/// Population left outside a projected basis before a warning is raised.
pub const TRUNCATION_WARNING: f64 = 1e-6;

/// |Ψ⟩ = Σ_α |α⟩ ⊗ |ψ_α⟩ with one complex grid vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    grid: SpatialGrid,
    channels: Vec<Vec<Complex64>>,
    time: f64,
}

impl BipartiteState {
    pub fn new(grid: SpatialGrid, channels: Vec<Vec<Complex64>>, time: f64) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidState("no channels".into()));
        }
        if let Some(bad) = channels.iter().position(|c| c.len() != grid.n_points()) {
            return Err(Error::InvalidState(format!(
                "channel {bad} has {} samples, grid has {}",
                channels[bad].len(),
                grid.n_points()
            )));
        }
        let mut channels = channels;
        for c in &mut channels {
            let last = c.len() - 1;
            c[0] = Complex64::new(0.0, 0.0);
            c[last] = Complex64::new(0.0, 0.0);
        }
        Ok(BipartiteState {
            grid,
            channels,
            time,
        })
    }

    /// Builds the state and rescales it to unit total norm.
    pub fn normalized(grid: SpatialGrid, channels: Vec<Vec<Complex64>>, time: f64) -> Result<Self> {
        let mut s = Self::new(grid, channels, time)?;
        let norm = s.total_norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("state has zero norm".into()));
        }
        let scale = 1.0 / norm.sqrt();
        for c in &mut s.channels {
            c.iter_mut().for_each(|z| *z *= scale);
        }
        Ok(s)
    }

    /// Copy rescaled to unit total norm (removes accumulated propagation drift).
    pub fn renormalized(&self) -> Result<BipartiteState> {
        Self::normalized(self.grid, self.channels.clone(), self.time)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, alpha: usize) -> &[Complex64] {
        &self.channels[alpha]
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    pub(crate) fn channels_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.channels
    }

    /// P_α = ⟨ψ_α|ψ_α⟩
    pub fn channel_population(&self, alpha: usize) -> f64 {
        self.grid.norm_sqr(&self.channels[alpha])
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_channels())
            .map(|a| self.channel_population(a))
            .collect()
    }

    pub fn total_norm(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// ⟨ψ_α|ψ_β⟩
    pub fn overlap(&self, alpha: usize, beta: usize) -> Complex64 {
        self.grid.inner(&self.channels[alpha], &self.channels[beta])
    }

    /// ρ_el with entries (α, β) = ⟨ψ_β|ψ_α⟩.
    pub fn reduced_density(&self) -> ReducedElectronicDensity {
        let n = self.n_channels();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let s = self.overlap(b, a);
                m[(a, b)] = s;
                m[(b, a)] = s.conj();
            }
            m[(a, a)].im = 0.0;
        }
        ReducedElectronicDensity { matrix: m }
    }

    /// c_vα = ⟨χ_vα|ψ_α⟩ for every channel.
    pub fn project(&self, bases: &VibronicBasisSet) -> Result<Projection> {
        if bases.n_channels() != self.n_channels() {
            return Err(Error::InvalidState(format!(
                "basis set has {} channels, state has {}",
                bases.n_channels(),
                self.n_channels()
            )));
        }
        if bases.grid() != &self.grid {
            return Err(Error::InvalidState("basis set lives on a different grid".into()));
        }
        let dr = self.grid.spacing();
        let mut coefficients = Vec::with_capacity(self.n_channels());
        let mut residuals = Vec::with_capacity(self.n_channels());
        for (psi, basis) in self.channels.iter().zip(bases.bases()) {
            let c: Vec<Complex64> = basis
                .vectors
                .iter()
                .map(|chi| {
                    chi.iter()
                        .zip(psi)
                        .map(|(x, z)| z * *x)
                        .sum::<Complex64>()
                        * dr
                })
                .collect();
            let captured: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            residuals.push((self.grid.norm_sqr(psi) - captured).max(0.0));
            coefficients.push(c);
        }
        let projection = Projection {
            coefficients: VibronicCoefficients::new(coefficients),
            residuals,
        };
        if projection.truncation_warning() {
            log::warn!(
                "vibronic projection at t = {:.6e} au leaves {:.3e} of the population outside the basis",
                self.time,
                projection.total_residual()
            );
        }
        Ok(projection)
    }

    /// Two columns (Re ψ, Im ψ) per channel, one row per grid point, R first.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "# t_au = {:.12e}\n# R_a0", self.time)?;
        for a in 0..self.n_channels() {
            write!(out, " re_{} im_{}", a + 1, a + 1)?;
        }
        writeln!(out)?;
        for (i, r) in self.grid.points().enumerate() {
            write!(out, "{r:.12e}")?;
            for c in &self.channels {
                write!(out, " {:.12e} {:.12e}", c[i].re, c[i].im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Reduced electronic density ρ_el = Tr_vib |Ψ⟩⟨Ψ|.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedElectronicDensity {
    matrix: DMatrix<Complex64>,
}

impl ReducedElectronicDensity {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        let n = matrix.nrows();
        for a in 0..n {
            for b in 0..n {
                if (matrix[(a, b)] - matrix[(b, a)].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidState("density matrix is not Hermitian".into()));
                }
            }
        }
        Ok(ReducedElectronicDensity { matrix })
    }

    pub fn diagonal(populations: &[f64]) -> Self {
        let n = populations.len();
        let mut m = DMatrix::zeros(n, n);
        for (a, p) in populations.iter().enumerate() {
            m[(a, a)] = Complex64::new(*p, 0.0);
        }
        ReducedElectronicDensity { matrix: m }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, alpha: usize, beta: usize) -> Complex64 {
        self.matrix[(alpha, beta)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|a| self.matrix[(a, a)].re).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.matrix[(a, a)].re).collect()
    }

    /// Tr ρ² = Σ_{αβ} |ρ_αβ|²
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues and the matching eigenvectors (columns).
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().0
    }

    /// Eigenvalues clipped at zero; anything below −PSD_TOLERANCE is an error.
    pub fn clipped_eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let (mut values, vectors) = self.eigen();
        for v in &mut values {
            if *v < -PSD_TOLERANCE {
                return Err(Error::NotPositiveSemidefinite(*v));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok((values, vectors))
    }

    /// Principal square root √ρ through the eigendecomposition.
    pub fn sqrt(&self) -> Result<DMatrix<Complex64>> {
        let (values, vectors) = self.clipped_eigen()?;
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (k, lambda) in values.iter().enumerate() {
            let s = lambda.sqrt();
            if s == 0.0 {
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    out[(a, b)] += vectors[(a, k)] * vectors[(b, k)].conj() * s;
                }
            }
        }
        Ok(out)
    }
}

/// One set of vibrational eigenbases on a common grid, plus the cached
/// cross-channel Franck–Condon tables ⟨χ_vα|χ_v'β⟩.
#[derive(Debug, Clone)]
pub struct VibronicBasisSet {
    grid: SpatialGrid,
    bases: Vec<VibrationalBasis>,
    overlaps: Vec<Vec<DMatrix<f64>>>,
}

impl VibronicBasisSet {
    pub fn new(grid: SpatialGrid, bases: Vec<VibrationalBasis>) -> Result<Self> {
        for b in &bases {
            if b.vectors.iter().any(|v| v.len() != grid.n_points()) {
                return Err(Error::InvalidState(format!(
                    "basis `{}` does not match the grid",
                    b.label
                )));
            }
        }
        let n = bases.len();
        let mut overlaps = vec![vec![DMatrix::zeros(0, 0); n]; n];
        for a in 0..n {
            for b in 0..n {
                overlaps[a][b] = DMatrix::from_fn(bases[a].len(), bases[b].len(), |i, j| {
                    grid.inner_real(&bases[a].vectors[i], &bases[b].vectors[j])
                });
            }
        }
        Ok(VibronicBasisSet {
            grid,
            bases,
            overlaps,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn n_channels(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[VibrationalBasis] {
        &self.bases
    }

    pub fn basis(&self, alpha: usize) -> &VibrationalBasis {
        &self.bases[alpha]
    }

    pub fn energies(&self, alpha: usize) -> &[f64] {
        &self.bases[alpha].energies
    }

    pub fn all_energies(&self) -> Vec<Vec<f64>> {
        self.bases.iter().map(|b| b.energies.clone()).collect()
    }

    /// ⟨χ_vα|χ_v'β⟩ indexed (v, v').
    pub fn overlap(&self, alpha: usize, beta: usize) -> &DMatrix<f64> {
        &self.overlaps[alpha][beta]
    }

    pub fn total_size(&self) -> usize {
        self.bases.iter().map(|b| b.len()).sum()
    }
}

/// Coefficients c_vα of |Ψ⟩ = Σ_α |α⟩ Σ_v c_vα |χ_vα⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibronicCoefficients {
    channels: Vec<Vec<Complex64>>,
}

impl VibronicCoefficients {
    pub fn new(channels: Vec<Vec<Complex64>>) -> Self {
        VibronicCoefficients { channels }
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, alpha: usize) -> &[Complex64] {
        &self.channels[alpha]
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    pub fn get(&self, alpha: usize, v: usize) -> Complex64 {
        self.channels[alpha][v]
    }

    /// Σ_v |c_vα|²
    pub fn population(&self, alpha: usize) -> f64 {
        self.channels[alpha].iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_channels()).map(|a| self.population(a)).collect()
    }

    /// ρ_{αv,βv'} = c_vα c*_v'β
    pub fn element(&self, (alpha, v): (usize, usize), (beta, w): (usize, usize)) -> Complex64 {
        let z = self.channels[alpha][v] * self.channels[beta][w].conj();
        if alpha == beta && v == w {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    }

    /// Flattened (α-major) coefficient vector.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.channels.iter().flatten().copied().collect()
    }

    pub fn from_flat(flat: &[Complex64], sizes: &[usize]) -> Self {
        let mut channels = Vec::with_capacity(sizes.len());
        let mut offset = 0;
        for &n in sizes {
            channels.push(flat[offset..offset + n].to_vec());
            offset += n;
        }
        VibronicCoefficients { channels }
    }

    /// ⟨ψ_α|ψ_β⟩ = Σ_{v,v'} c*_vα c_v'β ⟨χ_vα|χ_v'β⟩.
    pub fn overlap(&self, bases: &VibronicBasisSet, alpha: usize, beta: usize) -> Complex64 {
        let s = bases.overlap(alpha, beta);
        let mut total = Complex64::new(0.0, 0.0);
        for (v, ca) in self.channels[alpha].iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (w, cb) in self.channels[beta].iter().enumerate() {
                row += cb * s[(v, w)];
            }
            total += ca.conj() * row;
        }
        total
    }

    /// Grid wave packets Σ_v c_vα χ_vα.
    pub fn reconstruct(&self, bases: &VibronicBasisSet, time: f64) -> Result<BipartiteState> {
        let n = bases.grid().n_points();
        let channels = self
            .channels
            .iter()
            .zip(bases.bases())
            .map(|(c, basis)| {
                let mut psi = vec![Complex64::new(0.0, 0.0); n];
                for (coef, chi) in c.iter().zip(&basis.vectors) {
                    for (p, x) in psi.iter_mut().zip(chi) {
                        *p += coef * *x;
                    }
                }
                psi
            })
            .collect();
        BipartiteState::new(*bases.grid(), channels, time)
    }
}

/// Result of projecting a grid state onto vibrational bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coefficients: VibronicCoefficients,
    /// Per-channel population not captured by the basis.
    pub residuals: Vec<f64>,
}

impl Projection {
    pub fn total_residual(&self) -> f64 {
        self.residuals.iter().sum()
    }

    pub fn truncation_warning(&self) -> bool {
        self.total_residual() > TRUNCATION_WARNING
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::eigensolve;
    use crate::potentials::PotentialCurve;
    use crate::units;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(6.0, 16.0, 201, units::amu(66.45)).unwrap()
    }

    fn gaussian(grid: &SpatialGrid, center: f64, width: f64, k: f64) -> Vec<Complex64> {
        grid.points()
            .map(|r| {
                let x = r - center;
                Complex64::from_polar((-x * x / (4.0 * width * width)).exp(), k * x)
            })
            .collect()
    }

    fn zeros(grid: &SpatialGrid) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); grid.n_points()]
    }

    #[test]
    fn single_channel_population_is_one() {
        let g = grid();
        let s = BipartiteState::normalized(g, vec![gaussian(&g, 10.0, 0.4, 2.0)], 0.0).unwrap();
        assert!((s.channel_population(0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn equal_split_and_self_overlap() {
        let g = grid();
        let psi = gaussian(&g, 10.0, 0.4, 0.0);
        let s = BipartiteState::normalized(g, vec![psi.clone(), psi], 0.0).unwrap();
        assert!((s.channel_population(0) - 0.5).abs() < 1e-14);
        assert!((s.channel_population(1) - 0.5).abs() < 1e-14);
        assert!((s.overlap(0, 1) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn disjoint_packets_do_not_overlap() {
        let g = grid();
        let mut a = gaussian(&g, 8.0, 0.2, 0.0);
        let mut b = gaussian(&g, 14.0, 0.2, 0.0);
        for (i, r) in g.points().enumerate() {
            if r > 11.0 {
                a[i] = Complex64::new(0.0, 0.0);
            } else {
                b[i] = Complex64::new(0.0, 0.0);
            }
        }
        let s = BipartiteState::normalized(g, vec![a, b], 0.0).unwrap();
        assert!(s.overlap(0, 1).norm() < 1e-12);
    }

    #[test]
    fn overlap_is_conjugate_symmetric() {
        let g = grid();
        let s = BipartiteState::normalized(
            g,
            vec![gaussian(&g, 9.5, 0.4, 3.0), gaussian(&g, 10.2, 0.5, -1.0)],
            0.0,
        )
        .unwrap();
        assert!((s.overlap(0, 1) - s.overlap(1, 0).conj()).norm() < 1e-15);
    }

    #[test]
    fn franck_condon_factor_of_displaced_wells() {
        let g = grid();
        let mu = g.reduced_mass();
        let omega = units::wavenumber(40.0);
        let d = 0.3;
        let well_a = PotentialCurve::harmonic(omega, mu, 10.0).unwrap();
        let well_b = PotentialCurve::harmonic(omega, mu, 10.0 + d).unwrap();
        let chi_a = &eigensolve(&g, &well_a, 1).unwrap().vectors[0];
        let chi_b = &eigensolve(&g, &well_b, 1).unwrap().vectors[0];
        let numeric = g.inner_real(chi_a, chi_b);

        // brute-force quadrature of the analytic ground states on a much finer mesh
        let sigma2 = 1.0 / (mu * omega);
        let ground = |x: f64| (-(x * x) / (2.0 * sigma2)).exp() / (std::f64::consts::PI * sigma2).powf(0.25);
        let n = 200_000;
        let h = 10.0 / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let r = 6.0 + (i as f64 + 0.5) * h;
                ground(r - 10.0) * ground(r - 10.0 - d)
            })
            .sum::<f64>()
            * h;
        let analytic = (-mu * omega * d * d / 4.0).exp();
        assert!((brute - analytic).abs() < 1e-10);
        assert!((numeric - brute).abs() < 1e-8, "{numeric} vs {brute}");
    }

    #[test]
    fn reduced_density_cases() {
        let g = grid();
        let one = BipartiteState::normalized(g, vec![gaussian(&g, 10.0, 0.4, 0.0), zeros(&g)], 0.0)
            .unwrap();
        let rho = one.reduced_density();
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-14);
        assert!(rho.get(1, 1).norm() < 1e-14 && rho.get(0, 1).norm() < 1e-14);

        let mut a = gaussian(&g, 7.5, 0.2, 0.0);
        let mut b = gaussian(&g, 14.5, 0.2, 0.0);
        a.iter_mut().zip(g.points()).for_each(|(z, r)| if r > 11.0 { *z = 0.0.into() });
        b.iter_mut().zip(g.points()).for_each(|(z, r)| if r <= 11.0 { *z = 0.0.into() });
        let split = BipartiteState::normalized(g, vec![a, b], 0.0).unwrap();
        let rho = split.reduced_density();
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!((rho.get(1, 1).re - 0.5).abs() < 1e-12);
        assert!(rho.get(0, 1).norm() < 1e-12);
    }

    #[test]
    fn density_entry_convention() {
        let g = grid();
        let s = BipartiteState::normalized(
            g,
            vec![gaussian(&g, 9.5, 0.4, 3.0), gaussian(&g, 10.2, 0.5, -1.0)],
            0.0,
        )
        .unwrap();
        let rho = s.reduced_density();
        assert_eq!(rho.get(0, 1), s.overlap(1, 0));
        assert!((rho.trace() - 1.0).abs() < 1e-13);
        let (ev, _) = rho.clipped_eigen().unwrap();
        assert!(ev.iter().all(|&l| (0.0..=1.0 + 1e-12).contains(&l)));
    }

    #[test]
    fn sqrt_squares_back() {
        let g = grid();
        let s = BipartiteState::normalized(
            g,
            vec![
                gaussian(&g, 9.5, 0.4, 3.0),
                gaussian(&g, 10.2, 0.5, -1.0),
                gaussian(&g, 10.0, 0.3, 0.5),
            ],
            0.0,
        )
        .unwrap();
        let rho = s.reduced_density();
        let root = rho.sqrt().unwrap();
        let sq = &root * &root;
        assert!((sq - rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn non_psd_rejected() {
        let rho = ReducedElectronicDensity::diagonal(&[1.1, -0.1]);
        assert!(matches!(rho.sqrt(), Err(Error::NotPositiveSemidefinite(_))));
    }

    fn basis_set(g: &SpatialGrid) -> VibronicBasisSet {
        let mu = g.reduced_mass();
        let a = PotentialCurve::morse_from_frequency(
            units::wavenumber(1500.0),
            units::wavenumber(40.0),
            10.0,
            mu,
        )
        .unwrap();
        let b = PotentialCurve::morse_from_frequency(
            units::wavenumber(1000.0),
            units::wavenumber(20.0),
            10.6,
            mu,
        )
        .unwrap();
        VibronicBasisSet::new(
            *g,
            vec![eigensolve(g, &a, 6).unwrap(), eigensolve(g, &b, 8).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn projection_of_basis_member() {
        let g = grid();
        let set = basis_set(&g);
        let psi: Vec<Complex64> = set.basis(1).vectors[3].iter().map(|&x| x.into()).collect();
        let s = BipartiteState::new(g, vec![zeros(&g), psi], 0.0).unwrap();
        let p = s.project(&set).unwrap();
        for (v, c) in p.coefficients.channel(1).iter().enumerate() {
            let expected = if v == 3 { 1.0 } else { 0.0 };
            assert!((c - Complex64::new(expected, 0.0)).norm() < 1e-10);
        }
        assert!(!p.truncation_warning());
    }

    #[test]
    fn reconstruction_and_coefficient_overlaps() {
        let g = grid();
        let set = basis_set(&g);
        let c = VibronicCoefficients::new(vec![
            vec![Complex64::new(0.5, 0.1), Complex64::new(0.2, -0.3), 0.0.into(), 0.0.into(), 0.1.into(), 0.0.into()],
            (0..8).map(|v| Complex64::from_polar(0.2, v as f64)).collect(),
        ]);
        let state = c.reconstruct(&set, 0.0).unwrap();
        let p = state.project(&set).unwrap();
        for a in 0..2 {
            for (x, y) in p.coefficients.channel(a).iter().zip(c.channel(a)) {
                assert!((x - y).norm() < 1e-10);
            }
        }
        let grid_overlap = state.overlap(0, 1);
        let coef_overlap = c.overlap(&set, 0, 1);
        assert!((grid_overlap - coef_overlap).norm() < 1e-10);
        let total: f64 = (0..2)
            .flat_map(|a| (0..c.channel(a).len()).map(move |v| (a, v)))
            .map(|i| c.element(i, i).re)
            .sum();
        assert!((total - c.populations().iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn vibronic_element_hermiticity() {
        let c = VibronicCoefficients::new(vec![
            vec![Complex64::new(0.3, 0.4), Complex64::new(-0.1, 0.2)],
            vec![Complex64::new(0.5, -0.6)],
        ]);
        assert_eq!(c.element((0, 1), (1, 0)), c.element((1, 0), (0, 1)).conj());
        let d = c.element((0, 0), (0, 0));
        assert!((d.re - 0.25).abs() < 1e-15 && d.im == 0.0);
    }

    #[test]
    fn truncation_warning_raised() {
        let g = grid();
        let set = basis_set(&g);
        // a packet far from equilibrium needs many more levels than the basis holds
        let s = BipartiteState::normalized(
            g,
            vec![gaussian(&g, 8.5, 0.15, 0.0), gaussian(&g, 13.0, 0.2, 4.0)],
            0.0,
        )
        .unwrap();
        let p = s.project(&set).unwrap();
        assert!(p.truncation_warning());
        assert!(p.total_residual() > 0.1);
    }

    #[test]
    fn dump_has_one_row_per_point() {
        let g = SpatialGrid::new(0.0, 1.0, 10, 1.0).unwrap();
        let s = BipartiteState::new(g, vec![zeros(&g), zeros(&g)], 0.0).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[0].split_whitespace().count(), 5);
    }
}
