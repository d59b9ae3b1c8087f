//! Measure identities evaluated on seeded random states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::measures;
use crate::state::{BipartiteState, VibronicBasisSet, VibronicCoefficients};

/// Tolerance on the two-channel l1/linear-entropy relation.
pub const L1_RELATION_TOL: f64 = 1e-12;
/// Tolerance on the pointwise skew relation, relative to max_R [V_g − V_e]².
pub const SKEW_RELATION_TOL: f64 = 1e-10;
/// Tolerance between the trace form and the pairwise form of L.
pub const L_PAIRWISE_TOL: f64 = 1e-12;
/// Tolerance between the grid form and the coefficient form of L.
pub const L_COEFFICIENT_TOL: f64 = 1e-8;

/// Worst residuals over a batch of random states.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    pub states: usize,
    pub n_channels: usize,
    pub purity_plus_l: f64,
    pub l_pairwise: f64,
    pub l_coefficients: f64,
    pub l1_relation: Option<f64>,
    pub skew_relation: Option<f64>,
    pub skew_minus_variance: f64,
    /// max over states and R of I_S(reduced) − Var(H_el); should not be positive.
    pub reduced_over_variance: f64,
    /// max of L − (1 − 1/N_el); should not be positive.
    pub l_bound_excess: f64,
}

impl IdentityReport {
    /// (name, value, tolerance, pass) for each identity.
    pub fn checks(&self) -> Vec<(&'static str, f64, f64, bool)> {
        let mut out = vec![
            ("purity + L = 1", self.purity_plus_l, 0.0, self.purity_plus_l.abs() <= 4.0 * f64::EPSILON),
            ("L trace vs pairwise", self.l_pairwise, L_PAIRWISE_TOL, self.l_pairwise < L_PAIRWISE_TOL),
            (
                "L grid vs coefficients",
                self.l_coefficients,
                L_COEFFICIENT_TOL,
                self.l_coefficients < L_COEFFICIENT_TOL,
            ),
            ("skew(H_mol) = variance", self.skew_minus_variance, 0.0, self.skew_minus_variance == 0.0),
            ("skew(reduced) <= variance", self.reduced_over_variance, 0.0, self.reduced_over_variance <= 1e-15),
            ("L <= 1 - 1/N", self.l_bound_excess, 1e-9, self.l_bound_excess <= 1e-9),
        ];
        if let Some(v) = self.l1_relation {
            out.push(("L = 2PgPe - C^2/2", v, L1_RELATION_TOL, v < L1_RELATION_TOL));
        }
        if let Some(v) = self.skew_relation {
            out.push(("skew relation", v, SKEW_RELATION_TOL, v < SKEW_RELATION_TOL));
        }
        out
    }

    pub fn passes(&self) -> bool {
        self.checks().iter().all(|c| c.3)
    }
}

/// Random normalized coefficients; roughly one draw in eight populates a single channel.
pub fn random_coefficients<R: Rng>(bases: &VibronicBasisSet, rng: &mut R) -> VibronicCoefficients {
    let n = bases.n_channels();
    let only = if rng.random_bool(0.125) { Some(rng.random_range(0..n)) } else { None };
    let mut channels: Vec<Vec<Complex64>> = bases
        .bases()
        .iter()
        .enumerate()
        .map(|(a, b)| {
            let weight = if only.is_some_and(|o| o != a) { 0.0 } else { rng.random::<f64>() };
            (0..b.len())
                .map(|_| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * weight
                })
                .collect()
        })
        .collect();
    let norm: f64 = channels.iter().flatten().map(|z| z.norm_sqr()).sum();
    let scale = if norm > 0.0 { 1.0 / norm.sqrt() } else { 1.0 };
    for z in channels.iter_mut().flatten() {
        *z *= scale;
    }
    if norm == 0.0 {
        channels[0][0] = Complex64::new(1.0, 0.0);
    }
    VibronicCoefficients::new(channels)
}

/// Runs every identity on `n_states` random states drawn with a fixed seed.
///
/// `potentials` are the curves entering the skew-information profiles.
pub fn check_random_states(
    bases: &VibronicBasisSet,
    potentials: &[&[f64]],
    n_states: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bases.n_channels();
    let two = n == 2;
    let gap_scale = if two {
        potentials[0]
            .iter()
            .zip(potentials[1])
            .map(|(a, b)| (a - b) * (a - b))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    } else {
        1.0
    };
    let mut r = IdentityReport {
        states: n_states,
        n_channels: n,
        l1_relation: two.then_some(0.0),
        skew_relation: two.then_some(0.0),
        l_bound_excess: f64::NEG_INFINITY,
        reduced_over_variance: f64::NEG_INFINITY,
        ..Default::default()
    };
    for _ in 0..n_states {
        let c = random_coefficients(bases, &mut rng);
        let state = c.reconstruct(bases, 0.0)?;
        accumulate(&mut r, &state, &c, bases, potentials, gap_scale)?;
    }
    Ok(r)
}

fn accumulate(
    r: &mut IdentityReport,
    state: &BipartiteState,
    c: &VibronicCoefficients,
    bases: &VibronicBasisSet,
    potentials: &[&[f64]],
    gap_scale: f64,
) -> Result<()> {
    let n = state.n_channels() as f64;
    let rho = state.reduced_density();
    let purity = rho.purity();
    let l = measures::linear_entropy(state);
    r.purity_plus_l = r.purity_plus_l.max((purity + l - 1.0).abs());
    r.l_pairwise = r.l_pairwise.max((measures::linear_entropy_pairwise(state) - l).abs());
    r.l_coefficients = r
        .l_coefficients
        .max((measures::linear_entropy_coefficients(c, bases) - l).abs());
    let skew = measures::skew_information_hmol(c, bases);
    let var = measures::energy_variance(c, bases);
    r.skew_minus_variance = r.skew_minus_variance.max((skew - var).abs());
    r.l_bound_excess = r.l_bound_excess.max(l - (1.0 - 1.0 / n));
    let reduced = measures::skew_information_reduced(state, potentials)?;
    let variance = measures::electronic_variance(state, potentials);
    for (a, b) in reduced.values.iter().zip(&variance.values) {
        r.reduced_over_variance = r.reduced_over_variance.max(a - b);
    }
    if let Some(m) = r.l1_relation.as_mut() {
        *m = m.max(measures::l1_linear_entropy_residual(state).abs());
    }
    if let Some(m) = r.skew_relation.as_mut() {
        let worst = measures::skew_identity_residual(state, potentials)?
            .values
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        *m = m.max(worst / gap_scale);
    }
    Ok(())
}
