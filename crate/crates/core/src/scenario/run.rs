use num_complex::Complex64;
use serde::Serialize;

use super::config::{InitialState, ScenarioConfig};
use crate::analysis::{predict_periods, OscillationReport};
use crate::dynamics::{propagate, Channel, CoupledHamiltonian, Coupling, Trajectory};
use crate::error::{Error, Result};
use crate::measures::{self, Field, MeasureSeries};
use crate::state::{BipartiteState, VibronicBasisSet};

/// Hamiltonian and vibrational bases assembled from a config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub hamiltonian: CoupledHamiltonian,
    /// Eigenbases of the dressed channel curves.
    pub bases: VibronicBasisSet,
}

/// Largest violations of the measure identities along a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub purity_plus_l: f64,
    pub l_pairwise: f64,
    pub l_coefficients: f64,
    /// Two-channel runs only.
    pub l1_relation: Option<f64>,
    /// Two-channel runs only, largest |residual| over R.
    pub skew_relation: Option<f64>,
    pub skew_minus_variance: f64,
    pub max_truncation: f64,
    pub max_norm_error: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub trajectory: Trajectory,
    pub series: MeasureSeries,
    pub report: OscillationReport,
    pub identities: IdentityResiduals,
}

impl Scenario {
    pub fn build(config: ScenarioConfig) -> Result<Self> {
        let grid = config.grid;
        let channels = config
            .channels
            .iter()
            .map(|c| Channel::new(&grid, c.label.clone(), c.potential.clone(), c.dressing))
            .collect::<Result<Vec<_>>>()?;
        let couplings = config
            .pulses
            .iter()
            .map(|p| Coupling {
                upper: p.upper,
                lower: p.lower,
                drive: p.drive,
            })
            .collect();
        let hamiltonian = CoupledHamiltonian::new(grid, channels, couplings)?;
        let sizes: Vec<usize> = config.channels.iter().map(|c| c.basis_size).collect();
        let bases = hamiltonian.vibronic_bases(&sizes)?;
        Ok(Scenario {
            config,
            hamiltonian,
            bases,
        })
    }

    /// Bare curves V_α(R) on the grid.
    pub fn bare_potentials(&self) -> Vec<&[f64]> {
        self.hamiltonian.channels().iter().map(|c| c.bare_samples()).collect()
    }

    pub fn initial_state(&self) -> Result<BipartiteState> {
        let grid = self.config.grid;
        let n = grid.n_points();
        let mut channels = vec![vec![Complex64::new(0.0, 0.0); n]; self.hamiltonian.n_channels()];
        match &self.config.initial {
            InitialState::Eigenstate { channel, v } => {
                let chi = &self.bases.basis(*channel).vectors[*v];
                channels[*channel] = chi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            }
            InitialState::Gaussian {
                channel,
                center,
                width,
                momentum,
            } => {
                channels[*channel] = grid
                    .points()
                    .map(|r| {
                        let x = r - center;
                        Complex64::from_polar((-x * x / (4.0 * width * width)).exp(), momentum * r)
                    })
                    .collect();
            }
            InitialState::Superposition(comps) => {
                for &(a, v, amp) in comps {
                    for (z, x) in channels[a].iter_mut().zip(&self.bases.basis(a).vectors[v]) {
                        *z += amp * *x;
                    }
                }
            }
        }
        BipartiteState::normalized(grid, channels, self.config.run.t0)
    }

    /// Start of the field-free analysis window.
    pub fn analysis_start(&self) -> f64 {
        let run = &self.config.run;
        run.analysis_start
            .or_else(|| self.hamiltonian.drives_end())
            .unwrap_or(run.t0)
            .max(run.t0)
    }

    pub fn run(&self) -> Result<ScenarioResult> {
        let run = &self.config.run;
        let initial = self.initial_state()?;
        log::info!(
            "propagating {} channels on {} points from {:.4} to {:.4} ps",
            self.hamiltonian.n_channels(),
            self.config.grid.n_points(),
            crate::units::to_ps(run.t0),
            crate::units::to_ps(run.t1)
        );
        let trajectory = propagate(&self.hamiltonian, &initial, run.t0, run.t1, run.dt, run.stride)?;
        let potentials = self.bare_potentials();
        let series = MeasureSeries::from_trajectory(
            &trajectory,
            &self.bases,
            &potentials,
            self.config.output.profiles,
        )?;
        let identities = self.identities(&trajectory, &series)?;
        let report = self.report(&trajectory, &series)?;
        Ok(ScenarioResult {
            trajectory,
            series,
            report,
            identities,
        })
    }

    fn report(&self, traj: &Trajectory, series: &MeasureSeries) -> Result<OscillationReport> {
        let start = self.analysis_start();
        let tol = 1e-9 * self.config.run.dt;
        let first = match traj.times.iter().position(|&t| t >= start - tol) {
            Some(i) => i,
            None if !traj.is_empty() => {
                log::warn!(
                    "run ends before the analysis start {:.4} ps; analysing the final snapshot only",
                    crate::units::to_ps(start)
                );
                traj.len() - 1
            }
            None => return Err(Error::InsufficientSnapshots("empty trajectory".into())),
        };
        let c = traj.states[first].project(&self.bases)?.coefficients;
        let prediction = (self.hamiltonian.n_channels() >= 2).then(|| predict_periods(&c, &self.bases));
        let times = &series.times()[first..];
        let values = &series.values(Field::LinearEntropy)[first..];
        OscillationReport::new(times, values, prediction)
    }

    fn identities(&self, traj: &Trajectory, series: &MeasureSeries) -> Result<IdentityResiduals> {
        let potentials = self.bare_potentials();
        let two = self.hamiltonian.n_channels() == 2;
        let mut r = IdentityResiduals {
            max_norm_error: traj.max_norm_error(),
            l1_relation: two.then_some(0.0),
            skew_relation: two.then_some(0.0),
            ..Default::default()
        };
        for (raw, rec) in traj.states.iter().zip(&series.records) {
            let state = &raw.renormalized()?;
            let c = state.project(&self.bases)?.coefficients;
            r.purity_plus_l = r.purity_plus_l.max((rec.purity + rec.linear_entropy - 1.0).abs());
            r.l_pairwise = r
                .l_pairwise
                .max((measures::linear_entropy_pairwise(state) - rec.linear_entropy).abs());
            r.l_coefficients = r.l_coefficients.max(
                (measures::linear_entropy_coefficients(&c, &self.bases) - rec.linear_entropy).abs(),
            );
            r.skew_minus_variance = r.skew_minus_variance.max((rec.skew_hmol - rec.variance_hmol).abs());
            r.max_truncation = r.max_truncation.max(rec.truncation);
            if two {
                let l1 = measures::l1_linear_entropy_residual(state).abs();
                r.l1_relation = r.l1_relation.map(|m| m.max(l1));
                let skew = measures::skew_identity_residual(state, &potentials)?
                    .values
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                r.skew_relation = r.skew_relation.map(|m| m.max(skew));
            }
        }
        Ok(r)
    }
}

/// Builds the scenario from `config` and runs the full pipeline.
pub fn run_scenario(config: ScenarioConfig) -> Result<ScenarioResult> {
    Scenario::build(config)?.run()
}
