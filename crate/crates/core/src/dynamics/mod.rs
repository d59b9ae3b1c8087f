//! Coupled-channel time evolution.

pub mod chebyshev;
pub mod hamiltonian;
pub mod oracle;

pub use chebyshev::{propagate, ChebyshevPropagator};
pub use hamiltonian::{Channel, CoupledHamiltonian, Coupling, Drive};
pub use oracle::{propagate_exact, CoefficientTrajectory, VibronicHamiltonian};

use crate::state::BipartiteState;

/// Snapshots recorded by a propagation run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BipartiteState>,
    pub norms: Vec<f64>,
}

impl Trajectory {
    pub fn push(&mut self, state: BipartiteState) {
        self.times.push(state.time());
        self.norms.push(state.total_norm());
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest |norm − 1| over the snapshots.
    pub fn max_norm_error(&self) -> f64 {
        self.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}
