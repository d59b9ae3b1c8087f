//! Shared fixtures for the benchmarks.

use vibronic_core::{BipartiteState, Scenario, ScenarioConfig};

/// The positive-chirp two-channel model shipped with the repository.
pub const SINGLE_CHIRP: &str = include_str!("../../../scenarios/single_chirp_pos.cfg");

pub fn scenario() -> Scenario {
    Scenario::build(ScenarioConfig::parse(SINGLE_CHIRP).expect("shipped config parses")).expect("shipped config builds")
}

/// A state with weight in both channels, taken a few steps into the pulse.
pub fn mixed_state(s: &Scenario) -> BipartiteState {
    let t_peak = vibronic_core::units::ps(15.0);
    let dt = s.config.run.dt;
    let initial = s.initial_state().expect("initial state");
    let mut traj = vibronic_core::propagate(&s.hamiltonian, &initial, t_peak - 200.0 * dt, t_peak, dt, 200)
        .expect("propagation");
    traj.states.pop().unwrap_or(initial)
}
