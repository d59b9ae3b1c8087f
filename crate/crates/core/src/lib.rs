//! Coupled-channel wave-packet dynamics of diatomic molecules driven by
//! chirped laser pulses, with electronic–vibrational entanglement and
//! coherence measures evaluated along the trajectory.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod measures;
pub mod potentials;
pub mod pulses;
pub mod scenario;
pub mod state;
pub mod units;

pub use dynamics::{
    propagate, propagate_exact, Channel, CoefficientTrajectory, CoupledHamiltonian, Coupling,
    Drive, Trajectory, VibronicHamiltonian,
};
pub use error::{Error, Result};
pub use grid::{eigensolve, KineticOperator, SpatialGrid, VibrationalBasis};
pub use potentials::{PotentialCurve, TabulatedCurve};
pub use pulses::ChirpedPulse;
pub use state::{
    BipartiteState, Projection, ReducedElectronicDensity, VibronicBasisSet, VibronicCoefficients,
};
pub use units::{Quantity, Unit};
pub use measures::{MeasureRecord, MeasureSeries, RadialProfile};
pub use analysis::OscillationReport;
pub use scenario::{load_config, run_scenario, Scenario, ScenarioConfig};
