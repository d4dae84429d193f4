//! Numerical tools for the causally symmetric pilot-wave model.
//!
//! Natural units throughout: ħ = m = 1, spin eigenvalues ±½.

// `!(x > y)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod spin;
pub mod spin_geometry;
pub mod trajectories;
pub mod two_state;
pub mod wavepacket;

pub use num_complex::Complex64 as C64;

pub use error::{LabError, LabResult};
pub use spin::{eigenspinor, spin_operator, Direction, MultiSpinState, Particle, Sign, SpinOp, Spinor};
pub use spin_geometry::{component_map, hidden_spin_vector, hidden_spin_vector_with_outcomes, sweep_maximum, SpinVectorReport};
pub use trajectories::{
    bohm_trajectory, cs_worldline, four_velocity, CurrentClass, FieldHistory, FourVelocity, IntegratorOptions, Trajectory,
    WorldLine,
};
pub use two_state::{
    conditional_state, entangled_weak_value, reduced_weak_value, weak_spin_value, EntangledContext, TwoStateContext,
};
pub use wavepacket::{make_gaussian, FieldPair, Grid, GridWavefunction, Propagator};
pub use ensemble::{
    appendix_average_check, born_experiment, equivariance_check, ks_statistic, sample_positions, EnsembleRun,
    MeasurementSetup,
};
