//! Fixtures shared by the benchmarks.

use csbohm::trajectories::FieldHistory;
use csbohm::wavepacket::{evolve_final_backward_history, evolve_history, make_gaussian, Grid, GridWavefunction};

pub fn grid(n_points: usize) -> Grid {
    Grid::new(-20.0, 20.0, n_points).expect("valid grid")
}

pub fn moving_packet(n_points: usize) -> GridWavefunction {
    make_gaussian(&grid(n_points), 0.0, 1.0, 2.0, None).expect("packet fits the grid")
}

/// Counter-propagating boundary states over t ∈ [0, 1] on a 1024-point grid.
pub fn counter_propagating_history() -> FieldHistory {
    let g = grid(1024);
    let psi_i = make_gaussian(&g, 0.0, 1.0, 2.0, None).expect("packet fits the grid");
    let f = make_gaussian(&g, 1.0, 1.0, -2.0, None).expect("packet fits the grid");
    let psi_f = GridWavefunction::new(g, f.into_amplitudes(), 1.0).expect("packet fits the grid");
    let hi = evolve_history(&psi_i, 0.01, 100, None, 1).expect("evolution succeeds");
    let hf = evolve_final_backward_history(&psi_f, 0.01, 100, None, 1).expect("evolution succeeds");
    FieldHistory::causally_symmetric(&hi, &hf, 1e-10).expect("boundaries overlap")
}

pub fn standard_history() -> FieldHistory {
    let hist = evolve_history(&moving_packet(1024), 0.01, 100, None, 1).expect("evolution succeeds");
    FieldHistory::standard(&hist).expect("non-empty history")
}
