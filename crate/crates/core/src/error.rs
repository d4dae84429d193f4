use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A Cartesian direction was too short to normalize.
    #[error("direction vector has near-zero length {norm:e}")]
    DegenerateDirection { norm: f64 },

    /// Post-selection is (numerically) orthogonal to the pre-selection, so
    /// every two-boundary quantity divides by zero.
    #[error("overlap {overlap:e} between initial and final state is below threshold {threshold:e}")]
    ZeroOverlap { overlap: f64, threshold: f64 },

    /// Conditioning an entangled state on an outcome of zero probability.
    #[error("conditioning branch has zero norm ({norm:e})")]
    ZeroBranch { norm: f64 },

    #[error("measurement axes are within {guard_deg}° of antiparallel (angle {omega_deg}°)")]
    AntiparallelAxes { omega_deg: f64, guard_deg: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The packet does not decay inside the outer 5% of the grid.
    #[error("wavepacket tails too large: edge amplitude ratio {ratio:e} exceeds {limit:e}")]
    PacketTooWide { ratio: f64, limit: f64 },

    /// During evolution the wavefunction reached the grid edges.
    #[error("wavefunction leaked into the grid edge region at t = {time} (ratio {ratio:e})")]
    TailLeak { time: f64, ratio: f64 },

    #[error("unstable or invalid time step: {0}")]
    UnstableStep(String),

    #[error("wavefunctions live on different grids or times")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// Local density below the node threshold; the guidance velocity is not
    /// defined there.
    #[error("trajectory hit a node at t = {t}, x = {x} (density {density:e})")]
    NodeEncounter { t: f64, x: f64, density: f64 },

    #[error("trajectory left the grid interior at t = {t}, x = {x}")]
    GridExit { t: f64, x: f64 },

    #[error("integrator exceeded {max_steps} steps")]
    StepLimit { max_steps: usize },

    #[error("four-current is zero")]
    ZeroCurrent,

    #[error("final packets are not separated: {0}")]
    PacketsNotSeparated(String),

    #[error("basis is incomplete: {0}")]
    IncompleteBasis(String),

    #[error("invalid setup: {0}")]
    InvalidSetup(String),
}

pub type LabResult<T> = Result<T, LabError>;
