//! Experiment configuration files.
//!
//! A config is a TOML document with a top-level `kind`, an optional `seed`
//! and one section named after the kind (`weak-value` uses `[weak_value]`,
//! and so on). Every key has a default, so a section may be partial or
//! missing. Unknown keys, and sections for a different kind, are rejected.

use std::path::PathBuf;

use csbohm::ensemble::MeasurementSetup;
use csbohm::spin::{Direction, Sign};
use csbohm::trajectories::IntegratorOptions;
use csbohm::wavepacket::Grid;
use csbohm::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    WeakValue,
    EntangledValue,
    SpinMap,
    Evolve,
    Fields,
    Trajectories,
    BornCheck,
    AppendixCheck,
    Equivariance,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::WeakValue => "weak-value",
            Self::EntangledValue => "entangled-value",
            Self::SpinMap => "spin-map",
            Self::Evolve => "evolve",
            Self::Fields => "fields",
            Self::Trajectories => "trajectories",
            Self::BornCheck => "born-check",
            Self::AppendixCheck => "appendix-check",
            Self::Equivariance => "equivariance",
        }
    }
}

/// A Gaussian ψ ∝ exp(−(x−x0)²/2σ² + ik(x−x0)).
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Packet {
    pub x0: f64,
    pub sigma: f64,
    pub k: f64,
}

impl Default for Packet {
    fn default() -> Self {
        Self { x0: 0.0, sigma: 1.0, k: 0.0 }
    }
}

fn default_grid() -> Grid {
    Grid { x_min: -20.0, x_max: 20.0, n_points: 1024 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeakValueParams {
    pub initial_axis: [f64; 3],
    pub initial_outcome: Sign,
    pub final_axis: [f64; 3],
    pub final_outcome: Sign,
    /// Directions of the spin components to evaluate.
    pub components: Vec<[f64; 3]>,
    pub overlap_eps: f64,
}

impl Default for WeakValueParams {
    fn default() -> Self {
        Self {
            initial_axis: [0.0, 0.0, 1.0],
            initial_outcome: Sign::Up,
            final_axis: [1.0, 0.0, 0.0],
            final_outcome: Sign::Up,
            components: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            overlap_eps: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntangledParams {
    /// (re, im) amplitudes in (↑↑, ↑↓, ↓↑, ↓↓) order; the singlet by default.
    pub amplitudes: [[f64; 2]; 4],
    pub axis1: [f64; 3],
    pub outcome1: Sign,
    pub axis2: [f64; 3],
    pub outcome2: Sign,
    pub components: Vec<[f64; 3]>,
    pub overlap_eps: f64,
    /// Largest accepted difference between the two-particle and the reduced
    /// evaluation.
    pub tolerance: f64,
}

impl Default for EntangledParams {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: [[0.0, 0.0], [h, 0.0], [-h, 0.0], [0.0, 0.0]],
            axis1: [0.0, 0.0, 1.0],
            outcome1: Sign::Up,
            axis2: [1.0, 0.0, 0.0],
            outcome2: Sign::Up,
            components: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            overlap_eps: 1e-10,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinMapParams {
    pub initial_axis: [f64; 3],
    pub initial_outcome: Sign,
    pub final_axis: [f64; 3],
    pub final_outcome: Sign,
    pub guard_deg: f64,
    /// Number of random directions in the component map.
    pub n_directions: usize,
    pub coarse_steps: usize,
    pub refinements: usize,
    /// Largest accepted gap between the sweep maximum and |v|.
    pub tolerance: f64,
}

impl Default for SpinMapParams {
    fn default() -> Self {
        Self {
            initial_axis: [0.0, 0.0, 1.0],
            initial_outcome: Sign::Up,
            final_axis: [1.0, 0.0, 0.0],
            final_outcome: Sign::Up,
            guard_deg: 1.0,
            n_directions: 200,
            coarse_steps: 36,
            refinements: 10,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveParams {
    pub grid: Grid,
    pub packet: Packet,
    pub dt: f64,
    pub steps: usize,
    /// Steps between written slices.
    pub stride: usize,
    /// Largest accepted change of the norm.
    pub norm_tolerance: f64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self { grid: default_grid(), packet: Packet { k: 1.0, ..Packet::default() }, dt: 0.001, steps: 1000, stride: 100, norm_tolerance: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsParams {
    pub grid: Grid,
    /// ψ_i at t = 0.
    pub initial: Packet,
    /// ψ_f at t = steps·dt.
    #[serde(rename = "final")]
    pub final_: Packet,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub overlap_eps: f64,
}

impl Default for FieldsParams {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            initial: Packet { k: 2.0, ..Packet::default() },
            final_: Packet { x0: 1.0, k: -2.0, ..Packet::default() },
            dt: 0.01,
            steps: 100,
            stride: 10,
            overlap_eps: 1e-10,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryMode {
    Bohm,
    CausallySymmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoriesParams {
    pub mode: TrajectoryMode,
    pub grid: Grid,
    pub initial: Packet,
    /// ψ_f at the final time; omitted means ψ_f is ψ_i evolved forward.
    #[serde(rename = "final", skip_serializing_if = "Option::is_none")]
    pub final_: Option<Packet>,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub starts: Vec<f64>,
    /// Start time of causally symmetric worldlines.
    pub t0: f64,
    pub overlap_eps: f64,
    pub integrator: IntegratorOptions,
}

impl Default for TrajectoriesParams {
    fn default() -> Self {
        Self {
            mode: TrajectoryMode::CausallySymmetric,
            grid: default_grid(),
            initial: Packet { k: 2.0, ..Packet::default() },
            final_: Some(Packet { x0: 1.0, k: -2.0, ..Packet::default() }),
            dt: 0.01,
            steps: 100,
            stride: 1,
            starts: vec![-0.5, 0.0, 0.4, 1.0],
            t0: 0.5,
            overlap_eps: 1e-10,
            integrator: IntegratorOptions { lambda_max: Some(50.0), ..IntegratorOptions::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BornCheckParams {
    pub n_particles: usize,
    /// Largest accepted |frequency − |c|²| in binomial standard deviations.
    pub sigma_limit: f64,
    pub integrator: IntegratorOptions,
    pub setup: MeasurementSetup,
}

impl Default for BornCheckParams {
    fn default() -> Self {
        Self {
            n_particles: 10_000,
            sigma_limit: 3.0,
            integrator: IntegratorOptions::ensemble(),
            setup: MeasurementSetup::standard(C64::new(0.3f64.sqrt(), 0.0), C64::new(0.7f64.sqrt(), 0.0)),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    PlaneWave,
    /// Orthonormal basis whose first vector is ψ_i.
    ThroughState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppendixParams {
    pub grid: Grid,
    pub packet: Packet,
    pub basis: BasisKind,
    /// Bound on the deviation relative to max |j|.
    pub tolerance: f64,
}

impl Default for AppendixParams {
    fn default() -> Self {
        Self { grid: default_grid(), packet: Packet { x0: 0.8, sigma: 1.3, k: 1.7 }, basis: BasisKind::PlaneWave, tolerance: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivarianceParams {
    pub grid: Grid,
    pub packet: Packet,
    pub dt: f64,
    pub steps: usize,
    pub n_particles: usize,
    pub t_check: f64,
    /// KS critical value is `ks_coefficient / √n`.
    pub ks_coefficient: f64,
    pub integrator: IntegratorOptions,
}

impl Default for EquivarianceParams {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            packet: Packet { k: 0.5, ..Packet::default() },
            dt: 0.01,
            steps: 100,
            n_particles: 10_000,
            t_check: 1.0,
            ks_coefficient: 1.63,
            integrator: IntegratorOptions::ensemble(),
        }
    }
}

/// The file format. Only the section matching `kind` may be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_value: Option<WeakValueParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangled_value: Option<EntangledParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_map: Option<SpinMapParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectoriesParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub born_check: Option<BornCheckParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appendix_check: Option<AppendixParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivariance: Option<EquivarianceParams>,
}

/// Parameters of the selected experiment, defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    WeakValue(WeakValueParams),
    EntangledValue(EntangledParams),
    SpinMap(SpinMapParams),
    Evolve(EvolveParams),
    Fields(FieldsParams),
    Trajectories(TrajectoriesParams),
    BornCheck(BornCheckParams),
    AppendixCheck(AppendixParams),
    Equivariance(EquivarianceParams),
}

pub const DEFAULT_SEED: u64 = 0;

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub params: Params,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::ConfigInvalid(msg.into())
}

pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
    toml::from_str(text).map_err(|e| invalid(e.to_string()))
}

impl ExperimentConfig {
    /// Validates a parsed file. `kind` comes from the file or, if absent
    /// there, from `requested`; when both are given they must agree.
    pub fn resolve(file: ConfigFile, requested: Option<ExperimentKind>) -> Result<Self, CliError> {
        let kind = match (file.kind, requested) {
            (Some(a), Some(b)) if a != b => {
                return Err(invalid(format!("config is for `{}` but `{}` was requested", a.name(), b.name())));
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(invalid("missing `kind`")),
        };
        let seed = file.seed.unwrap_or(DEFAULT_SEED);
        check_seed(seed)?;
        let present = [
            (ExperimentKind::WeakValue, file.weak_value.is_some()),
            (ExperimentKind::EntangledValue, file.entangled_value.is_some()),
            (ExperimentKind::SpinMap, file.spin_map.is_some()),
            (ExperimentKind::Evolve, file.evolve.is_some()),
            (ExperimentKind::Fields, file.fields.is_some()),
            (ExperimentKind::Trajectories, file.trajectories.is_some()),
            (ExperimentKind::BornCheck, file.born_check.is_some()),
            (ExperimentKind::AppendixCheck, file.appendix_check.is_some()),
            (ExperimentKind::Equivariance, file.equivariance.is_some()),
        ];
        if let Some((other, _)) = present.iter().find(|(k, p)| *p && *k != kind) {
            return Err(invalid(format!("section for `{}` in a `{}` config", other.name(), kind.name())));
        }
        let params = match kind {
            ExperimentKind::WeakValue => Params::WeakValue(file.weak_value.unwrap_or_default()),
            ExperimentKind::EntangledValue => Params::EntangledValue(file.entangled_value.unwrap_or_default()),
            ExperimentKind::SpinMap => Params::SpinMap(file.spin_map.unwrap_or_default()),
            ExperimentKind::Evolve => Params::Evolve(file.evolve.unwrap_or_default()),
            ExperimentKind::Fields => Params::Fields(file.fields.unwrap_or_default()),
            ExperimentKind::Trajectories => Params::Trajectories(file.trajectories.unwrap_or_default()),
            ExperimentKind::BornCheck => Params::BornCheck(file.born_check.unwrap_or_default()),
            ExperimentKind::AppendixCheck => Params::AppendixCheck(file.appendix_check.unwrap_or_default()),
            ExperimentKind::Equivariance => Params::Equivariance(file.equivariance.unwrap_or_default()),
        };
        let cfg = Self { seed, output: file.output, params };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> ExperimentKind {
        match &self.params {
            Params::WeakValue(_) => ExperimentKind::WeakValue,
            Params::EntangledValue(_) => ExperimentKind::EntangledValue,
            Params::SpinMap(_) => ExperimentKind::SpinMap,
            Params::Evolve(_) => ExperimentKind::Evolve,
            Params::Fields(_) => ExperimentKind::Fields,
            Params::Trajectories(_) => ExperimentKind::Trajectories,
            Params::BornCheck(_) => ExperimentKind::BornCheck,
            Params::AppendixCheck(_) => ExperimentKind::AppendixCheck,
            Params::Equivariance(_) => ExperimentKind::Equivariance,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Result<Self, CliError> {
        check_seed(seed)?;
        self.seed = seed;
        Ok(self)
    }

    /// The resolved config as a file. The output directory is left out: it
    /// does not affect results, and re-running the echo elsewhere must
    /// reproduce them.
    pub fn echo(&self) -> ConfigFile {
        let mut f = ConfigFile { kind: Some(self.kind()), seed: Some(self.seed), ..ConfigFile::default() };
        match self.params.clone() {
            Params::WeakValue(p) => f.weak_value = Some(p),
            Params::EntangledValue(p) => f.entangled_value = Some(p),
            Params::SpinMap(p) => f.spin_map = Some(p),
            Params::Evolve(p) => f.evolve = Some(p),
            Params::Fields(p) => f.fields = Some(p),
            Params::Trajectories(p) => f.trajectories = Some(p),
            Params::BornCheck(p) => f.born_check = Some(p),
            Params::AppendixCheck(p) => f.appendix_check = Some(p),
            Params::Equivariance(p) => f.equivariance = Some(p),
        }
        f
    }

    pub fn echo_toml(&self) -> Result<String, CliError> {
        toml::to_string(&self.echo()).map_err(|e| CliError::Output(format!("cannot serialize config: {e}")))
    }

    fn validate(&self) -> Result<(), CliError> {
        let dir = |v: &[f64; 3]| Direction::try_from(*v).map_err(|e| invalid(e.to_string()));
        let grid = |g: &Grid| g.validate().map_err(|e| invalid(e.to_string()));
        let positive = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(invalid(format!("`{name}` must be positive"))) };
        let nonneg = |name: &str, v: f64| if v >= 0.0 { Ok(()) } else { Err(invalid(format!("`{name}` must not be negative"))) };
        let packet = |p: &Packet| positive("sigma", p.sigma);
        match &self.params {
            Params::WeakValue(p) => {
                dir(&p.initial_axis)?;
                dir(&p.final_axis)?;
                p.components.iter().try_for_each(|c| dir(c).map(|_| ()))?;
                nonneg("overlap_eps", p.overlap_eps)?;
            }
            Params::EntangledValue(p) => {
                dir(&p.axis1)?;
                dir(&p.axis2)?;
                p.components.iter().try_for_each(|c| dir(c).map(|_| ()))?;
                let norm: f64 = p.amplitudes.iter().map(|a| a[0] * a[0] + a[1] * a[1]).sum();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!("state amplitudes have norm² {norm}, expected 1")));
                }
                nonneg("overlap_eps", p.overlap_eps)?;
                nonneg("tolerance", p.tolerance)?;
            }
            Params::SpinMap(p) => {
                dir(&p.initial_axis)?;
                dir(&p.final_axis)?;
                nonneg("guard_deg", p.guard_deg)?;
                nonneg("tolerance", p.tolerance)?;
                if p.coarse_steps == 0 {
                    return Err(invalid("`coarse_steps` must be positive"));
                }
            }
            Params::Evolve(p) => {
                grid(&p.grid)?;
                packet(&p.packet)?;
                positive("dt", p.dt)?;
                nonneg("norm_tolerance", p.norm_tolerance)?;
                if p.stride == 0 {
                    return Err(invalid("`stride` must be positive"));
                }
            }
            Params::Fields(p) => {
                grid(&p.grid)?;
                packet(&p.initial)?;
                packet(&p.final_)?;
                positive("dt", p.dt)?;
                if p.stride == 0 || p.steps % p.stride != 0 {
                    return Err(invalid("`stride` must be positive and divide `steps`"));
                }
            }
            Params::Trajectories(p) => {
                grid(&p.grid)?;
                packet(&p.initial)?;
                if let Some(f) = &p.final_ {
                    packet(f)?;
                }
                positive("dt", p.dt)?;
                if p.stride == 0 || p.steps % p.stride != 0 {
                    return Err(invalid("`stride` must be positive and divide `steps`"));
                }
                let t_end = p.steps as f64 * p.dt;
                if !(0.0..=t_end).contains(&p.t0) {
                    return Err(invalid(format!("`t0` must lie in [0, {t_end}]")));
                }
                if p.starts.is_empty() {
                    return Err(invalid("`starts` is empty"));
                }
            }
            Params::BornCheck(p) => {
                p.setup.validate().map_err(|e| invalid(e.to_string()))?;
                nonneg("sigma_limit", p.sigma_limit)?;
                if p.n_particles == 0 {
                    return Err(invalid("`n_particles` must be positive"));
                }
            }
            Params::AppendixCheck(p) => {
                grid(&p.grid)?;
                packet(&p.packet)?;
                nonneg("tolerance", p.tolerance)?;
            }
            Params::Equivariance(p) => {
                grid(&p.grid)?;
                packet(&p.packet)?;
                positive("dt", p.dt)?;
                let t_end = p.steps as f64 * p.dt;
                if !(0.0..=t_end).contains(&p.t_check) {
                    return Err(invalid(format!("`t_check` must lie in [0, {t_end}]")));
                }
                if p.n_particles == 0 {
                    return Err(invalid("`n_particles` must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// TOML integers are signed 64-bit, so larger seeds could not be echoed.
fn check_seed(seed: u64) -> Result<(), CliError> {
    if seed > i64::MAX as u64 {
        return Err(invalid(format!("seed {seed} exceeds {}", i64::MAX)));
    }
    Ok(())
}
