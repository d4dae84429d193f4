//! Runs a validated experiment and renders its artifacts in memory; writing
//! them is left to [`write_artifacts`].

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use csbohm::ensemble::{
    appendix_average_check, born_experiment, equivariance_check, householder_basis, plane_wave_basis, sample_positions,
};
use csbohm::spin::{eigenspinor, Direction, MultiSpinState};
use csbohm::spin_geometry::{component_map, hidden_spin_vector_with_outcomes, sweep_maximum};
use csbohm::trajectories::{bohm_trajectory_span, cs_worldline, four_velocity, CurrentClass, FieldHistory};
use csbohm::two_state::{
    born_joint, conditional_state_with_threshold, entangled_weak_value_complex, reduced_weak_value,
    weak_spin_value_complex, EntangledContext, TwoStateContext,
};
use csbohm::wavepacket::{
    continuity_residual, current_cs_with_threshold, current_standard, evolve_final_backward_history, evolve_history,
    make_gaussian, FieldPair, Grid, GridWavefunction, Snapshot,
};
use csbohm::{LabError, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{
    AppendixParams, BasisKind, BornCheckParams, EntangledParams, EquivarianceParams, EvolveParams, ExperimentConfig,
    FieldsParams, Packet, Params, SpinMapParams, TrajectoriesParams, TrajectoryMode, WeakValueParams,
};
use crate::CliError;

pub const RESULT_FILE: &str = "result.json";
pub const CONFIG_FILE: &str = "resolved_config.toml";

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub pass: bool,
    pub summary: Value,
    pub files: Vec<Artifact>,
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::ExperimentFailed(e.to_string())
    }
}

/// Fixed-width scientific notation with 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self(header.join(",") + "\n")
    }

    fn row(&mut self, cells: &[String]) {
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }
}

fn dir(v: &[f64; 3]) -> Result<Direction, CliError> {
    Direction::try_from(*v).map_err(|e| CliError::ConfigInvalid(e.to_string()))
}

fn gaussian(grid: &Grid, p: &Packet) -> Result<GridWavefunction, CliError> {
    Ok(make_gaussian(grid, p.x0, p.sigma, p.k, None)?)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let (pass, mut body, files) = match &cfg.params {
        Params::WeakValue(p) => weak_value(p)?,
        Params::EntangledValue(p) => entangled(p)?,
        Params::SpinMap(p) => spin_map(p, cfg.seed)?,
        Params::Evolve(p) => evolve(p)?,
        Params::Fields(p) => fields(p)?,
        Params::Trajectories(p) => trajectories(p)?,
        Params::BornCheck(p) => born_check(p, cfg.seed)?,
        Params::AppendixCheck(p) => appendix(p)?,
        Params::Equivariance(p) => equivariance(p, cfg.seed)?,
    };
    let echo = cfg.echo();
    let obj = body.as_object_mut().expect("experiment summaries are objects");
    obj.insert("kind".into(), json!(cfg.kind().name()));
    obj.insert("seed".into(), json!(cfg.seed));
    obj.insert("pass".into(), json!(pass));
    obj.insert("config_echo".into(), serde_json::to_value(&echo).map_err(|e| CliError::Output(e.to_string()))?);

    let mut all = vec![
        Artifact { name: RESULT_FILE.into(), contents: to_json(&body)? },
        Artifact { name: CONFIG_FILE.into(), contents: cfg.echo_toml()? },
    ];
    all.extend(files);
    Ok(Artifacts { pass, summary: body, files: all })
}

fn to_json(v: &impl serde::Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Output(e.to_string()))
}

type Outcome = Result<(bool, Value, Vec<Artifact>), CliError>;

fn weak_value(p: &WeakValueParams) -> Outcome {
    let pre = eigenspinor(&dir(&p.initial_axis)?, p.initial_outcome);
    let post = eigenspinor(&dir(&p.final_axis)?, p.final_outcome);
    let ctx = TwoStateContext::with_threshold(pre, post, p.overlap_eps)?;
    let comps: Vec<Value> = p
        .components
        .iter()
        .map(|c| {
            let w = weak_spin_value_complex(&ctx, &dir(c)?);
            Ok(json!({ "direction": c, "value": w.re, "imaginary": w.im }))
        })
        .collect::<Result<_, CliError>>()?;
    let a = ctx.overlap();
    Ok((true, json!({ "overlap": [a.re, a.im], "components": comps }), vec![]))
}

fn entangled(p: &EntangledParams) -> Outcome {
    let state = MultiSpinState::from_amplitudes(p.amplitudes.map(|a| C64::new(a[0], a[1])));
    let (e, f) = (dir(&p.axis1)?, dir(&p.axis2)?);
    let ctx = EntangledContext::with_threshold(state, e, p.outcome1, f, p.outcome2, p.overlap_eps)?;
    let cond = conditional_state_with_threshold(&state, &e, p.outcome1, p.overlap_eps)?;
    let mut worst = 0.0_f64;
    let comps: Vec<Value> = p
        .components
        .iter()
        .map(|c| {
            let h = dir(c)?;
            let full = entangled_weak_value_complex(&ctx, &h);
            let reduced = reduced_weak_value(&ctx, &h)?;
            worst = worst.max((full.re - reduced).abs());
            Ok(json!({ "direction": c, "value": full.re, "imaginary": full.im, "reduced": reduced }))
        })
        .collect::<Result<_, CliError>>()?;
    let probability = born_joint(&state, &e, &f, p.outcome1, p.outcome2);
    let body = json!({
        "joint_probability": probability,
        "conditional_state": cond.0.map(|c| [c.re, c.im]),
        "components": comps,
        "max_reduction_difference": worst,
    });
    Ok((worst <= p.tolerance, body, vec![]))
}

fn spin_map(p: &SpinMapParams, seed: u64) -> Outcome {
    let (i, f) = (dir(&p.initial_axis)?, dir(&p.final_axis)?);
    let report = hidden_spin_vector_with_outcomes(&i, p.initial_outcome, &f, p.final_outcome, p.guard_deg)?;
    let ctx = TwoStateContext::from_axes(&i, p.initial_outcome, &f, p.final_outcome)?;
    let sweep = sweep_maximum(&ctx, p.coarse_steps, p.refinements);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Direction> = (0..p.n_directions)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            Direction::from_spherical(z.acos(), phi)
        })
        .collect();
    let map = component_map(&p.initial_outcome.orient(i), &p.final_outcome.orient(f), &dirs)?;
    let mut csv = Csv::new(&["nx", "ny", "nz", "value", "projection"]);
    let mut worst = 0.0_f64;
    for (n, v) in &map {
        let a = n.to_array();
        let proj: f64 = (0..3).map(|k| a[k] * report.vector[k]).sum();
        worst = worst.max((v - proj).abs());
        csv.row(&[num(a[0]), num(a[1]), num(a[2]), num(*v), num(proj)]);
    }
    let gap = (sweep.value - report.max_value).abs();
    let body = json!({
        "report": report,
        "sweep": { "direction": sweep.direction.to_array(), "value": sweep.value, "evaluations": sweep.evaluations },
        "sweep_gap": gap,
        "max_projection_error": worst,
    });
    Ok((gap <= p.tolerance && worst <= p.tolerance, body, vec![Artifact { name: "spin_map.csv".into(), contents: csv.0 }]))
}

fn field_rows(csv: &mut Csv, grid: &Grid, f: &FieldPair) {
    for j in 0..grid.n_points {
        csv.row(&[num(f.time), num(grid.x(j)), num(f.density[j]), num(f.current[j])]);
    }
}

fn evolve(p: &EvolveParams) -> Outcome {
    let psi = gaussian(&p.grid, &p.packet)?;
    let hist = evolve_history(&psi, p.dt, p.steps, None, p.stride)?;
    let mut csv = Csv::new(&["t", "x", "density", "current"]);
    for w in &hist {
        field_rows(&mut csv, &p.grid, &current_standard(w));
    }
    let last = hist.last().expect("history includes the initial state");
    let drift = (last.norm_sqr() - psi.norm_sqr()).abs();
    let snapshot = to_json(&Snapshot::from(last))?;
    let body = json!({
        "final_time": last.time(),
        "norm_drift": drift,
        "mean_position": last.expectation_x(),
        "mean_momentum": last.expectation_p(),
        "width": last.width(),
        "slices": hist.len(),
    });
    Ok((
        drift <= p.norm_tolerance,
        body,
        vec![
            Artifact { name: "evolve.csv".into(), contents: csv.0 },
            Artifact { name: "final_state.json".into(), contents: snapshot },
        ],
    ))
}

fn boundary_histories(
    grid: &Grid,
    initial: &Packet,
    final_: &Packet,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<(Vec<GridWavefunction>, Vec<GridWavefunction>), CliError> {
    let psi_i = gaussian(grid, initial)?;
    let f = gaussian(grid, final_)?;
    let psi_f = GridWavefunction::new(*grid, f.into_amplitudes(), steps as f64 * dt)?;
    let hi = evolve_history(&psi_i, dt, steps, None, stride)?;
    let hf = evolve_final_backward_history(&psi_f, dt, steps, None, stride)?;
    Ok((hi, hf))
}

fn fields(p: &FieldsParams) -> Outcome {
    let (hi, hf) = boundary_histories(&p.grid, &p.initial, &p.final_, p.dt, p.steps, p.stride)?;
    let cs: Vec<FieldPair> =
        hi.iter().zip(&hf).map(|(a, b)| current_cs_with_threshold(a, b, p.overlap_eps)).collect::<Result<_, _>>()?;
    let mut csv = Csv::new(&["t", "x", "density", "current"]);
    let (mut min_density, mut negative) = (f64::INFINITY, 0usize);
    for f in &cs {
        field_rows(&mut csv, &p.grid, f);
        min_density = f.density.iter().copied().fold(min_density, f64::min);
        negative += f.density.iter().filter(|d| **d < 0.0).count();
    }
    let residual = cs.windows(3).map(|w| continuity_residual(&w[0], &w[1], &w[2], p.grid.dx())).fold(0.0, f64::max);
    let overlap = hf[0].inner(&hi[0]);
    let body = json!({
        "overlap": [overlap.re, overlap.im],
        "min_density": min_density,
        "negative_density_points": negative,
        "max_continuity_residual": residual,
        "slices": cs.len(),
    });
    Ok((true, body, vec![Artifact { name: "fields.csv".into(), contents: csv.0 }]))
}

fn class_name(c: CurrentClass) -> &'static str {
    match c {
        CurrentClass::Timelike => "timelike",
        CurrentClass::Lightlike => "lightlike",
        CurrentClass::Spacelike => "spacelike",
    }
}

fn trajectories(p: &TrajectoriesParams) -> Outcome {
    let psi_i = gaussian(&p.grid, &p.initial)?;
    let hi = evolve_history(&psi_i, p.dt, p.steps, None, p.stride)?;
    let history = match (p.mode, &p.final_) {
        (TrajectoryMode::Bohm, _) => FieldHistory::standard(&hi)?,
        (TrajectoryMode::CausallySymmetric, None) => FieldHistory::causally_symmetric(&hi, &hi, p.overlap_eps)?,
        (TrajectoryMode::CausallySymmetric, Some(f)) => {
            let (_, hf) = boundary_histories(&p.grid, &p.initial, f, p.dt, p.steps, p.stride)?;
            FieldHistory::causally_symmetric(&hi, &hf, p.overlap_eps)?
        }
    };
    let mut csv = Csv::new(&["id", "lambda", "t", "x"]);
    let mut histogram: BTreeMap<&str, usize> = ["timelike", "lightlike", "spacelike"].into_iter().map(|k| (k, 0)).collect();
    let mut classify = |j0: f64, j1: f64| {
        if let Ok(u) = four_velocity(j0, j1) {
            *histogram.get_mut(class_name(u.class)).expect("all classes present") += 1;
        }
    };
    let (mut reversal_count, mut all_ok) = (0usize, true);
    let mut paths = Vec::new();
    for (id, &x0) in p.starts.iter().enumerate() {
        let entry = match p.mode {
            TrajectoryMode::Bohm => match bohm_trajectory_span(&history, x0, p.t0, history.t_end(), &p.integrator) {
                Ok(tr) => {
                    for &(t, x) in &tr.samples {
                        csv.row(&[id.to_string(), num(t - p.t0), num(t), num(x)]);
                        if let Some((j0, j1)) = history.sample(t, x) {
                            classify(j0, j1);
                        }
                    }
                    let last = tr.samples.last().expect("trajectory has samples");
                    json!({ "x0": x0, "status": "ok", "final": [last.0, last.1] })
                }
                Err(e) => {
                    all_ok = false;
                    json!({ "x0": x0, "status": e.to_string() })
                }
            },
            TrajectoryMode::CausallySymmetric => match cs_worldline(&history, x0, p.t0, &p.integrator) {
                Ok(wl) => {
                    for s in &wl.samples {
                        csv.row(&[id.to_string(), num(s.lambda), num(s.t), num(s.x)]);
                        classify(s.j0, s.j1);
                    }
                    reversal_count += wl.reversal_events.len();
                    let last = wl.samples.last().expect("worldline has samples");
                    json!({
                        "x0": x0,
                        "status": "ok",
                        "termination": wl.termination,
                        "reversals": wl.reversal_events,
                        "final": [last.t, last.x],
                    })
                }
                Err(e) => {
                    all_ok = false;
                    json!({ "x0": x0, "status": e.to_string() })
                }
            },
        };
        paths.push(entry);
    }
    let body = json!({
        "reversal_count": reversal_count,
        "classification_histogram": histogram,
        "paths": paths,
    });
    Ok((all_ok, body, vec![Artifact { name: "trajectories.csv".into(), contents: csv.0 }]))
}

fn born_check(p: &BornCheckParams, seed: u64) -> Outcome {
    let run = born_experiment(&p.setup, p.n_particles, seed, &p.integrator)?;
    let dev = run.max_deviation_sigmas();
    let body = json!({
        "n_particles": run.n_particles,
        "counts": run.outcome_counts,
        "expected": run.expected,
        "frequencies": run.frequencies(),
        "sigma": run.sigma,
        "max_deviation_sigmas": dev,
        "sigma_limit": p.sigma_limit,
        "ks_statistic": run.max_ks_statistic,
    });
    Ok((dev < p.sigma_limit, body, vec![]))
}

fn appendix(p: &AppendixParams) -> Outcome {
    let psi = gaussian(&p.grid, &p.packet)?;
    let basis = match p.basis {
        BasisKind::PlaneWave => plane_wave_basis(&p.grid, psi.time())?,
        BasisKind::ThroughState => householder_basis(&psi)?,
    };
    let deviation = appendix_average_check(&psi, &basis)?;
    let jmax = current_standard(&psi).current.iter().fold(0.0_f64, |m, j| m.max(j.abs()));
    let relative = deviation / jmax;
    let body = json!({
        "basis_size": basis.len(),
        "max_abs_deviation": deviation,
        "max_current": jmax,
        "relative_deviation": relative,
        "tolerance": p.tolerance,
    });
    Ok((relative < p.tolerance, body, vec![]))
}

fn equivariance(p: &EquivarianceParams, seed: u64) -> Outcome {
    let psi = gaussian(&p.grid, &p.packet)?;
    let history = FieldHistory::standard(&evolve_history(&psi, p.dt, p.steps, None, 1)?)?;
    let samples = sample_positions(&psi, p.n_particles, seed)?;
    let ks = equivariance_check(&history, &samples, 0.0, p.t_check, &p.integrator)?;
    let critical = p.ks_coefficient / (p.n_particles as f64).sqrt();
    let body = json!({ "ks_statistic": ks, "critical_value": critical, "t_check": p.t_check, "n_particles": p.n_particles });
    Ok((ks < critical, body, vec![]))
}

/// Writes every artifact into `dir` through a temporary file in the same
/// directory followed by a rename, so readers never see partial files.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for a in &artifacts.files {
        if a.name.is_empty() || a.name.contains(['/', '\\']) || a.name.starts_with('.') {
            return Err(CliError::Output(format!("refusing to write artifact `{}`", a.name)));
        }
        let target = dir.join(&a.name);
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Output(e.to_string()))?;
        tmp.write_all(a.contents.as_bytes()).map_err(|e| CliError::Output(e.to_string()))?;
        tmp.persist(&target).map_err(|e| CliError::Output(e.to_string()))?;
        written.push(target);
    }
    Ok(written)
}
