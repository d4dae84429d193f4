//! Statistical checks: |ψ|² sampling, the packet-separation measurement
//! experiment, equivariance of the Bohm flow, and the weighted-average
//! identity that recovers the standard current from causally symmetric ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::trajectories::{bohm_trajectory_span, transport_positions, FieldHistory, IntegratorOptions};
use crate::two_state::DEFAULT_OVERLAP_EPS;
use crate::wavepacket::{
    cs_fields_with_overlap, current_standard, evolve_history, make_gaussian, FieldPair, Grid, GridWavefunction,
};
use crate::C64;

/// Kolmogorov–Smirnov critical value at α ≈ 0.01 for `n` samples.
pub fn ks_critical_value(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Piecewise-linear CDF of a grid density (cumulative trapezoid rule).
#[derive(Clone, Debug)]
pub struct DensityCdf {
    grid: Grid,
    cumulative: Vec<f64>,
}

impl DensityCdf {
    pub fn new(grid: &Grid, density: &[f64]) -> LabResult<Self> {
        if density.len() != grid.n_points {
            return Err(LabError::LengthMismatch { expected: grid.n_points, found: density.len() });
        }
        let dx = grid.dx();
        let mut cumulative = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * dx * (w[0].max(0.0) + w[1].max(0.0));
            cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(LabError::InvalidSetup("density has no mass".into()));
        }
        cumulative.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { grid: *grid, cumulative })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s = (x - self.grid.x_min) / self.grid.dx();
        if s <= 0.0 {
            return 0.0;
        }
        let last = self.cumulative.len() - 1;
        if s >= last as f64 {
            return 1.0;
        }
        let j = s.floor() as usize;
        let u = s - j as f64;
        self.cumulative[j] + u * (self.cumulative[j + 1] - self.cumulative[j])
    }

    /// Inverse of [`cdf`](Self::cdf) for `u` in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let c = &self.cumulative;
        let j = c.partition_point(|&v| v <= u).clamp(1, c.len() - 1) - 1;
        let span = c[j + 1] - c[j];
        let frac = if span > 0.0 { (u - c[j]) / span } else { 0.0 };
        self.grid.x(j) + frac * self.grid.dx()
    }
}

/// `n` positions distributed as |ψ|², by inverse-CDF sampling with a
/// ChaCha8 stream seeded from `seed`.
pub fn sample_positions(psi: &GridWavefunction, n: usize, seed: u64) -> LabResult<Vec<f64>> {
    let cdf = DensityCdf::new(psi.grid(), &psi.density())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniforms: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    Ok(uniforms.into_par_iter().map(|u| cdf.quantile(u)).collect())
}

/// One-sample KS statistic max(i/n − F(x_(i)), F(x_(i)) − (i−1)/n).
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Transports `samples` from `t0` to `t_check` along the Bohm flow of
/// `history` and returns the KS statistic against |ψ(x, t_check)|².
pub fn equivariance_check(
    history: &FieldHistory,
    samples: &[f64],
    t0: f64,
    t_check: f64,
    opts: &IntegratorOptions,
) -> LabResult<f64> {
    let finals = transport_positions(history, samples, t0, t_check, opts)?;
    let cdf = DensityCdf::new(history.grid(), &history.density_at_time(t_check))?;
    Ok(ks_statistic(&finals, |x| cdf.cdf(x)))
}

/// A two-outcome spin measurement modelled by packet separation: the
/// initial state is Σ c_m g(x)|m⟩ with a common Gaussian envelope g, and at
/// `t_split` outcome 0 receives a momentum kick +k_sep and outcome 1 a kick
/// −k_sep, so the branches end up right and left of the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSetup {
    pub grid: Grid,
    /// Amplitudes of the two outcomes, as (re, im) pairs.
    pub coefficients: Vec<[f64; 2]>,
    pub x0: f64,
    pub sigma: f64,
    pub k_sep: f64,
    pub t_split: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Evolution steps between stored field slices.
    pub stride: usize,
}

/// Tolerance for both separation criteria at the final time.
pub const SEPARATION_TOLERANCE: f64 = 1e-6;

impl MeasurementSetup {
    /// Unit-width packet kicked to ±5, separated by t = 3.
    pub fn standard(c0: C64, c1: C64) -> Self {
        Self {
            grid: Grid { x_min: -40.0, x_max: 40.0, n_points: 2048 },
            coefficients: vec![[c0.re, c0.im], [c1.re, c1.im]],
            x0: 0.0,
            sigma: 1.0,
            k_sep: 5.0,
            t_split: 0.0,
            t_final: 3.0,
            dt: 0.005,
            stride: 2,
        }
    }

    pub fn coefficients(&self) -> Vec<C64> {
        self.coefficients.iter().map(|c| C64::new(c[0], c[1])).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients().iter().map(|c| c.norm_sqr()).collect()
    }

    fn step_count(&self, t: f64) -> LabResult<usize> {
        let s = t / self.dt;
        let r = s.round();
        if (s - r).abs() > 1e-9 * s.max(1.0) || r < 0.0 {
            return Err(LabError::InvalidSetup(format!("time {t} is not a multiple of dt = {}", self.dt)));
        }
        Ok(r as usize)
    }

    pub fn validate(&self) -> LabResult<()> {
        self.grid.validate()?;
        if self.coefficients.len() != 2 {
            return Err(LabError::InvalidSetup(format!(
                "exactly two outcomes are supported, got {}",
                self.coefficients.len()
            )));
        }
        let total: f64 = self.probabilities().iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(LabError::InvalidSetup(format!("Σ|c|² = {total}, expected 1")));
        }
        if !(self.dt > 0.0) || self.stride == 0 {
            return Err(LabError::InvalidSetup("dt must be positive and stride nonzero".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(LabError::InvalidSetup("sigma must be positive".into()));
        }
        if !(0.0 <= self.t_split && self.t_split < self.t_final) {
            return Err(LabError::InvalidSetup("need 0 ≤ t_split < t_final".into()));
        }
        let (ns, nf) = (self.step_count(self.t_split)?, self.step_count(self.t_final)?);
        if ns % self.stride != 0 || nf % self.stride != 0 {
            return Err(LabError::InvalidSetup("t_split and t_final must fall on stored slices".into()));
        }
        Ok(())
    }
}

/// Evolved branches and the guidance fields of a [`MeasurementSetup`].
#[derive(Clone, Debug)]
pub struct MeasurementFields {
    pub history: FieldHistory,
    /// Normalized branch wavefunctions at the final time.
    pub final_branches: Vec<GridWavefunction>,
    /// The initial state Σ c_m g(x)|m⟩ (spatial part; every branch shares it).
    pub initial: GridWavefunction,
}

pub fn measurement_fields(setup: &MeasurementSetup) -> LabResult<MeasurementFields> {
    setup.validate()?;
    let g = make_gaussian(&setup.grid, setup.x0, setup.sigma, 0.0, None)?;
    let probs = setup.probabilities();
    let (ns, nf) = (setup.step_count(setup.t_split)?, setup.step_count(setup.t_final)?);

    let before = evolve_history(&g, setup.dt, ns, None, setup.stride)?;
    let at_split = before.last().expect("history holds the initial state").clone();
    let kicks = [setup.k_sep, -setup.k_sep];
    let branches: Vec<Vec<GridWavefunction>> = kicks
        .par_iter()
        .map(|&k| evolve_history(&at_split.clone().kicked(k), setup.dt, nf - ns, None, setup.stride))
        .collect::<LabResult<_>>()?;

    // Spin states of different outcomes are orthogonal, so the density and
    // current are the |c_m|²-weighted sums of the branch fields.
    let mut fields: Vec<FieldPair> = before[..before.len() - 1].iter().map(current_standard).collect();
    let branch_fields: Vec<Vec<FieldPair>> = branches.iter().map(|h| h.par_iter().map(current_standard).collect()).collect();
    for s in 0..branch_fields[0].len() {
        let mut f = FieldPair {
            density: vec![0.0; setup.grid.n_points],
            current: vec![0.0; setup.grid.n_points],
            time: branch_fields[0][s].time,
        };
        for (m, bf) in branch_fields.iter().enumerate() {
            for j in 0..setup.grid.n_points {
                f.density[j] += probs[m] * bf[s].density[j];
                f.current[j] += probs[m] * bf[s].current[j];
            }
        }
        fields.push(f);
    }
    let history = FieldHistory::new(setup.grid, fields)?;
    let final_branches = branches.into_iter().map(|mut h| h.pop().expect("non-empty history")).collect();
    Ok(MeasurementFields { history, final_branches, initial: g })
}

/// Checks that the final branches sit on the expected sides of the origin
/// and do not overlap.
pub fn check_separation(setup: &MeasurementSetup, branches: &[GridWavefunction]) -> LabResult<()> {
    let grid = &setup.grid;
    let probs = setup.probabilities();
    for (m, b) in branches.iter().enumerate() {
        if probs[m] == 0.0 {
            continue;
        }
        let rho = b.density();
        let wrong: Vec<f64> =
            rho.iter().enumerate().map(|(j, r)| if (grid.x(j) > 0.0) == (m == 0) { 0.0 } else { *r }).collect();
        let leak = grid.integrate(&wrong) / grid.integrate(&rho);
        if !(leak < SEPARATION_TOLERANCE) {
            return Err(LabError::PacketsNotSeparated(format!("outcome {m} has mass {leak:e} on the wrong side")));
        }
    }
    let overlap: Vec<f64> = branches[0].amplitudes().iter().zip(branches[1].amplitudes()).map(|(a, b)| a.norm() * b.norm()).collect();
    let ov = grid.integrate(&overlap);
    if !(ov < SEPARATION_TOLERANCE) {
        return Err(LabError::PacketsNotSeparated(format!("branch overlap ∫|f0||f1| = {ov:e}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleRun {
    pub seed: u64,
    pub n_particles: usize,
    pub outcome_counts: Vec<usize>,
    pub expected: Vec<f64>,
    /// Binomial standard deviation of each outcome frequency.
    pub sigma: Vec<f64>,
    /// KS statistic of the final positions against the final |ψ|².
    pub max_ks_statistic: f64,
}

impl EnsembleRun {
    pub fn frequencies(&self) -> Vec<f64> {
        self.outcome_counts.iter().map(|&c| c as f64 / self.n_particles as f64).collect()
    }

    /// Largest |frequency − |c|²| in units of the binomial σ (0 when σ = 0
    /// and the frequency is exact).
    pub fn max_deviation_sigmas(&self) -> f64 {
        self.frequencies()
            .iter()
            .zip(&self.expected)
            .zip(&self.sigma)
            .map(|((f, p), s)| {
                let d = (f - p).abs();
                if d == 0.0 {
                    0.0
                } else if *s == 0.0 {
                    f64::INFINITY
                } else {
                    d / s
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Samples `n` initial positions from |ψ_i|², follows each along the Bohm
/// flow of the separating branches and counts which side of the origin it
/// ends on (x > 0 is outcome 0).
pub fn born_experiment(setup: &MeasurementSetup, n: usize, seed: u64, opts: &IntegratorOptions) -> LabResult<EnsembleRun> {
    let mf = measurement_fields(setup)?;
    check_separation(setup, &mf.final_branches)?;
    let starts = sample_positions(&mf.initial, n, seed)?;
    let t_end = mf.history.t_end();
    let finals: Vec<f64> = starts
        .par_iter()
        .map(|&x0| bohm_trajectory_span(&mf.history, x0, 0.0, t_end, opts).map(|t| t.final_position()))
        .collect::<LabResult<_>>()?;
    let mut counts = vec![0usize; 2];
    for &x in &finals {
        if x > 0.0 {
            counts[0] += 1;
        } else if x < 0.0 {
            counts[1] += 1;
        } else {
            return Err(LabError::PacketsNotSeparated("a trajectory ended on the dividing point".into()));
        }
    }
    let expected = setup.probabilities();
    let sigma = expected.iter().map(|p| (p * (1.0 - p) / n as f64).sqrt()).collect();
    let cdf = DensityCdf::new(&setup.grid, &mf.history.density_at_time(t_end))?;
    let max_ks_statistic = ks_statistic(&finals, |x| cdf.cdf(x));
    Ok(EnsembleRun { seed, n_particles: n, outcome_counts: counts, expected, sigma, max_ks_statistic })
}

/// A two-outcome setup with |c_0|² uniform in [0.05, 0.95] and random
/// relative phase.
pub fn random_setup<R: Rng>(rng: &mut R) -> MeasurementSetup {
    let p: f64 = rng.random_range(0.05..0.95);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    MeasurementSetup::standard(C64::new(p.sqrt(), 0.0), C64::from_polar((1.0 - p).sqrt(), phase))
}

/// Normalized discrete plane waves e^{ikx}/√L for every grid wavenumber.
pub fn plane_wave_basis(grid: &Grid, time: f64) -> LabResult<Vec<GridWavefunction>> {
    grid.validate()?;
    let norm = 1.0 / grid.length().sqrt();
    grid.wavenumbers()
        .into_iter()
        .map(|k| {
            let amps = (0..grid.n_points).map(|j| C64::from_polar(norm, k * grid.x(j))).collect();
            GridWavefunction::new_unchecked(*grid, amps, time)
        })
        .collect()
}

/// An orthonormal basis whose first element is ψ (up to a phase), built from
/// the columns of a Householder reflection.
pub fn householder_basis(psi: &GridWavefunction) -> LabResult<Vec<GridWavefunction>> {
    let grid = *psi.grid();
    let sdx = grid.dx().sqrt();
    let n = grid.n_points;
    // ψ as a unit vector of ℂⁿ
    let norm = psi.norm_sqr().sqrt();
    if !(norm > 0.0) {
        return Err(LabError::InvalidSetup("cannot build a basis around a zero wavefunction".into()));
    }
    let v: Vec<C64> = psi.amplitudes().iter().map(|c| c * (sdx / norm)).collect();
    let gamma = if v[0].norm() > 0.0 { -v[0] / v[0].norm() } else { C64::new(-1.0, 0.0) };
    let mut u = v;
    u[0] -= gamma;
    let u2: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    (0..n)
        .into_par_iter()
        .map(|k| {
            let coef = u[k].conj() * (2.0 / u2);
            let amps = (0..n)
                .map(|j| {
                    let delta = if j == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                    (delta - u[j] * coef) / sdx
                })
                .collect();
            GridWavefunction::new_unchecked(grid, amps, psi.time())
        })
        .collect()
}

/// Relative residual of Σ_f |f⟩⟨f| φ = φ, maximized over a few random probes.
pub fn resolution_residual(basis: &[GridWavefunction], seed: u64) -> LabResult<f64> {
    let grid = *basis.first().ok_or_else(|| LabError::IncompleteBasis("basis is empty".into()))?.grid();
    if basis.iter().any(|b| b.grid() != &grid) {
        return Err(LabError::GridMismatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let amps: Vec<C64> = (0..grid.n_points).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let probe = GridWavefunction::new_unchecked(grid, amps, basis[0].time())?;
        let coeffs: Vec<C64> = basis.par_iter().map(|f| f.inner(&probe)).collect();
        let mut recon = vec![C64::new(0.0, 0.0); grid.n_points];
        for (f, a) in basis.iter().zip(&coeffs) {
            for (r, b) in recon.iter_mut().zip(f.amplitudes()) {
                *r += a * b;
            }
        }
        let err: f64 = recon.iter().zip(probe.amplitudes()).map(|(r, p)| (r - p).norm_sqr()).sum::<f64>();
        let size: f64 = probe.amplitudes().iter().map(|p| p.norm_sqr()).sum();
        worst = worst.max((err / size).sqrt());
    }
    Ok(worst)
}

/// Largest resolution-of-identity residual accepted as complete.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;

/// max_x |Σ_f j_cs(x | i, f)·P(f|i) − j(x)| over a complete basis, where
/// P(f|i) = |⟨f|i⟩|². Terms with a normalized overlap at or below the default
/// threshold contribute nothing.
pub fn appendix_average_check(psi_i: &GridWavefunction, basis: &[GridWavefunction]) -> LabResult<f64> {
    let grid = *psi_i.grid();
    if basis.len() < grid.n_points {
        return Err(LabError::IncompleteBasis(format!("{} vectors for {} grid points", basis.len(), grid.n_points)));
    }
    if basis.iter().any(|b| b.grid() != &grid) {
        return Err(LabError::GridMismatch);
    }
    let residual = resolution_residual(basis, 0)?;
    if !(residual < COMPLETENESS_TOLERANCE) {
        return Err(LabError::IncompleteBasis(format!("resolution of identity residual {residual:e}")));
    }
    let psi_norm = psi_i.norm_sqr().sqrt();
    // fixed chunking keeps the summation order, and so the result,
    // independent of thread scheduling
    let partials: Vec<Vec<f64>> = basis
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = vec![0.0; grid.n_points];
            for f in chunk {
                let f = f.clone().with_spin(None);
                let a = f.inner(psi_i);
                if a.norm() <= DEFAULT_OVERLAP_EPS * psi_norm * f.norm_sqr().sqrt() {
                    continue;
                }
                // j_cs·|a|² with j_cs = Re[(ψ_f*∂ψ_i − ψ_i∂ψ_f*)/(2ia)]
                let fields = cs_fields_with_overlap(psi_i, &f, a.conj());
                acc.iter_mut().zip(&fields.current).for_each(|(s, j)| *s += j);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; grid.n_points];
    for p in &partials {
        total.iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
    let standard = current_standard(psi_i);
    Ok(total.iter().zip(&standard.current).map(|(s, j)| (s - j).abs()).fold(0.0, f64::max))
}
