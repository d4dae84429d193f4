//! Particle paths guided by a current field.
//!
//! A [`FieldHistory`] stores a density/current pair (j⁰, j¹) on every grid
//! point for a sequence of times and interpolates it bilinearly. Standard
//! Bohm trajectories follow dx/dt = j¹/j⁰. Causally symmetric worldlines are
//! integral curves of the two-vector (j⁰, j¹) in the (t, x) plane,
//! parameterized by λ with dt/dλ = j⁰ and dx/dλ = j¹; this stays regular
//! where j⁰ changes sign and the worldline turns back in time.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, LabResult};
use crate::wavepacket::{current_cs_with_threshold, current_standard, FieldPair, Grid, GridWavefunction};

/// Node threshold as a fraction of the largest |j⁰| in the history.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-12;

/// Density and current on a grid for an increasing sequence of times.
#[derive(Clone, Debug)]
pub struct FieldHistory {
    grid: Grid,
    times: Vec<f64>,
    j0: Vec<Vec<f64>>,
    j1: Vec<Vec<f64>>,
    max_density: f64,
    max_current: f64,
}

impl FieldHistory {
    pub fn new(grid: Grid, fields: Vec<FieldPair>) -> LabResult<Self> {
        if fields.is_empty() {
            return Err(LabError::InvalidSetup("field history is empty".into()));
        }
        for w in fields.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(LabError::InvalidSetup("field history times must increase strictly".into()));
            }
        }
        for f in &fields {
            for len in [f.density.len(), f.current.len()] {
                if len != grid.n_points {
                    return Err(LabError::LengthMismatch { expected: grid.n_points, found: len });
                }
            }
        }
        let max_density = fields.iter().flat_map(|f| f.density.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
        let max_current = fields.iter().flat_map(|f| f.current.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
        let times = fields.iter().map(|f| f.time).collect();
        let (j0, j1) = fields.into_iter().map(|f| (f.density, f.current)).unzip();
        Ok(Self { grid, times, j0, j1, max_density, max_current })
    }

    /// (|ψ|², j) for a forward-evolved history.
    pub fn standard(history: &[GridWavefunction]) -> LabResult<Self> {
        let first = history.first().ok_or_else(|| LabError::InvalidSetup("empty wavefunction history".into()))?;
        let fields = history.par_iter().map(current_standard).collect();
        Self::new(*first.grid(), fields)
    }

    /// (j⁰, j¹) of the causally symmetric model from time-aligned initial and
    /// final histories.
    pub fn causally_symmetric(hist_i: &[GridWavefunction], hist_f: &[GridWavefunction], eps: f64) -> LabResult<Self> {
        if hist_i.len() != hist_f.len() {
            return Err(LabError::LengthMismatch { expected: hist_i.len(), found: hist_f.len() });
        }
        let first = hist_i.first().ok_or_else(|| LabError::InvalidSetup("empty wavefunction history".into()))?;
        let fields = hist_i
            .par_iter()
            .zip(hist_f.par_iter())
            .map(|(i, f)| current_cs_with_threshold(i, f, eps))
            .collect::<LabResult<Vec<_>>>()?;
        Self::new(*first.grid(), fields)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty history")
    }

    pub fn max_density(&self) -> f64 {
        self.max_density
    }

    pub fn max_current(&self) -> f64 {
        self.max_current
    }

    /// The stored fields at slice `k`.
    pub fn slice(&self, k: usize) -> (&[f64], &[f64]) {
        (&self.j0[k], &self.j1[k])
    }

    /// j⁰ along the grid at time `t` (linear in time between slices).
    pub fn density_at_time(&self, t: f64) -> Vec<f64> {
        let (k, w) = self.time_weight(t);
        let (a, b) = (&self.j0[k], &self.j0[(k + 1).min(self.times.len() - 1)]);
        a.iter().zip(b).map(|(a, b)| a + w * (b - a)).collect()
    }

    fn time_weight(&self, t: f64) -> (usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 2, 1.0);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        (k, w)
    }

    /// Bilinear interpolation of (j⁰, j¹). Time is clamped to the stored
    /// range; `None` if `x` lies outside `[x_0, x_{n−1}]`.
    pub fn sample(&self, t: f64, x: f64) -> Option<(f64, f64)> {
        let g = &self.grid;
        let s = (x - g.x_min) / g.dx();
        if !(s >= 0.0) || s > (g.n_points - 1) as f64 {
            return None;
        }
        let i = (s.floor() as usize).min(g.n_points - 2);
        let u = s - i as f64;
        let (k, w) = self.time_weight(t);
        let k1 = (k + 1).min(self.times.len() - 1);
        let lerp = |f: &[Vec<f64>]| {
            let a = f[k][i] + u * (f[k][i + 1] - f[k][i]);
            let b = f[k1][i] + u * (f[k1][i + 1] - f[k1][i]);
            a + w * (b - a)
        };
        Some((lerp(&self.j0), lerp(&self.j1)))
    }
}

/// Step control for the trajectory integrators.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// A step is halved when the field changes by more than this fraction
    /// across it.
    pub max_field_change: f64,
    /// Node threshold relative to the largest density.
    pub density_floor: f64,
    /// Upper bound on the worldline parameter; `None` runs until the
    /// worldline leaves the stored time range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 1_000_000,
            max_field_change: 0.1,
            density_floor: DEFAULT_DENSITY_FLOOR,
            lambda_max: None,
        }
    }
}

impl IntegratorOptions {
    /// Looser tolerances for large ensembles.
    pub fn ensemble() -> Self {
        Self { rtol: 1e-7, atol: 1e-7, ..Self::default() }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dopri_step<const N: usize, F>(f: &mut F, s: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> LabResult<([f64; N], [f64; N], [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> LabResult<[f64; N]>,
{
    let comb = |terms: &[(f64, &[f64; N])]| {
        let mut out = *y;
        for (c, k) in terms {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
        out
    };
    let k2 = f(s + C2 * h, &comb(&[(A21, k1)]))?;
    let k3 = f(s + C3 * h, &comb(&[(A31, k1), (A32, &k2)]))?;
    let k4 = f(s + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(s + C5 * h, &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(s + h, &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y5 = comb(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(s + h, &y5)?;
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok((y5, err, k7))
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &IntegratorOptions) -> f64 {
    (0..N)
        .map(|i| err[i].abs() / (opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs())))
        .fold(0.0, f64::max)
}

fn field_jump(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let scale = (a.0 * a.0 + a.1 * a.1).sqrt().max((b.0 * b.0 + b.1 * b.1).sqrt());
    if scale == 0.0 { 0.0 } else { d / scale }
}

fn next_step(h: f64, err: f64) -> f64 {
    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
    h * fac
}

/// A standard Bohm trajectory x(t).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub x0: f64,
    pub t0: f64,
    /// `(t, x)` samples with strictly increasing `t`; every stored slice time
    /// in the integration span is a sample.
    pub samples: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn final_position(&self) -> f64 {
        self.samples.last().expect("trajectory has samples").1
    }

    /// Linear interpolation between samples.
    pub fn position_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        if t < s[0].0 || t > s[s.len() - 1].0 {
            return None;
        }
        let k = s.partition_point(|p| p.0 <= t).saturating_sub(1).min(s.len().saturating_sub(2));
        if s.len() == 1 {
            return Some(s[0].1);
        }
        let (a, b) = (s[k], s[k + 1]);
        Some(a.1 + (t - a.0) / (b.0 - a.0) * (b.1 - a.1))
    }
}

fn bohm_velocity(history: &FieldHistory, floor: f64, t: f64, x: f64) -> LabResult<f64> {
    let (rho, j) = history.sample(t, x).ok_or(LabError::GridExit { t, x })?;
    if !(rho > floor) {
        return Err(LabError::NodeEncounter { t, x, density: rho });
    }
    Ok(j / rho)
}

/// Integrates dx/dt = j/ρ from `(history.t_start(), x0)` to the end of the
/// history.
pub fn bohm_trajectory(history: &FieldHistory, x0: f64, opts: &IntegratorOptions) -> LabResult<Trajectory> {
    bohm_trajectory_span(history, x0, history.t_start(), history.t_end(), opts)
}

/// Integrates dx/dt = j/ρ from `(t0, x0)` to `t1 ≥ t0`. Steps never straddle
/// a stored slice time.
pub fn bohm_trajectory_span(history: &FieldHistory, x0: f64, t0: f64, t1: f64, opts: &IntegratorOptions) -> LabResult<Trajectory> {
    if t0 < history.t_start() || t1 > history.t_end() || t1 < t0 {
        return Err(LabError::InvalidSetup(format!(
            "trajectory span [{t0}, {t1}] outside history [{}, {}]",
            history.t_start(),
            history.t_end()
        )));
    }
    let floor = opts.density_floor * history.max_density;
    let mut rhs = |t: f64, y: &[f64; 1]| bohm_velocity(history, floor, t, y[0]).map(|v| [v]);

    // breakpoints: stored slice times inside (t0, t1], then t1
    let mut stops: Vec<f64> = history.times.iter().copied().filter(|&s| s > t0 && s < t1).collect();
    stops.push(t1);

    let mut t = t0;
    let mut y = [x0];
    let mut samples = vec![(t0, x0)];
    let mut k1 = rhs(t, &y)?;
    let span = (t1 - t0).max(f64::MIN_POSITIVE);
    let mut h = (span / 100.0).min(stops[0] - t0).max(span * 1e-6);
    let h_min = span * 1e-14;
    let mut attempts = 0usize;

    for &stop in &stops {
        while t < stop {
            attempts += 1;
            if attempts > opts.max_steps {
                return Err(LabError::StepLimit { max_steps: opts.max_steps });
            }
            let landing = t + h >= stop - 1e-12 * span;
            let step = if landing { stop - t } else { h };
            let (y5, err, k7) = match dopri_step(&mut rhs, t, &y, &k1, step) {
                Ok(r) => r,
                Err(e @ (LabError::GridExit { .. } | LabError::NodeEncounter { .. })) if step > h_min => {
                    let _ = e;
                    h = step * 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let en = error_norm(&err, &y, &y5, opts);
            let start_field = history.sample(t, y[0]).expect("current point is inside");
            let end_field = history.sample(t + step, y5[0]).ok_or(LabError::GridExit { t: t + step, x: y5[0] })?;
            let jump = field_jump(start_field, end_field);
            if step > h_min && (en > 1.0 || jump > opts.max_field_change) {
                h = if en > 1.0 { next_step(step, en).min(0.5 * step) } else { 0.5 * step };
                continue;
            }
            t = if landing { stop } else { t + step };
            y = y5;
            k1 = k7;
            samples.push((t, y[0]));
            h = next_step(step, en);
            if landing {
                // restart the estimate after a slice boundary where the field
                // has a kink
                k1 = rhs(t, &y)?;
            }
        }
    }
    Ok(Trajectory { x0, t0, samples })
}

/// Integrates many trajectories in parallel; results are in input order.
pub fn bohm_trajectories(history: &FieldHistory, starts: &[f64], opts: &IntegratorOptions) -> Vec<LabResult<Trajectory>> {
    starts.par_iter().map(|&x0| bohm_trajectory(history, x0, opts)).collect()
}

/// Final positions at `t1` for many starting points at `t0`.
pub fn transport_positions(history: &FieldHistory, starts: &[f64], t0: f64, t1: f64, opts: &IntegratorOptions) -> LabResult<Vec<f64>> {
    starts
        .par_iter()
        .map(|&x0| bohm_trajectory_span(history, x0, t0, t1, opts).map(|tr| tr.final_position()))
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct WorldLineSample {
    pub lambda: f64,
    pub t: f64,
    pub x: f64,
    pub j0: f64,
    pub j1: f64,
}

/// A point where j⁰ changes sign along the worldline, i.e. where it turns
/// around in coordinate time.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ReversalEvent {
    pub lambda: f64,
    pub t: f64,
    pub x: f64,
    /// True when the worldline was running forward in time before the event.
    pub was_forward: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    ReachedStart,
    LambdaLimit,
}

/// A worldline in (t, x); `t` need not be monotone in `λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorldLine {
    pub samples: Vec<WorldLineSample>,
    pub reversal_events: Vec<ReversalEvent>,
    pub termination: Termination,
}

impl WorldLine {
    pub fn reversal_lambdas(&self) -> Vec<f64> {
        self.reversal_events.iter().map(|e| e.lambda).collect()
    }

    pub fn is_time_monotone(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].t > w[0].t)
    }

    /// x at coordinate time `t` on the first forward-running segment that
    /// spans it, by cubic Hermite interpolation with dx/dt = j¹/j⁰.
    pub fn position_at_time(&self, t: f64) -> Option<f64> {
        self.samples.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            if !(a.j0 > 0.0 && b.j0 > 0.0 && a.t <= t && t <= b.t) {
                return None;
            }
            let h = b.t - a.t;
            if h == 0.0 {
                return Some(a.x);
            }
            let s = (t - a.t) / h;
            let (va, vb) = (a.j1 / a.j0, b.j1 / b.j0);
            Some(hermite(s, a.x, b.x, va * h, vb * h))
        })
    }
}

fn hermite(s: f64, p0: f64, p1: f64, m0: f64, m1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1
}

/// Integrates the worldline through `(t0, x0)` along (j⁰, j¹) until it leaves
/// the stored time range (or reaches `lambda_max`).
pub fn cs_worldline(history: &FieldHistory, x0: f64, t0: f64, opts: &IntegratorOptions) -> LabResult<WorldLine> {
    let floor = opts.density_floor * history.max_density.max(history.max_current);
    let (ta, tb) = (history.t_start(), history.t_end());
    let mut rhs = |_l: f64, y: &[f64; 2]| -> LabResult<[f64; 2]> {
        let (j0, j1) = history.sample(y[0], y[1]).ok_or(LabError::GridExit { t: y[0], x: y[1] })?;
        if j0.abs() + j1.abs() <= floor {
            return Err(LabError::NodeEncounter { t: y[0], x: y[1], density: j0 });
        }
        Ok([j0, j1])
    };
    let (j00, j10) = history.sample(t0, x0).ok_or(LabError::GridExit { t: t0, x: x0 })?;
    if !(j00.abs() > opts.density_floor * history.max_density) || t0 < ta || t0 > tb {
        return Err(LabError::NodeEncounter { t: t0, x: x0, density: j00 });
    }

    let mut lam = 0.0;
    let mut y = [t0, x0];
    let mut k1 = [j00, j10];
    let mut samples = vec![WorldLineSample { lambda: 0.0, t: t0, x: x0, j0: j00, j1: j10 }];
    let mut events = Vec::new();
    let scale = (j00 * j00 + j10 * j10).sqrt();
    let slice_dt = if history.times.len() > 1 { (tb - ta) / (history.times.len() - 1) as f64 } else { tb - ta };
    let mut h = (0.1 * slice_dt.max(history.grid.dx()) / scale).max(1e-12);
    let h_min = 1e-14 * h.max(1e-300);
    let mut attempts = 0usize;

    let termination = loop {
        if let Some(lmax) = opts.lambda_max {
            if lam >= lmax {
                break Termination::LambdaLimit;
            }
            h = h.min(lmax - lam);
        }
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(LabError::StepLimit { max_steps: opts.max_steps });
        }
        let (y5, err, k7) = match dopri_step(&mut rhs, lam, &y, &k1, h) {
            Ok(r) => r,
            Err(LabError::GridExit { .. } | LabError::NodeEncounter { .. }) if h > h_min => {
                h *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        let en = error_norm(&err, &y, &y5, opts);
        let jump = field_jump((k1[0], k1[1]), (k7[0], k7[1]));
        if h > h_min && (en > 1.0 || jump > opts.max_field_change) {
            h = if en > 1.0 { next_step(h, en).min(0.5 * h) } else { 0.5 * h };
            continue;
        }

        // leaving the time window: shrink the step onto the boundary
        let boundary = if y5[0] > tb { Some(tb) } else if y5[0] < ta { Some(ta) } else { None };
        if let Some(tbound) = boundary {
            let (mut hb, mut yb, mut kb) = (h, y5, k7);
            for _ in 0..50 {
                if (yb[0] - tbound).abs() <= 1e-13 * (1.0 + tbound.abs()) {
                    break;
                }
                let denom = yb[0] - y[0];
                if denom == 0.0 {
                    break;
                }
                hb *= (tbound - y[0]) / denom;
                let (ys, _, ks) = dopri_step(&mut rhs, lam, &y, &k1, hb)?;
                yb = ys;
                kb = ks;
            }
            yb[0] = tbound;
            record_reversal(history, &mut events, lam, hb, &y, &k1, &yb, &kb);
            lam += hb;
            samples.push(WorldLineSample { lambda: lam, t: yb[0], x: yb[1], j0: kb[0], j1: kb[1] });
            break if tbound == tb { Termination::ReachedEnd } else { Termination::ReachedStart };
        }

        record_reversal(history, &mut events, lam, h, &y, &k1, &y5, &k7);
        lam += h;
        y = y5;
        k1 = k7;
        samples.push(WorldLineSample { lambda: lam, t: y[0], x: y[1], j0: k1[0], j1: k1[1] });
        h = next_step(h, en);
    };
    Ok(WorldLine { samples, reversal_events: events, termination })
}

/// Locates a j⁰ sign change inside an accepted step by bisection along the
/// cubic Hermite interpolant of the step.
#[allow(clippy::too_many_arguments)]
fn record_reversal(
    history: &FieldHistory,
    events: &mut Vec<ReversalEvent>,
    lam: f64,
    h: f64,
    y0: &[f64; 2],
    k0: &[f64; 2],
    y1: &[f64; 2],
    k1: &[f64; 2],
) {
    if !((k0[0] > 0.0 && k1[0] <= 0.0) || (k0[0] < 0.0 && k1[0] >= 0.0)) {
        return;
    }
    let point = |s: f64| {
        [hermite(s, y0[0], y1[0], k0[0] * h, k1[0] * h), hermite(s, y0[1], y1[1], k0[1] * h, k1[1] * h)]
    };
    let j0_at = |s: f64| {
        let p = point(s);
        history.sample(p[0], p[1]).map_or(0.0, |f| f.0)
    };
    let positive_start = k0[0] > 0.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (j0_at(mid) > 0.0) == positive_start {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let p = point(s);
    events.push(ReversalEvent { lambda: lam + s * h, t: p[0], x: p[1], was_forward: positive_start });
}

/// Zero crossings of the time-interpolated j⁰ along the grid at time `t`,
/// located by linear interpolation between grid points.
pub fn density_zero_crossings(history: &FieldHistory, t: f64) -> Vec<f64> {
    let rho = history.density_at_time(t);
    let g = history.grid();
    rho.windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] > 0.0) != (w[1] > 0.0))
        .map(|(i, w)| g.x(i) + g.dx() * w[0] / (w[0] - w[1]))
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentClass {
    Timelike,
    Lightlike,
    Spacelike,
}

/// Four-velocity along a two-current (c = 1).
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct FourVelocity {
    pub u0: f64,
    pub u1: f64,
    pub class: CurrentClass,
    /// `true` when (u0, u1) has been divided by the Minkowski magnitude.
    pub normalized: bool,
    /// ρ₀ = |j| for timelike currents.
    pub rest_density: Option<f64>,
}

/// Relative tolerance on j0² − j1² for classifying a current as lightlike.
pub const LIGHTLIKE_TOLERANCE: f64 = 1e-12;

pub fn four_velocity(j0: f64, j1: f64) -> LabResult<FourVelocity> {
    if j0 == 0.0 && j1 == 0.0 {
        return Err(LabError::ZeroCurrent);
    }
    let m2 = j0 * j0 - j1 * j1;
    let scale = j0 * j0 + j1 * j1;
    if m2.abs() <= LIGHTLIKE_TOLERANCE * scale {
        return Ok(FourVelocity { u0: j0, u1: j1, class: CurrentClass::Lightlike, normalized: false, rest_density: None });
    }
    if m2 < 0.0 {
        return Ok(FourVelocity { u0: j0, u1: j1, class: CurrentClass::Spacelike, normalized: false, rest_density: None });
    }
    let mag = m2.sqrt();
    Ok(FourVelocity { u0: j0 / mag, u1: j1 / mag, class: CurrentClass::Timelike, normalized: true, rest_density: Some(mag) })
}
