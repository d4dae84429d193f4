//! One-dimensional wavefunctions on a uniform periodic grid.
//!
//! Units are natural, ħ = m = 1. Time evolution uses the symmetric
//! (Strang) split-step Fourier scheme, which is unitary to rounding error
//! and exactly time-reversible: evolving `conj(ψ)` forward and conjugating
//! the result runs the free or potential Schrödinger equation backwards.
//!
//! Grid quadrature is the trapezoidal rule on the periodic grid, which gives
//! every point the weight `dx`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::spin::{inner, spin_operator, Direction, Spinor};

/// Fraction of the grid at each end that must hold only tails.
pub const TAIL_FRACTION: f64 = 0.05;
/// Largest allowed |ψ| in the tail region relative to max |ψ|.
pub const TAIL_LIMIT: f64 = 1e-8;
pub const MIN_GRID_POINTS: usize = 16;

/// Uniform periodic grid: `x_j = x_min + j·dx`, `j = 0..n_points`, with
/// `dx = (x_max − x_min)/n_points` (the point `x_max` is identified with
/// `x_min`).
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> LabResult<Self> {
        let g = Self { x_min, x_max, n_points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.n_points < MIN_GRID_POINTS {
            return Err(LabError::InvalidGrid(format!(
                "n_points = {} is below the minimum of {MIN_GRID_POINTS}",
                self.n_points
            )));
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(LabError::InvalidGrid(format!(
                "x_max = {} must exceed x_min = {}",
                self.x_max, self.x_min
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
                m * dk
            })
            .collect()
    }

    /// Number of points in each edge band checked by the tails invariant.
    pub fn tail_points(&self) -> usize {
        ((self.n_points as f64 * TAIL_FRACTION).ceil() as usize).max(1)
    }

    /// Periodic trapezoidal integral of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx()
    }
}

/// A complex field ψ(x; t) sampled on a [`Grid`], optionally carrying a
/// constant spin part (ψ(x)·χ).
#[derive(Clone, Debug, PartialEq)]
pub struct GridWavefunction {
    grid: Grid,
    amplitudes: Vec<C64>,
    time: f64,
    spin: Option<Spinor>,
}

impl GridWavefunction {
    /// Builds a wavefunction and enforces the tails invariant.
    pub fn new(grid: Grid, amplitudes: Vec<C64>, time: f64) -> LabResult<Self> {
        let psi = Self::new_unchecked(grid, amplitudes, time)?;
        let ratio = psi.tail_ratio();
        if !(ratio < TAIL_LIMIT) {
            return Err(LabError::PacketTooWide { ratio, limit: TAIL_LIMIT });
        }
        Ok(psi)
    }

    /// Builds a wavefunction without the tails check (plane waves, basis
    /// vectors).
    pub fn new_unchecked(grid: Grid, amplitudes: Vec<C64>, time: f64) -> LabResult<Self> {
        grid.validate()?;
        if amplitudes.len() != grid.n_points {
            return Err(LabError::LengthMismatch { expected: grid.n_points, found: amplitudes.len() });
        }
        Ok(Self { grid, amplitudes, time, spin: None })
    }

    pub fn with_spin(mut self, spin: Option<Spinor>) -> Self {
        self.spin = spin;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spin(&self) -> Option<&Spinor> {
        self.spin.as_ref()
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// Largest |ψ| in the two edge bands divided by the global max |ψ|.
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.amplitudes.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let t = self.grid.tail_points();
        let n = self.amplitudes.len();
        let edge = self.amplitudes[..t]
            .iter()
            .chain(self.amplitudes[n - t..].iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        edge / peak
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ∫|ψ|² dx, times ‖χ‖² when a spin part is present.
    pub fn norm_sqr(&self) -> f64 {
        let spatial = self.grid.integrate(&self.density());
        spatial * self.spin.map_or(1.0, |s| s.norm_sqr())
    }

    /// ⟨self|other⟩ = ∫ self* other dx, including the spin overlap when both
    /// carry one.
    pub fn inner(&self, other: &GridWavefunction) -> C64 {
        self.spatial_inner(other) * spin_factor(self.spin.as_ref(), other.spin.as_ref())
    }

    fn spatial_inner(&self, other: &GridWavefunction) -> C64 {
        let s: C64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.dx()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|c| *c *= inv);
        }
        self
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.amplitudes.iter_mut().for_each(|c| *c *= s);
        self
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|c| c.conj()).collect(),
            time: self.time,
            spin: self.spin,
        }
    }

    /// ψ(x)·e^{ikx}.
    pub fn kicked(mut self, k: f64) -> Self {
        let grid = self.grid;
        for (j, c) in self.amplitudes.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, k * grid.x(j));
        }
        self
    }

    pub fn expectation_x(&self) -> f64 {
        let rho = self.density();
        let num: f64 = rho.iter().enumerate().map(|(j, r)| r * self.grid.x(j)).sum();
        num / rho.iter().sum::<f64>()
    }

    /// ⟨p⟩ from the discrete Fourier spectrum.
    pub fn expectation_p(&self) -> f64 {
        let mut buf = self.amplitudes.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let k = self.grid.wavenumbers();
        let num: f64 = buf.iter().zip(&k).map(|(c, k)| c.norm_sqr() * k).sum();
        num / buf.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Width parameter σ of an equivalent Gaussian ψ ∝ exp(−x²/2σ²), i.e.
    /// √2 times the standard deviation of |ψ|².
    pub fn width(&self) -> f64 {
        let rho = self.density();
        let total: f64 = rho.iter().sum();
        let mean = self.expectation_x();
        let var: f64 = rho.iter().enumerate().map(|(j, r)| r * (self.grid.x(j) - mean).powi(2)).sum::<f64>() / total;
        (2.0 * var).sqrt()
    }

    fn at_time(&self, amplitudes: Vec<C64>, time: f64) -> Self {
        Self { grid: self.grid, amplitudes, time, spin: self.spin }
    }
}

fn spin_factor(bra: Option<&Spinor>, ket: Option<&Spinor>) -> C64 {
    match (bra, ket) {
        (Some(b), Some(k)) => inner(b, k),
        _ => C64::new(1.0, 0.0),
    }
}

/// Normalized Gaussian ψ = (πσ²)^{-1/4} exp(−(x−x0)²/2σ² + ik(x−x0)).
pub fn make_gaussian(grid: &Grid, x0: f64, sigma: f64, k: f64, spin: Option<Spinor>) -> LabResult<GridWavefunction> {
    if !(sigma > 0.0) {
        return Err(LabError::InvalidSetup(format!("packet width must be positive, got {sigma}")));
    }
    let pref = (PI * sigma * sigma).powf(-0.25);
    let amps = (0..grid.n_points)
        .map(|j| {
            let d = grid.x(j) - x0;
            C64::from_polar(pref * (-d * d / (2.0 * sigma * sigma)).exp(), k * d)
        })
        .collect();
    let spin = spin.map(|s| s.normalized().unwrap_or(s));
    Ok(GridWavefunction::new(*grid, amps, 0.0)?.normalized().with_spin(spin))
}

/// Split-step propagator for a fixed grid, step and potential.
pub struct Propagator {
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    kinetic: Vec<C64>,
    half_potential: Option<Vec<C64>>,
    dt: f64,
    scratch: Vec<C64>,
}

impl Propagator {
    pub fn new(grid: &Grid, dt: f64, potential: Option<&[f64]>) -> LabResult<Self> {
        grid.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(LabError::UnstableStep(format!("dt must be positive and finite, got {dt}")));
        }
        let half_potential = match potential {
            None => None,
            Some(v) => {
                if v.len() != grid.n_points {
                    return Err(LabError::LengthMismatch { expected: grid.n_points, found: v.len() });
                }
                let vmax = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                // the potential phase per step must not wrap
                if !vmax.is_finite() || vmax * dt > PI {
                    return Err(LabError::UnstableStep(format!(
                        "dt·max|V| = {} exceeds π",
                        vmax * dt
                    )));
                }
                Some(v.iter().map(|&x| C64::from_polar(1.0, -0.5 * x * dt)).collect())
            }
        };
        let n = grid.n_points;
        let inv_n = 1.0 / n as f64;
        let kinetic = grid
            .wavenumbers()
            .into_iter()
            .map(|k| C64::from_polar(inv_n, -0.5 * k * k * dt))
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            kinetic,
            half_potential,
            dt,
            scratch: vec![C64::new(0.0, 0.0); n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances amplitudes in place by one step.
    pub fn step(&mut self, amps: &mut [C64]) {
        if let Some(hv) = &self.half_potential {
            amps.iter_mut().zip(hv).for_each(|(a, p)| *a *= p);
        }
        self.fft.process_with_scratch(amps, &mut self.scratch);
        amps.iter_mut().zip(&self.kinetic).for_each(|(a, p)| *a *= p);
        self.ifft.process_with_scratch(amps, &mut self.scratch);
        if let Some(hv) = &self.half_potential {
            amps.iter_mut().zip(hv).for_each(|(a, p)| *a *= p);
        }
    }
}

fn check_leak(psi: &GridWavefunction, enforce: bool) -> LabResult<()> {
    if enforce {
        let ratio = psi.tail_ratio();
        if !(ratio < TAIL_LIMIT) {
            return Err(LabError::TailLeak { time: psi.time, ratio });
        }
    }
    if psi.amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(LabError::UnstableStep(format!("non-finite amplitude at t = {}", psi.time)));
    }
    Ok(())
}

/// Evolves `psi` forward by `steps` steps of `dt`.
pub fn evolve(psi: &GridWavefunction, dt: f64, steps: usize, potential: Option<&[f64]>) -> LabResult<GridWavefunction> {
    let mut hist = evolve_history(psi, dt, steps, potential, steps.max(1))?;
    Ok(hist.pop().expect("history holds at least the initial state"))
}

/// Forward evolution keeping every `stride`-th state, starting with the
/// initial one. The final state is always included.
pub fn evolve_history(
    psi: &GridWavefunction,
    dt: f64,
    steps: usize,
    potential: Option<&[f64]>,
    stride: usize,
) -> LabResult<Vec<GridWavefunction>> {
    let stride = stride.max(1);
    let mut out = vec![psi.clone()];
    if steps == 0 {
        return Ok(out);
    }
    // the tails invariant is enforced only for states that satisfied it at
    // the start
    let enforce = psi.tail_ratio() < TAIL_LIMIT;
    let mut prop = Propagator::new(&psi.grid, dt, potential)?;
    let mut amps = psi.amplitudes.clone();
    for s in 1..=steps {
        prop.step(&mut amps);
        if s % stride == 0 || s == steps {
            let snap = psi.at_time(amps.clone(), psi.time + s as f64 * dt);
            check_leak(&snap, enforce)?;
            out.push(snap);
        }
    }
    Ok(out)
}

/// Evolves a final-boundary wavefunction given at `psi_f.time()` backwards
/// by `steps` steps, returning every state in ascending time order (the last
/// element is `psi_f` itself).
pub fn evolve_final_backward(
    psi_f: &GridWavefunction,
    dt: f64,
    steps: usize,
    potential: Option<&[f64]>,
) -> LabResult<Vec<GridWavefunction>> {
    evolve_final_backward_history(psi_f, dt, steps, potential, 1)
}

/// As [`evolve_final_backward`], keeping every `stride`-th state counted back
/// from the final time. With a matching `stride`, the output times coincide
/// with those of [`evolve_history`] started at `psi_f.time() − steps·dt`
/// whenever `steps` is a multiple of `stride`.
pub fn evolve_final_backward_history(
    psi_f: &GridWavefunction,
    dt: f64,
    steps: usize,
    potential: Option<&[f64]>,
    stride: usize,
) -> LabResult<Vec<GridWavefunction>> {
    let reversed = psi_f.conj();
    let hist = evolve_history(&reversed, dt, steps, potential, stride)?;
    let tf = psi_f.time;
    let mut out: Vec<GridWavefunction> = hist
        .into_iter()
        .map(|w| {
            let elapsed = w.time - tf;
            let mut back = w.conj();
            back.time = tf - elapsed;
            back
        })
        .collect();
    out.reverse();
    Ok(out)
}

/// A density and current sampled on a grid at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair {
    pub density: Vec<f64>,
    pub current: Vec<f64>,
    pub time: f64,
}

/// Centered second-order first derivative; second-order one-sided stencils
/// at the two ends.
pub fn derivative<T>(values: &[T], dx: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = values.len();
    assert!(n >= 3, "derivative needs at least three samples");
    let inv2 = 0.5 / dx;
    let mut out = Vec::with_capacity(n);
    out.push((values[1] * 4.0 - values[0] * 3.0 - values[2]) * inv2);
    for j in 1..n - 1 {
        out.push((values[j + 1] - values[j - 1]) * inv2);
    }
    out.push((values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) * inv2);
    out
}

/// Density |ψ|² and current (1/2i)(ψ*∂ψ − ψ∂ψ*) = Im(ψ*∂ψ).
pub fn current_standard(psi: &GridWavefunction) -> FieldPair {
    let d = derivative(&psi.amplitudes, psi.grid.dx());
    let spin_norm = psi.spin.map_or(1.0, |s| s.norm_sqr());
    FieldPair {
        density: psi.amplitudes.iter().map(|c| c.norm_sqr() * spin_norm).collect(),
        current: psi.amplitudes.iter().zip(&d).map(|(p, dp)| (p.conj() * dp).im * spin_norm).collect(),
        time: psi.time,
    }
}

/// Causally symmetric density and current of an initial/final pair:
/// j⁰ = Re[ψ_f*ψ_i / a], j¹ = Re[(ψ_f*∂ψ_i − ψ_i∂ψ_f*) / 2ia], a = ⟨ψ_f|ψ_i⟩.
pub fn current_cs(psi_i: &GridWavefunction, psi_f: &GridWavefunction) -> LabResult<FieldPair> {
    current_cs_with_threshold(psi_i, psi_f, crate::two_state::DEFAULT_OVERLAP_EPS)
}

pub fn current_cs_with_threshold(psi_i: &GridWavefunction, psi_f: &GridWavefunction, eps: f64) -> LabResult<FieldPair> {
    let a = checked_overlap(psi_i, psi_f, eps)?;
    let s = spin_factor(psi_f.spin.as_ref(), psi_i.spin.as_ref());
    Ok(cs_fields_with_overlap(psi_i, psi_f, s / a))
}

fn checked_overlap(psi_i: &GridWavefunction, psi_f: &GridWavefunction, eps: f64) -> LabResult<C64> {
    if psi_i.grid != psi_f.grid || (psi_i.time - psi_f.time).abs() > 1e-9 * (1.0 + psi_i.time.abs()) {
        return Err(LabError::GridMismatch);
    }
    let a = psi_f.inner(psi_i);
    let scale = (psi_i.norm_sqr() * psi_f.norm_sqr()).sqrt();
    let normalized = if scale > 0.0 { a.norm() / scale } else { 0.0 };
    if !(normalized > eps) {
        return Err(LabError::ZeroOverlap { overlap: normalized, threshold: eps });
    }
    Ok(a)
}

/// Fields with a caller-supplied factor `w` in place of `⟨χ_f|χ_i⟩/a`.
pub(crate) fn cs_fields_with_overlap(psi_i: &GridWavefunction, psi_f: &GridWavefunction, w: C64) -> FieldPair {
    let dx = psi_i.grid.dx();
    let di = derivative(&psi_i.amplitudes, dx);
    let df = derivative(&psi_f.amplitudes, dx);
    let half_over_i = C64::new(0.0, -0.5) * w;
    let mut density = Vec::with_capacity(di.len());
    let mut current = Vec::with_capacity(di.len());
    for j in 0..di.len() {
        let fc = psi_f.amplitudes[j].conj();
        let pi = psi_i.amplitudes[j];
        density.push((fc * pi * w).re);
        current.push(((fc * di[j] - pi * df[j].conj()) * half_over_i).re);
    }
    FieldPair { density, current, time: psi_i.time }
}

/// Spatial density of the `h` spin component, Re[ψ_f† S_h ψ_i / a], for
/// wavefunctions with spin parts. It integrates to the two-boundary spin
/// value of the spin parts.
pub fn spin_density(psi_i: &GridWavefunction, psi_f: &GridWavefunction, h: &Direction) -> LabResult<Vec<f64>> {
    let (Some(chi_i), Some(chi_f)) = (psi_i.spin, psi_f.spin) else {
        return Err(LabError::InvalidSetup("spin density needs spin parts on both wavefunctions".into()));
    };
    let a = checked_overlap(psi_i, psi_f, crate::two_state::DEFAULT_OVERLAP_EPS)?;
    let elem = spin_operator(h).matrix_element(&chi_f, &chi_i);
    let w = elem / a;
    Ok(psi_f.amplitudes.iter().zip(&psi_i.amplitudes).map(|(f, i)| (f.conj() * i * w).re).collect())
}

/// max_x |(ρ(t+δ) − ρ(t−δ))/2δ + ∂_x j(t)| for three consecutive field
/// samples.
pub fn continuity_residual(prev: &FieldPair, cur: &FieldPair, next: &FieldPair, dx: f64) -> f64 {
    let two_dt = next.time - prev.time;
    let dj = derivative(&cur.current, dx);
    prev.density
        .iter()
        .zip(&next.density)
        .zip(&dj)
        .map(|((p, n), d)| ((n - p) / two_dt + d).abs())
        .fold(0.0, f64::max)
}

/// Serialized form of a wavefunction: grid metadata plus interleaved
/// re/im amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    /// `[re_0, im_0, re_1, im_1, ...]`
    pub amplitudes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<[f64; 4]>,
}

impl From<&GridWavefunction> for Snapshot {
    fn from(psi: &GridWavefunction) -> Self {
        Self {
            grid: psi.grid,
            time: psi.time,
            amplitudes: psi.amplitudes.iter().flat_map(|c| [c.re, c.im]).collect(),
            spin: psi.spin.map(|s| [s.0[0].re, s.0[0].im, s.0[1].re, s.0[1].im]),
        }
    }
}

impl TryFrom<&Snapshot> for GridWavefunction {
    type Error = LabError;
    fn try_from(s: &Snapshot) -> LabResult<Self> {
        if s.amplitudes.len() != 2 * s.grid.n_points {
            return Err(LabError::LengthMismatch { expected: 2 * s.grid.n_points, found: s.amplitudes.len() });
        }
        let amps = s.amplitudes.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
        let spin = s.spin.map(|v| Spinor::new(C64::new(v[0], v[1]), C64::new(v[2], v[3])));
        Ok(GridWavefunction::new_unchecked(s.grid, amps, s.time)?.with_spin(spin))
    }
}
