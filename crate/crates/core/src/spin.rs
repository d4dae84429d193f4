//! Dense complex linear algebra for one and two spin-½ particles.
//!
//! Natural units are used throughout (ħ = 1), so spin operators have
//! eigenvalues ±½. Two-particle amplitudes are stored in the fixed basis
//! order (↑↑, ↑↓, ↓↑, ↓↓) with ↑/↓ taken along +z.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Tolerance on the squared length of a vector treated as "zero" when
/// building a [`Direction`] from Cartesian components.
pub const MIN_DIRECTION_NORM: f64 = 1e-9;

/// A unit 3-vector selecting a spin component.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    nx: f64,
    ny: f64,
    nz: f64,
}

impl Direction {
    pub const X: Direction = Direction { nx: 1.0, ny: 0.0, nz: 0.0 };
    pub const Y: Direction = Direction { nx: 0.0, ny: 1.0, nz: 0.0 };
    pub const Z: Direction = Direction { nx: 0.0, ny: 0.0, nz: 1.0 };

    /// Normalizes a Cartesian triple; near-zero vectors are rejected.
    pub fn new(x: f64, y: f64, z: f64) -> LabResult<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < MIN_DIRECTION_NORM {
            return Err(LabError::DegenerateDirection { norm });
        }
        Ok(Self { nx: x / norm, ny: y / norm, nz: z / norm })
    }

    /// Builds a direction from a polar angle (from +z) and an azimuth (from
    /// +x towards +y), both in radians.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let (st, ct) = polar.sin_cos();
        let (sp, cp) = azimuth.sin_cos();
        Self { nx: st * cp, ny: st * sp, nz: ct }
    }

    /// As [`Direction::from_spherical`] with angles in degrees.
    pub fn from_spherical_deg(polar_deg: f64, azimuth_deg: f64) -> Self {
        Self::from_spherical(polar_deg.to_radians(), azimuth_deg.to_radians())
    }

    /// Direction in the xz-plane at `angle` radians from +z towards +x.
    pub fn in_xz_plane(angle: f64) -> Self {
        Self::from_spherical(angle, 0.0)
    }

    pub fn x(&self) -> f64 {
        self.nx
    }

    pub fn y(&self) -> f64 {
        self.ny
    }

    pub fn z(&self) -> f64 {
        self.nz
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.nx * other.nx + self.ny * other.ny + self.nz * other.nz
    }

    /// Angle between two directions in radians, in `[0, π]`.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        // atan2 of |a×b| and a·b stays accurate near 0 and π
        let c = cross(&self.to_array(), &other.to_array());
        let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        s.atan2(self.dot(other))
    }

    /// Polar angle from +z and azimuth from +x, in radians.
    pub fn spherical(&self) -> (f64, f64) {
        (self.nz.clamp(-1.0, 1.0).acos(), self.ny.atan2(self.nx))
    }

    pub fn reversed(&self) -> Self {
        Self { nx: -self.nx, ny: -self.ny, nz: -self.nz }
    }
}

impl Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        self.reversed()
    }
}

impl TryFrom<[f64; 3]> for Direction {
    type Error = LabError;
    fn try_from(v: [f64; 3]) -> LabResult<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Eigenvalue sign of a spin-½ measurement: `Up` is +½, `Down` is −½.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Up,
    #[serde(rename = "-")]
    Down,
}

impl Sign {
    /// The spin eigenvalue in units of ħ.
    pub fn eigenvalue(self) -> f64 {
        match self {
            Sign::Up => 0.5,
            Sign::Down => -0.5,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Up => Sign::Down,
            Sign::Down => Sign::Up,
        }
    }

    /// Returns `n` for `Up` and `−n` for `Down`, so that outcome `self`
    /// along `n` equals outcome +½ along the returned axis.
    pub fn orient(self, n: Direction) -> Direction {
        match self {
            Sign::Up => n,
            Sign::Down => -n,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Up => "+",
            Sign::Down => "-",
        })
    }
}

/// A single spin-½ ket in the z basis. Not necessarily normalized.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Spinor(pub [C64; 2]);

impl Spinor {
    pub fn new(up: C64, down: C64) -> Self {
        Self([up, down])
    }

    pub fn from_real(up: f64, down: f64) -> Self {
        Self([C64::new(up, 0.0), C64::new(down, 0.0)])
    }

    pub fn up(&self) -> C64 {
        self.0[0]
    }

    pub fn down(&self) -> C64 {
        self.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self([self.0[0] * s, self.0[1] * s])
    }

    /// Applies the global phase convention: the first nonzero component is
    /// made real and positive.
    pub fn with_canonical_phase(&self) -> Self {
        let idx = if self.0[0].norm() > 0.0 { 0 } else { 1 };
        let lead = self.0[idx];
        let r = lead.norm();
        if r == 0.0 {
            return *self;
        }
        let mut out = self.scale(lead.conj() / r);
        out.0[idx] = C64::new(r, 0.0);
        out
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, ket: &Spinor) -> C64 {
        inner(self, ket)
    }

    /// Expectation vector (⟨σx⟩, ⟨σy⟩, ⟨σz⟩)/2 for a normalized spinor.
    pub fn bloch_half(&self) -> [f64; 3] {
        let [a, b] = self.0;
        let ab = a.conj() * b;
        [ab.re, ab.im, 0.5 * (a.norm_sqr() - b.norm_sqr())]
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

/// ⟨bra|ket⟩; conjugate-linear in `bra`.
pub fn inner(bra: &Spinor, ket: &Spinor) -> C64 {
    bra.0[0].conj() * ket.0[0] + bra.0[1].conj() * ket.0[1]
}

/// A 2×2 complex operator acting on one spin-½.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SpinOp(pub [[C64; 2]; 2]);

impl SpinOp {
    pub fn identity() -> Self {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        Self([[o, z], [z, o]])
    }

    pub fn apply(&self, s: &Spinor) -> Spinor {
        let m = &self.0;
        Spinor([
            m[0][0] * s.0[0] + m[0][1] * s.0[1],
            m[1][0] * s.0[0] + m[1][1] * s.0[1],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - adj.0[r][c]).norm());
            }
        }
        worst
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1];
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    /// ⟨bra|self|ket⟩.
    pub fn matrix_element(&self, bra: &Spinor, ket: &Spinor) -> C64 {
        inner(bra, &self.apply(ket))
    }
}

impl Mul for SpinOp {
    type Output = SpinOp;
    fn mul(self, rhs: SpinOp) -> SpinOp {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        SpinOp(out)
    }
}

impl Neg for SpinOp {
    type Output = SpinOp;
    fn neg(self) -> SpinOp {
        let m = self.0;
        SpinOp([[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]])
    }
}

/// S_n = ½ n·σ.
pub fn spin_operator(n: &Direction) -> SpinOp {
    let half = 0.5;
    SpinOp([
        [C64::new(half * n.nz, 0.0), C64::new(half * n.nx, -half * n.ny)],
        [C64::new(half * n.nx, half * n.ny), C64::new(-half * n.nz, 0.0)],
    ])
}

/// Unit eigenspinor of `spin_operator(n)` with eigenvalue `sign.eigenvalue()`,
/// in the canonical phase.
pub fn eigenspinor(n: &Direction, sign: Sign) -> Spinor {
    let n = sign.orient(*n);
    // Two algebraically equivalent closed forms; pick the one that avoids
    // cancellation in 1 ± nz.
    let raw = if n.nz >= 0.0 {
        let s = (2.0 * (1.0 + n.nz)).sqrt();
        Spinor([C64::new((1.0 + n.nz) / s, 0.0), C64::new(n.nx / s, n.ny / s)])
    } else {
        let s = (2.0 * (1.0 - n.nz)).sqrt();
        Spinor([C64::new(n.nx / s, -n.ny / s), C64::new((1.0 - n.nz) / s, 0.0)])
    };
    raw.with_canonical_phase()
}

/// Two-particle spin state, amplitudes in (↑↑, ↑↓, ↓↑, ↓↓) order.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MultiSpinState(pub [C64; 4]);

impl MultiSpinState {
    pub fn from_amplitudes(amps: [C64; 4]) -> Self {
        Self(amps)
    }

    /// (|↑↓⟩ − |↓↑⟩)/√2.
    pub fn singlet() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        Self([z, C64::new(h, 0.0), C64::new(-h, 0.0), z])
    }

    /// Amplitude for particle-1 basis index `a` and particle-2 index `b`.
    pub fn amp(&self, a: usize, b: usize) -> C64 {
        self.0[2 * a + b]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0 && n.is_finite()).then(|| {
            let s = 1.0 / n;
            Self(self.0.map(|c| c * s))
        })
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|c| c * s))
    }
}

/// Which particle an operator acts on.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Particle {
    First,
    Second,
}

/// |p1⟩ ⊗ |p2⟩.
pub fn tensor(p1: &Spinor, p2: &Spinor) -> MultiSpinState {
    let mut out = [C64::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            out[2 * a + b] = p1.0[a] * p2.0[b];
        }
    }
    MultiSpinState(out)
}

/// Applies `op ⊗ I` or `I ⊗ op`.
pub fn apply_on_particle(op: &SpinOp, k: Particle, s: &MultiSpinState) -> MultiSpinState {
    let m = &op.0;
    let mut out = [C64::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            out[2 * a + b] = match k {
                Particle::First => m[a][0] * s.amp(0, b) + m[a][1] * s.amp(1, b),
                Particle::Second => m[b][0] * s.amp(a, 0) + m[b][1] * s.amp(a, 1),
            };
        }
    }
    MultiSpinState(out)
}

/// ⟨bra|ket⟩ for two-particle states.
pub fn inner2(bra: &MultiSpinState, ket: &MultiSpinState) -> C64 {
    bra.0.iter().zip(ket.0.iter()).map(|(b, k)| b.conj() * k).sum()
}

/// (⟨e| ⊗ I)|state⟩: the unnormalized particle-2 ket left after projecting
/// particle 1 onto `e`.
pub fn project_first(e: &Spinor, state: &MultiSpinState) -> Spinor {
    let mut out = [C64::new(0.0, 0.0); 2];
    for (b, slot) in out.iter_mut().enumerate() {
        *slot = e.0[0].conj() * state.amp(0, b) + e.0[1].conj() * state.amp(1, b);
    }
    Spinor(out)
}
