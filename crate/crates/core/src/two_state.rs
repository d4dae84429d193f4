//! Pre- and post-selected (two-boundary) spin values.
//!
//! Given an initial ket |i⟩ and a later measurement outcome |f⟩, the value of
//! spin component `h` at intermediate times is Re ⟨f|S_h|i⟩ / ⟨f|i⟩. For an
//! entangled pair the same quantity for particle 2, conditioned on both
//! outcomes, collapses to the single-particle expression evaluated with the
//! conditional state of particle 2; [`entangled_weak_value`] and
//! [`reduced_weak_value`] compute the two sides independently.

use num_complex::Complex64 as C64;

use crate::error::{LabError, LabResult};
use crate::spin::{
    apply_on_particle, eigenspinor, inner, inner2, project_first, spin_operator, tensor, Direction,
    MultiSpinState, Particle, Sign, Spinor,
};

/// Default lower bound on the normalized overlap |⟨f|i⟩| / (‖f‖‖i‖).
pub const DEFAULT_OVERLAP_EPS: f64 = 1e-10;

/// A pre-selected state together with a post-selected state.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TwoStateContext {
    pre: Spinor,
    post: Spinor,
    overlap: C64,
}

impl TwoStateContext {
    pub fn new(pre: Spinor, post: Spinor) -> LabResult<Self> {
        Self::with_threshold(pre, post, DEFAULT_OVERLAP_EPS)
    }

    pub fn with_threshold(pre: Spinor, post: Spinor, eps: f64) -> LabResult<Self> {
        let overlap = inner(&post, &pre);
        let scale = pre.norm() * post.norm();
        let normalized = if scale > 0.0 { overlap.norm() / scale } else { 0.0 };
        if !(normalized > eps) {
            return Err(LabError::ZeroOverlap { overlap: normalized, threshold: eps });
        }
        Ok(Self { pre, post, overlap })
    }

    /// Pre-selection |+i⟩ and post-selection |+f⟩ along two axes, with the
    /// given outcome signs.
    pub fn from_axes(i_axis: &Direction, i_sign: Sign, f_axis: &Direction, f_sign: Sign) -> LabResult<Self> {
        Self::new(eigenspinor(i_axis, i_sign), eigenspinor(f_axis, f_sign))
    }

    pub fn pre(&self) -> &Spinor {
        &self.pre
    }

    pub fn post(&self) -> &Spinor {
        &self.post
    }

    /// a = ⟨f|i⟩.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }
}

/// ⟨f|S_h|i⟩ / ⟨f|i⟩ including the imaginary part.
pub fn weak_spin_value_complex(ctx: &TwoStateContext, h: &Direction) -> C64 {
    spin_operator(h).matrix_element(&ctx.post, &ctx.pre) / ctx.overlap
}

/// Re ⟨f|S_h|i⟩ / ⟨f|i⟩, in units of ħ.
pub fn weak_spin_value(ctx: &TwoStateContext, h: &Direction) -> f64 {
    weak_spin_value_complex(ctx, h).re
}

/// Joint Born probability |⟨e_m, f_n|I⟩|² for a normalized two-particle state.
pub fn born_joint(state: &MultiSpinState, e: &Direction, f: &Direction, m: Sign, n: Sign) -> f64 {
    let bra = tensor(&eigenspinor(e, m), &eigenspinor(f, n));
    inner2(&bra, state).norm_sqr()
}

/// The state assigned to particle 2 once particle 1 is found in `|e_m⟩`:
/// the e_m branch of the two-particle state, normalized and in canonical
/// phase.
pub fn conditional_state(state: &MultiSpinState, e: &Direction, m: Sign) -> LabResult<Spinor> {
    conditional_state_with_threshold(state, e, m, DEFAULT_OVERLAP_EPS)
}

pub fn conditional_state_with_threshold(
    state: &MultiSpinState,
    e: &Direction,
    m: Sign,
    eps: f64,
) -> LabResult<Spinor> {
    let branch = project_first(&eigenspinor(e, m), state);
    let total = state.norm_sqr().sqrt();
    let norm = branch.norm();
    if !(total > 0.0) || !(norm / total > eps) {
        return Err(LabError::ZeroBranch { norm: if total > 0.0 { norm / total } else { 0.0 } });
    }
    Ok(branch.normalized().expect("nonzero branch").with_canonical_phase())
}

/// An entangled two-particle state with both measurement settings and
/// outcomes fixed.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EntangledContext {
    pub initial: MultiSpinState,
    pub axis1: Direction,
    pub axis2: Direction,
    pub outcome1: Sign,
    pub outcome2: Sign,
    threshold: f64,
    overlap: C64,
}

impl EntangledContext {
    pub fn new(initial: MultiSpinState, axis1: Direction, outcome1: Sign, axis2: Direction, outcome2: Sign) -> LabResult<Self> {
        Self::with_threshold(initial, axis1, outcome1, axis2, outcome2, DEFAULT_OVERLAP_EPS)
    }

    pub fn with_threshold(
        initial: MultiSpinState,
        axis1: Direction,
        outcome1: Sign,
        axis2: Direction,
        outcome2: Sign,
        eps: f64,
    ) -> LabResult<Self> {
        let bra = tensor(&eigenspinor(&axis1, outcome1), &eigenspinor(&axis2, outcome2));
        let overlap = inner2(&bra, &initial);
        let total = initial.norm_sqr().sqrt();
        let normalized = if total > 0.0 { overlap.norm() / total } else { 0.0 };
        if !(normalized > eps) {
            return Err(LabError::ZeroOverlap { overlap: normalized, threshold: eps });
        }
        Ok(Self { initial, axis1, axis2, outcome1, outcome2, threshold: eps, overlap })
    }

    /// ⟨e_m, f_n|I⟩.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn final_bra(&self) -> MultiSpinState {
        tensor(&eigenspinor(&self.axis1, self.outcome1), &eigenspinor(&self.axis2, self.outcome2))
    }
}

/// ⟨e_m,f_n| I⊗S_h |I⟩ / ⟨e_m,f_n|I⟩ evaluated in the full two-particle space.
pub fn entangled_weak_value_complex(ctx: &EntangledContext, h: &Direction) -> C64 {
    let acted = apply_on_particle(&spin_operator(h), Particle::Second, &ctx.initial);
    inner2(&ctx.final_bra(), &acted) / ctx.overlap
}

/// Real part of [`entangled_weak_value_complex`]: particle 2's value of the
/// `h` spin component.
pub fn entangled_weak_value(ctx: &EntangledContext, h: &Direction) -> f64 {
    entangled_weak_value_complex(ctx, h).re
}

/// The same quantity as [`entangled_weak_value`], computed as a
/// single-particle weak value between the conditional state of particle 2
/// and its outcome `|f_n⟩`.
pub fn reduced_weak_value(ctx: &EntangledContext, h: &Direction) -> LabResult<f64> {
    let pre = conditional_state_with_threshold(&ctx.initial, &ctx.axis1, ctx.outcome1, ctx.threshold)?;
    let post = eigenspinor(&ctx.axis2, ctx.outcome2);
    let single = TwoStateContext::with_threshold(pre, post, ctx.threshold)?;
    Ok(weak_spin_value(&single, h))
}
