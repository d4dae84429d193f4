//! The hidden spin vector between two successive spin measurements.
//!
//! Because the two-boundary value of a spin component is linear in the
//! component's direction, all components are projections of one 3-vector.
//! [`hidden_spin_vector`] extracts that vector from the three Cartesian
//! components; [`sweep_maximum`] finds the maximizing direction by a direct
//! search over the sphere and serves as an independent check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, LabResult};
use crate::spin::{Direction, Sign};
use crate::two_state::{weak_spin_value, TwoStateContext};

/// Default guard against (near-)antiparallel measurement axes, in degrees.
pub const DEFAULT_ANTIPARALLEL_GUARD_DEG: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinVectorReport {
    /// The spin vector v, in units of ħ.
    pub vector: [f64; 3],
    pub max_direction: Direction,
    pub max_value: f64,
    /// Angle between the (outcome-oriented) measurement axes, radians.
    pub omega: f64,
    /// |max_direction·i − max_direction·f|; zero when the maximum bisects the
    /// two axes.
    pub midplane_check: f64,
}

/// Spin vector for outcome +½ along `i_axis` followed by +½ along `f_axis`.
pub fn hidden_spin_vector(i_axis: &Direction, f_axis: &Direction) -> LabResult<SpinVectorReport> {
    hidden_spin_vector_with_outcomes(i_axis, Sign::Up, f_axis, Sign::Up, DEFAULT_ANTIPARALLEL_GUARD_DEG)
}

/// General outcomes: outcome −½ along n is outcome +½ along −n, so the axes
/// are flipped accordingly before the +½/+½ analysis.
pub fn hidden_spin_vector_with_outcomes(
    i_axis: &Direction,
    i_sign: Sign,
    f_axis: &Direction,
    f_sign: Sign,
    guard_deg: f64,
) -> LabResult<SpinVectorReport> {
    let ctx = oriented_context(i_axis, i_sign, f_axis, f_sign, guard_deg)?;
    let i = i_sign.orient(*i_axis);
    let f = f_sign.orient(*f_axis);
    let vector = [Direction::X, Direction::Y, Direction::Z].map(|n| weak_spin_value(&ctx, &n));
    let max_value = (vector[0] * vector[0] + vector[1] * vector[1] + vector[2] * vector[2]).sqrt();
    let max_direction = Direction::try_from(vector)?;
    Ok(SpinVectorReport {
        vector,
        max_direction,
        max_value,
        omega: i.angle_to(&f),
        midplane_check: (max_direction.dot(&i) - max_direction.dot(&f)).abs(),
    })
}

fn oriented_context(
    i_axis: &Direction,
    i_sign: Sign,
    f_axis: &Direction,
    f_sign: Sign,
    guard_deg: f64,
) -> LabResult<TwoStateContext> {
    let i = i_sign.orient(*i_axis);
    let f = f_sign.orient(*f_axis);
    let omega = i.angle_to(&f);
    if omega > (180.0 - guard_deg).to_radians() {
        return Err(LabError::AntiparallelAxes { omega_deg: omega.to_degrees(), guard_deg });
    }
    TwoStateContext::from_axes(&i, Sign::Up, &f, Sign::Up)
}

/// Two-boundary value of each requested component (outcomes +½, +½).
pub fn component_map(i_axis: &Direction, f_axis: &Direction, directions: &[Direction]) -> LabResult<Vec<(Direction, f64)>> {
    let ctx = oriented_context(i_axis, Sign::Up, f_axis, Sign::Up, DEFAULT_ANTIPARALLEL_GUARD_DEG)?;
    Ok(directions.par_iter().map(|n| (*n, weak_spin_value(&ctx, n))).collect())
}

/// Result of the direct search over the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub direction: Direction,
    pub value: f64,
    pub evaluations: usize,
}

/// Locates the direction of the largest component by a polar/azimuth grid
/// search followed by successive local refinements, using only
/// [`weak_spin_value`] evaluations.
///
/// Ties are broken towards the lexicographically smallest (polar, azimuth)
/// so the result does not depend on evaluation order.
pub fn sweep_maximum(ctx: &TwoStateContext, coarse_steps: usize, refinements: usize) -> SweepResult {
    let coarse_steps = coarse_steps.max(4);
    let value = |p: f64, a: f64| weak_spin_value(ctx, &Direction::from_spherical(p, a));
    let pick = |cands: Vec<(f64, f64, f64)>| {
        cands
            .into_iter()
            .reduce(|best, c| {
                if c.2 > best.2 || (c.2 == best.2 && (c.0, c.1) < (best.0, best.1)) {
                    c
                } else {
                    best
                }
            })
            .expect("non-empty candidate set")
    };

    let dp = std::f64::consts::PI / coarse_steps as f64;
    let da = 2.0 * std::f64::consts::PI / (2 * coarse_steps) as f64;
    let coarse: Vec<(f64, f64, f64)> = (0..=coarse_steps)
        .into_par_iter()
        .flat_map_iter(|ip| {
            let p = ip as f64 * dp;
            (0..2 * coarse_steps).map(move |ia| {
                let a = -std::f64::consts::PI + ia as f64 * da;
                (p, a)
            })
        })
        .map(|(p, a)| (p, a, value(p, a)))
        .collect();
    let mut evaluations = coarse.len();
    let mut best = pick(coarse);

    let (mut hp, mut ha) = (dp, da);
    for _ in 0..refinements {
        let mut cands = Vec::with_capacity(121);
        for i in -5i32..=5 {
            for j in -5i32..=5 {
                let p = best.0 + hp * i as f64 / 5.0;
                let a = best.1 + ha * j as f64 / 5.0;
                cands.push((p, a, value(p, a)));
            }
        }
        evaluations += cands.len();
        best = pick(cands);
        hp /= 5.0;
        ha /= 5.0;
    }
    SweepResult { direction: Direction::from_spherical(best.0, best.1), value: best.2, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4};

    // Closed form of the real part of the weak value of σ/2 between the
    // +½ eigenstates of axes i and f: (i + f) / (2(1 + i·f)).
    fn analytic_vector(i: &Direction, f: &Direction) -> [f64; 3] {
        let d = 2.0 * (1.0 + i.dot(f));
        let (a, b) = (i.to_array(), f.to_array());
        [(a[0] + b[0]) / d, (a[1] + b[1]) / d, (a[2] + b[2]) / d]
    }

    #[test]
    fn parallel_axes() {
        let r = hidden_spin_vector(&Direction::Z, &Direction::Z).unwrap();
        assert!(r.vector[0].abs() < 1e-15 && r.vector[1].abs() < 1e-15);
        assert!((r.vector[2] - 0.5).abs() < 1e-15);
        assert!((r.max_value - 0.5).abs() < 1e-15);
        assert_eq!(r.omega, 0.0);
    }

    #[test]
    fn perpendicular_axes() {
        let r = hidden_spin_vector(&Direction::Z, &Direction::X).unwrap();
        assert!((r.max_value - FRAC_1_SQRT_2).abs() < 1e-12);
        let mid = Direction::in_xz_plane(FRAC_PI_4);
        assert!(r.max_direction.angle_to(&mid) < 1e-9);
        assert!(r.midplane_check < 1e-12);
        let v = r.vector;
        assert!((v[2] - 0.5).abs() < 1e-12 && (v[0] - 0.5).abs() < 1e-12);

        // sweep oracle
        let ctx = TwoStateContext::from_axes(&Direction::Z, Sign::Up, &Direction::X, Sign::Up).unwrap();
        let sweep = sweep_maximum(&ctx, 36, 10);
        assert!((sweep.value - FRAC_1_SQRT_2).abs() < 1e-10);
        assert!(sweep.direction.angle_to(&mid) < 1e-5);
    }

    #[test]
    fn component_map_examples() {
        let rep = hidden_spin_vector(&Direction::Z, &Direction::X).unwrap();
        let axis = rep.max_direction;
        // a direction at angle θ from the maximum, rotated about y
        let at = |theta: f64| {
            let (p, _) = axis.spherical();
            Direction::in_xz_plane(p + theta)
        };
        let dirs = [at(std::f64::consts::FRAC_PI_2), at(FRAC_PI_3), Direction::Z, Direction::X, Direction::Y];
        let map = component_map(&Direction::Z, &Direction::X, &dirs).unwrap();
        assert!(map[0].1.abs() < 1e-12);
        assert!((map[1].1 - FRAC_1_SQRT_2 * 0.5).abs() < 1e-12);
        assert!((map[2].1 - 0.5).abs() < 1e-12);
        assert!((map[3].1 - 0.5).abs() < 1e-12);
        assert!(map[4].1.abs() < 1e-12);
    }

    #[test]
    fn magnitude_law_over_angles() {
        for deg in [10.0f64, 30.0, 60.0, 90.0, 120.0, 150.0] {
            let omega = deg.to_radians();
            let f = Direction::in_xz_plane(omega);
            let r = hidden_spin_vector(&Direction::Z, &f).unwrap();
            assert!((r.max_value - 0.5 / (omega / 2.0).cos()).abs() < 1e-9);
            let bis = Direction::in_xz_plane(omega / 2.0);
            assert!(r.max_direction.angle_to(&bis) < 1e-6);
            let oracle = analytic_vector(&Direction::Z, &f);
            for (v, o) in r.vector.iter().zip(oracle) {
                assert!((v - o).abs() < 1e-12);
            }
            assert!((r.omega - omega).abs() < 1e-12);
        }
    }

    #[test]
    fn flipped_outcomes_reduce_to_flipped_axes() {
        let f = Direction::new(0.4, 0.5, 0.2).unwrap();
        let a = hidden_spin_vector_with_outcomes(&Direction::Z, Sign::Down, &f, Sign::Up, 1.0).unwrap();
        let b = hidden_spin_vector(&-Direction::Z, &f).unwrap();
        assert_eq!(a, b);
        // direct two-state evaluation with the −½ eigenstate agrees
        let ctx = TwoStateContext::from_axes(&Direction::Z, Sign::Down, &f, Sign::Up).unwrap();
        for n in [Direction::X, Direction::Y, Direction::Z] {
            let dot: f64 = a.vector.iter().zip(n.to_array()).map(|(x, y)| x * y).sum();
            assert!((weak_spin_value(&ctx, &n) - dot).abs() < 1e-12);
        }
    }

    #[test]
    fn antiparallel_guard() {
        let f = Direction::in_xz_plane(179.5f64.to_radians());
        assert!(matches!(hidden_spin_vector(&Direction::Z, &f), Err(LabError::AntiparallelAxes { .. })));
        let f = Direction::in_xz_plane(178.5f64.to_radians());
        assert!(hidden_spin_vector(&Direction::Z, &f).is_ok());
        assert!(component_map(&Direction::Z, &-Direction::Z, &[Direction::X]).is_err());
    }
}
