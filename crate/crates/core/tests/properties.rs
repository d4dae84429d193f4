use csbohm::ensemble::{ks_statistic, DensityCdf};
use csbohm::spin::{Direction, Sign};
use csbohm::trajectories::{four_velocity, CurrentClass};
use csbohm::two_state::{weak_spin_value, TwoStateContext};
use csbohm::wavepacket::{current_cs, current_standard, make_gaussian, Grid};
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = Direction> {
    (0.0..std::f64::consts::PI, -std::f64::consts::PI..std::f64::consts::PI)
        .prop_map(|(p, a)| Direction::from_spherical(p, a))
}

proptest! {
    #[test]
    fn timelike_four_velocity_is_unit(j0 in -10.0..10.0f64, frac in -0.99..0.99f64) {
        prop_assume!(j0.abs() > 1e-3);
        let j1 = frac * j0;
        let u = four_velocity(j0, j1).unwrap();
        prop_assert_eq!(u.class, CurrentClass::Timelike);
        prop_assert!((u.u0 * u.u0 - u.u1 * u.u1 - 1.0).abs() < 1e-9);
        let rho0 = u.rest_density.unwrap();
        prop_assert!(rho0 > 0.0);
        prop_assert!((u.u0 * rho0 - j0).abs() < 1e-9 * j0.abs().max(1.0));
    }

    #[test]
    fn spacelike_current_is_flagged(j1 in 0.01..10.0f64, frac in -0.99..0.99f64) {
        let u = four_velocity(frac * j1, j1).unwrap();
        prop_assert_eq!(u.class, CurrentClass::Spacelike);
        prop_assert!(!u.normalized);
        prop_assert!(u.rest_density.is_none());
    }

    #[test]
    fn weak_value_is_linear_in_direction(i in direction(), f in direction(), h in direction()) {
        prop_assume!(i.angle_to(&f) < 3.0);
        let ctx = TwoStateContext::from_axes(&i, Sign::Up, &f, Sign::Up).unwrap();
        let v = [Direction::X, Direction::Y, Direction::Z].map(|n| weak_spin_value(&ctx, &n));
        let h_arr = h.to_array();
        let dot: f64 = (0..3).map(|k| v[k] * h_arr[k]).sum();
        prop_assert!((weak_spin_value(&ctx, &h) - dot).abs() < 1e-9);
    }

    #[test]
    fn ks_statistic_is_bounded(xs in proptest::collection::vec(-5.0..5.0f64, 1..200)) {
        let d = ks_statistic(&xs, |x| ((x + 5.0) / 10.0).clamp(0.0, 1.0));
        let n = xs.len() as f64;
        prop_assert!(d >= 0.5 / n - 1e-15 && d <= 1.0);
    }

    #[test]
    fn cdf_is_monotone(x0 in -3.0..3.0f64, sigma in 0.5..2.0f64, a in -9.0..9.0f64, b in -9.0..9.0f64) {
        let g = Grid::new(-25.0, 25.0, 512).unwrap();
        let psi = make_gaussian(&g, x0, sigma, 0.0, None).unwrap();
        let cdf = DensityCdf::new(&g, &psi.density()).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(cdf.cdf(lo) <= cdf.cdf(hi));
    }

    #[test]
    fn cs_fields_reduce_for_any_packet(x0 in -2.0..2.0f64, sigma in 0.7..2.0f64, k in -3.0..3.0f64) {
        let g = Grid::new(-20.0, 20.0, 512).unwrap();
        let psi = make_gaussian(&g, x0, sigma, k, None).unwrap();
        let s = current_standard(&psi);
        let c = current_cs(&psi, &psi).unwrap();
        for j in 0..g.n_points {
            prop_assert!((s.density[j] - c.density[j]).abs() < 1e-12);
            prop_assert!((s.current[j] - c.current[j]).abs() < 1e-12);
        }
    }
}
