//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use csbohm::ensemble::{
    appendix_average_check, born_experiment, equivariance_check, householder_basis, ks_critical_value, plane_wave_basis,
    random_setup, sample_positions, MeasurementSetup,
};
use csbohm::spin::{Direction, MultiSpinState, Sign};
use csbohm::spin_geometry::hidden_spin_vector;
use csbohm::trajectories::{bohm_trajectory, cs_worldline, density_zero_crossings, FieldHistory, IntegratorOptions};
use csbohm::two_state::{entangled_weak_value, reduced_weak_value, weak_spin_value, EntangledContext, TwoStateContext};
use csbohm::wavepacket::{
    continuity_residual, current_cs, current_standard, evolve, evolve_final_backward, evolve_final_backward_history,
    evolve_history, make_gaussian, FieldPair, Grid, GridWavefunction,
};
use csbohm::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("runtime {elapsed:.2?} exceeds {limit:?}"))
    }
}

fn random_direction(rng: &mut impl Rng) -> Direction {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    Direction::new(r * phi.cos(), r * phi.sin(), z).expect("unit vector")
}

fn spin_vector_trigonometry() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut mag, mut bis, mut cos_law, mut axis) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for deg in [10.0f64, 30.0, 60.0, 90.0, 120.0, 150.0] {
        let omega = deg.to_radians();
        let i = Direction::Z;
        let f = Direction::in_xz_plane(omega);
        let r = hidden_spin_vector(&i, &f).map_err(|e| e.to_string())?;
        mag = mag.max((r.max_value - 0.5 / (omega / 2.0).cos()).abs());
        bis = bis.max(r.max_direction.angle_to(&Direction::in_xz_plane(omega / 2.0)));
        let ctx = TwoStateContext::from_axes(&i, Sign::Up, &f, Sign::Up).map_err(|e| e.to_string())?;
        for _ in 0..500 {
            let n = random_direction(&mut rng);
            let expected = r.max_value * n.angle_to(&r.max_direction).cos();
            cos_law = cos_law.max((weak_spin_value(&ctx, &n) - expected).abs());
        }
        axis = axis.max((weak_spin_value(&ctx, &i) - 0.5).abs()).max((weak_spin_value(&ctx, &f) - 0.5).abs());
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    check(
        mag < 1e-9 && bis < 1e-6 && cos_law < 1e-10 && axis < 1e-10,
        format!("|max−½/cos(ω/2)| {mag:.1e}, bisector {bis:.1e} rad, cosθ law {cos_law:.1e}, axis {axis:.1e}"),
    )
}

fn entangled_reduction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut cases, mut worst) = (0, 0.0_f64);
    while cases < 1000 {
        let amps = [(); 4].map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let Some(state) = MultiSpinState::from_amplitudes(amps).normalized() else { continue };
        let (e, f, h) = (random_direction(&mut rng), random_direction(&mut rng), random_direction(&mut rng));
        let m = if rng.random_bool(0.5) { Sign::Up } else { Sign::Down };
        let n = if rng.random_bool(0.5) { Sign::Up } else { Sign::Down };
        let Ok(ctx) = EntangledContext::with_threshold(state, e, m, f, n, 1e-6) else { continue };
        let reduced = reduced_weak_value(&ctx, &h).map_err(|e| e.to_string())?;
        worst = worst.max((entangled_weak_value(&ctx, &h) - reduced).abs());
        cases += 1;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    check(worst < 1e-10, format!("{cases} cases, max difference {worst:.1e}"))
}

fn born_rule() -> Outcome {
    let start = Instant::now();
    let opts = IntegratorOptions::ensemble();
    let n = 10_000;
    let setup = MeasurementSetup::standard(C64::new(0.3f64.sqrt(), 0.0), C64::new(0.7f64.sqrt(), 0.0));
    let run = born_experiment(&setup, n, 2024, &opts).map_err(|e| e.to_string())?;
    let freq = run.frequencies()[0];
    let main_ok = (freq - 0.3).abs() <= 0.0137;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut passes = 0;
    for trial in 0..20 {
        let s = random_setup(&mut rng);
        let r = born_experiment(&s, n, 100 + trial, &opts).map_err(|e| e.to_string())?;
        if r.max_deviation_sigmas() < 4.0 {
            passes += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    check(
        main_ok && passes >= 19,
        format!("P(first) = {freq:.4} (Born 0.3 ± 0.0137), random setups within 4σ: {passes}/20"),
    )
}

fn appendix_identity() -> Outcome {
    let start = Instant::now();
    let g = Grid::new(-20.0, 20.0, 1024).map_err(|e| e.to_string())?;
    let psi = make_gaussian(&g, 0.8, 1.3, 1.7, None).map_err(|e| e.to_string())?;
    let jmax = current_standard(&psi).current.iter().fold(0.0_f64, |m, j| m.max(j.abs()));
    let plane = appendix_average_check(&psi, &plane_wave_basis(&g, 0.0).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let house = appendix_average_check(&psi, &householder_basis(&psi).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(30))?;
    check(
        plane < 1e-8 * jmax && house < 1e-8 * jmax,
        format!("relative deviation: plane waves {:.1e}, basis through ψ {:.1e}", plane / jmax, house / jmax),
    )
}

/// Largest continuity residual over the interior slices of a field history.
fn max_residual(fields: &[FieldPair], dx: f64) -> f64 {
    fields.windows(3).map(|w| continuity_residual(&w[0], &w[1], &w[2], dx)).fold(0.0, f64::max)
}

fn continuity_residuals(n_points: usize, dt: f64) -> Result<(f64, f64), String> {
    let g = Grid::new(-20.0, 20.0, n_points).map_err(|e| e.to_string())?;
    let steps = (1.0 / dt).round() as usize;
    let psi_i = make_gaussian(&g, -0.5, 1.0, 1.0, None).map_err(|e| e.to_string())?;
    let f = make_gaussian(&g, 0.5, 1.0, -0.5, None).map_err(|e| e.to_string())?;
    let psi_f = GridWavefunction::new(g, f.into_amplitudes(), 1.0).map_err(|e| e.to_string())?;
    let hi = evolve_history(&psi_i, dt, steps, None, 1).map_err(|e| e.to_string())?;
    let hf = evolve_final_backward_history(&psi_f, dt, steps, None, 1).map_err(|e| e.to_string())?;
    let std: Vec<FieldPair> = hi.iter().map(current_standard).collect();
    let cs: Vec<FieldPair> =
        hi.iter().zip(&hf).map(|(a, b)| current_cs(a, b)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    Ok((max_residual(&std, g.dx()), max_residual(&cs, g.dx())))
}

fn continuity() -> Outcome {
    let (s1, c1) = continuity_residuals(256, 0.02)?;
    let (s2, c2) = continuity_residuals(512, 0.01)?;
    let (rs, rc) = (s1 / s2, c1 / c2);
    check(
        rs >= 3.0 && rc >= 3.0,
        format!("refinement ratio standard {rs:.2} ({s1:.1e}→{s2:.1e}), causally symmetric {rc:.2} ({c1:.1e}→{c2:.1e})"),
    )
}

fn reduction() -> Outcome {
    let g = Grid::new(-30.0, 30.0, 1024).map_err(|e| e.to_string())?;
    let psi = make_gaussian(&g, -1.0, 1.0, 1.0, None).map_err(|e| e.to_string())?;
    let s = current_standard(&psi);
    let c = current_cs(&psi, &psi).map_err(|e| e.to_string())?;
    let field_dev = s
        .density
        .iter()
        .zip(&c.density)
        .chain(s.current.iter().zip(&c.current))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let hist = evolve_history(&psi, 0.01, 100, None, 1).map_err(|e| e.to_string())?;
    let std = FieldHistory::standard(&hist).map_err(|e| e.to_string())?;
    let cs = FieldHistory::causally_symmetric(&hist, &hist, 1e-10).map_err(|e| e.to_string())?;
    let opts = IntegratorOptions::default();
    let mut path_dev = 0.0_f64;
    for x0 in [-2.5, -1.5, -1.0, -0.2, 0.5] {
        let tr = bohm_trajectory(&std, x0, &opts).map_err(|e| e.to_string())?;
        let wl = cs_worldline(&cs, x0, 0.0, &opts).map_err(|e| e.to_string())?;
        for &(t, x) in &tr.samples {
            let xc = wl.position_at_time(t).ok_or(format!("worldline misses t = {t}"))?;
            path_dev = path_dev.max((x - xc).abs());
        }
    }
    check(field_dev < 1e-12 && path_dev < 1e-6, format!("fields {field_dev:.1e}, worldline vs trajectory {path_dev:.1e}"))
}

fn equivariance() -> Outcome {
    let g = Grid::new(-20.0, 20.0, 1024).map_err(|e| e.to_string())?;
    let psi = make_gaussian(&g, 0.0, 1.0, 0.5, None).map_err(|e| e.to_string())?;
    let hist = FieldHistory::standard(&evolve_history(&psi, 0.01, 100, None, 1).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let n = 10_000;
    let samples = sample_positions(&psi, n, 7).map_err(|e| e.to_string())?;
    let ks = equivariance_check(&hist, &samples, 0.0, 1.0, &IntegratorOptions::ensemble()).map_err(|e| e.to_string())?;
    let crit = ks_critical_value(n);
    check(ks < crit, format!("KS {ks:.4} vs critical {crit:.4} at t = 1"))
}

/// ψ_i: unit Gaussian at x = 0 moving right (k = 2) from t = 0. ψ_f: unit
/// Gaussian at x = 1 moving left (k = −2) at t = 1. Their j⁰ is negative
/// in a band between the packets; the worldline through (t, x) = (0.5, 0.4)
/// crosses it.
fn doubling_back() -> Outcome {
    let g = Grid::new(-20.0, 20.0, 1024).map_err(|e| e.to_string())?;
    let (dt, steps) = (0.01, 100);
    let psi_i = make_gaussian(&g, 0.0, 1.0, 2.0, None).map_err(|e| e.to_string())?;
    let f = make_gaussian(&g, 1.0, 1.0, -2.0, None).map_err(|e| e.to_string())?;
    let psi_f = GridWavefunction::new(g, f.into_amplitudes(), 1.0).map_err(|e| e.to_string())?;
    let hi = evolve_history(&psi_i, dt, steps, None, 1).map_err(|e| e.to_string())?;
    let hf = evolve_final_backward_history(&psi_f, dt, steps, None, 1).map_err(|e| e.to_string())?;
    let cs = FieldHistory::causally_symmetric(&hi, &hf, 1e-10).map_err(|e| e.to_string())?;
    let opts = IntegratorOptions { lambda_max: Some(50.0), ..IntegratorOptions::default() };
    let wl = cs_worldline(&cs, 0.4, 0.5, &opts).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for ev in &wl.reversal_events {
        let d = density_zero_crossings(&cs, ev.t).iter().map(|z| (z - ev.x).abs()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    let control = FieldHistory::causally_symmetric(&hi, &hi, 1e-10).map_err(|e| e.to_string())?;
    let wc = cs_worldline(&control, 0.4, 0.5, &opts).map_err(|e| e.to_string())?;
    check(
        !wl.reversal_events.is_empty() && worst <= g.dx() && wc.reversal_events.is_empty(),
        format!(
            "{} reversal(s), max distance to j⁰ zero {worst:.1e} (cell {:.1e}); control reversals {}",
            wl.reversal_events.len(),
            g.dx(),
            wc.reversal_events.len()
        ),
    )
}

fn hygiene() -> Outcome {
    let g = Grid::new(-60.0, 60.0, 1024).map_err(|e| e.to_string())?;
    let psi = make_gaussian(&g, 0.0, 2.0, 0.5, None).map_err(|e| e.to_string())?;
    let n0 = psi.norm_sqr();
    let long = evolve(&psi, 0.001, 10_000, None).map_err(|e| e.to_string())?;
    let drift = (long.norm_sqr() - n0).abs();

    let g2 = Grid::new(-30.0, 30.0, 1024).map_err(|e| e.to_string())?;
    let start = make_gaussian(&g2, 1.0, 1.0, -1.5, None).map_err(|e| e.to_string())?;
    let back = evolve_final_backward(&start, 0.001, 1000, None).map_err(|e| e.to_string())?;
    let fwd = evolve(&back[0], 0.001, 1000, None).map_err(|e| e.to_string())?;
    let round = fwd.amplitudes().iter().zip(start.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);

    let mut setup = MeasurementSetup::standard(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    setup.grid.n_points = 1024;
    let opts = IntegratorOptions::ensemble();
    let a = born_experiment(&setup, 2000, 99, &opts).map_err(|e| e.to_string())?;
    let b = born_experiment(&setup, 2000, 99, &opts).map_err(|e| e.to_string())?;
    let identical = a == b && a.max_ks_statistic.to_bits() == b.max_ks_statistic.to_bits();
    check(
        drift < 1e-8 && round < 1e-10 && identical,
        format!("norm drift {drift:.1e} over 10⁴ steps, round trip {round:.1e}, repeat run identical: {identical}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("spin-vector trigonometry", spin_vector_trigonometry),
        ("entangled reduction identity", entangled_reduction),
        ("Born rule recovery", born_rule),
        ("weighted-average current identity", appendix_identity),
        ("continuity, second order", continuity),
        ("reduction at ψ_f = ψ_i", reduction),
        ("equivariance", equivariance),
        ("doubling back witness", doubling_back),
        ("numerical hygiene", hygiene),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = run();
        let elapsed = t.elapsed();
        match result {
            Ok(d) => println!("criterion {} PASS  {name}: {d} [{elapsed:.2?}]", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {d} [{elapsed:.2?}]", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
