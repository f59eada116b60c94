//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS line with its measured quantities (visible with
//! `cargo test --test acceptance -- --nocapture`).

use mosgame::scenarios::{balanced_start, fig2_params, fig4_params, fig_s_params};
use mosgame::testing::{random_margin_safe_params, SplitMix64};
use mosgame::{
    char_poly_coeffs_e05, classify_equilibrium, critical_imitation_rate, detect_attractor, e05,
    e05_existence_interval, enumerate_equilibria, hopf_analysis, integrate, jacobian,
    oscillation_metrics, rhs, AnalysisConfig, AttractorKind, EquilibriumLabel, IntegratorConfig,
    ModelParams, StabilityError, State,
};
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

// The runtime budgets below are per-criterion; keep timed tests from
// running concurrently so wall-clock measurements stay meaningful.
static SERIAL: Mutex<()> = Mutex::new(());

fn timed() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn fast_integrator(params: &ModelParams) -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-6,
        abs_tol: [2.0, 2.0, 1e-8],
        // Relay cells pin w against a box face at rates ~ k r_c, which an
        // explicit pair resolves with very small steps.
        max_steps: 50_000_000,
        ..IntegratorConfig::for_params(params)
    }
}

/// Per-component 1% convergence: relative to the equilibrium value where it
/// is nonzero, otherwise to the initial displacement.
fn assert_quadrant_convergence(
    params: &ModelParams,
    start: State,
    horizon: f64,
    expected: EquilibriumLabel,
) {
    let eqs = enumerate_equilibria(params);
    let target = eqs
        .get(expected)
        .unwrap_or_else(|| panic!("{expected} not enumerated"));
    assert!(target.exists, "{expected} should exist");
    let verdict = classify_equilibrium(params, target).unwrap();
    assert_eq!(
        verdict.stability,
        mosgame::Stability::Stable,
        "{expected} should be the stable state"
    );

    let traj = integrate(params, start, (0.0, horizon), &fast_integrator(params)).unwrap();
    let fin = traj.final_state().as_array();
    let goal = target.state.as_array();
    let init = start.as_array();
    for i in 0..3 {
        let scale = goal[i].abs().max((init[i] - goal[i]).abs());
        assert!(
            (fin[i] - goal[i]).abs() <= 0.01 * scale,
            "{expected} component {i}: {} vs {} (scale {scale})",
            fin[i],
            goal[i]
        );
    }
}

#[test]
fn criterion_01_constant_payoff_quadrants() {
    let _guard = timed();
    let start = Instant::now();
    let s0 = balanced_start();
    // (N <> 1) x (r_c - r_d <> 0); r_d = 1.
    assert_quadrant_convergence(&fig2_params(0.5, 1.5, 1.0), s0, 500.0, EquilibriumLabel::E01);
    assert_quadrant_convergence(&fig2_params(0.5, 0.5, 1.0), s0, 500.0, EquilibriumLabel::E02);
    assert_quadrant_convergence(&fig2_params(10.0, 1.5, 1.0), s0, 500.0, EquilibriumLabel::E03);
    assert_quadrant_convergence(&fig2_params(10.0, 0.5, 1.0), s0, 500.0, EquilibriumLabel::E04);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("acceptance 01 PASS: four quadrants converge within 1% by t=500 ({elapsed:?})");
}

#[test]
fn criterion_02_interior_state_closed_form_residuals() {
    let _guard = timed();
    let start = Instant::now();
    let mut rng = SplitMix64::new(202);
    let mut accepted = 0;
    let mut worst: f64 = 0.0;
    while accepted < 100 {
        let mut p = fig4_params(1.4, 9000.0, 1.0);
        p.entomology.r = rng.range(0.2, 1.0);
        p.entomology.b = rng.around(p.entomology.b);
        p.entomology.nu_l = rng.around(p.entomology.nu_l);
        p.entomology.mu_l = rng.around(p.entomology.mu_l);
        p.entomology.mu_a = rng.around(p.entomology.mu_a);
        p.behavior.m = rng.around(p.behavior.m);
        p.behavior.r_d = rng.around(p.behavior.r_d);
        p.habitat.k_max = rng.around(p.habitat.k_max);
        p.habitat.k_min = rng.around(p.habitat.k_min);
        if p.habitat.k_min * 1.1 > p.habitat.k_max {
            continue;
        }
        let Ok(p_base) = p.validated() else { continue };
        if p_base.entomology.basic_offspring_number() <= 1.05 {
            continue;
        }
        let (lo, hi) = e05_existence_interval(&p_base).unwrap();
        let ratio = lo + rng.range(0.02, 0.98) * (hi - lo);
        let mut p = p_base;
        p.behavior.r_c = ratio * p.behavior.r_d;
        let Ok(p) = p.validated() else { continue };

        let eq = e05(&p).unwrap();
        assert!(eq.exists, "interior state must exist for ratio {ratio}");
        let d = rhs(&p, &eq.state).unwrap();
        let s = eq.state.as_array();
        for i in 0..3 {
            let residual = d[i].abs() / s[i].abs().max(1.0);
            worst = worst.max(residual);
            assert!(residual < 1e-9, "residual {residual} in component {i}");
        }
        accepted += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "acceptance 02 PASS: 100 random interior states, worst residual {worst:.3e} ({elapsed:?})"
    );
}

#[test]
fn criterion_03_hopf_boundary_identity() {
    let _guard = timed();
    let start = Instant::now();
    let base = fig4_params(1.4, 9000.0, 1.0);
    let k_c = critical_imitation_rate(&base, 9000.0).unwrap().unwrap();
    let mut p = base;
    p.behavior.k = k_c;

    let coeffs = char_poly_coeffs_e05(&p).unwrap();
    let gap = (coeffs.a2 * coeffs.a1 - coeffs.a0).abs();
    assert!(
        gap <= 1e-8 * coeffs.a2 * coeffs.a1,
        "a2 a1 - a0 = {gap:e} at k_c"
    );

    let eq = e05(&p).unwrap();
    let eigenvalues = mosgame::eigenvalues3(&jacobian(&p, &eq.state).unwrap());
    let omega = coeffs.a1.sqrt();
    let pair_re = eigenvalues[0].re.abs();
    let pair_im = eigenvalues[0].im.abs();
    assert!(pair_re < 1e-8 * coeffs.a2, "Re pair = {pair_re:e}");
    assert!(
        (pair_im - omega).abs() < 1e-6 * omega,
        "Im pair = {pair_im} vs {omega}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 0.1, "took {elapsed:?}");
    println!(
        "acceptance 03 PASS: at k_c = {k_c:.4e}, |Re| = {pair_re:.2e}, Im = {pair_im:.6} ~ {omega:.6} ({elapsed:?})"
    );
}

#[test]
fn criterion_04_transversality() {
    let _guard = timed();
    let start = Instant::now();
    let base = fig4_params(1.4, 9000.0, 1.0);
    let k_c = critical_imitation_rate(&base, 9000.0).unwrap().unwrap();
    let eq = e05(&base).unwrap();
    let pair_re = |k: f64| {
        let mut p = base;
        p.behavior.k = k;
        mosgame::eigenvalues3(&jacobian(&p, &eq.state).unwrap())[0].re
    };
    let delta = 1e-3 * k_c;
    let below = pair_re(k_c - delta);
    let above = pair_re(k_c + delta);
    let slope = (above - below) / (2.0 * delta);

    let mut at = base;
    at.behavior.k = k_c;
    let c = char_poly_coeffs_e05(&at).unwrap();
    let predicted = (c.a0 / k_c) / (2.0 * (c.a1 + c.a2 * c.a2));

    assert!(below < 0.0 && above > 0.0, "no sign change across k_c");
    assert!(slope > 0.0, "slope {slope}");
    assert!(
        (slope - predicted).abs() <= 0.2 * predicted,
        "slope {slope} vs predicted {predicted}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 0.1, "took {elapsed:?}");
    println!(
        "acceptance 04 PASS: d(Re)/dk = {slope:.4} vs a0'(k_c)/(2(a1+a2^2)) = {predicted:.4} ({elapsed:?})"
    );
}

#[test]
fn criterion_05_oscillation_window_classification() {
    let _guard = timed();
    let start = Instant::now();
    let base = fig4_params(1.4, 9000.0, 1.0); // k = 0.8 per the scenario
    let n_values: Vec<f64> = (0..16).map(|i| 1.4 + i as f64 * (2.8 - 1.4) / 15.0).collect();
    let ratio_values: Vec<f64> = (0..16)
        .map(|i| 300.0 * (1.0e5_f64 / 300.0).powf(i as f64 / 15.0))
        .collect();
    let margin = 0.05;

    let mut cells = Vec::new();
    for &n in &n_values {
        for &x in &ratio_values {
            cells.push((n, x));
        }
    }
    let classify_cell = |&(n, x): &(f64, f64)| -> Option<String> {
        let mut p = base;
        p.entomology.b = p.entomology.egg_rate_for_offspring_number(n);
        p.behavior.r_c = x * p.behavior.r_d;
        let p = p.validated().unwrap();
        let (lo, hi) = e05_existence_interval(&p).unwrap();
        let hopf = hopf_analysis(&p).unwrap();

        let inside_window = match (hopf.x1, hopf.x2) {
            (Some(x1), Some(x2)) => x >= x1 * (1.0 + margin) && x <= x2 * (1.0 - margin),
            _ => false,
        };
        let below = x <= lo * (1.0 - margin);
        let above = x >= hi * (1.0 + margin);
        if !inside_window && !below && !above {
            return None; // within a boundary margin: excluded
        }

        let traj = integrate(&p, State::new(2.0e4, 2.0e4, 0.3), (0.0, 2500.0), &fast_integrator(&p))
            .unwrap();
        let eqs = enumerate_equilibria(&p);
        let outcome =
            detect_attractor(&traj, &eqs.equilibria, &p, &AnalysisConfig::default()).unwrap();
        let expected = if inside_window {
            AttractorKind::SustainedOscillation
        } else if above {
            AttractorKind::ConvergedTo(EquilibriumLabel::E03)
        } else {
            AttractorKind::ConvergedTo(EquilibriumLabel::E04)
        };
        if outcome.kind == expected {
            None
        } else {
            Some(format!(
                "cell (N={n:.3}, x={x:.1}): expected {expected}, got {}",
                outcome.kind
            ))
        }
    };

    #[cfg(feature = "parallel")]
    let mismatches: Vec<String> = {
        use rayon::prelude::*;
        cells.par_iter().filter_map(classify_cell).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mismatches: Vec<String> = cells.iter().filter_map(classify_cell).collect();

    assert!(mismatches.is_empty(), "mismatches: {mismatches:#?}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "acceptance 05 PASS: 16x16 grid, margin-clear cells all classified correctly ({elapsed:?})"
    );
}

/// Measure the settled period just above the critical imitation rate.
fn near_onset_period(base: &ModelParams, ratio: f64) -> Option<f64> {
    let k_c = critical_imitation_rate(base, ratio).ok()??;
    let mut p = *base;
    p.behavior.r_c = ratio * p.behavior.r_d;
    p.behavior.k = 1.05 * k_c;
    let p = p.validated().ok()?;
    let eq = e05(&p).ok()?;
    let s0 = State::new(eq.state.aquatic * 1.05, eq.state.adults * 1.05, eq.state.control);
    let traj = integrate(&p, s0, (0.0, 40_000.0), &fast_integrator(&p)).ok()?;
    let cfg = AnalysisConfig::default();
    let metrics = oscillation_metrics(&traj, 0.75, &p, &cfg).ok()?;
    Some(metrics.adults.period)
}

#[test]
fn criterion_06_onset_periods() {
    let _guard = timed();
    let start = Instant::now();
    let base = fig4_params(1.4, 9000.0, 1.0);

    // Single-point check at the reference ratio.
    let coeffs = char_poly_coeffs_e05(&base).unwrap();
    let onset = 2.0 * std::f64::consts::PI / coeffs.a1.sqrt();
    let period = near_onset_period(&base, 9000.0).expect("near-onset cycle");
    assert!(
        period >= 0.9 * onset && period <= 1.1 * onset,
        "period {period} vs onset {onset}"
    );

    // Replication grid across the instability window at the scenario's
    // k = 0.8: the four reference periods must appear within 15%.
    let cells: Vec<(f64, f64)> = [1.4, 1.75, 2.1, 2.45, 2.8]
        .into_iter()
        .flat_map(|n| [0.15, 0.4, 0.65, 0.9].into_iter().map(move |q| (n, q)))
        .collect();
    let measure = |&(n, q): &(f64, f64)| -> Option<f64> {
        let mut p = base;
        p.entomology.b = p.entomology.egg_rate_for_offspring_number(n);
        let probe = p.validated().ok()?;
        let (lo, hi) = e05_existence_interval(&probe).ok()?;
        p.behavior.r_c = lo * (hi / lo).powf(q) * p.behavior.r_d;
        let p = p.validated().ok()?;
        let traj = integrate(
            &p,
            State::new(2.0e4, 2.0e4, 0.3),
            (0.0, 3000.0),
            &fast_integrator(&p),
        )
        .ok()?;
        let metrics = oscillation_metrics(&traj, 0.5, &p, &AnalysisConfig::default()).ok()?;
        let m = &metrics.aquatic;
        (m.period_jitter < 0.05
            && (m.spectral_period - m.period).abs() <= 0.05 * m.period)
            .then_some(m.period)
    };
    #[cfg(feature = "parallel")]
    let periods: Vec<f64> = {
        use rayon::prelude::*;
        cells.par_iter().filter_map(measure).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let periods: Vec<f64> = cells.iter().filter_map(measure).collect();

    assert!(periods.len() > 15, "only {} cells measured", periods.len());
    for target in [50.0, 86.0, 109.0, 165.0] {
        let hit = periods
            .iter()
            .any(|p| (p - target).abs() <= 0.15 * target);
        assert!(hit, "no cell within 15% of {target} days in {periods:?}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "acceptance 06 PASS: onset period {period:.1} ~ {onset:.1} days; grid covers 50/86/109/165 ({elapsed:?})"
    );
}

#[test]
fn criterion_07_monotone_amplitude_and_period_trends() {
    let _guard = timed();
    let start = Instant::now();
    let base = fig4_params(1.4, 9000.0, 1.0);
    let mut n_axis = Vec::new();
    let mut amplitudes = Vec::new();
    let mut periods = Vec::new();
    for i in 0..8 {
        let n = 1.4 + i as f64 * (2.8 - 1.4) / 7.0;
        let mut p = base;
        p.entomology.b = p.entomology.egg_rate_for_offspring_number(n);
        let p = p.validated().unwrap();
        let traj = integrate(
            &p,
            State::new(2.0e4, 2.0e4, 0.3),
            (0.0, 2500.0),
            &fast_integrator(&p),
        )
        .unwrap();
        let metrics =
            oscillation_metrics(&traj, 0.5, &p, &AnalysisConfig::default()).unwrap();
        n_axis.push(n);
        amplitudes.push(metrics.aquatic.amplitude);
        periods.push(metrics.aquatic.period);
    }
    let amp_corr = mosgame::analysis::spearman(&n_axis, &amplitudes);
    let period_corr = mosgame::analysis::spearman(&n_axis, &periods);
    assert!(amp_corr >= 0.9, "amplitude rank correlation {amp_corr}");
    assert!(period_corr <= -0.9, "period rank correlation {period_corr}");
    let elapsed = start.elapsed();
    println!(
        "acceptance 07 PASS: spearman(N, amplitude) = {amp_corr:.3}, spearman(N, period) = {period_corr:.3} ({elapsed:?})"
    );
}

#[test]
fn criterion_08_analytic_numeric_agreement() {
    let _guard = timed();
    let start = Instant::now();
    let mut rng = SplitMix64::new(808);
    let mut draws = 0;
    let mut classified = 0;
    while draws < 1000 {
        let Some(p) = random_margin_safe_params(&mut rng) else {
            continue;
        };
        draws += 1;
        for eq in enumerate_equilibria(&p).existing() {
            if eq.boundary {
                continue;
            }
            match classify_equilibrium(&p, eq) {
                Ok(_) => classified += 1,
                Err(e @ StabilityError::AnalyticNumericMismatch { .. }) => {
                    panic!("mismatch on draw {draws}: {e}\nparams: {p:?}")
                }
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "acceptance 08 PASS: 1000 margin-excluded draws, {classified} classifications, zero mismatches ({elapsed:?})"
    );
}

#[test]
fn criterion_09_integrator_self_convergence() {
    let _guard = timed();
    let start = Instant::now();
    let p = fig2_params(10.0, 1.5, 1.0);
    let s0 = balanced_start();
    let run = |rel_tol: f64| {
        let cfg = IntegratorConfig {
            rel_tol,
            abs_tol: [rel_tol * 2.0e6, rel_tol * 2.0e6, rel_tol * 0.01],
            ..IntegratorConfig::for_params(&p)
        };
        integrate(&p, s0, (0.0, 100.0), &cfg).unwrap().final_state().as_array()
    };
    let coarse = run(1e-6);
    let reference = run(1e-10);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let rel = (coarse[i] - reference[i]).abs() / reference[i].abs().max(1.0);
        worst = worst.max(rel);
        assert!(rel < 1e-5, "component {i}: relative difference {rel:e}");
    }
    let elapsed = start.elapsed();
    println!(
        "acceptance 09 PASS: rel_tol 1e-6 vs 1e-10 differ by {worst:.2e} at t=100 ({elapsed:?})"
    );
}

#[test]
fn criterion_10_intervention_quadrants() {
    let _guard = timed();
    let start = Instant::now();
    let s0 = balanced_start();
    // gamma = 0.4, k = 0.8, threshold at r_c - r_d = 0.5; r_d = 1.
    // r_c - r_d = 0.8 puts w* = gamma/(k(r_c-r_d)) = 0.625 inside [0, 1].
    let above = |b: f64| fig_s_params(b, 1.8, 1.0);
    let below = |b: f64| fig_s_params(b, 1.2, 1.0);

    assert_quadrant_convergence(&above(0.5), s0, 500.0, EquilibriumLabel::E01Tilde);
    assert_quadrant_convergence(&below(0.5), s0, 500.0, EquilibriumLabel::E02);
    assert_quadrant_convergence(&above(10.0), s0, 500.0, EquilibriumLabel::E03Tilde);
    assert_quadrant_convergence(&below(10.0), s0, 500.0, EquilibriumLabel::E04);

    // The partial-control level itself is part of the check.
    let p = above(10.0);
    let w_target = p.behavior.gamma / (p.behavior.k * (p.behavior.r_c - p.behavior.r_d));
    assert!((w_target - 0.625).abs() < 1e-12);
    let traj = integrate(&p, s0, (0.0, 500.0), &fast_integrator(&p)).unwrap();
    let w = traj.final_state().control;
    assert!((w - w_target).abs() <= 0.01 * w_target, "w = {w} vs {w_target}");

    let elapsed = start.elapsed();
    println!(
        "acceptance 10 PASS: intervention quadrants converge; w -> {w_target:.3} within 1% ({elapsed:?})"
    );
}
