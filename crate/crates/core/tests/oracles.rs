//! Closed-form oracles for the integrator and the analysis probes.

use zeno_core::analysis::{
    detect_blowup, probe_mean_square, probe_stability_in_probability, verify_theorem1_bound,
};
use zeno_core::markov::{GeneratorMatrix, MarkChain};
use zeno_core::presets::preset;
use zeno_core::simulate::{simulate_ensemble, IntegratorConfig, RngPolicy};
use zeno_core::system::{CoefficientFamily, JumpFamily, JumpSchedule, ScheduleKind, SystemParts, SystemSpec};

fn scalar(a: f64, b: f64, x0: f64) -> SystemSpec {
    SystemSpec::new(SystemParts {
        drift: CoefficientFamily::linear(vec![a]),
        diffusion: CoefficientFamily::linear(vec![b]),
        jump: JumpFamily::Zero,
        schedule: JumpSchedule::new(ScheduleKind::Explicit(vec![0.7, 1.4, 2.1])),
        xi: GeneratorMatrix::single_state(),
        switching: None,
        eta: MarkChain::constant(1.0),
        x0: vec![x0],
        y0: 0,
        h0: 0,
    })
    .unwrap()
}

/// `E x(t)² = x0² e^{(2a + b²) t}` for geometric Brownian motion.
fn gbm_second_moment(a: f64, b: f64, x0: f64, t: f64) -> f64 {
    x0 * x0 * ((2.0 * a + b * b) * t).exp()
}

#[test]
fn mean_square_probe_matches_gbm_at_every_point() {
    let spec = scalar(-1.0, 0.3, 3.0);
    let grid = [0.25, 0.5, 1.0, 2.0];
    let r = probe_mean_square(&spec, &IntegratorConfig::default(), &grid, 20_000, &RngPolicy::new(31)).unwrap();
    for row in &r.rows {
        let exact = gbm_second_moment(-1.0, 0.3, 3.0, row.param);
        let z = (row.estimate.mean - exact).abs() / row.estimate.stderr;
        assert!(z < 3.0, "t = {}: {} vs {exact} ({z:.2}σ)", row.param, row.estimate.mean);
    }
    assert!(r.verdict);
}

#[test]
fn halving_the_step_does_not_worsen_the_moment() {
    let spec = scalar(-1.0, 0.3, 1.0);
    let exact = gbm_second_moment(-1.0, 0.3, 1.0, 1.0);
    let err = |dt: f64| {
        let cfg = IntegratorConfig { refine_near_star: false, ..IntegratorConfig::default() }.with_dt_max(dt);
        let g = simulate_ensemble(&spec, &cfg, 1.0, 40_000, &[1.0], &RngPolicy::new(32)).grid[0].clone();
        ((g.mean_sq_norm - exact).abs(), g.stderr)
    };
    let (mut prev, mut prev_se) = err(0.2);
    for dt in [0.1, 0.05, 0.025] {
        let (e, se) = err(dt);
        assert!(e <= prev + 3.0 * (se * se + prev_se * prev_se).sqrt(), "dt = {dt}: {e} after {prev}");
        (prev, prev_se) = (e, se);
    }
}

#[test]
fn frozen_system_probes() {
    let frozen = scalar(0.0, 0.0, 3.0);
    let cfg = IntegratorConfig::default();
    let ms = probe_mean_square(&frozen, &cfg, &[0.0, 1.0, 2.5], 16, &RngPolicy::new(1)).unwrap();
    assert!(ms.rows.iter().all(|r| r.estimate.mean == 9.0 && r.estimate.stderr == 0.0));
    assert!(!ms.verdict);

    let p = probe_stability_in_probability(&frozen, &cfg, 1.0, 3.0, 16, &[0.5, 0.1], &RngPolicy::new(1)).unwrap();
    assert!(p.rows.iter().all(|r| r.estimate.mean == 0.0));
    assert!(p.verdict);
    assert!(p.note.contains("[0, 3]"));
}

#[test]
fn bound_holds_on_presets_meeting_the_existence_conditions() {
    for name in ["case1", "case2"] {
        let m = preset(name).unwrap().build().unwrap();
        for k in 0..4 {
            let r = verify_theorem1_bound(&m.spec, &m.integrator, k, 2000, &RngPolicy::new(40 + k as u64)).unwrap();
            assert!(r.pass, "{name} segment {k}: {} > {}", r.lhs.ci_high, r.rhs);
        }
    }
}

#[test]
fn intro_blowup_is_monotone_in_truncation() {
    let m = preset("intro").unwrap().build().unwrap();
    let ks: Vec<usize> = (1..=12).collect();
    let r = detect_blowup(&m.spec, &m.integrator, &ks, m.horizon, 3, &RngPolicy::new(2)).unwrap();
    assert!(r.rows.windows(2).all(|w| w[1].median_sup >= w[0].median_sup));
    assert!(r.blowup);
    // Deterministic: sup = e^{-t} Π (1 + k²) right after the last jump at t = 1.
    let product: f64 = (1..=12).map(|k| 1.0 + (k * k) as f64).product();
    let last = r.rows.last().unwrap();
    let rel = (last.median_sup - product * (-1.0f64).exp()).abs() / (product * (-1.0f64).exp());
    assert!(rel < 1e-2, "{} vs {}", last.median_sup, product * (-1.0f64).exp());
}

#[test]
fn case3_explodes_before_the_accumulation_point() {
    let mut cfg = preset("case3").unwrap();
    cfg.schedule.set_k_max(100);
    let m = cfg.build().unwrap();
    let ens = simulate_ensemble(&m.spec, &m.integrator, 2.0, 200, &[], &RngPolicy::new(3));
    assert!(ens.exploded_by(2.0) >= 0.9);
    assert!(ens.explosion_times.iter().all(|&t| t < 2.0));
}

#[test]
fn case2_exceedance_shrinks_with_initial_size() {
    let m = preset("case2").unwrap().build().unwrap();
    let r = probe_stability_in_probability(&m.spec, &m.integrator, 5.0, m.spec.default_probe_horizon(), 1000, &[1.0, 0.1, 0.01], &RngPolicy::new(5))
        .unwrap();
    assert!(r.verdict, "{:?}", r.rows);
}

#[test]
fn probes_rerun_identically() {
    let m = preset("case2").unwrap().build().unwrap();
    let run = || probe_mean_square(&m.spec, &m.integrator, &[0.5, 1.0, 2.0], 200, &RngPolicy::new(9)).unwrap();
    assert_eq!(run(), run());
}
