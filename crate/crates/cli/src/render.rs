//! Aligned text reports.

use std::fmt::Write;

use zeno_core::analysis::{BlowupReport, BoundCheckResult, StabilityProbeResult, SupermartingaleReport};
use zeno_core::lyapunov::{LyapunovError, Theorem6Report};
use zeno_core::stats::Estimate;
use zeno_core::system::{ConditionReport, SystemSpec};

/// Shortest form after rounding to 12 significant digits, so `1 - 0.045`
/// prints as `0.955`. Very large or small magnitudes use exponent notation.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if (1e-5..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn est(e: &Estimate) -> String {
    if e.mean.is_finite() {
        format!("{} ± {}", num(e.mean), num(e.stderr))
    } else {
        num(e.mean)
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn check(
    spec: &SystemSpec,
    c: &ConditionReport,
    stability: &Result<Theorem6Report, LyapunovError>,
    pass: bool,
) -> String {
    let mut s = String::new();
    let sched = spec.schedule();
    let point = sched.concentration_point().map_or("none".to_string(), num);
    let _ = writeln!(s, "model: {} regime(s), {} jumps, accumulation point {point}", spec.n_regimes(), sched.len());
    let _ = writeln!(s, "existence conditions");
    for (name, o) in [
        ("growth C", &c.growth),
        ("lipschitz L", &c.lipschitz),
        ("sum L_k", &c.jump_lipschitz),
        ("sum gamma_k", &c.jump_summability),
    ] {
        let _ = writeln!(s, "  {name:<14} {:>14}  {}", num(o.value), verdict(o.pass));
    }
    let _ = writeln!(s, "  {:<14} {:>14}  {}", "concentration", "", verdict(c.concentration.pass));
    for row in &c.concentration.rows {
        let n = row.n_eps.map_or("-".to_string(), |n| n.to_string());
        let v = row.value.map_or("-".to_string(), num);
        let _ = writeln!(s, "    eps {:<10} N_eps {n:<6} {v}", num(row.eps));
    }
    match stability {
        Err(e) => {
            let _ = writeln!(s, "regime stability test not applicable: {e}");
        }
        Ok(r) => {
            let k = &r.conditions;
            let found = if k.epsilon_found { "" } else { " (no admissible epsilon found)" };
            let _ = writeln!(
                s,
                "regime stability (epsilon = {}, b_max = {}, beta = {}){found}",
                num(k.epsilon),
                num(k.b_max),
                num(k.beta)
            );
            let _ = writeln!(
                s,
                "  {:>6} {:>8} {:>8} {:>10} {:>14} {:>10}  {:<7} {:<9} {:<5}",
                "regime", "a", "b", "margin", "switching_sum", "rhs", "margin", "switching", "drift"
            );
            for row in &k.rows {
                let _ = writeln!(
                    s,
                    "  {:>6} {:>8} {:>8} {:>10} {:>14} {:>10}  {:<7} {:<9} {:<5}",
                    row.regime,
                    num(row.a),
                    num(row.b),
                    num(row.margin),
                    num(row.switching_sum),
                    num(row.rhs),
                    verdict(row.pass_margin),
                    verdict(row.pass_switching),
                    verdict(row.pass_drift)
                );
            }
            let j = &r.condition_47;
            let _ = writeln!(
                s,
                "jump moment condition: {} (max ratio {}, log {}, {} jumps x {} points)",
                verdict(j.pass),
                num(j.max_ratio),
                num(j.log_max_ratio),
                j.jumps_checked,
                j.grid_points
            );
            if let Some(w) = &j.witness {
                let _ = writeln!(s, "  witness k = {}, h = {}, x = {}, ratio = {}", w.k, w.h, num(w.x), num(w.ratio));
            }
        }
    }
    let _ = writeln!(s, "verdict: {}", if pass { "PASS" } else { "FAIL" });
    s
}

pub fn bound(r: &BoundCheckResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "segment k = {} on [{}, {}], closing jump index {}", r.k, num(r.t_start), num(r.t_end), r.jump_index);
    let _ = writeln!(s, "  E sup |x|^2     {}  (95% upper {})", est(&r.lhs), num(r.lhs.ci_high));
    let _ = writeln!(s, "  E |x(t_k)|^2    {}", est(&r.start_mean_sq));
    let _ = writeln!(s, "  C = {}, L_(k+1) = {}", num(r.growth), num(r.jump_lipschitz_next));
    let _ = writeln!(s, "  bound           {}", num(r.rhs));
    let _ = writeln!(s, "  exploded paths  {}", r.exploded);
    let _ = writeln!(s, "verdict: {}", if r.pass { "PASS" } else { "FAIL" });
    s
}

pub fn probe(r: &StabilityProbeResult) -> String {
    let mut s = String::new();
    let kind = serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let eps = r.eps1.map_or(String::new(), |e| format!(", eps1 = {}", num(e)));
    let _ = writeln!(s, "{kind} probe, {} paths{eps}; {}", r.n_paths, r.note);
    let _ = writeln!(s, "  {:>10} {:>14} {:>12} {:>10}", "param", "estimate", "stderr", "exploded");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "  {:>10} {:>14} {:>12} {:>10}",
            num(row.param),
            num(row.estimate.mean),
            num(row.estimate.stderr),
            num(row.explosion_fraction)
        );
    }
    let _ = writeln!(s, "verdict: {}", if r.verdict { "PASS" } else { "FAIL" });
    s
}

pub fn supermartingale(r: &SupermartingaleReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "skeleton supermartingale probe, {} outer x {} inner", r.n_outer, r.n_inner);
    let _ = writeln!(s, "  {:>3} {:>10} {:>14} {:>14} {:>14} {:>12}  ok", "k", "t_k", "E v_k", "E v_k+1", "diff", "stderr");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "  {:>3} {:>10} {:>14} {:>14} {:>14} {:>12}  {}",
            row.k,
            num(row.t_k),
            num(row.v_k.mean),
            num(row.v_next.mean),
            num(row.diff.mean),
            num(row.diff.stderr),
            verdict(row.pass)
        );
    }
    let _ = writeln!(s, "verdict: {}", if r.pass { "PASS" } else { "FAIL" });
    s
}

pub fn blowup(r: &BlowupReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "blow-up probe on [0, {}], {} paths, overflow threshold {}",
        num(r.horizon),
        r.n_paths,
        num(r.overflow_threshold)
    );
    let _ = writeln!(s, "  {:>6} {:>6} {:>14} {:>14} {:>10}", "k_max", "jumps", "median sup", "max sup", "exploded");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "  {:>6} {:>6} {:>14} {:>14} {:>10}",
            row.k_max,
            row.jumps,
            num(row.median_sup),
            num(row.max_sup),
            num(row.exploded_fraction)
        );
    }
    let _ = writeln!(s, "growth with k_max: {}", if r.blowup { "yes (blow-up)" } else { "no" });
    s
}
