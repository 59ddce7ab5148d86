//! Quadratic sandwich constants `c1 ‖x‖² <= v <= c2 ‖x‖²`.

use serde::Serialize;

use super::function::{Point, SmoothFunction};
use crate::json;

/// Sample points: radii along the first axis and the diagonal, for every
/// regime and mark.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGrid {
    pub radii: Vec<f64>,
    pub n_regimes: usize,
    pub n_marks: usize,
    pub dim: usize,
    pub t: f64,
}

impl QuadraticGrid {
    /// `n` radii log-spaced on `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, n: usize, n_regimes: usize, n_marks: usize, dim: usize) -> Self {
        let n = n.max(2);
        let (a, b) = (lo.ln(), hi.ln());
        let radii = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        QuadraticGrid { radii, n_regimes, n_marks, dim, t: 0.0 }
    }

    fn directions(&self) -> Vec<Vec<f64>> {
        let mut e1 = vec![0.0; self.dim];
        e1[0] = 1.0;
        let mut dirs = vec![e1.clone(), e1.iter().map(|v| -v).collect()];
        if self.dim > 1 {
            let d = 1.0 / (self.dim as f64).sqrt();
            dirs.push(vec![d; self.dim]);
        }
        dirs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticBounds {
    pub c1: f64,
    pub c2: f64,
    /// Bounds of the auxiliary sequence, when one is supplied.
    pub c3: Option<f64>,
    pub c4: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticViolation {
    /// `"v"` or `"a"`.
    pub function: &'static str,
    pub regime: usize,
    pub mark: usize,
    #[serde(serialize_with = "json::floats")]
    pub x: Vec<f64>,
    /// `f(x) / ‖x‖²` at the witness.
    #[serde(serialize_with = "json::float")]
    pub ratio: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum QuadraticCheck {
    Bounds(QuadraticBounds),
    Violation(QuadraticViolation),
}

/// Log-log slope tolerance of `f / ‖x‖²` at the ends of the radius grid.
pub const SLOPE_TOLERANCE: f64 = 1e-6;

fn fit(f: &dyn SmoothFunction, name: &'static str, grid: &QuadraticGrid) -> Result<(f64, f64), QuadraticViolation> {
    let mut radii: Vec<f64> = grid.radii.iter().copied().filter(|r| *r > 0.0 && r.is_finite()).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for regime in 0..grid.n_regimes.max(1) {
        for mark in 0..grid.n_marks.max(1) {
            for dir in grid.directions() {
                let mut ratios = Vec::with_capacity(radii.len());
                for &r in &radii {
                    let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
                    let ratio = f.value(&Point::new(grid.t, regime, mark, &x)) / (r * r);
                    let witness = |reason: String| QuadraticViolation {
                        function: name,
                        regime: regime + 1,
                        mark: mark + 1,
                        x: x.clone(),
                        ratio,
                        reason,
                    };
                    if !(ratio.is_finite() && ratio > 0.0) {
                        return Err(witness("ratio is not positive and finite".into()));
                    }
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                    ratios.push((r, ratio, x));
                }
                // A quadratic sandwich on all of ℝ^m needs the ratio to level
                // off at both ends of the grid.
                if ratios.len() >= 2 {
                    let n = ratios.len();
                    for (a, b, at) in [(0, 1, 0), (n - 2, n - 1, n - 1)] {
                        let slope = (ratios[b].1 / ratios[a].1).ln() / (ratios[b].0 / ratios[a].0).ln();
                        if slope.abs() > SLOPE_TOLERANCE {
                            let (_, ratio, x) = ratios[at].clone();
                            let side = if at == 0 { "small" } else { "large" };
                            return Err(QuadraticViolation {
                                function: name,
                                regime: regime + 1,
                                mark: mark + 1,
                                x,
                                ratio,
                                reason: format!("f/‖x‖² has log-log slope {slope:.6} at {side} ‖x‖, so it is unbounded"),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok((lo, hi))
}

/// Fits the tightest constants over the grid for `v` and, if given, the
/// auxiliary sequence `a`, or reports a witness that no such constants exist.
pub fn check_quadratic_bounds(
    v: &dyn SmoothFunction,
    a: Option<&dyn SmoothFunction>,
    grid: &QuadraticGrid,
) -> QuadraticCheck {
    let (c1, c2) = match fit(v, "v", grid) {
        Ok(c) => c,
        Err(e) => return QuadraticCheck::Violation(e),
    };
    let (c3, c4) = match a.map(|a| fit(a, "a", grid)) {
        None => (None, None),
        Some(Ok((c3, c4))) => (Some(c3), Some(c4)),
        Some(Err(e)) => return QuadraticCheck::Violation(e),
    };
    QuadraticCheck::Bounds(QuadraticBounds { c1, c2, c3, c4 })
}
