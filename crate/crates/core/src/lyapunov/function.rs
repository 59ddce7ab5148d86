//! Lyapunov and test functions `U(t, y, h, x)` with derivative access.

use std::fmt;
use std::sync::Arc;

/// Argument of a test function. `regime` and `mark` are 0-based; the regime
/// number used in formulas is `regime + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<'a> {
    pub t: f64,
    pub regime: usize,
    pub mark: usize,
    pub x: &'a [f64],
}

impl<'a> Point<'a> {
    pub fn new(t: f64, regime: usize, mark: usize, x: &'a [f64]) -> Self {
        Point { t, regime, mark, x }
    }

    pub fn with_x<'b>(&self, x: &'b [f64]) -> Point<'b> {
        Point { t: self.t, regime: self.regime, mark: self.mark, x }
    }
}

/// Scalar function with optional derivatives. Missing derivatives make the
/// weak infinitesimal operator unavailable.
pub trait SmoothFunction: Send + Sync {
    fn value(&self, p: &Point) -> f64;

    fn time_derivative(&self, _p: &Point) -> Option<f64> {
        None
    }

    fn gradient(&self, _p: &Point) -> Option<Vec<f64>> {
        None
    }

    /// Full Hessian in `x`, row-major.
    fn hessian(&self, _p: &Point) -> Option<Vec<Vec<f64>>> {
        None
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `coef * w(y) * ‖x‖^exponent` with `w(y) = y` (1-based regime number) when
/// `regime_weighted`, else `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPower {
    pub coef: f64,
    pub exponent: f64,
    pub regime_weighted: bool,
}

impl RadialPower {
    fn weight(&self, regime: usize) -> f64 {
        if self.regime_weighted {
            self.coef * (regime + 1) as f64
        } else {
            self.coef
        }
    }
}

impl SmoothFunction for RadialPower {
    fn value(&self, p: &Point) -> f64 {
        let r2 = norm_sq(p.x);
        if r2 == 0.0 {
            return if self.exponent > 0.0 { 0.0 } else { f64::INFINITY };
        }
        self.weight(p.regime) * r2.powf(self.exponent / 2.0)
    }

    fn time_derivative(&self, _p: &Point) -> Option<f64> {
        Some(0.0)
    }

    fn gradient(&self, p: &Point) -> Option<Vec<f64>> {
        let r2 = norm_sq(p.x);
        let beta = self.exponent;
        if r2 == 0.0 {
            return (beta >= 1.0).then(|| vec![0.0; p.x.len()]);
        }
        let f = self.weight(p.regime) * beta * r2.powf(beta / 2.0 - 1.0);
        Some(p.x.iter().map(|v| f * v).collect())
    }

    fn hessian(&self, p: &Point) -> Option<Vec<Vec<f64>>> {
        let r2 = norm_sq(p.x);
        let beta = self.exponent;
        let n = p.x.len();
        if r2 == 0.0 {
            return (beta == 2.0 || beta >= 3.0).then(|| {
                let d = if beta == 2.0 { 2.0 * self.weight(p.regime) } else { 0.0 };
                (0..n).map(|i| (0..n).map(|j| if i == j { d } else { 0.0 }).collect()).collect()
            });
        }
        // ∇²‖x‖^β = β‖x‖^{β-2} (I + (β-2) x xᵀ / ‖x‖²)
        let f = self.weight(p.regime) * beta * r2.powf(beta / 2.0 - 1.0);
        Some(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let id = if i == j { 1.0 } else { 0.0 };
                            f * (id + (beta - 2.0) * p.x[i] * p.x[j] / r2)
                        })
                        .collect()
                })
                .collect(),
        )
    }
}

type ValueFn = dyn Fn(&Point) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&Point) -> Vec<f64> + Send + Sync;
type MatrixFn = dyn Fn(&Point) -> Vec<Vec<f64>> + Send + Sync;

/// Test function assembled from closures. Time-independent unless a time
/// derivative is supplied.
#[derive(Clone)]
pub struct ClosureFn {
    value: Arc<ValueFn>,
    time_derivative: Option<Arc<ValueFn>>,
    gradient: Option<Arc<VectorFn>>,
    hessian: Option<Arc<MatrixFn>>,
    time_independent: bool,
}

impl ClosureFn {
    pub fn new(value: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ClosureFn { value: Arc::new(value), time_derivative: None, gradient: None, hessian: None, time_independent: true }
    }

    pub fn with_time_derivative(mut self, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        self.time_derivative = Some(Arc::new(f));
        self.time_independent = false;
        self
    }

    /// Declares the function time-dependent without giving `∂U/∂t`.
    pub fn time_dependent(mut self) -> Self {
        self.time_independent = false;
        self
    }

    pub fn with_gradient(mut self, f: impl Fn(&Point) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(f));
        self
    }

    pub fn with_hessian(mut self, f: impl Fn(&Point) -> Vec<Vec<f64>> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(f));
        self
    }
}

impl fmt::Debug for ClosureFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureFn")
            .field("time_derivative", &self.time_derivative.is_some())
            .field("gradient", &self.gradient.is_some())
            .field("hessian", &self.hessian.is_some())
            .finish()
    }
}

impl SmoothFunction for ClosureFn {
    fn value(&self, p: &Point) -> f64 {
        (self.value)(p)
    }

    fn time_derivative(&self, p: &Point) -> Option<f64> {
        match &self.time_derivative {
            Some(f) => Some(f(p)),
            None if self.time_independent => Some(0.0),
            None => None,
        }
    }

    fn gradient(&self, p: &Point) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|f| f(p))
    }

    fn hessian(&self, p: &Point) -> Option<Vec<Vec<f64>>> {
        self.hessian.as_ref().map(|f| f(p))
    }
}

/// `U ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFn(pub f64);

impl SmoothFunction for ConstantFn {
    fn value(&self, _p: &Point) -> f64 {
        self.0
    }
    fn time_derivative(&self, _p: &Point) -> Option<f64> {
        Some(0.0)
    }
    fn gradient(&self, p: &Point) -> Option<Vec<f64>> {
        Some(vec![0.0; p.x.len()])
    }
    fn hessian(&self, p: &Point) -> Option<Vec<Vec<f64>>> {
        let n = p.x.len();
        Some(vec![vec![0.0; n]; n])
    }
}

/// Lyapunov function choices.
#[derive(Clone)]
pub enum LyapunovSpec {
    /// `γ y ‖x‖^β` with `y` the 1-based regime number.
    Power { gamma: f64, beta: f64 },
    /// `c ‖x‖²`.
    Quadratic { c: f64 },
    Custom(Arc<dyn SmoothFunction>),
}

impl fmt::Debug for LyapunovSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LyapunovSpec::Power { gamma, beta } => write!(f, "Power {{ gamma: {gamma}, beta: {beta} }}"),
            LyapunovSpec::Quadratic { c } => write!(f, "Quadratic {{ c: {c} }}"),
            LyapunovSpec::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl LyapunovSpec {
    pub fn custom(f: impl SmoothFunction + 'static) -> Self {
        LyapunovSpec::Custom(Arc::new(f))
    }

    fn radial(&self) -> Option<RadialPower> {
        match *self {
            LyapunovSpec::Power { gamma, beta } => Some(RadialPower { coef: gamma, exponent: beta, regime_weighted: true }),
            LyapunovSpec::Quadratic { c } => Some(RadialPower { coef: c, exponent: 2.0, regime_weighted: false }),
            LyapunovSpec::Custom(_) => None,
        }
    }

    /// `inf { v : ‖x‖ >= r }` over all regimes, in closed form for the power
    /// and quadratic kinds. The smallest regime weight is that of regime 1.
    pub fn lower_radial(&self, r: f64) -> Option<f64> {
        let p = self.radial()?;
        Some(p.coef * r.powf(p.exponent))
    }

    /// `sup { v : ‖x‖ <= r }` over regimes `0..n_regimes`.
    pub fn upper_radial(&self, r: f64, n_regimes: usize) -> Option<f64> {
        let p = self.radial()?;
        let w = if p.regime_weighted { p.coef * n_regimes.max(1) as f64 } else { p.coef };
        Some(w * r.powf(p.exponent))
    }
}

impl SmoothFunction for LyapunovSpec {
    fn value(&self, p: &Point) -> f64 {
        match self {
            LyapunovSpec::Custom(f) => f.value(p),
            _ => self.radial().expect("radial kind").value(p),
        }
    }

    fn time_derivative(&self, p: &Point) -> Option<f64> {
        match self {
            LyapunovSpec::Custom(f) => f.time_derivative(p),
            _ => Some(0.0),
        }
    }

    fn gradient(&self, p: &Point) -> Option<Vec<f64>> {
        match self {
            LyapunovSpec::Custom(f) => f.gradient(p),
            _ => self.radial().expect("radial kind").gradient(p),
        }
    }

    fn hessian(&self, p: &Point) -> Option<Vec<Vec<f64>>> {
        match self {
            LyapunovSpec::Custom(f) => f.hessian(p),
            _ => self.radial().expect("radial kind").hessian(p),
        }
    }
}
