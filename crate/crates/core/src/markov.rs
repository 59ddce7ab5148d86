//! Finite-state Markov chains driving the system structure.
//!
//! The structure process is a continuous-time chain described by a generator
//! matrix and sampled exactly (exponential holding times, no time grid). The
//! impulse marks form a discrete-time chain that advances once per jump, with
//! an optional per-step transition matrix.
//!
//! State indices are zero-based throughout the library. Formulas that use the
//! regime as a number (regime `i` weighs a Lyapunov function by `i`) use
//! `index + 1`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on row sums (scaled by the row's magnitude when it exceeds 1).
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("matrix has no rows")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("off-diagonal entry ({row}, {col}) = {value} is negative")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 0")]
    RowSumNonZero { row: usize, sum: f64 },
    #[error("entry ({row}, {col}) = {value} is not a probability")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 1")]
    RowSumNotOne { row: usize, sum: f64 },
    #[error("per-step matrices disagree on the number of states")]
    InconsistentSteps,
    #[error("{values} mark values given for {states} mark states")]
    MarkValueCount { values: usize, states: usize },
    #[error("state {index} out of range for {n_states} states")]
    IndexOutOfRange { index: usize, n_states: usize },
    #[error("time window [{start}, {end}] is empty or not finite")]
    InvalidHorizon { start: f64, end: f64 },
}

fn row_tolerance(row: &[f64]) -> f64 {
    let scale = row.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    ROW_SUM_TOLERANCE * scale
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize, MarkovError> {
    let n = rows.len();
    if n == 0 {
        return Err(MarkovError::Empty);
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(MarkovError::NonSquare { row, len: r.len(), expected: n });
        }
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(MarkovError::NonFinite { row, col });
        }
    }
    Ok(n)
}

/// Validated rate matrix `Q = {q̃_ij}` of the structure chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct GeneratorMatrix {
    q: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for GeneratorMatrix {
    type Error = MarkovError;

    fn try_from(q: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        validate_generator(q)
    }
}

impl From<GeneratorMatrix> for Vec<Vec<f64>> {
    fn from(g: GeneratorMatrix) -> Self {
        g.q
    }
}

/// Checks that `q` is a generator: square, nonnegative off the diagonal,
/// rows summing to zero.
pub fn validate_generator(q: Vec<Vec<f64>>) -> Result<GeneratorMatrix, MarkovError> {
    check_square(&q)?;
    for (i, row) in q.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i != j && v < 0.0 {
                return Err(MarkovError::NegativeOffDiagonal { row: i, col: j, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if sum.abs() > row_tolerance(row) {
            return Err(MarkovError::RowSumNonZero { row: i, sum });
        }
    }
    Ok(GeneratorMatrix { q })
}

impl GeneratorMatrix {
    /// Generator of a single absorbing state.
    pub fn single_state() -> Self {
        GeneratorMatrix { q: vec![vec![0.0]] }
    }

    /// Symmetric two-state generator with switching rate `rate` in both directions.
    pub fn symmetric_two_state(rate: f64) -> Result<Self, MarkovError> {
        validate_generator(vec![vec![-rate, rate], vec![rate, -rate]])
    }

    pub fn n_states(&self) -> usize {
        self.q.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// Rate `q̃_ij`.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.q[i][j]
    }

    /// Total rate of leaving state `i`, `-q̃_ii`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.q[i][i]
    }

    /// Embedded jump-chain probability `q̃_ij / (-q̃_ii)`; zero for absorbing states.
    pub fn jump_probability(&self, i: usize, j: usize) -> f64 {
        let exit = self.exit_rate(i);
        if i == j || exit <= 0.0 {
            0.0
        } else {
            self.q[i][j] / exit
        }
    }

    /// Returns a copy with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        GeneratorMatrix {
            q: self
                .q
                .iter()
                .map(|r| r.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }
}

/// Row-stochastic transition matrices of the mark chain, one per step.
///
/// Entry `m` of the sequence governs step `m + 1`; the last matrix repeats for
/// every later step, so a single matrix describes a time-homogeneous chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<f64>>>", into = "Vec<Vec<Vec<f64>>>")]
pub struct TransitionMatrix {
    steps: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<Vec<Vec<Vec<f64>>>> for TransitionMatrix {
    type Error = MarkovError;

    fn try_from(steps: Vec<Vec<Vec<f64>>>) -> Result<Self, Self::Error> {
        TransitionMatrix::per_step(steps)
    }
}

impl From<TransitionMatrix> for Vec<Vec<Vec<f64>>> {
    fn from(t: TransitionMatrix) -> Self {
        t.steps
    }
}

fn validate_stochastic(p: &[Vec<f64>]) -> Result<usize, MarkovError> {
    let n = check_square(p)?;
    for (i, row) in p.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(MarkovError::ProbabilityOutOfRange { row: i, col: j, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > row_tolerance(row) {
            return Err(MarkovError::RowSumNotOne { row: i, sum });
        }
    }
    Ok(n)
}

impl TransitionMatrix {
    pub fn constant(p: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        Self::per_step(vec![p])
    }

    pub fn per_step(steps: Vec<Vec<Vec<f64>>>) -> Result<Self, MarkovError> {
        let mut n_states = None;
        for p in &steps {
            let n = validate_stochastic(p)?;
            if *n_states.get_or_insert(n) != n {
                return Err(MarkovError::InconsistentSteps);
            }
        }
        if n_states.is_none() {
            return Err(MarkovError::Empty);
        }
        Ok(TransitionMatrix { steps })
    }

    pub fn identity(n: usize) -> Self {
        let p = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        TransitionMatrix { steps: vec![p] }
    }

    pub fn uniform(n: usize) -> Self {
        let p = vec![vec![1.0 / n as f64; n]; n];
        TransitionMatrix { steps: vec![p] }
    }

    pub fn n_states(&self) -> usize {
        self.steps[0].len()
    }

    /// Matrix used for step `step` (1-based; step 0 is treated as step 1).
    pub fn at_step(&self, step: usize) -> &[Vec<f64>] {
        let idx = step.saturating_sub(1).min(self.steps.len() - 1);
        &self.steps[idx]
    }
}

/// Mark chain `η_k`: mark states with their numeric values and transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkChain {
    values: Vec<f64>,
    transition: TransitionMatrix,
}

impl MarkChain {
    pub fn new(values: Vec<f64>, transition: TransitionMatrix) -> Result<Self, MarkovError> {
        if values.len() != transition.n_states() {
            return Err(MarkovError::MarkValueCount {
                values: values.len(),
                states: transition.n_states(),
            });
        }
        if let Some(col) = values.iter().position(|v| !v.is_finite()) {
            return Err(MarkovError::NonFinite { row: 0, col });
        }
        Ok(MarkChain { values, transition })
    }

    /// A chain that never leaves its single mark, with value `value`.
    pub fn constant(value: f64) -> Self {
        MarkChain { values: vec![value], transition: TransitionMatrix::identity(1) }
    }

    pub fn n_states(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, state: usize) -> f64 {
        self.values[state]
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Piecewise-constant, right-continuous path of the structure chain.
///
/// `states[i]` holds on `[times[i], times[i + 1])`; the last state holds up
/// to `end`. `times[0]` is the start of the window, later entries are switch
/// times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainPath {
    times: Vec<f64>,
    states: Vec<usize>,
    end: f64,
}

impl ChainPath {
    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn initial_state(&self) -> usize {
        self.states[0]
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// Switch times, strictly inside `(start, end)`.
    pub fn switch_times(&self) -> &[f64] {
        &self.times[1..]
    }

    /// `(time, new_state)` for every switch.
    pub fn switches(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.times[1..].iter().copied().zip(self.states[1..].iter().copied())
    }

    /// State of the last switch at or before `t`.
    pub fn state_at(&self, t: f64) -> usize {
        let idx = self.times.partition_point(|&s| s <= t);
        self.states[idx.saturating_sub(1)]
    }

    /// Completed holding periods as `(state, duration)`; the censored final
    /// period is excluded.
    pub fn holding_times(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.times
            .windows(2)
            .zip(self.states.iter())
            .map(|(w, &s)| (s, w[1] - w[0]))
    }
}

/// Samples the chain on `[0, horizon]` starting from `y0`.
pub fn sample_ctmc<R: Rng + ?Sized>(
    gen: &GeneratorMatrix,
    y0: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<ChainPath, MarkovError> {
    sample_ctmc_window(gen, y0, 0.0, horizon, rng)
}

/// Samples the chain on `[start, end]` with exact exponential holding times.
pub fn sample_ctmc_window<R: Rng + ?Sized>(
    gen: &GeneratorMatrix,
    y0: usize,
    start: f64,
    end: f64,
    rng: &mut R,
) -> Result<ChainPath, MarkovError> {
    let n = gen.n_states();
    if y0 >= n {
        return Err(MarkovError::IndexOutOfRange { index: y0, n_states: n });
    }
    if !(start.is_finite() && end.is_finite() && end > start) {
        return Err(MarkovError::InvalidHorizon { start, end });
    }
    let mut times = vec![start];
    let mut states = vec![y0];
    let mut t = start;
    let mut state = y0;
    loop {
        let exit = gen.exit_rate(state);
        if exit <= 0.0 {
            break;
        }
        let hold: f64 = Exp1.sample(rng);
        t += hold / exit;
        if t >= end {
            break;
        }
        state = pick_next(gen.rows()[state].as_slice(), state, exit, rng);
        times.push(t);
        states.push(state);
    }
    Ok(ChainPath { times, states, end })
}

fn pick_next<R: Rng + ?Sized>(row: &[f64], current: usize, exit: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * exit;
    let mut acc = 0.0;
    let mut last = current;
    for (j, &rate) in row.iter().enumerate() {
        if j == current || rate <= 0.0 {
            continue;
        }
        acc += rate;
        last = j;
        if u < acc {
            return j;
        }
    }
    last
}

/// Draws the next mark from row `h` of the step-`step` transition matrix.
pub fn sample_dtmc_step<R: Rng + ?Sized>(
    tm: &TransitionMatrix,
    h: usize,
    step: usize,
    rng: &mut R,
) -> Result<usize, MarkovError> {
    let n = tm.n_states();
    if h >= n {
        return Err(MarkovError::IndexOutOfRange { index: h, n_states: n });
    }
    let row = &tm.at_step(step)[h];
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last = h;
    for (j, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = j;
        if u < acc {
            return Ok(j);
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generator_examples() {
        assert!(validate_generator(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).is_ok());
        assert!(validate_generator(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_ok());
        assert!(matches!(
            validate_generator(vec![vec![-1.0, 0.5], vec![1.0, -1.0]]),
            Err(MarkovError::RowSumNonZero { row: 0, .. })
        ));
        assert!(matches!(
            validate_generator(vec![vec![-1.0, 1.0]]),
            Err(MarkovError::NonSquare { .. })
        ));
        assert!(matches!(
            validate_generator(vec![vec![1.0, -1.0], vec![1.0, -1.0]]),
            Err(MarkovError::NegativeOffDiagonal { row: 0, col: 1, .. })
        ));
        assert!(matches!(validate_generator(vec![]), Err(MarkovError::Empty)));
    }

    #[test]
    fn jump_probabilities_normalize_rates() {
        let g = validate_generator(vec![
            vec![-3.0, 1.0, 2.0],
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.5, -1.0],
        ])
        .unwrap();
        assert!((g.jump_probability(0, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.jump_probability(1, 0), 0.0);
        assert_eq!(g.jump_probability(0, 0), 0.0);
    }

    #[test]
    fn zero_generator_holds() {
        let g = validate_generator(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let path = sample_ctmc(&g, 1, 10.0, &mut rng).unwrap();
        assert!(path.switch_times().is_empty());
        assert_eq!(path.state_at(0.0), 1);
        assert_eq!(path.state_at(10.0), 1);
    }

    #[test]
    fn same_seed_same_path() {
        let g = GeneratorMatrix::symmetric_two_state(1.0).unwrap();
        let a = sample_ctmc(&g, 0, 50.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_ctmc(&g, 0, 50.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_holding_time_matches_exponential_mean() {
        // Exponential(rate 1) has mean 1 and standard deviation 1; with 1e5
        // holds the standard error is 3.2e-3, well inside the 0.02 band.
        let g = GeneratorMatrix::symmetric_two_state(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let path = sample_ctmc(&g, 0, 100_500.0, &mut rng).unwrap();
        let holds: Vec<f64> = path.holding_times().skip(1).take(100_000).map(|(_, d)| d).collect();
        assert_eq!(holds.len(), 100_000);
        let mean = holds.iter().sum::<f64>() / holds.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean holding time {mean}");
    }

    #[test]
    fn state_at_is_right_continuous() {
        let g = GeneratorMatrix::symmetric_two_state(2.0).unwrap();
        let path = sample_ctmc(&g, 0, 5.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for (t, s) in path.switches() {
            assert_eq!(path.state_at(t), s);
            assert_ne!(path.state_at(t - 1e-9), s);
        }
    }

    #[test]
    fn dtmc_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let id = TransitionMatrix::identity(3);
        assert_eq!(sample_dtmc_step(&id, 1, 1, &mut rng).unwrap(), 1);
        let cycle = TransitionMatrix::constant(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_dtmc_step(&cycle, 0, 4, &mut rng).unwrap(), 1);
        }
        assert!(matches!(
            sample_dtmc_step(&cycle, 2, 1, &mut rng),
            Err(MarkovError::IndexOutOfRange { index: 2, n_states: 2 })
        ));
    }

    #[test]
    fn dtmc_fair_coin_frequency() {
        // Bernoulli(1/2): standard error over 1e5 draws is 1.6e-3.
        let tm = TransitionMatrix::uniform(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_dtmc_step(&tm, 0, 1, &mut rng).unwrap() == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn per_step_matrices_repeat_last() {
        let tm = TransitionMatrix::per_step(vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ])
        .unwrap();
        assert_eq!(tm.at_step(1)[0][0], 1.0);
        assert_eq!(tm.at_step(2)[0][1], 1.0);
        assert_eq!(tm.at_step(50)[0][1], 1.0);
        assert!(matches!(
            TransitionMatrix::constant(vec![vec![0.7, 0.2], vec![0.5, 0.5]]),
            Err(MarkovError::RowSumNotOne { row: 0, .. })
        ));
    }
}
