//! Discrete statistical models `p(k|λ)` and seeded outcome sampling.
//!
//! A model exposes a finite outcome alphabet `0..outcome_count()` and a box of
//! admissible parameters. The `*_unchecked` methods are the hot path used by
//! the grid engines; the checked wrappers validate labels and parameters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Step of the centered finite difference used when no analytic derivative exists.
pub const FINITE_DIFFERENCE_STEP: f64 = 1e-6;

pub trait DiscreteModel: Send + Sync {
    fn outcome_count(&self) -> usize;

    fn param_count(&self) -> usize;

    /// Closed admissible interval of parameter `index`.
    fn param_bounds(&self, index: usize) -> (f64, f64);

    /// `p(k|params)` for a valid label and admissible parameters.
    fn prob_unchecked(&self, k: usize, params: &[f64]) -> f64;

    /// `∂p(k|params)/∂params[index]`. Defaults to a centered finite difference.
    fn dprob_unchecked(&self, k: usize, params: &[f64], index: usize) -> f64 {
        central_difference(self, k, params, index)
    }

    fn check_outcome(&self, k: usize) -> Result<()> {
        if k < self.outcome_count() {
            Ok(())
        } else {
            Err(Error::UnknownOutcome {
                outcome: k,
                count: self.outcome_count(),
            })
        }
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::ParameterCount {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        for (index, &value) in params.iter().enumerate() {
            let (lower, upper) = self.param_bounds(index);
            if !(value >= lower && value <= upper) {
                return Err(Error::ParameterOutOfRange {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.param_count() {
            Ok(())
        } else {
            Err(Error::ParameterIndex {
                index,
                count: self.param_count(),
            })
        }
    }

    fn outcome_probability(&self, k: usize, params: &[f64]) -> Result<f64> {
        self.check_outcome(k)?;
        self.check_params(params)?;
        Ok(self.prob_unchecked(k, params))
    }

    fn probability_derivative(&self, k: usize, params: &[f64], index: usize) -> Result<f64> {
        self.check_outcome(k)?;
        self.check_params(params)?;
        self.check_index(index)?;
        Ok(self.dprob_unchecked(k, params, index))
    }
}

/// Centered difference with step [`FINITE_DIFFERENCE_STEP`]; one-sided when the
/// centered stencil would leave the admissible box.
pub fn central_difference<M: DiscreteModel + ?Sized>(
    model: &M,
    k: usize,
    params: &[f64],
    index: usize,
) -> f64 {
    let h = FINITE_DIFFERENCE_STEP;
    let (lower, upper) = model.param_bounds(index);
    let x = params[index];
    let mut shifted = params.to_vec();
    let mut eval = |at: f64| {
        shifted[index] = at;
        model.prob_unchecked(k, &shifted)
    };
    if x - h < lower {
        (eval(x + h) - eval(x)) / h
    } else if x + h > upper {
        (eval(x) - eval(x - h)) / h
    } else {
        (eval(x + h) - eval(x - h)) / (2.0 * h)
    }
}

fn check_visibility(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            index: 1,
            value: v,
            lower: 0.0,
            upper: 1.0,
        })
    }
}

/// Four-outcome N00N phase model with a fixed visibility:
/// `p_v(k|φ) = [1 + v·cos(2φ − kπ/2)] / 4`, `k ∈ {0,1,2,3}`.
///
/// The probabilities have period π in φ; the admissible interval is the
/// closed period `[0, π]` so that grids can carry the wrap-around node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoonPhaseModel {
    visibility: f64,
}

impl NoonPhaseModel {
    pub fn new(visibility: f64) -> Result<Self> {
        check_visibility(visibility)?;
        Ok(Self { visibility })
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }
}

impl DiscreteModel for NoonPhaseModel {
    fn outcome_count(&self) -> usize {
        4
    }

    fn param_count(&self) -> usize {
        1
    }

    fn param_bounds(&self, _index: usize) -> (f64, f64) {
        (0.0, PI)
    }

    fn prob_unchecked(&self, k: usize, params: &[f64]) -> f64 {
        let arg = 2.0 * params[0] - k as f64 * FRAC_PI_2;
        0.25 * (1.0 + self.visibility * libm::cos(arg))
    }

    fn dprob_unchecked(&self, k: usize, params: &[f64], _index: usize) -> f64 {
        let arg = 2.0 * params[0] - k as f64 * FRAC_PI_2;
        -0.5 * self.visibility * libm::sin(arg)
    }
}

/// Projection settings `θ ∈ {0, π/16, π/8, 3π/16}` of the joint model, indexed by outcome.
pub const PROJECTION_SETTINGS: [f64; 4] = [0.0, PI / 16.0, PI / 8.0, 3.0 * PI / 16.0];

/// Joint phase/visibility model `p(θ|φ, v) = [1 + v·cos(2φ − 8θ)] / 4`.
///
/// Parameters are `[φ, v]`; outcome `k` is the projection setting
/// `θ = kπ/16`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoParamNoonModel;

impl TwoParamNoonModel {
    pub const PHASE: usize = 0;
    pub const VISIBILITY: usize = 1;

    pub fn new() -> Self {
        Self
    }

    /// Projection angle θ of outcome `k`.
    pub fn setting(k: usize) -> Option<f64> {
        PROJECTION_SETTINGS.get(k).copied()
    }

    /// Outcome index `16θ/π` of a projection angle, if it is one of the four settings.
    pub fn outcome_for_setting(theta: f64) -> Option<usize> {
        let k = libm::round(16.0 * theta / PI);
        if (0.0..4.0).contains(&k) && libm::fabs(16.0 * theta / PI - k) < 1e-9 {
            Some(k as usize)
        } else {
            None
        }
    }
}

impl DiscreteModel for TwoParamNoonModel {
    fn outcome_count(&self) -> usize {
        4
    }

    fn param_count(&self) -> usize {
        2
    }

    fn param_bounds(&self, index: usize) -> (f64, f64) {
        if index == Self::PHASE {
            (0.0, PI)
        } else {
            (0.0, 1.0)
        }
    }

    fn prob_unchecked(&self, k: usize, params: &[f64]) -> f64 {
        let arg = 2.0 * params[0] - 8.0 * PROJECTION_SETTINGS[k];
        0.25 * (1.0 + params[1] * libm::cos(arg))
    }

    fn dprob_unchecked(&self, k: usize, params: &[f64], index: usize) -> f64 {
        let arg = 2.0 * params[0] - 8.0 * PROJECTION_SETTINGS[k];
        if index == Self::PHASE {
            -0.5 * params[1] * libm::sin(arg)
        } else {
            0.25 * libm::cos(arg)
        }
    }
}

/// Ideal lossless Mach-Zehnder interferometer with a controllable feedback
/// phase Φ: `p(x|φ, Φ) = [1 + (−1)^x cos(φ − Φ)] / 2`, `x ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackInterferometerModel {
    feedback: f64,
}

impl FeedbackInterferometerModel {
    pub fn new(feedback: f64) -> Result<Self> {
        if !feedback.is_finite() {
            return Err(Error::ParameterOutOfRange {
                index: 0,
                value: feedback,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            });
        }
        Ok(Self { feedback })
    }

    pub fn feedback(&self) -> f64 {
        self.feedback
    }

    pub fn with_feedback(self, feedback: f64) -> Result<Self> {
        Self::new(feedback)
    }

    fn sign(x: usize) -> f64 {
        if x == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl DiscreteModel for FeedbackInterferometerModel {
    fn outcome_count(&self) -> usize {
        2
    }

    fn param_count(&self) -> usize {
        1
    }

    fn param_bounds(&self, _index: usize) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }

    fn prob_unchecked(&self, x: usize, params: &[f64]) -> f64 {
        0.5 * (1.0 + Self::sign(x) * libm::cos(params[0] - self.feedback))
    }

    fn dprob_unchecked(&self, x: usize, params: &[f64], _index: usize) -> f64 {
        -0.5 * Self::sign(x) * libm::sin(params[0] - self.feedback)
    }
}

/// User-tabulated single-parameter model: rows of `p(k|λ_i)` on an increasing
/// grid `λ_i`, linearly interpolated between rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModel {
    grid: Vec<f64>,
    probs: Vec<f64>,
    outcomes: usize,
}

impl TabulatedModel {
    /// Rows whose sums deviate from 1 by at most this much are renormalized.
    pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

    pub fn new(grid: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidTable("need at least two grid rows".into()));
        }
        if grid.len() != rows.len() {
            return Err(Error::InvalidTable(format!(
                "{} grid values but {} probability rows",
                grid.len(),
                rows.len()
            )));
        }
        if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable(
                "grid values must be finite and strictly increasing".into(),
            ));
        }
        let outcomes = rows[0].len();
        if outcomes == 0 {
            return Err(Error::InvalidTable("no outcome columns".into()));
        }
        let mut probs = Vec::with_capacity(outcomes * rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != outcomes {
                return Err(Error::InvalidTable(format!(
                    "row {i} has {} columns, expected {outcomes}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidTable(format!(
                    "row {i} has a probability outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if libm::fabs(sum - 1.0) > Self::NORMALIZATION_TOLERANCE {
                return Err(Error::InvalidTable(format!("row {i} sums to {sum}, not 1")));
            }
            probs.extend(row.iter().map(|p| p / sum));
        }
        Ok(Self {
            grid,
            probs,
            outcomes,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.outcomes..(i + 1) * self.outcomes]
    }
}

impl DiscreteModel for TabulatedModel {
    fn outcome_count(&self) -> usize {
        self.outcomes
    }

    fn param_count(&self) -> usize {
        1
    }

    fn param_bounds(&self, _index: usize) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn prob_unchecked(&self, k: usize, params: &[f64]) -> f64 {
        let x = params[0];
        let last = self.grid.len() - 1;
        let upper = self.grid.partition_point(|&g| g <= x).clamp(1, last);
        let (x0, x1) = (self.grid[upper - 1], self.grid[upper]);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        let (p0, p1) = (self.row(upper - 1)[k], self.row(upper)[k]);
        p0 + t * (p1 - p0)
    }
}

/// Ordered outcome record together with its count histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    outcomes: Vec<usize>,
    histogram: Vec<u64>,
}

impl Sample {
    pub fn empty(outcome_count: usize) -> Self {
        Self {
            outcomes: Vec::new(),
            histogram: vec![0; outcome_count],
        }
    }

    pub fn from_outcomes(outcomes: Vec<usize>, outcome_count: usize) -> Result<Self> {
        let mut histogram = vec![0u64; outcome_count];
        for &k in &outcomes {
            match histogram.get_mut(k) {
                Some(n) => *n += 1,
                None => {
                    return Err(Error::UnknownOutcome {
                        outcome: k,
                        count: outcome_count,
                    })
                }
            }
        }
        Ok(Self {
            outcomes,
            histogram,
        })
    }

    /// Builds a sample from counts; the outcome list is expanded in label order.
    pub fn from_histogram(histogram: Vec<u64>) -> Self {
        let outcomes = histogram
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| core::iter::repeat_n(k, n as usize))
            .collect();
        Self {
            outcomes,
            histogram,
        }
    }

    pub fn push(&mut self, k: usize) -> Result<()> {
        let count = self.histogram.len();
        let slot = self
            .histogram
            .get_mut(k)
            .ok_or(Error::UnknownOutcome { outcome: k, count })?;
        *slot += 1;
        self.outcomes.push(k);
        Ok(())
    }

    /// Concatenation `self ∪ other`.
    pub fn concat(&self, other: &Sample) -> Result<Sample> {
        if other.histogram.len() != self.histogram.len() {
            return Err(Error::HistogramLength {
                expected: self.histogram.len(),
                got: other.histogram.len(),
            });
        }
        let mut joined = self.clone();
        for &k in &other.outcomes {
            joined.push(k)?;
        }
        Ok(joined)
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn outcome_count(&self) -> usize {
        self.histogram.len()
    }

    /// Number of measurements `M`.
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// `M` independent draws from `p(·|params)`, reproducible from `seed`.
pub fn sample_outcomes<M: DiscreteModel + ?Sized>(
    model: &M,
    params: &[f64],
    count: usize,
    seed: u64,
) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_outcomes_with(model, params, count, &mut rng)
}

/// Like [`sample_outcomes`] but drawing from a caller-supplied generator.
pub fn sample_outcomes_with<M: DiscreteModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    params: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Sample> {
    model.check_params(params)?;
    let cdf = cumulative(model, params);
    let mut sample = Sample::empty(model.outcome_count());
    for _ in 0..count {
        let k = draw_index(&cdf, rng.random::<f64>());
        sample.push(k)?;
    }
    Ok(sample)
}

/// Draws one outcome from `p(·|params)`; parameters are assumed admissible.
pub(crate) fn draw_outcome<M: DiscreteModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    params: &[f64],
    rng: &mut R,
) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let last = model.outcome_count() - 1;
    for k in 0..last {
        acc += model.prob_unchecked(k, params);
        if u < acc {
            return k;
        }
    }
    last
}

fn cumulative<M: DiscreteModel + ?Sized>(model: &M, params: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    (0..model.outcome_count())
        .map(|k| {
            acc += model.prob_unchecked(k, params);
            acc
        })
        .collect()
}

fn draw_index(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}
