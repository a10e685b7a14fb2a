//! Maximum-likelihood estimation over a parameter grid.
//!
//! The likelihood of a count histogram is `L(λ) = Π_k p(k|λ)^{n_k}`; the
//! estimate is the grid node maximizing `log L`, found by exhaustive search.
//! Ties go to the lowest grid value.

use alloc::vec::Vec;

use crate::bayes::{LikelihoodTable, ParameterGrid};
use crate::model::{sample_outcomes, DiscreteModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleResult {
    pub estimate: f64,
    pub log_likelihood_at_max: f64,
    pub grid_index: usize,
    /// Second difference of `log L` at the maximizer; `None` when a stencil
    /// node has zero likelihood.
    pub curvature: Option<f64>,
}

impl MleResult {
    /// Local error bar `1/√(−curvature)`, when the maximum is curved.
    pub fn standard_error(&self) -> Option<f64> {
        match self.curvature {
            Some(c) if c < 0.0 => Some(1.0 / libm::sqrt(-c)),
            _ => None,
        }
    }
}

pub fn mle_estimate<M: DiscreteModel + ?Sized>(
    model: &M,
    histogram: &[u64],
    grid: ParameterGrid,
) -> Result<MleResult> {
    let table = LikelihoodTable::new(model, grid)?;
    mle_from_table(&table, histogram)
}

/// [`mle_estimate`] with a prebuilt likelihood table.
pub fn mle_from_table(table: &LikelihoodTable, histogram: &[u64]) -> Result<MleResult> {
    if histogram.iter().sum::<u64>() == 0 {
        return Err(Error::Empty("histogram has no counts"));
    }
    let ll = table.log_likelihoods(histogram)?;
    let grid = table.grid();
    let mut best = 0;
    for (i, &l) in ll.iter().enumerate() {
        if l > ll[best] {
            best = i;
        }
    }
    let peak = ll[best];
    if !peak.is_finite() {
        return Err(Error::IncompatibleData);
    }
    Ok(MleResult {
        estimate: grid.node(best),
        log_likelihood_at_max: peak,
        grid_index: best,
        curvature: curvature(grid, &ll, best),
    })
}

fn curvature(grid: &ParameterGrid, ll: &[f64], i: usize) -> Option<f64> {
    let n = ll.len();
    let (left, mid, right) = if grid.is_periodic() {
        let distinct = n - 1;
        let i = i % distinct;
        ((i + distinct - 1) % distinct, i, (i + 1) % distinct)
    } else if n < 3 {
        return None;
    } else {
        let mid = i.clamp(1, n - 2);
        (mid - 1, mid, mid + 1)
    };
    let h = grid.spacing();
    let c = (ll[left] - 2.0 * ll[mid] + ll[right]) / (h * h);
    c.is_finite().then_some(c)
}

/// Spread of `R` independent maximum-likelihood estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatStatistics {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub estimates: Vec<f64>,
}

/// Seed of repetition `r`: `seed + r` (wrapping).
pub fn repetition_seed(seed: u64, repetition: usize) -> u64 {
    seed.wrapping_add(repetition as u64)
}

/// Simulates one repetition: `events` draws at `params_true`, then the grid MLE.
pub fn mle_repetition<M: DiscreteModel + ?Sized>(
    model: &M,
    params_true: &[f64],
    events: usize,
    table: &LikelihoodTable,
    seed: u64,
    repetition: usize,
) -> Result<f64> {
    let sample = sample_outcomes(
        model,
        params_true,
        events,
        repetition_seed(seed, repetition),
    )?;
    Ok(mle_from_table(table, sample.histogram())?.estimate)
}

/// Mean and unbiased variance of the estimates from an ordered list.
pub fn repeat_statistics(estimates: Vec<f64>) -> Result<RepeatStatistics> {
    if estimates.len() < 2 {
        return Err(Error::InvalidConfig("need at least two repetitions".into()));
    }
    let (mean, sd) = crate::math::mean_std(&estimates);
    Ok(RepeatStatistics {
        mean,
        variance: sd * sd,
        estimates,
    })
}

/// `R` simulated histograms of `events` counts each, estimated one by one.
pub fn mle_repeat_statistics<M: DiscreteModel + ?Sized>(
    model: &M,
    params_true: &[f64],
    events: usize,
    repetitions: usize,
    grid: ParameterGrid,
    seed: u64,
) -> Result<RepeatStatistics> {
    if repetitions < 2 {
        return Err(Error::InvalidConfig("need at least two repetitions".into()));
    }
    let table = LikelihoodTable::new(model, grid)?;
    let estimates = (0..repetitions)
        .map(|r| mle_repetition(model, params_true, events, &table, seed, r))
        .collect::<Result<Vec<_>>>()?;
    repeat_statistics(estimates)
}
