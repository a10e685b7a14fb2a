//! Particle guess heuristic (PGH) on the feedback interferometer.
//!
//! Each shot sets the feedback phase to a random draw from the current
//! posterior, records one interferometer outcome and multiplies the posterior
//! by the Φ-dependent likelihood. Estimates are circular posterior means.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bayes::{ParameterGrid, Posterior, MIN_RESULTANT};
use crate::math::derive_seed;
use crate::model::{draw_outcome, DiscreteModel, FeedbackInterferometerModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PghStep {
    pub feedback: f64,
    pub outcome: usize,
    /// Circular posterior mean after the update.
    pub estimate: Option<f64>,
    /// Mean resultant length of the posterior after the update, in `[0, 1]`.
    pub resultant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PghRun {
    pub steps: Vec<PghStep>,
    /// Final circular posterior mean; `None` means no information (zero resultant).
    pub estimate: Option<f64>,
    pub posterior: Posterior,
}

impl PghRun {
    /// Estimate after `shots` updates (`shots = 0` is the prior).
    pub fn estimate_after(&self, shots: usize) -> Option<f64> {
        match shots {
            0 => self.prior_estimate(),
            s => self.steps.get(s - 1).and_then(|step| step.estimate),
        }
    }

    fn prior_estimate(&self) -> Option<f64> {
        Posterior::uniform(*self.posterior.grid()).circular_mean()
    }
}

fn check_phase_grid(grid: &ParameterGrid) -> Result<()> {
    match grid.period() {
        Some(p) if libm::fabs(p - TAU) < 1e-12 => Ok(()),
        _ => Err(Error::InvalidGrid(
            "the feedback loop needs a periodic grid of period 2π",
        )),
    }
}

/// Runs `shots` adaptive measurements at the true phase `phi_true`.
pub fn pgh_run(phi_true: f64, shots: usize, grid: ParameterGrid, seed: u64) -> Result<PghRun> {
    check_phase_grid(&grid)?;
    FeedbackInterferometerModel::new(0.0)?.check_params(&[phi_true])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cos, sin): (Vec<f64>, Vec<f64>) =
        grid.nodes().map(|x| (libm::cos(x), libm::sin(x))).unzip();
    let mut posterior = Posterior::uniform(grid);
    let mut steps = Vec::with_capacity(shots);
    for _ in 0..shots {
        let feedback = posterior.draw_with(&mut rng);
        let model = FeedbackInterferometerModel::new(feedback)?;
        let outcome = draw_outcome(&model, &[phi_true], &mut rng);
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        let (cf, sf) = (libm::cos(feedback), libm::sin(feedback));
        // cos(φ − Φ) = cos φ cos Φ + sin φ sin Φ
        posterior.reweight(|i, _| 0.5 * (1.0 + sign * (cos[i] * cf + sin[i] * sf)))?;
        let (_, resultant) = posterior.circular_resultant().unwrap_or((0.0, 0.0));
        steps.push(PghStep {
            feedback,
            outcome,
            estimate: posterior.circular_mean(),
            resultant,
        });
    }
    let estimate = match steps.last() {
        Some(s) => s.estimate,
        None => posterior.circular_mean(),
    };
    Ok(PghRun {
        steps,
        estimate,
        posterior,
    })
}

/// Holevo variance `|⟨e^{iφ̂}⟩|^{−2} − 1` of a set of phase estimates.
pub fn holevo_variance(estimates: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("no estimates"));
    }
    let n = estimates.len() as f64;
    let re: f64 = estimates.iter().map(|&x| libm::cos(x)).sum::<f64>() / n;
    let im: f64 = estimates.iter().map(|&x| libm::sin(x)).sum::<f64>() / n;
    let r = libm::hypot(re, im);
    if r < MIN_RESULTANT {
        return Err(Error::UnboundedHolevoVariance);
    }
    Ok((1.0 / (r * r) - 1.0).max(0.0))
}

/// Holevo variance across repetitions after a given number of shots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoPoint {
    pub shots: usize,
    /// `None` when no run had a defined estimate, or the estimates cancel out.
    pub holevo_variance: Option<f64>,
    pub runs: usize,
    /// Runs whose estimate was defined at this checkpoint.
    pub informative_runs: usize,
}

/// One PGH repetition; returns the estimate at every checkpoint.
pub fn pgh_repetition(
    phi_true: f64,
    checkpoints: &[usize],
    grid: ParameterGrid,
    seed: u64,
    repetition: usize,
) -> Result<Vec<Option<f64>>> {
    let shots = checkpoints.iter().copied().max().unwrap_or(0);
    let run = pgh_run(
        phi_true,
        shots,
        grid,
        derive_seed(seed, repetition as u64, 0),
    )?;
    Ok(checkpoints.iter().map(|&c| run.estimate_after(c)).collect())
}

/// Reduces per-repetition checkpoint estimates (in repetition order).
pub fn aggregate_holevo(
    checkpoints: &[usize],
    repetitions: &[Vec<Option<f64>>],
) -> Vec<HolevoPoint> {
    checkpoints
        .iter()
        .enumerate()
        .map(|(c, &shots)| {
            let estimates: Vec<f64> = repetitions.iter().filter_map(|r| r[c]).collect();
            let holevo_variance = if estimates.is_empty() {
                None
            } else {
                holevo_variance(&estimates).ok()
            };
            HolevoPoint {
                shots,
                holevo_variance,
                runs: repetitions.len(),
                informative_runs: estimates.len(),
            }
        })
        .collect()
}

/// Holevo variance of the PGH estimates at each checkpoint, over `repetitions` seeds.
pub fn pgh_holevo_curve(
    phi_true: f64,
    checkpoints: &[usize],
    repetitions: usize,
    grid: ParameterGrid,
    seed: u64,
) -> Result<Vec<HolevoPoint>> {
    let reps = (0..repetitions)
        .map(|r| pgh_repetition(phi_true, checkpoints, grid, seed, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate_holevo(checkpoints, &reps))
}
