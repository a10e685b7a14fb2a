//! Repetition-parallel drivers for the Monte Carlo harness.
//!
//! Repetitions run on a rayon pool and are collected back in index order
//! before the core reduction, so results do not depend on the thread count.

use qestim_core::bayes::ParameterGrid;
use qestim_core::model::DiscreteModel;
use qestim_core::montecarlo::{
    aggregate_holevo, pgh_repetition, ExperimentConfig, HolevoPoint, RepetitionResult, SweepPlan,
    SweepResult,
};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{CliError, Result};

/// `None` or `Some(0)` uses the available hardware parallelism.
pub fn thread_pool(threads: Option<usize>) -> Result<ThreadPool> {
    let mut builder = ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

pub fn run_sweep<M: DiscreteModel + ?Sized>(
    pool: &ThreadPool,
    model: &M,
    config: &ExperimentConfig,
) -> Result<SweepResult> {
    let plan = SweepPlan::new(model, config.clone())?;
    let reps: Vec<RepetitionResult> = pool.install(|| {
        (0..config.repetitions)
            .into_par_iter()
            .map(|r| plan.run_repetition(r))
            .collect()
    });
    Ok(plan.aggregate(&reps))
}

pub fn run_pgh_curve(
    pool: &ThreadPool,
    phi_true: f64,
    checkpoints: &[usize],
    repetitions: usize,
    grid: ParameterGrid,
    seed: u64,
) -> Result<Vec<HolevoPoint>> {
    let reps = pool.install(|| {
        (0..repetitions)
            .into_par_iter()
            .map(|r| pgh_repetition(phi_true, checkpoints, grid, seed, r))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(aggregate_holevo(checkpoints, &reps))
}
