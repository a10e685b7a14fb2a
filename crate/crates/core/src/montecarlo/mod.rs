//! Seeded Monte Carlo experiments.
//!
//! A sweep simulates `N` repetitions of an experiment at each measurement
//! count `M`, builds the Bayesian posterior for every simulated sample and
//! records the estimate and the `Ξ_β` diagnostics. Each `(repetition, M)`
//! cell draws from its own child seed ([`crate::math::derive_seed`]), and
//! [`SweepPlan::aggregate`] reduces repetitions in index order, so the result
//! is bit-identical however the repetitions were scheduled.

mod pgh;

pub use pgh::{
    aggregate_holevo, holevo_variance, pgh_holevo_curve, pgh_repetition, pgh_run, HolevoPoint,
    PghRun, PghStep,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::bayes::{posterior_from_table, LikelihoodTable, ParameterGrid};
use crate::information::{
    conjugate_order, fisher_information, gaussian_limit_xi, generalized_fisher, xi_beta,
};
use crate::math::{derive_seed, is_integer, mean_std};
use crate::model::{sample_outcomes, DiscreteModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// True value of the estimated parameter.
    pub truth: f64,
    /// Measurement counts `M`, each at least 1.
    pub measurements: Vec<usize>,
    /// Repetitions `N` per measurement count.
    pub repetitions: usize,
    /// Moment orders β, each greater than 1.
    pub betas: Vec<f64>,
    pub seed: u64,
    pub grid: ParameterGrid,
}

impl ExperimentConfig {
    pub const DEFAULT_SEED: u64 = 20_200_202;

    /// φ = 0.2 on the default phase grid, 25 log-spaced counts in `[10, 450]`,
    /// 500 repetitions and β ∈ {2, 3, 4, 5}. Pair it with a visibility-0.9
    /// [`crate::model::NoonPhaseModel`].
    pub fn noon_reference() -> Self {
        Self {
            truth: 0.2,
            measurements: log_spaced_counts(10, 450, 25),
            repetitions: 500,
            betas: vec![2.0, 3.0, 4.0, 5.0],
            seed: Self::DEFAULT_SEED,
            grid: ParameterGrid::noon_phase(ParameterGrid::DEFAULT_PHASE_POINTS)
                .expect("default grid is valid"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.measurements.is_empty() || self.measurements.contains(&0) {
            return Err(Error::InvalidConfig(
                "measurement counts must be nonempty and at least 1".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.betas.is_empty() {
            return Err(Error::InvalidConfig("no moment orders given".into()));
        }
        for &beta in &self.betas {
            conjugate_order(beta)?;
        }
        Ok(())
    }
}

/// `count` integers log-spaced on `[lo, hi]`, rounded and deduplicated.
pub fn log_spaced_counts(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 || lo >= hi {
        return vec![lo.max(1)];
    }
    let (a, b) = (libm::log(lo.max(1) as f64), libm::log(hi as f64));
    let mut out: Vec<usize> = (0..count)
        .map(|i| libm::round(libm::exp(a + (b - a) * i as f64 / (count - 1) as f64)) as usize)
        .collect();
    out[0] = lo.max(1);
    out[count - 1] = hi;
    out.dedup();
    out
}

/// Outcome of one `(repetition, M)` cell; `None` marks a degenerate posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub estimate: f64,
    /// Posterior `Σ_β` about the estimate, one per configured β.
    pub sigma: Vec<f64>,
    pub xi: Vec<f64>,
}

/// All cells of one repetition, indexed like `ExperimentConfig::measurements`.
pub type RepetitionResult = Vec<Option<CellResult>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub measurements: usize,
    pub beta: f64,
    pub xi_mean: f64,
    /// Sample standard deviation of `Ξ_β` across repetitions.
    pub xi_std: f64,
    /// Gaussian limit of `Ξ_β`, integer β only.
    pub gaussian_limit: Option<f64>,
    /// The Barankin floor `Ξ_β = 1`.
    pub bound_floor: f64,
    pub estimate_mean: f64,
    pub estimate_std: f64,
    pub n_valid: usize,
}

impl SweepRow {
    pub fn xi_stderr(&self) -> f64 {
        self.xi_std / libm::sqrt(self.n_valid as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub measurements: usize,
    pub estimate_mean: f64,
    pub estimate_std: f64,
    pub estimate_stderr: f64,
    pub n_valid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// One row per `(M, β)`, M-major.
    pub rows: Vec<SweepRow>,
    pub bias: Vec<BiasRow>,
    pub degenerate: usize,
    pub total_cells: usize,
}

impl SweepResult {
    pub fn degenerate_fraction(&self) -> f64 {
        if self.total_cells == 0 {
            0.0
        } else {
            self.degenerate as f64 / self.total_cells as f64
        }
    }

    pub fn row(&self, measurements: usize, beta: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.measurements == measurements && r.beta == beta)
    }
}

/// Everything a sweep needs that does not depend on the repetition:
/// the likelihood table and the information values at the true parameter.
pub struct SweepPlan<'a, M: DiscreteModel + ?Sized> {
    model: &'a M,
    config: ExperimentConfig,
    table: LikelihoodTable,
    fisher: f64,
    f_alpha: Vec<f64>,
    limits: Vec<Option<f64>>,
}

impl<'a, M: DiscreteModel + ?Sized> SweepPlan<'a, M> {
    pub fn new(model: &'a M, config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let truth = [config.truth];
        model.check_params(&truth)?;
        let table = LikelihoodTable::new(model, config.grid)?;
        let fisher = fisher_information(model, &truth, 0)?;
        let f_alpha = config
            .betas
            .iter()
            .map(|&b| generalized_fisher(model, &truth, 0, conjugate_order(b)?))
            .collect::<Result<Vec<_>>>()?;
        let limits = config
            .betas
            .iter()
            .zip(&f_alpha)
            .map(|(&b, &fa)| {
                if is_integer(b) && fisher > 0.0 && fa > 0.0 {
                    gaussian_limit_xi(fisher, fa, b).ok()
                } else {
                    None
                }
            })
            .collect();
        Ok(Self {
            model,
            config,
            table,
            fisher,
            f_alpha,
            limits,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn fisher(&self) -> f64 {
        self.fisher
    }

    /// `F_α` at the true parameter, one per configured β.
    pub fn generalized_fisher(&self) -> &[f64] {
        &self.f_alpha
    }

    pub fn gaussian_limits(&self) -> &[Option<f64>] {
        &self.limits
    }

    /// Seed of cell `(repetition, measurement index)`.
    pub fn cell_seed(&self, repetition: usize, m_index: usize) -> u64 {
        derive_seed(self.config.seed, repetition as u64, m_index as u64)
    }

    pub fn run_repetition(&self, repetition: usize) -> RepetitionResult {
        self.config
            .measurements
            .iter()
            .enumerate()
            .map(|(j, &m)| self.run_cell(repetition, j, m))
            .collect()
    }

    fn run_cell(&self, repetition: usize, m_index: usize, m: usize) -> Option<CellResult> {
        let seed = self.cell_seed(repetition, m_index);
        let sample = sample_outcomes(self.model, &[self.config.truth], m, seed).ok()?;
        let post = posterior_from_table(&self.table, sample.histogram(), None).ok()?;
        let estimate = post.bayes_estimate();
        let mut sigma = Vec::with_capacity(self.config.betas.len());
        let mut xi = Vec::with_capacity(self.config.betas.len());
        for (&beta, &fa) in self.config.betas.iter().zip(&self.f_alpha) {
            let s = post.central_abs_moment(estimate, beta).ok()?;
            xi.push(xi_beta(s, m, fa, beta).ok()?);
            sigma.push(s);
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return None;
        }
        Some(CellResult {
            estimate,
            sigma,
            xi,
        })
    }

    /// Reduces repetitions (in the given order) into per-cell statistics.
    pub fn aggregate(&self, repetitions: &[RepetitionResult]) -> SweepResult {
        let cfg = &self.config;
        let mut rows = Vec::with_capacity(cfg.measurements.len() * cfg.betas.len());
        let mut bias = Vec::with_capacity(cfg.measurements.len());
        let mut degenerate = 0;
        for (j, &m) in cfg.measurements.iter().enumerate() {
            let cells: Vec<&CellResult> =
                repetitions.iter().filter_map(|r| r[j].as_ref()).collect();
            degenerate += repetitions.len() - cells.len();
            let estimates: Vec<f64> = cells.iter().map(|c| c.estimate).collect();
            let (estimate_mean, estimate_std) = mean_std(&estimates);
            let n_valid = cells.len();
            bias.push(BiasRow {
                measurements: m,
                estimate_mean,
                estimate_std,
                estimate_stderr: estimate_std / libm::sqrt(n_valid as f64),
                n_valid,
            });
            for (b, &beta) in cfg.betas.iter().enumerate() {
                let xi: Vec<f64> = cells.iter().map(|c| c.xi[b]).collect();
                let (xi_mean, xi_std) = mean_std(&xi);
                rows.push(SweepRow {
                    measurements: m,
                    beta,
                    xi_mean,
                    xi_std,
                    gaussian_limit: self.limits[b],
                    bound_floor: 1.0,
                    estimate_mean,
                    estimate_std,
                    n_valid,
                });
            }
        }
        SweepResult {
            rows,
            bias,
            degenerate,
            total_cells: repetitions.len() * cfg.measurements.len(),
        }
    }
}

/// Sequential sweep; see [`SweepPlan`] for the parallel building blocks.
pub fn run_sweep<M: DiscreteModel + ?Sized>(
    model: &M,
    config: &ExperimentConfig,
) -> Result<SweepResult> {
    let plan = SweepPlan::new(model, config.clone())?;
    let reps: Vec<RepetitionResult> = (0..config.repetitions)
        .map(|r| plan.run_repetition(r))
        .collect();
    Ok(plan.aggregate(&reps))
}

/// Run-averaged Bayesian estimate per measurement count.
pub fn bias_curve<M: DiscreteModel + ?Sized>(
    model: &M,
    config: &ExperimentConfig,
) -> Result<Vec<BiasRow>> {
    Ok(run_sweep(model, config)?.bias)
}
