use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParameterGrid;
use crate::math::{abs_pow, rem_euclid};
use crate::model::{DiscreteModel, Sample};
use crate::{Error, Result};

/// Resultant lengths below this mean the circular direction is undefined.
pub const MIN_RESULTANT: f64 = 1e-9;

/// `log p(χ|params) = Σ_k n_k log p(k|params)`, from the histogram.
///
/// Returns `-∞` when an observed outcome has zero probability.
pub fn log_likelihood<M: DiscreteModel + ?Sized>(
    model: &M,
    sample: &Sample,
    params: &[f64],
) -> Result<f64> {
    check_histogram(model.outcome_count(), sample.histogram())?;
    model.check_params(params)?;
    Ok(sample
        .histogram()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(k, &n)| n as f64 * libm::log(model.prob_unchecked(k, params)))
        .sum())
}

fn check_histogram(outcomes: usize, histogram: &[u64]) -> Result<()> {
    if histogram.len() == outcomes {
        Ok(())
    } else {
        Err(Error::HistogramLength {
            expected: outcomes,
            got: histogram.len(),
        })
    }
}

/// `log p(k|λ_i)` for every node of a grid and every outcome of a
/// single-parameter model. Built once, reused for every histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    grid: ParameterGrid,
    outcomes: usize,
    log_probs: Vec<f64>,
}

impl LikelihoodTable {
    pub fn new<M: DiscreteModel + ?Sized>(model: &M, grid: ParameterGrid) -> Result<Self> {
        if model.param_count() != 1 {
            return Err(Error::ParameterCount {
                expected: 1,
                got: model.param_count(),
            });
        }
        let outcomes = model.outcome_count();
        let mut log_probs = Vec::with_capacity(outcomes * grid.len());
        for x in grid.nodes() {
            model.check_params(&[x])?;
            log_probs.extend((0..outcomes).map(|k| libm::log(model.prob_unchecked(k, &[x]))));
        }
        Ok(Self {
            grid,
            outcomes,
            log_probs,
        })
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes
    }

    /// Log-likelihood of a histogram at every grid node.
    pub fn log_likelihoods(&self, histogram: &[u64]) -> Result<Vec<f64>> {
        check_histogram(self.outcomes, histogram)?;
        Ok(self
            .log_probs
            .chunks_exact(self.outcomes)
            .map(|row| {
                row.iter()
                    .zip(histogram)
                    .filter(|(_, &n)| n > 0)
                    .map(|(lp, &n)| n as f64 * lp)
                    .sum()
            })
            .collect())
    }
}

/// Normalized weights `P(λ|χ)` on a [`ParameterGrid`].
///
/// On a periodic grid every integral is taken over the period window centered
/// on the posterior's circular mean direction, so a posterior straddling the
/// wrap point is integrated as one bump. Interval grids are integrated as is.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    grid: ParameterGrid,
    weights: Vec<f64>,
}

impl Posterior {
    pub fn uniform(grid: ParameterGrid) -> Self {
        let width = grid.upper() - grid.lower();
        Self {
            weights: alloc::vec![1.0 / width; grid.len()],
            grid,
        }
    }

    /// Normalizes nonnegative weights with the trapezoid rule.
    pub fn from_weights(grid: ParameterGrid, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::InvalidPrior("weight count differs from grid size"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidPrior(
                "weights must be finite and nonnegative",
            ));
        }
        let mass: f64 = weights
            .iter()
            .enumerate()
            .map(|(i, w)| grid.weight(i) * w)
            .sum();
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::DegeneratePosterior);
        }
        weights.iter_mut().for_each(|w| *w /= mass);
        Ok(Self { grid, weights })
    }

    /// Exponentiates log-weights after shifting by their maximum, then normalizes.
    pub fn from_log_weights(grid: ParameterGrid, log_weights: &[f64]) -> Result<Self> {
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() || log_weights.iter().any(|w| w.is_nan()) {
            return Err(Error::DegeneratePosterior);
        }
        let weights = log_weights.iter().map(|w| libm::exp(w - max)).collect();
        Self::from_weights(grid, weights)
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Trapezoid integral of the weights (1 after construction).
    pub fn mass(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| self.grid.weight(i) * w)
            .sum()
    }

    /// Bayes update with a further sample, in log space.
    pub fn updated<M: DiscreteModel + ?Sized>(&self, model: &M, sample: &Sample) -> Result<Self> {
        let table = LikelihoodTable::new(model, self.grid)?;
        let ll = table.log_likelihoods(sample.histogram())?;
        let log_weights: Vec<f64> = self
            .weights
            .iter()
            .zip(&ll)
            .map(|(w, l)| libm::log(*w) + l)
            .collect();
        Self::from_log_weights(self.grid, &log_weights)
    }

    /// Multiplies every weight by `factor(λ_i)` and renormalizes.
    pub fn reweight(&mut self, mut factor: impl FnMut(usize, f64) -> f64) -> Result<()> {
        let grid = self.grid;
        let weights = core::mem::take(&mut self.weights)
            .into_iter()
            .enumerate()
            .map(|(i, w)| w * factor(i, grid.node(i)))
            .collect();
        *self = Self::from_weights(grid, weights)?;
        Ok(())
    }

    /// Direction (in grid units) and length of the mean resultant on a periodic grid.
    ///
    /// `None` for interval grids. The length is in `[0, 1]`.
    pub fn circular_resultant(&self) -> Option<(f64, f64)> {
        let period = self.grid.period()?;
        let n = self.grid.len();
        let h = self.grid.spacing();
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..n - 1 {
            let w = if i == 0 {
                0.5 * (self.weights[0] + self.weights[n - 1])
            } else {
                self.weights[i]
            };
            let angle = TAU * i as f64 / (n - 1) as f64;
            re += h * w * libm::cos(angle);
            im += h * w * libm::sin(angle);
        }
        let length = libm::hypot(re, im);
        let direction = self.grid.lower() + rem_euclid(libm::atan2(im, re), TAU) * period / TAU;
        Some((direction, length))
    }

    /// Circular posterior mean on a periodic grid, `None` if the resultant vanishes.
    pub fn circular_mean(&self) -> Option<f64> {
        match self.circular_resultant() {
            Some((direction, length)) if length >= MIN_RESULTANT => Some(direction),
            _ => None,
        }
    }

    /// Node at which the integration window starts and ends.
    fn seam(&self) -> usize {
        let Some(period) = self.grid.period() else {
            return 0;
        };
        match self.circular_mean() {
            Some(center) => {
                let distinct = self.grid.len() - 1;
                let opposite = rem_euclid(center + 0.5 * period - self.grid.lower(), period);
                (libm::round(opposite / self.grid.spacing()) as usize) % distinct
            }
            None => 0,
        }
    }

    /// `(position, trapezoid mass)` pairs over the integration window.
    fn window(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.grid.len();
        let seam = self.seam();
        let h = self.grid.spacing();
        let lower = self.grid.lower();
        (0..n).map(move |j| {
            let (i, position) = if seam == 0 {
                (j, self.grid.node(j))
            } else {
                ((seam + j) % (n - 1), lower + (seam + j) as f64 * h)
            };
            (position, self.grid.weight(j) * self.weights[i])
        })
    }

    fn window_mean(&self) -> f64 {
        self.window().map(|(x, m)| x * m).sum()
    }

    fn to_domain(&self, x: f64) -> f64 {
        match self.grid.period() {
            Some(p) => self.grid.lower() + rem_euclid(x - self.grid.lower(), p),
            None => x,
        }
    }

    /// Bayesian estimate `∫ λ P(λ|χ) dλ`.
    pub fn bayes_estimate(&self) -> f64 {
        self.to_domain(self.window_mean())
    }

    /// `∫ λ² P dλ − (∫ λ P dλ)²`, clamped at zero.
    pub fn variance(&self) -> f64 {
        let mean = self.window_mean();
        let second: f64 = self.window().map(|(x, m)| x * x * m).sum();
        let var = second - mean * mean;
        if var < 0.0 {
            log::warn!("negative posterior variance {var:e} from round-off, clamped to 0");
            0.0
        } else {
            var
        }
    }

    /// `∫ |λ − center|^β P dλ`; on periodic grids distances are taken inside
    /// the integration window.
    pub fn central_abs_moment(&self, center: f64, beta: f64) -> Result<f64> {
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::InvalidOrder(beta));
        }
        let center = self.align(center);
        Ok(self
            .window()
            .map(|(x, m)| abs_pow(x - center, beta) * m)
            .sum())
    }

    /// Shifts `center` by whole periods to the copy nearest the window mean.
    fn align(&self, center: f64) -> f64 {
        match self.grid.period() {
            Some(p) => {
                let mean = self.window_mean();
                mean + crate::math::wrap_symmetric(center - mean, p)
            }
            None => center,
        }
    }

    fn standardized_moment(&self, order: i32) -> f64 {
        let mean = self.window_mean();
        let var = self.variance();
        if var <= 0.0 {
            return 0.0;
        }
        let central: f64 = self
            .window()
            .map(|(x, m)| libm::pow(x - mean, order as f64) * m)
            .sum();
        central / libm::pow(var, 0.5 * order as f64)
    }

    pub fn skewness(&self) -> f64 {
        self.standardized_moment(3)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.standardized_moment(4) - 3.0
    }

    /// One draw by inverse-CDF sampling; see [`Posterior::draw_with`].
    pub fn draw(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.draw_with(&mut rng)
    }

    /// Inverse-CDF draw from the node masses.
    ///
    /// Each node with positive mass contributes a knot at the midpoint of its
    /// cumulative mass interval; the quantile function interpolates linearly
    /// between knots of adjacent nodes. A lone populated node is therefore
    /// always returned exactly, and no draw lands between two populated nodes
    /// separated by empty ones. On periodic grids the closing node maps to the
    /// opening one.
    pub fn draw_with<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let masses: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| self.grid.weight(i) * w)
            .collect();
        let total: f64 = masses.iter().sum();
        let u = rng.random::<f64>() * total;

        let mut knots: Vec<(f64, usize)> = Vec::new();
        let mut cumulative = 0.0;
        for (i, &m) in masses.iter().enumerate() {
            if m > 0.0 {
                knots.push((cumulative + 0.5 * m, i));
            }
            cumulative += m;
        }
        let value = match knots.partition_point(|&(c, _)| c <= u) {
            0 => self.grid.node(knots[0].1),
            p if p == knots.len() => self.grid.node(knots[p - 1].1),
            p => {
                let (c0, i0) = knots[p - 1];
                let (c1, i1) = knots[p];
                if i1 == i0 + 1 {
                    let t = (u - c0) / (c1 - c0);
                    self.grid.node(i0) + t * self.grid.spacing()
                } else if u < 0.5 * (c0 + c1) {
                    self.grid.node(i0)
                } else {
                    self.grid.node(i1)
                }
            }
        };
        self.to_domain(value)
    }
}

/// Posterior on `grid` from a sample and an optional prior (flat by default).
pub fn posterior<M: DiscreteModel + ?Sized>(
    model: &M,
    sample: &Sample,
    grid: ParameterGrid,
    prior: Option<&[f64]>,
) -> Result<Posterior> {
    let table = LikelihoodTable::new(model, grid)?;
    posterior_from_table(&table, sample.histogram(), prior)
}

/// Posterior from a prebuilt [`LikelihoodTable`].
pub fn posterior_from_table(
    table: &LikelihoodTable,
    histogram: &[u64],
    prior: Option<&[f64]>,
) -> Result<Posterior> {
    let mut log_weights = table.log_likelihoods(histogram)?;
    if let Some(prior) = prior {
        check_prior(prior, log_weights.len())?;
        for (lw, p) in log_weights.iter_mut().zip(prior) {
            *lw += libm::log(*p);
        }
    }
    Posterior::from_log_weights(*table.grid(), &log_weights)
}

pub(crate) fn check_prior(prior: &[f64], len: usize) -> Result<()> {
    if prior.len() != len {
        return Err(Error::InvalidPrior("prior length differs from grid size"));
    }
    if prior.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidPrior(
            "prior weights must be finite and nonnegative",
        ));
    }
    if prior.iter().all(|p| *p == 0.0) {
        return Err(Error::InvalidPrior("prior is identically zero"));
    }
    Ok(())
}

pub fn bayes_estimate(post: &Posterior) -> f64 {
    post.bayes_estimate()
}

pub fn posterior_variance(post: &Posterior) -> f64 {
    post.variance()
}

pub fn central_abs_moment(post: &Posterior, center: f64, beta: f64) -> Result<f64> {
    post.central_abs_moment(center, beta)
}

pub fn posterior_draw(post: &Posterior, seed: u64) -> f64 {
    post.draw(seed)
}
