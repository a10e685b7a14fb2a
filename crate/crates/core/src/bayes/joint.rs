use alloc::vec::Vec;

use super::posterior::check_prior;
use super::{ParameterGrid, Posterior};
use crate::model::{DiscreteModel, Sample};
use crate::{Error, Result};

/// Joint posterior over the product of two grids, stored row-major with the
/// first parameter as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPosterior {
    first: ParameterGrid,
    second: ParameterGrid,
    weights: Vec<f64>,
}

impl JointPosterior {
    pub fn from_log_weights(
        first: ParameterGrid,
        second: ParameterGrid,
        log_weights: &[f64],
    ) -> Result<Self> {
        if log_weights.len() != first.len() * second.len() {
            return Err(Error::InvalidPrior("weight count differs from grid size"));
        }
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() || log_weights.iter().any(|w| w.is_nan()) {
            return Err(Error::DegeneratePosterior);
        }
        let mut weights: Vec<f64> = log_weights.iter().map(|w| libm::exp(w - max)).collect();
        let mut mass = 0.0;
        for i in 0..first.len() {
            for j in 0..second.len() {
                mass += first.weight(i) * second.weight(j) * weights[i * second.len() + j];
            }
        }
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::DegeneratePosterior);
        }
        weights.iter_mut().for_each(|w| *w /= mass);
        Ok(Self {
            first,
            second,
            weights,
        })
    }

    pub fn grids(&self) -> (&ParameterGrid, &ParameterGrid) {
        (&self.first, &self.second)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.second.len() + j]
    }

    /// Two-dimensional trapezoid integral of the weights.
    pub fn mass(&self) -> f64 {
        let mut mass = 0.0;
        for i in 0..self.first.len() {
            for j in 0..self.second.len() {
                mass += self.first.weight(i) * self.second.weight(j) * self.weight(i, j);
            }
        }
        mass
    }

    /// Integrates out the other axis; `axis` 0 keeps the first parameter.
    pub fn marginal(&self, axis: usize) -> Result<Posterior> {
        let (kept, summed) = match axis {
            0 => (self.first, self.second),
            1 => (self.second, self.first),
            _ => {
                return Err(Error::ParameterIndex {
                    index: axis,
                    count: 2,
                })
            }
        };
        let weights = (0..kept.len())
            .map(|a| {
                (0..summed.len())
                    .map(|b| {
                        let w = if axis == 0 {
                            self.weight(a, b)
                        } else {
                            self.weight(b, a)
                        };
                        summed.weight(b) * w
                    })
                    .sum()
            })
            .collect();
        Posterior::from_weights(kept, weights)
    }
}

/// Joint posterior of a two-parameter model on `first × second`, flat prior by default.
pub fn posterior_2d<M: DiscreteModel + ?Sized>(
    model: &M,
    sample: &Sample,
    first: ParameterGrid,
    second: ParameterGrid,
    prior: Option<&[f64]>,
) -> Result<JointPosterior> {
    if model.param_count() != 2 {
        return Err(Error::ParameterCount {
            expected: 2,
            got: model.param_count(),
        });
    }
    if sample.histogram().len() != model.outcome_count() {
        return Err(Error::HistogramLength {
            expected: model.outcome_count(),
            got: sample.histogram().len(),
        });
    }
    if let Some(prior) = prior {
        check_prior(prior, first.len() * second.len())?;
    }
    let histogram = sample.histogram();
    let mut log_weights = Vec::with_capacity(first.len() * second.len());
    for a in first.nodes() {
        for b in second.nodes() {
            let params = [a, b];
            model.check_params(&params)?;
            let ll: f64 = histogram
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(k, &n)| n as f64 * libm::log(model.prob_unchecked(k, &params)))
                .sum();
            log_weights.push(ll);
        }
    }
    if let Some(prior) = prior {
        for (lw, p) in log_weights.iter_mut().zip(prior) {
            *lw += libm::log(*p);
        }
    }
    JointPosterior::from_log_weights(first, second, &log_weights)
}

pub fn marginal(post: &JointPosterior, axis: usize) -> Result<Posterior> {
    post.marginal(axis)
}
