//! Fisher information, generalized (Barankin) information and the bounds built on them.
//!
//! For a moment order `β > 1` the conjugate information order is
//! `α = β/(β−1)`. The β-th central absolute moment of any unbiased estimator
//! from `M` measurements satisfies
//!
//! ```text
//! Σ_β ≥ 1 / (M^{β/2} · F_α^{β/α}),     F_α = Σ_k p(k|λ) |∂_λ log p(k|λ)|^α
//! ```
//!
//! which reduces to the Cramér-Rao bound at `β = 2`. [`xi_beta`] rescales a
//! measured moment by the bound, so `Ξ_β ≥ 1`, and [`gaussian_limit_xi`] is
//! the value `Ξ_β` settles to once the estimator distribution is Gaussian
//! with variance at the CRB.

use core::f64::consts::FRAC_2_PI;

use crate::math::{abs_pow, double_factorial, is_integer};
use crate::model::DiscreteModel;
use crate::{Error, Result};

/// Outcomes with probability below this are excluded from information sums.
pub const MIN_PROBABILITY: f64 = 1e-300;

/// Conjugate order `α = β/(β−1)`.
pub fn conjugate_order(beta: f64) -> Result<f64> {
    check_order(beta)?;
    Ok(beta / (beta - 1.0))
}

fn check_order(order: f64) -> Result<()> {
    if order > 1.0 && order.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidOrder(order))
    }
}

/// `F = Σ_k p (∂ log p)²` with respect to `params[index]`.
pub fn fisher_information<M: DiscreteModel + ?Sized>(
    model: &M,
    params: &[f64],
    index: usize,
) -> Result<f64> {
    generalized_fisher(model, params, index, 2.0)
}

/// `F_α = Σ_k p |∂ log p|^α` with respect to `params[index]`, `α > 1`.
pub fn generalized_fisher<M: DiscreteModel + ?Sized>(
    model: &M,
    params: &[f64],
    index: usize,
    alpha: f64,
) -> Result<f64> {
    check_order(alpha)?;
    model.check_params(params)?;
    model.check_index(index)?;
    Ok(generalized_fisher_unchecked(model, params, index, alpha))
}

pub(crate) fn generalized_fisher_unchecked<M: DiscreteModel + ?Sized>(
    model: &M,
    params: &[f64],
    index: usize,
    alpha: f64,
) -> f64 {
    (0..model.outcome_count())
        .filter_map(|k| {
            let p = model.prob_unchecked(k, params);
            if p < MIN_PROBABILITY {
                return None;
            }
            let score = model.dprob_unchecked(k, params, index) / p;
            Some(p * abs_pow(score, alpha))
        })
        .sum()
}

/// Cramér-Rao bound `1/(M·F)`.
pub fn crb(fisher: f64, measurements: usize) -> Result<f64> {
    barankin_bound(fisher, measurements, 2.0)
}

/// Barankin bound `1/(M^{β/2}·F_α^{β/α})` on the β-th central absolute moment.
pub fn barankin_bound(f_alpha: f64, measurements: usize, beta: f64) -> Result<f64> {
    let alpha = conjugate_order(beta)?;
    if measurements == 0 {
        return Err(Error::NoMeasurements);
    }
    if f_alpha.is_nan() || f_alpha <= 0.0 {
        return Err(Error::ZeroInformation);
    }
    let m = measurements as f64;
    Ok(1.0 / (libm::pow(m, 0.5 * beta) * libm::pow(f_alpha, beta / alpha)))
}

/// `Ξ_β = Σ_β·M^{β/2}·F_α^{β/α}`; at least 1 for unbiased estimators.
pub fn xi_beta(sigma_beta: f64, measurements: usize, f_alpha: f64, beta: f64) -> Result<f64> {
    let alpha = conjugate_order(beta)?;
    let m = measurements as f64;
    Ok(sigma_beta * libm::pow(m, 0.5 * beta) * libm::pow(f_alpha, beta / alpha))
}

fn gaussian_factor(beta: f64) -> Result<f64> {
    if !(is_integer(beta) && beta >= 2.0) {
        return Err(Error::NonIntegerOrder(beta));
    }
    let b = beta as u32;
    let parity = if b % 2 == 1 {
        libm::sqrt(FRAC_2_PI)
    } else {
        1.0
    };
    Ok(double_factorial(b - 1) * parity)
}

/// β-th central absolute moment of a Gaussian with the given variance:
/// `Σ_2^{β/2}·(β−1)!!·{√(2/π) for odd β, 1 for even β}`.
pub fn gaussian_abs_moment(variance: f64, beta: f64) -> Result<f64> {
    let factor = gaussian_factor(beta)?;
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::NegativeVariance(variance));
    }
    Ok(libm::pow(variance, 0.5 * beta) * factor)
}

/// Limit of `Ξ_β` for a Gaussian estimator at the CRB:
/// `(F_α^{β/α}/F_2^{β/2})·(β−1)!!·{√(2/π) odd, 1 even}`.
pub fn gaussian_limit_xi(fisher: f64, f_alpha: f64, beta: f64) -> Result<f64> {
    let factor = gaussian_factor(beta)?;
    let alpha = conjugate_order(beta)?;
    if !(fisher > 0.0 && f_alpha > 0.0) {
        return Err(Error::ZeroInformation);
    }
    if beta == 2.0 {
        return Ok(1.0);
    }
    Ok(libm::pow(f_alpha, beta / alpha) / libm::pow(fisher, 0.5 * beta) * factor)
}

/// Every bound-related quantity for one experiment and one moment order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub measurements: usize,
    pub beta: f64,
    pub alpha: f64,
    /// Per-measurement Fisher information `F`.
    pub fisher: f64,
    pub generalized_fisher: f64,
    pub crb: f64,
    pub barankin_bound: f64,
    /// Measured `Σ_β`, when one was supplied.
    pub sigma_beta: Option<f64>,
    pub xi_beta: Option<f64>,
    /// Gaussian limit of `Ξ_β`; only defined for integer β.
    pub gaussian_limit: Option<f64>,
}

impl BoundReport {
    /// Evaluates `F`, `F_α` and the bounds at `params`, which should be the
    /// true parameter value.
    pub fn new<M: DiscreteModel + ?Sized>(
        model: &M,
        params: &[f64],
        index: usize,
        measurements: usize,
        beta: f64,
        sigma_beta: Option<f64>,
    ) -> Result<Self> {
        let alpha = conjugate_order(beta)?;
        let fisher = fisher_information(model, params, index)?;
        let generalized_fisher = generalized_fisher(model, params, index, alpha)?;
        Self::from_information(fisher, generalized_fisher, measurements, beta, sigma_beta)
    }

    pub fn from_information(
        fisher: f64,
        generalized_fisher: f64,
        measurements: usize,
        beta: f64,
        sigma_beta: Option<f64>,
    ) -> Result<Self> {
        let alpha = conjugate_order(beta)?;
        let crb = crb(fisher, measurements)?;
        let barankin_bound = barankin_bound(generalized_fisher, measurements, beta)?;
        let xi = match sigma_beta {
            Some(s) => Some(xi_beta(s, measurements, generalized_fisher, beta)?),
            None => None,
        };
        let gaussian_limit = if is_integer(beta) {
            Some(gaussian_limit_xi(fisher, generalized_fisher, beta)?)
        } else {
            None
        };
        Ok(Self {
            measurements,
            beta,
            alpha,
            fisher,
            generalized_fisher,
            crb,
            barankin_bound,
            sigma_beta,
            xi_beta: xi,
            gaussian_limit,
        })
    }
}
