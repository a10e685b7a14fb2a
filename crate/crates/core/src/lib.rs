//! Post-processing toolkit for single- and two-parameter phase estimation.
//!
//! The crate is `no_std` (it needs `alloc`) and covers:
//!
//! * [`model`]: discrete statistical models `p(k|λ)` with analytic or
//!   finite-difference derivatives, plus seeded outcome sampling;
//! * [`information`]: Fisher information, the generalized information `F_α`,
//!   Cramér-Rao and Barankin bounds, the `Ξ_β` saturation diagnostic and the
//!   values it approaches when the posterior is Gaussian;
//! * [`bayes`]: grid posteriors, Bayesian point estimates and moments, the
//!   joint phase/visibility posterior and posterior sampling;
//! * [`mle`]: grid maximum-likelihood estimation from count histograms;
//! * [`montecarlo`]: seeded Monte Carlo sweeps, bias curves, the particle
//!   guess heuristic and the Holevo variance.
//!
//! Everything that runs in parallel is split into independent per-repetition
//! units with their own derived seeds, so a reduction in index order gives the
//! same bits regardless of how the units were scheduled.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bayes;
mod error;
pub mod information;
pub mod math;
pub mod mle;
pub mod model;
pub mod montecarlo;

pub use error::{Error, Result};
