use core::f64::consts::PI;

use crate::{Error, Result};

/// Uniform grid of `points` nodes on `[lower, upper]` (both ends included).
///
/// A periodic grid spans exactly one period: its last node is the same
/// physical point as its first one. Integrals stay trapezoidal, which for a
/// periodic integrand is the rectangle rule over the distinct nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterGrid {
    lower: f64,
    upper: f64,
    points: usize,
    periodic: bool,
}

impl ParameterGrid {
    pub const DEFAULT_PHASE_POINTS: usize = 2048;
    pub const DEFAULT_VISIBILITY_POINTS: usize = 256;

    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite"));
        }
        if lower >= upper {
            return Err(Error::InvalidGrid("lower bound must be below upper bound"));
        }
        if points < 2 {
            return Err(Error::InvalidGrid("need at least two points"));
        }
        Ok(Self {
            lower,
            upper,
            points,
            periodic: false,
        })
    }

    /// One period `[lower, upper]`, with `upper − lower` the period.
    pub fn periodic(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidGrid(
                "a periodic grid needs at least three points",
            ));
        }
        Ok(Self {
            periodic: true,
            ..Self::new(lower, upper, points)?
        })
    }

    /// Periodic `[0, π]` phase grid for the N00N models.
    pub fn noon_phase(points: usize) -> Result<Self> {
        Self::periodic(0.0, PI, points)
    }

    /// Periodic `[0, 2π]` phase grid for the feedback interferometer.
    pub fn full_phase(points: usize) -> Result<Self> {
        Self::periodic(0.0, 2.0 * PI, points)
    }

    pub fn visibility(points: usize) -> Result<Self> {
        Self::new(0.0, 1.0, points)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn period(&self) -> Option<f64> {
        self.periodic.then_some(self.upper - self.lower)
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.upper
        } else {
            self.lower + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.node(i))
    }

    /// Trapezoid quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.points {
            0.5 * h
        } else {
            h
        }
    }

    /// Index of the node nearest to `x` (clamped to the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let t = libm::round((x - self.lower) / self.spacing());
        if t <= 0.0 {
            0
        } else {
            (t as usize).min(self.points - 1)
        }
    }
}
