//! Uniform 1D grids, time stepping and Courant-number bookkeeping.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 4 cells, got {0}")]
    TooFewCells(usize),
    #[error("empty interval: x_lo = {x_lo}, x_hi = {x_hi}")]
    EmptyInterval { x_lo: f64, x_hi: f64 },
    #[error("time step must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("t_end = {t_end} is not an integer number of steps of tau = {tau}")]
    NonIntegerSteps { t_end: f64, tau: f64 },
}

/// Uniform grid of `cells + 1` nodes on `[x_lo, x_hi]`, node `i` at `x_lo + i*h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_lo: f64,
    x_hi: f64,
    cells: usize,
    h: f64,
}

impl Grid1D {
    /// At least 4 cells are required: the boundary treatment may pin two
    /// nodes per side.
    pub fn new(x_lo: f64, x_hi: f64, cells: usize) -> Result<Self, GridError> {
        if !(x_hi > x_lo) {
            return Err(GridError::EmptyInterval { x_lo, x_hi });
        }
        if cells < 4 {
            return Err(GridError::TooFewCells(cells));
        }
        let h = (x_hi - x_lo) / cells as f64;
        Ok(Self { x_lo, x_hi, cells, h })
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n_nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.h
    }

    /// Node coordinate allowing ghost indices outside `0..=cells`.
    pub fn node_signed(&self, i: isize) -> f64 {
        self.x_lo + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|i| self.node(i))
    }
}

/// A fixed number of equal time steps; `t_end = steps * tau` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepping {
    tau: f64,
    steps: usize,
}

impl TimeStepping {
    /// Zero steps is allowed and means "record the initial field only".
    pub fn new(tau: f64, steps: usize) -> Result<Self, GridError> {
        if !(tau > 0.0) {
            return Err(GridError::NonPositiveTau(tau));
        }
        Ok(Self { tau, steps })
    }

    /// `tau = ratio * h`, rejecting a `t_end` that is not an integer number
    /// of steps (to round-off).
    pub fn from_ratio(grid: &Grid1D, tau_over_h: f64, t_end: f64) -> Result<Self, GridError> {
        let tau = tau_over_h * grid.spacing();
        if !(tau > 0.0) {
            return Err(GridError::NonPositiveTau(tau));
        }
        let steps = (t_end / tau).round();
        if steps < 1.0 || (steps * tau - t_end).abs() > 1e-9 * t_end.abs().max(1.0) {
            return Err(GridError::NonIntegerSteps { t_end, tau });
        }
        Ok(Self { tau, steps: steps as usize })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_end(&self) -> f64 {
        self.steps as f64 * self.tau
    }

    /// Time level `t^n`.
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

/// Upper bounds on `(tau/h) * max df⁺/du` and `(tau/h) * max |df⁻/du|` over
/// the states seen at the current level. The limiter uses `max(1, c)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CourantBounds {
    pub c_plus: f64,
    pub c_minus: f64,
}

impl CourantBounds {
    pub fn effective_plus(&self) -> f64 {
        self.c_plus.max(1.0)
    }

    pub fn effective_minus(&self) -> f64 {
        self.c_minus.max(1.0)
    }
}
