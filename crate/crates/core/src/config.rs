//! Scheme selection and the numerical knobs shared by all solvers.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("fixed omega must lie in [0, 1], got {0}")]
    OmegaOutOfRange(f64),
    #[error("epsilon scale must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("{0} must be positive")]
    NonPositiveTolerance(&'static str),
}

/// Which numerical flux drives the sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Implicit first-order upwind flux.
    FirstOrder,
    /// Compact second-order flux with a constant upwind weight `ω ∈ [0, 1]`
    /// and no damping (`l = 1`).
    FixedOmega(f64),
    /// Solution-adaptive `(ω, l)` chosen per node by the TVD limiter,
    /// resolved with a predictor-corrector iteration.
    HighResolution,
}

/// Weight function used by the high-resolution flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimiterKind {
    /// Courant-aware weights; TVD for any time step.
    #[default]
    CourantAdaptive,
    /// ENO-like minmod weights; intended for comparisons at small Courant
    /// numbers only.
    Minmod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Flux-jump gate: a jump below `epsilon_scale * max(1, max_i |f±(u_i^n)|)`
    /// is treated as zero. Rescaled every time step.
    pub epsilon_scale: f64,
    /// Corrector passes per node; 1 is normally enough.
    pub max_corrector_iters: usize,
    /// Early corrector stop on `|u^{k+1} - u^k|`.
    pub corrector_stop_tol: f64,
    /// Absolute residual tolerance of the per-node root solves.
    pub root_abs_tol: f64,
    pub root_max_iters: usize,
    /// Replace the global Courant bound by the local divided difference of
    /// the split flux at each node.
    pub use_local_courant: bool,
    pub limiter: LimiterKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::HighResolution,
            epsilon_scale: 1e-12,
            max_corrector_iters: 1,
            corrector_stop_tol: 1e-10,
            root_abs_tol: 1e-12,
            root_max_iters: 100,
            use_local_courant: false,
            limiter: LimiterKind::CourantAdaptive,
        }
    }
}

impl SolverConfig {
    pub fn first_order() -> Self {
        Self { scheme: Scheme::FirstOrder, ..Self::default() }
    }

    pub fn fixed_omega(omega: f64) -> Self {
        Self { scheme: Scheme::FixedOmega(omega), ..Self::default() }
    }

    pub fn high_resolution() -> Self {
        Self::default()
    }

    /// Iterate the corrector (up to `iters`) until `|u^{k+1} - u^k| < tol`.
    pub fn with_correctors(mut self, iters: usize, tol: f64) -> Self {
        self.max_corrector_iters = iters;
        self.corrector_stop_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Scheme::FixedOmega(w) = self.scheme {
            if !(0.0..=1.0).contains(&w) {
                return Err(ConfigError::OmegaOutOfRange(w));
            }
        }
        if !(self.epsilon_scale >= 0.0) {
            return Err(ConfigError::NegativeEpsilon(self.epsilon_scale));
        }
        if !(self.root_abs_tol > 0.0) {
            return Err(ConfigError::NonPositiveTolerance("root_abs_tol"));
        }
        if !(self.corrector_stop_tol > 0.0) {
            return Err(ConfigError::NonPositiveTolerance("corrector_stop_tol"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert_eq!(
            SolverConfig::fixed_omega(1.5).validate().unwrap_err(),
            ConfigError::OmegaOutOfRange(1.5)
        );
        let mut cfg = SolverConfig::default();
        cfg.epsilon_scale = -1.0;
        assert!(cfg.validate().is_err());
    }
}
