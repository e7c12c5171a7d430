//! Flux functions and monotone splittings `f = f⁺ + f⁻` with
//! `df⁺/du >= 0` and `df⁻/du <= 0`.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::Mat;

#[derive(Debug, Error, PartialEq)]
pub enum FluxError {
    #[error("splitting parameter alpha must be nonnegative, got {0}")]
    NegativeAlpha(f64),
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar flux together with its monotone splitting and the analytic
/// derivatives of both parts.
#[derive(Clone)]
pub struct ScalarSplitting {
    flux: ScalarFn,
    plus: ScalarFn,
    minus: ScalarFn,
    dplus: ScalarFn,
    dminus: ScalarFn,
    /// Characteristic-speed scale of a Lax-Friedrichs splitting; 0 when the
    /// splitting is not of that form.
    pub alpha: f64,
    plus_is_zero: bool,
    minus_is_zero: bool,
}

impl std::fmt::Debug for ScalarSplitting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarSplitting")
            .field("alpha", &self.alpha)
            .field("plus_is_zero", &self.plus_is_zero)
            .field("minus_is_zero", &self.minus_is_zero)
            .finish()
    }
}

impl ScalarSplitting {
    /// Lax-Friedrichs splitting `f± = (f ± alpha·u) / 2`; monotone when
    /// `alpha` dominates `|f'|` over the states visited.
    pub fn lax_friedrichs(flux: ScalarFn, dflux: ScalarFn, alpha: f64) -> Result<Self, FluxError> {
        if !(alpha >= 0.0) {
            return Err(FluxError::NegativeAlpha(alpha));
        }
        let (f1, f2, f3, f4) = (flux.clone(), flux.clone(), dflux.clone(), dflux.clone());
        Ok(Self {
            flux,
            plus: Arc::new(move |u| 0.5 * (f1(u) + alpha * u)),
            minus: Arc::new(move |u| 0.5 * (f2(u) - alpha * u)),
            dplus: Arc::new(move |u| 0.5 * (f3(u) + alpha)),
            dminus: Arc::new(move |u| 0.5 * (f4(u) - alpha)),
            alpha,
            plus_is_zero: false,
            minus_is_zero: false,
        })
    }

    /// Splitting of `f(u) = u²/2` via `f± = (f ± |u|u/2) / 2`, i.e.
    /// `f⁺ = u²/2` for `u >= 0` (else 0) and `f⁻ = u²/2` for `u < 0` (else 0).
    pub fn burgers() -> Self {
        Self {
            flux: Arc::new(|u| 0.5 * u * u),
            plus: Arc::new(|u| if u >= 0.0 { 0.5 * u * u } else { 0.0 }),
            minus: Arc::new(|u| if u < 0.0 { 0.5 * u * u } else { 0.0 }),
            dplus: Arc::new(|u| u.max(0.0)),
            dminus: Arc::new(|u| u.min(0.0)),
            alpha: 0.0,
            plus_is_zero: false,
            minus_is_zero: false,
        }
    }

    /// Constant-speed advection `f(u) = v·u`; the whole flux goes into the
    /// side matching the sign of `v`.
    pub fn advection(v: f64) -> Self {
        let vp = v.max(0.0);
        let vm = v.min(0.0);
        Self {
            flux: Arc::new(move |u| v * u),
            plus: Arc::new(move |u| vp * u),
            minus: Arc::new(move |u| vm * u),
            dplus: Arc::new(move |_| vp),
            dminus: Arc::new(move |_| vm),
            alpha: v.abs(),
            plus_is_zero: v <= 0.0,
            minus_is_zero: v >= 0.0,
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        (self.flux)(u)
    }

    pub fn f_plus(&self, u: f64) -> f64 {
        (self.plus)(u)
    }

    pub fn f_minus(&self, u: f64) -> f64 {
        (self.minus)(u)
    }

    pub fn df_plus(&self, u: f64) -> f64 {
        (self.dplus)(u)
    }

    pub fn df_minus(&self, u: f64) -> f64 {
        (self.dminus)(u)
    }

    /// `f⁺ ≡ 0`: the forward sweep is an identity and may be skipped.
    pub fn plus_is_zero(&self) -> bool {
        self.plus_is_zero
    }

    /// `f⁻ ≡ 0`: the backward sweep is an identity and may be skipped.
    pub fn minus_is_zero(&self) -> bool {
        self.minus_is_zero
    }
}

/// Outcome of a monotonicity audit over sampled states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub violations: usize,
    /// Largest wrong-signed derivative (0 when clean).
    pub worst: f64,
}

const AUDIT_TOL: f64 = 1e-12;

/// Check `df⁺ >= 0` and `df⁻ <= 0` at each sample.
pub fn audit_monotonicity(s: &ScalarSplitting, samples: &[f64]) -> AuditReport {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for &u in samples {
        let dp = s.df_plus(u);
        if dp < -AUDIT_TOL {
            violations += 1;
            worst = worst.max(-dp);
        }
        let dm = s.df_minus(u);
        if dm > AUDIT_TOL {
            violations += 1;
            worst = worst.max(dm);
        }
    }
    AuditReport { violations, worst }
}

pub type SystemFluxFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type SystemJacFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;

/// Flux splitting for an `m`-component system. Either a componentwise
/// Lax-Friedrichs splitting or, when every characteristic speed is already
/// nonnegative, the trivial one `f⁺ = f`, `f⁻ = 0`.
#[derive(Clone)]
pub struct SystemSplitting {
    pub m: usize,
    pub alpha: f64,
    flux: SystemFluxFn,
    jac: SystemJacFn,
    lax_friedrichs: bool,
}

impl std::fmt::Debug for SystemSplitting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemSplitting")
            .field("m", &self.m)
            .field("alpha", &self.alpha)
            .field("lax_friedrichs", &self.lax_friedrichs)
            .finish()
    }
}

impl SystemSplitting {
    pub fn lax_friedrichs(m: usize, flux: SystemFluxFn, jac: SystemJacFn, alpha: f64) -> Result<Self, FluxError> {
        if !(alpha >= 0.0) {
            return Err(FluxError::NegativeAlpha(alpha));
        }
        Ok(Self { m, alpha, flux, jac, lax_friedrichs: true })
    }

    /// For systems whose Jacobian has only nonnegative eigenvalues.
    pub fn positive(m: usize, flux: SystemFluxFn, jac: SystemJacFn) -> Self {
        Self { m, alpha: 0.0, flux, jac, lax_friedrichs: false }
    }

    pub fn f(&self, u: &[f64]) -> Vec<f64> {
        (self.flux)(u)
    }

    pub fn f_plus(&self, u: &[f64]) -> Vec<f64> {
        let mut v = (self.flux)(u);
        if self.lax_friedrichs {
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi = 0.5 * (*vi + self.alpha * ui);
            }
        }
        v
    }

    pub fn f_minus(&self, u: &[f64]) -> Vec<f64> {
        if !self.lax_friedrichs {
            return vec![0.0; self.m];
        }
        let mut v = (self.flux)(u);
        for (vi, ui) in v.iter_mut().zip(u) {
            *vi = 0.5 * (*vi - self.alpha * ui);
        }
        v
    }

    pub fn jac(&self, u: &[f64]) -> Mat {
        (self.jac)(u)
    }

    /// Jacobian of `f⁺`: `(f' + alpha·I)/2`, or `f'` for the trivial splitting.
    pub fn jac_plus(&self, u: &[f64]) -> Mat {
        let j = (self.jac)(u);
        if self.lax_friedrichs {
            j.add(&Mat::identity(self.m).scale(self.alpha)).scale(0.5)
        } else {
            j
        }
    }

    pub fn jac_minus(&self, u: &[f64]) -> Mat {
        if !self.lax_friedrichs {
            return Mat::zeros(self.m);
        }
        let j = (self.jac)(u);
        j.sub(&Mat::identity(self.m).scale(self.alpha)).scale(0.5)
    }

    pub fn minus_is_zero(&self) -> bool {
        !self.lax_friedrichs
    }

    pub fn is_lax_friedrichs(&self) -> bool {
        self.lax_friedrichs
    }

    /// Characteristic speeds of the split fluxes given the speeds of `f'`:
    /// `(λ ± alpha)/2` for Lax-Friedrichs, `λ` / `0` otherwise.
    pub fn split_speed(&self, lambda: f64, forward: bool) -> f64 {
        if self.lax_friedrichs {
            if forward {
                0.5 * (lambda + self.alpha)
            } else {
                0.5 * (lambda - self.alpha)
            }
        } else if forward {
            lambda
        } else {
            0.0
        }
    }
}

/// Check the eigenvalue signs of `(f' ± alpha·I)/2` at each sampled state.
pub fn audit_monotonicity_system(s: &SystemSplitting, samples: &[Vec<f64>]) -> AuditReport {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for u in samples {
        let eig_p = s
            .jac_plus(u)
            .real_eigenvalues()
            .expect("audit needs real eigenvalues of the split Jacobian");
        for ev in eig_p {
            if ev < -AUDIT_TOL {
                violations += 1;
                worst = worst.max(-ev);
            }
        }
        let eig_m = s
            .jac_minus(u)
            .real_eigenvalues()
            .expect("audit needs real eigenvalues of the split Jacobian");
        for ev in eig_m {
            if ev > AUDIT_TOL {
                violations += 1;
                worst = worst.max(ev);
            }
        }
    }
    AuditReport { violations, worst }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lax_friedrichs_identity_flux() {
        let s = ScalarSplitting::lax_friedrichs(Arc::new(|u| u), Arc::new(|_| 1.0), 1.0).unwrap();
        assert!((s.f_plus(0.5) - 0.5).abs() < 1e-15);
        assert!(s.f_minus(0.5).abs() < 1e-15);
    }

    #[test]
    fn lax_friedrichs_rejects_negative_alpha() {
        let r = ScalarSplitting::lax_friedrichs(Arc::new(|u| u), Arc::new(|_| 1.0), -0.5);
        assert_eq!(r.unwrap_err(), FluxError::NegativeAlpha(-0.5));
    }

    #[test]
    fn split_sums_to_flux() {
        let splits = [
            ScalarSplitting::burgers(),
            ScalarSplitting::advection(-2.0),
            ScalarSplitting::lax_friedrichs(Arc::new(|u: f64| u.sin()), Arc::new(|u: f64| u.cos()), 1.0).unwrap(),
        ];
        for s in &splits {
            for i in -40..=40 {
                let u = i as f64 * 0.25;
                let err = (s.f_plus(u) + s.f_minus(u) - s.f(u)).abs();
                assert!(err <= 1e-12 * (1.0 + s.f(u).abs()), "err = {err:e} at u = {u}");
            }
        }
    }

    #[test]
    fn burgers_split_values() {
        let s = ScalarSplitting::burgers();
        assert_eq!(s.f_plus(2.0), 2.0);
        assert_eq!(s.f_minus(2.0), 0.0);
        assert_eq!(s.f_plus(-2.0), 0.0);
        // (f(-2) - |-2|*(-2)/2) / 2 = (2 + 2) / 2 = 2.
        assert_eq!(s.f_minus(-2.0), 2.0);
        assert_eq!(s.f_plus(0.0), 0.0);
        assert_eq!(s.f_minus(0.0), 0.0);
    }

    #[test]
    fn advection_split_values() {
        let s = ScalarSplitting::advection(1.0);
        assert!((s.f_plus(0.8) - 0.8).abs() < 1e-15);
        assert_eq!(s.f_minus(123.0), 0.0);
        assert!(s.minus_is_zero());
        let s = ScalarSplitting::advection(-2.0);
        assert_eq!(s.f_plus(3.0), 0.0);
        assert_eq!(s.f_minus(3.0), -6.0);
        assert!(s.plus_is_zero());
    }

    #[test]
    fn audit_burgers_clean() {
        let s = ScalarSplitting::burgers();
        let rep = audit_monotonicity(&s, &[-1.0, 0.0, 1.0]);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn audit_flags_undersized_alpha() {
        // f = sin with alpha = 1 is monotone; alpha = 0.5 is not near u = 0.
        let good = ScalarSplitting::lax_friedrichs(Arc::new(|u: f64| u.sin()), Arc::new(|u: f64| u.cos()), 1.0).unwrap();
        let samples: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
        assert_eq!(audit_monotonicity(&good, &samples).violations, 0);
        let bad = ScalarSplitting::lax_friedrichs(Arc::new(|u: f64| u.sin()), Arc::new(|u: f64| u.cos()), 0.5).unwrap();
        let rep = audit_monotonicity(&bad, &samples);
        assert!(rep.violations > 0);
        assert!(rep.worst > 0.1);
    }
}
