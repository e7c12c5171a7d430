//! Solution-adaptive flux parameters `(ω, ψ, l)`.
//!
//! `ω ∈ [0, 1]` blends the central and the fully upwinded second-order
//! correction, `ψ = 1 - ω + ω r` is the induced flux-limiter value, and
//! `l ∈ [0, 1]` damps the whole correction. For an effective Courant
//! number `C = max(1, c)` the choices below keep the per-node update a
//! nonnegative convex combination, which is what makes the implicit
//! scheme TVD at any time step.

use crate::config::LimiterKind;

/// One node's flux parameters for one sweep direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterParams {
    pub omega: f64,
    pub psi: f64,
    pub l: f64,
}

impl Default for LimiterParams {
    /// The per-step defaults: `ω = 0`, `ψ = 1`, `l = 1`.
    fn default() -> Self {
        Self { omega: 0.0, psi: 1.0, l: 1.0 }
    }
}

impl LimiterParams {
    /// The chain value `l·ψ` handed to the downwind neighbour.
    pub fn lpsi(&self) -> f64 {
        self.l * self.psi
    }
}

/// Upwind weight as a function of the jump ratio `r`, for effective
/// Courant number `c >= 1`. Lies in `[0, 1]` for every finite `r`.
pub fn omega_of(r: f64, c: f64) -> f64 {
    debug_assert!(c >= 1.0);
    if r >= 2.0 {
        1.0 / (r - 1.0)
    } else if r <= -1.0 / c {
        (1.0 + c) / (c * (1.0 - r))
    } else {
        1.0
    }
}

/// ENO-like alternative: prefer the weight whose stencil has the smaller
/// jump. Meant for small Courant numbers.
pub fn omega_minmod(r: f64) -> f64 {
    if r.abs() <= 1.0 {
        1.0
    } else {
        0.0
    }
}

pub fn omega_for(kind: LimiterKind, r: f64, c: f64) -> f64 {
    match kind {
        LimiterKind::CourantAdaptive => omega_of(r, c),
        LimiterKind::Minmod => omega_minmod(r),
    }
}

/// Flux-limiter value induced by a weight: `ψ = 1 - ω + ω r`.
pub fn psi_of(omega: f64, r: f64) -> f64 {
    1.0 - omega + omega * r
}

/// Damping factor `l = clamp((r/ψ)(2/C + l'ψ'), [0, 1])` where `l'ψ'` is the
/// upwind neighbour's chain value; defaults to 1 when `|ψ| <= eps`.
pub fn l_of(r: f64, psi: f64, c: f64, neighbor_lpsi: f64, eps: f64) -> f64 {
    debug_assert!(c >= 1.0);
    if psi.abs() <= eps {
        return 1.0;
    }
    ((r / psi) * (2.0 / c + neighbor_lpsi)).clamp(0.0, 1.0)
}

/// The chain value `ψ` consistent with the correction actually applied:
/// `(1-ω) + ω·Δup/Δdw` with the downwind jump taken at the *solved* value.
/// Falls back to the default 1 when the downwind jump is gated (in which
/// case the neighbour never reads the chain).
pub fn effective_psi(omega: f64, delta_up: f64, delta_dw_final: f64, eps: f64) -> f64 {
    if delta_dw_final.abs() <= eps {
        1.0
    } else {
        (1.0 - omega) + omega * delta_up / delta_dw_final
    }
}

/// Check the coupled TVD bounds for a node (`cur`, ratio `r`) and its
/// upwind neighbour (`prev`):
/// `-1/C <= l'ψ' <= 2` and `-2 + l'ψ' <= lψ/r <= 2/C + l'ψ'`.
pub fn tvd_inequalities_hold(prev: &LimiterParams, cur: &LimiterParams, r: f64, c: f64) -> bool {
    const SLACK: f64 = 1e-12;
    debug_assert!(c >= 1.0);
    debug_assert!(r != 0.0);
    let lpsi_prev = prev.lpsi();
    if lpsi_prev < -1.0 / c - SLACK || lpsi_prev > 2.0 + SLACK {
        return false;
    }
    let ratio = cur.lpsi() / r;
    ratio >= -2.0 + lpsi_prev - SLACK && ratio <= 2.0 / c + lpsi_prev + SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn omega_examples() {
        assert!((omega_of(3.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(omega_of(0.5, 1.0), 1.0);
        let w = omega_of(-2.0, 2.0);
        assert!((w - 0.5).abs() < 1e-15);
        let psi = psi_of(w, -2.0);
        assert!((psi - (-0.5)).abs() < 1e-15); // = -1/C
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_of(0.0, 123.0), 1.0);
        assert_eq!(psi_of(1.0, -0.7), -0.7);
        let w = omega_of(3.0, 1.0);
        assert!((psi_of(w, 3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn minmod_weight_and_cap() {
        // omega: 1 inside |r| <= 1, 0 outside; induced psi: r inside, 1 outside.
        for r in [-2.0, -1.0, -0.4, 0.0, 0.9, 1.0, 3.7] {
            let w = omega_minmod(r);
            assert_eq!(w, if r.abs() <= 1.0 { 1.0 } else { 0.0 });
            let psi = psi_of(w, r);
            let expect = if r.abs() <= 1.0 { r } else { 1.0 };
            assert!((psi - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn l_examples() {
        assert!((l_of(1.0, 1.0, 2.0, 0.0, 1e-12) - 1.0).abs() < 1e-15);
        assert!((l_of(4.0, 2.0, 10.0, -0.1, 1e-12) - 0.2).abs() < 1e-14);
        assert_eq!(l_of(0.7, 0.0, 2.0, 0.5, 1e-12), 1.0);
    }

    #[test]
    fn psi_caps_match_c_equals_one_limiter() {
        // At C = 1 the map r -> psi caps at 2 (r >= 2) and -1 (r <= -1).
        for r in [-5.0, -1.0, -0.3, 0.0, 0.9, 1.999, 2.0, 7.0] {
            let psi = psi_of(omega_of(r, 1.0), r);
            let expect = if r >= 2.0 {
                2.0
            } else if r <= -1.0 {
                -1.0
            } else {
                r
            };
            assert!((psi - expect).abs() < 1e-12, "r = {r}: psi = {psi}");
        }
    }

    #[test]
    fn omega_in_unit_interval_and_psi_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let r: f64 = rng.gen_range(-1e3..1e3);
            let c: f64 = rng.gen_range(1.0..200.0);
            let w = omega_of(r, c);
            assert!((0.0..=1.0).contains(&w), "omega({r}, {c}) = {w}");
            let psi = psi_of(w, r);
            assert!(
                psi >= -1.0 / c - 1e-12 && psi <= 2.0 + 1e-12,
                "psi({r}, {c}) = {psi}"
            );
            // Branch selection for nonnegative r does not depend on C.
            if (0.0..2.0).contains(&r) {
                assert_eq!(w, 1.0);
                assert!((psi - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composition_satisfies_tvd_inequalities() {
        // Draw a random upwind neighbour produced by the same composition,
        // then check the pair.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100_000 {
            let c: f64 = rng.gen_range(1.0..150.0);
            let compose = |r: f64, chain: f64| {
                let omega = omega_of(r, c);
                let psi = psi_of(omega, r);
                let l = l_of(r, psi, c, chain, 1e-300);
                LimiterParams { omega, psi, l }
            };
            let r_prev = nonzero(&mut rng);
            let prev = compose(r_prev, 1.0);
            let r = nonzero(&mut rng);
            let cur = compose(r, prev.lpsi());
            assert!(
                tvd_inequalities_hold(&prev, &cur, r, c),
                "violated at r = {r}, c = {c}, prev = {prev:?}, cur = {cur:?}"
            );
        }
    }

    fn nonzero(rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let r: f64 = rng.gen_range(-50.0..50.0);
            if r.abs() > 1e-6 {
                return r;
            }
        }
    }

    #[test]
    fn tvd_inequalities_reject_oversized_correction() {
        let prev = LimiterParams { omega: 0.0, psi: 0.0, l: 1.0 }; // l'psi' = 0
        let cur = LimiterParams { omega: 1.0, psi: 3.0, l: 1.0 }; // l*psi = 3
        assert!(!tvd_inequalities_hold(&prev, &cur, 1.0, 1.0));
        let defaults = LimiterParams::default();
        assert!(tvd_inequalities_hold(&defaults, &defaults, 1.0, 1.0));
    }
}
