//! The test-problem catalog: initial data, exact solutions, splittings,
//! boundary policies and default run parameters.

use std::sync::Arc;

use crate::boundary::BoundaryPolicy;
use crate::flux::{ScalarSplitting, SystemSplitting};
use crate::linalg::Mat;
use crate::system::EigenStructure;

pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ScalarSpaceTimeMap = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type VectorMap = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
pub type VectorSpaceTimeMap = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;
pub type EigenMap = Arc<dyn Fn(&[f64]) -> EigenStructure + Send + Sync>;

/// Resolutions, time-step ratio and final time the problem is usually run at.
#[derive(Debug, Clone)]
pub struct RunDefaults {
    pub cells: Vec<usize>,
    pub tau_over_h: f64,
    pub t_end: f64,
}

#[derive(Clone)]
pub struct ScalarProblem {
    pub name: &'static str,
    pub domain: (f64, f64),
    pub initial: ScalarMap,
    pub exact: Option<ScalarSpaceTimeMap>,
    /// Dirichlet data; defaults to the exact solution when absent.
    pub boundary_value: Option<ScalarSpaceTimeMap>,
    pub splitting: ScalarSplitting,
    pub boundary: BoundaryPolicy,
    pub defaults: RunDefaults,
}

impl ScalarProblem {
    pub fn boundary_values(&self) -> Option<ScalarSpaceTimeMap> {
        self.boundary_value.clone().or_else(|| self.exact.clone())
    }
}

impl std::fmt::Debug for ScalarProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarProblem").field("name", &self.name).finish()
    }
}

#[derive(Clone)]
pub struct SystemProblem {
    pub name: &'static str,
    pub m: usize,
    pub domain: (f64, f64),
    pub initial: VectorMap,
    pub exact: Option<VectorSpaceTimeMap>,
    pub boundary_value: Option<VectorSpaceTimeMap>,
    pub splitting: SystemSplitting,
    /// Analytic eigenstructure of the flux Jacobian `f'(u)`.
    pub eigen: EigenMap,
    pub boundary: BoundaryPolicy,
    pub defaults: RunDefaults,
}

impl SystemProblem {
    pub fn boundary_values(&self) -> Option<VectorSpaceTimeMap> {
        self.boundary_value.clone().or_else(|| self.exact.clone())
    }
}

impl std::fmt::Debug for SystemProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemProblem").field("name", &self.name).field("m", &self.m).finish()
    }
}

#[derive(Debug, Clone)]
pub enum TestProblem {
    Scalar(ScalarProblem),
    System(SystemProblem),
}

impl TestProblem {
    pub fn name(&self) -> &'static str {
        match self {
            TestProblem::Scalar(p) => p.name,
            TestProblem::System(p) => p.name,
        }
    }

    pub fn defaults(&self) -> &RunDefaults {
        match self {
            TestProblem::Scalar(p) => &p.defaults,
            TestProblem::System(p) => &p.defaults,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            TestProblem::Scalar(p) => p.domain,
            TestProblem::System(p) => p.domain,
        }
    }

    pub fn boundary(&self) -> &BoundaryPolicy {
        match self {
            TestProblem::Scalar(p) => &p.boundary,
            TestProblem::System(p) => &p.boundary,
        }
    }
}

pub const CATALOG: [&str; 6] = [
    "balsara",
    "burgers-smooth",
    "burgers-slow-shock",
    "burgers-shock-rarefaction",
    "linear-system",
    "shallow-water",
];

pub fn by_name(name: &str) -> Option<TestProblem> {
    match name {
        "balsara" => Some(TestProblem::Scalar(balsara_advection())),
        "burgers-smooth" => Some(TestProblem::Scalar(burgers_smooth())),
        "burgers-slow-shock" => Some(TestProblem::Scalar(burgers_slow_shock())),
        "burgers-shock-rarefaction" => Some(TestProblem::Scalar(burgers_shock_rarefaction())),
        "linear-system" => Some(TestProblem::System(linear_system())),
        "shallow-water" => Some(TestProblem::System(shallow_water())),
        _ => None,
    }
}

// ---------------------------------------------------------------------
// Linear advection with the Balsara profile
// ---------------------------------------------------------------------

/// Four-segment profile on `[-1, 1]`: smoothed Gaussian, square wave,
/// triangle and smoothed semi-ellipse; zero elsewhere.
pub fn balsara_initial(x: f64) -> f64 {
    let (a, z, delta, alpha) = (0.5, -0.7, 0.005, 10.0);
    let beta = 2f64.ln() / (36.0 * delta * delta);
    let g = |x: f64, c: f64| (-beta * (x - c) * (x - c)).exp();
    let f = |x: f64, c: f64| (1.0 - alpha * alpha * (x - c) * (x - c)).max(0.0).sqrt();
    if (-0.8..=-0.6).contains(&x) {
        (g(x, z - delta) + g(x, z + delta) + 4.0 * g(x, z)) / 6.0
    } else if (-0.4..=-0.2).contains(&x) {
        1.0
    } else if (0.0..=0.2).contains(&x) {
        1.0 - (10.0 * (x - 0.1)).abs()
    } else if (0.4..=0.6).contains(&x) {
        (f(x, a - delta) + f(x, a + delta) + 4.0 * f(x, a)) / 6.0
    } else {
        0.0
    }
}

fn wrap_periodic(x: f64, lo: f64, hi: f64) -> f64 {
    let period = hi - lo;
    let mut y = (x - lo) % period;
    if y < 0.0 {
        y += period;
    }
    y + lo
}

/// Unit-speed advection of the Balsara profile; by default the field is
/// rotated back by 4 cells after each step so every recorded level sits at
/// the initial position.
pub fn balsara_advection() -> ScalarProblem {
    balsara_advection_with_courant(4)
}

/// Same problem with `tau = courant * h` and the matching rotation shift.
pub fn balsara_advection_with_courant(courant: usize) -> ScalarProblem {
    ScalarProblem {
        name: "balsara",
        domain: (-1.0, 1.0),
        initial: Arc::new(balsara_initial),
        exact: Some(Arc::new(|x, t| balsara_initial(wrap_periodic(x - t, -1.0, 1.0)))),
        boundary_value: None,
        splitting: ScalarSplitting::advection(1.0),
        boundary: BoundaryPolicy::periodic_rotate(courant),
        defaults: RunDefaults { cells: vec![500, 1000], tau_over_h: courant as f64, t_end: 2.0 },
    }
}

// ---------------------------------------------------------------------
// Burgers
// ---------------------------------------------------------------------

/// Exact smooth Burgers solution of `u = 1 + sin(2π(x - u t))/8` by a
/// safeguarded Newton iteration (the solution stays smooth on t ∈ [0, 1]
/// at this amplitude).
pub fn burgers_smooth_exact(x: f64, t: f64) -> f64 {
    let g = |u: f64| u - 1.0 - 0.125 * (2.0 * std::f64::consts::PI * (x - u * t)).sin();
    let dg = |u: f64| 1.0 + 0.25 * std::f64::consts::PI * t * (2.0 * std::f64::consts::PI * (x - u * t)).cos();
    let (mut lo, mut hi) = (0.8, 1.2);
    let mut u = 1.0;
    for _ in 0..200 {
        let r = g(u);
        if r.abs() <= 5e-15 {
            return u;
        }
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let next = u - r / dg(u);
        u = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    u
}

pub fn burgers_smooth() -> ScalarProblem {
    ScalarProblem {
        name: "burgers-smooth",
        domain: (0.0, 1.0),
        initial: Arc::new(|x| 1.0 + 0.125 * (2.0 * std::f64::consts::PI * x).sin()),
        exact: Some(Arc::new(burgers_smooth_exact)),
        boundary_value: None,
        splitting: ScalarSplitting::burgers(),
        boundary: BoundaryPolicy::exact_dirichlet(),
        defaults: RunDefaults { cells: vec![40, 80, 160, 320], tau_over_h: 4.0, t_end: 1.0 },
    }
}

/// Riemann data 20 / -18 at x = -0.5; the shock travels at unit speed.
pub fn slow_shock_exact(x: f64, t: f64) -> f64 {
    if x < -0.5 + t {
        20.0
    } else {
        -18.0
    }
}

pub fn burgers_slow_shock() -> ScalarProblem {
    ScalarProblem {
        name: "burgers-slow-shock",
        domain: (-1.0, 1.0),
        initial: Arc::new(|x| slow_shock_exact(x, 0.0)),
        exact: Some(Arc::new(slow_shock_exact)),
        boundary_value: None,
        splitting: ScalarSplitting::burgers(),
        boundary: BoundaryPolicy::exact_dirichlet(),
        defaults: RunDefaults { cells: vec![20, 40], tau_over_h: 0.5, t_end: 1.0 },
    }
}

/// Shock/rarefaction interaction: rarefaction fan catching up with a shock
/// that collapses to a decaying triangular profile at t = 0.5. The shock
/// point itself carries the right state.
pub fn shock_rarefaction_exact(x: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if 0.3 < x && x < 0.6 { 1.0 } else { -0.2 };
    }
    let fan_lo = 0.3 - 0.2 * t;
    if t < 0.5 {
        if x < fan_lo {
            -0.2
        } else if x <= 0.3 + t {
            (x - 0.3) / t
        } else if x < 0.6 + 0.4 * t {
            1.0
        } else {
            -0.2
        }
    } else {
        let shock = fan_lo + 0.6 * (2.0 * t).sqrt();
        if x < fan_lo {
            -0.2
        } else if x < shock {
            (x - 0.3) / t
        } else {
            -0.2
        }
    }
}

pub fn burgers_shock_rarefaction() -> ScalarProblem {
    ScalarProblem {
        name: "burgers-shock-rarefaction",
        domain: (0.0, 1.0),
        initial: Arc::new(|x| shock_rarefaction_exact(x, 0.0)),
        exact: Some(Arc::new(shock_rarefaction_exact)),
        boundary_value: None,
        splitting: ScalarSplitting::burgers(),
        boundary: BoundaryPolicy::exact_dirichlet(),
        defaults: RunDefaults { cells: vec![160, 320, 640, 1280], tau_over_h: 4.0, t_end: 1.0 },
    }
}

// ---------------------------------------------------------------------
// Linear 2x2 system
// ---------------------------------------------------------------------

/// Coupling matrix `A = [[0.55, -0.45], [-0.45, 0.55]]` with eigenpairs
/// `0.1 -> (1, 1)` and `1 -> (1, -1)`.
pub fn linear_system_matrix() -> Mat {
    Mat::from_rows(&[&[0.55, -0.45], &[-0.45, 0.55]])
}

fn linear_system_initial(x: f64) -> Vec<f64> {
    vec![
        if 0.1 < x && x < 0.3 { 0.8 } else { 0.0 },
        if 0.5 < x && x < 0.7 { 0.8 } else { 0.0 },
    ]
}

/// Exact solution from the characteristic decomposition: the variables
/// `w± = (q1 ± q2)/2` advect rigidly at speeds 0.1 and 1.
pub fn linear_system_exact(x: f64, t: f64) -> Vec<f64> {
    let w1 = |x: f64| {
        let q = linear_system_initial(x);
        0.5 * (q[0] + q[1])
    };
    let w2 = |x: f64| {
        let q = linear_system_initial(x);
        0.5 * (q[0] - q[1])
    };
    let a = w1(x - 0.1 * t);
    let b = w2(x - t);
    vec![a + b, a - b]
}

pub fn linear_system() -> SystemProblem {
    let a = linear_system_matrix();
    let a_for_flux = a.clone();
    let a_for_jac = a.clone();
    SystemProblem {
        name: "linear-system",
        m: 2,
        domain: (0.0, 1.0),
        initial: Arc::new(linear_system_initial),
        exact: Some(Arc::new(linear_system_exact)),
        boundary_value: None,
        splitting: SystemSplitting::positive(
            2,
            Arc::new(move |q| a_for_flux.mul_vec(q)),
            Arc::new(move |_| a_for_jac.clone()),
        ),
        eigen: Arc::new(|_| {
            EigenStructure::new(vec![0.1, 1.0], Mat::from_rows(&[&[1.0, 1.0], &[1.0, -1.0]]))
                .expect("constant eigenbasis is regular")
        }),
        boundary: BoundaryPolicy::exact_dirichlet(),
        defaults: RunDefaults { cells: vec![400, 800], tau_over_h: 10.0, t_end: 0.4 },
    }
}

// ---------------------------------------------------------------------
// Shallow water
// ---------------------------------------------------------------------

/// Conservative flux `(hu, hu² + h²/2)` (unit gravity).
pub fn shallow_water_flux(q: &[f64]) -> Vec<f64> {
    let (h, m) = (q[0], q[1]);
    vec![m, m * m / h + 0.5 * h * h]
}

pub fn shallow_water_jacobian(q: &[f64]) -> Mat {
    let (h, m) = (q[0], q[1]);
    let u = m / h;
    Mat::from_rows(&[&[0.0, 1.0], &[h - u * u, 2.0 * u]])
}

/// Speeds `u ± sqrt(h)` with eigenvectors `(1, u ± sqrt(h))`.
pub fn shallow_water_eigen(q: &[f64]) -> EigenStructure {
    let (h, m) = (q[0], q[1]);
    let u = m / h;
    let c = h.sqrt();
    EigenStructure::new(
        vec![u - c, u + c],
        Mat::from_rows(&[&[1.0, 1.0], &[u - c, u + c]]),
    )
    .expect("shallow water eigenbasis is regular for h > 0")
}

pub fn shallow_water() -> SystemProblem {
    shallow_water_with_alpha(1.3)
}

/// Same setup with a custom Lax-Friedrichs `alpha` (used by the splitting
/// audits).
pub fn shallow_water_with_alpha(alpha: f64) -> SystemProblem {
    SystemProblem {
        name: "shallow-water",
        m: 2,
        domain: (0.0, 10.0),
        initial: Arc::new(|x| vec![1.0 + 0.4 * (-5.0 * (x - 5.0) * (x - 5.0)).exp(), 0.0]),
        exact: None,
        // Still water h = 1, u = 0 on the inflow side.
        boundary_value: Some(Arc::new(|_x, _t| vec![1.0, 0.0])),
        splitting: SystemSplitting::lax_friedrichs(
            2,
            Arc::new(|q| shallow_water_flux(q)),
            Arc::new(|q| shallow_water_jacobian(q)),
            alpha,
        )
        .expect("alpha >= 0"),
        eigen: Arc::new(|q| shallow_water_eigen(q)),
        boundary: BoundaryPolicy::Ends {
            left: crate::boundary::EndBc::Dirichlet,
            right: crate::boundary::EndBc::Extrapolate,
        },
        defaults: RunDefaults { cells: vec![400, 800], tau_over_h: 5.0, t_end: 2.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid1D;

    #[test]
    fn balsara_profile_values() {
        assert_eq!(balsara_initial(-0.3), 1.0);
        assert!((balsara_initial(0.1) - 1.0).abs() < 1e-15);
        assert_eq!(balsara_initial(0.9), 0.0);
    }

    #[test]
    fn burgers_smooth_exact_properties() {
        // t = 0 reduces to the initial profile.
        for x in [0.0, 0.13, 0.5, 0.99] {
            let init = 1.0 + 0.125 * (2.0 * std::f64::consts::PI * x).sin();
            assert!((burgers_smooth_exact(x, 0.0) - init).abs() < 1e-13);
        }
        // u = 1 along the characteristic through x = t + 0.5.
        for t in [0.1, 0.4, 0.9] {
            assert!((burgers_smooth_exact(t + 0.5, t) - 1.0).abs() < 1e-13);
        }
        // Amplitude bound and residual of the implicit relation.
        for i in 0..200 {
            let x = i as f64 / 199.0;
            let t = 0.77;
            let u = burgers_smooth_exact(x, t);
            assert!((0.875..=1.125).contains(&u));
            let res = u - 1.0 - 0.125 * (2.0 * std::f64::consts::PI * (x - u * t)).sin();
            assert!(res.abs() <= 1e-13);
        }
    }

    #[test]
    fn slow_shock_exact_values() {
        assert_eq!(slow_shock_exact(-0.6, 0.0), 20.0);
        assert_eq!(slow_shock_exact(0.6, 1.0), -18.0);
        // Shock position at t = 1 is x = 0.5.
        assert_eq!(slow_shock_exact(0.4999, 1.0), 20.0);
        assert_eq!(slow_shock_exact(0.5, 1.0), -18.0);
    }

    #[test]
    fn shock_rarefaction_exact_values() {
        assert!((shock_rarefaction_exact(0.45, 0.25) - 0.6).abs() < 1e-15);
        // Shock sits exactly at 0.6 + 0.4 * 0.25 = 0.7; right state applies.
        assert_eq!(shock_rarefaction_exact(0.7, 0.25), -0.2);
        // Fan endpoint at t = 1.
        let end = 0.3 - 0.2 + 0.6 * 2f64.sqrt();
        assert!((end - 0.9485).abs() < 1e-4);
        assert!(shock_rarefaction_exact(end - 1e-9, 1.0) > 0.6);
        assert_eq!(shock_rarefaction_exact(end, 1.0), -0.2);
    }

    #[test]
    fn exact_matches_initial_everywhere() {
        for name in CATALOG {
            let p = by_name(name).unwrap();
            let grid = Grid1D::new(p.domain().0, p.domain().1, 64).unwrap();
            match &p {
                TestProblem::Scalar(sp) => {
                    if let Some(exact) = &sp.exact {
                        for x in grid.nodes() {
                            assert!(
                                (exact(x, 0.0) - (sp.initial)(x)).abs() <= 1e-12,
                                "{name} at x = {x}"
                            );
                        }
                    }
                }
                TestProblem::System(sp) => {
                    if let Some(exact) = &sp.exact {
                        for x in grid.nodes() {
                            let e = exact(x, 0.0);
                            let i = (sp.initial)(x);
                            for p in 0..sp.m {
                                assert!((e[p] - i[p]).abs() <= 1e-12, "{name} at x = {x}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn linear_system_setup() {
        let p = linear_system();
        let es = (p.eigen)(&[0.0, 0.0]);
        assert!((es.lambdas[0] - 0.1).abs() < 1e-14);
        assert!((es.lambdas[1] - 1.0).abs() < 1e-14);
        let q = (p.initial)(0.2);
        assert_eq!(q, vec![0.8, 0.0]);
        // Eigenvalues of A itself.
        let ev = linear_system_matrix().real_eigenvalues().unwrap();
        assert!((ev[0] - 0.1).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shallow_water_setup() {
        let p = shallow_water();
        let q = (p.initial)(5.0);
        assert!((q[0] - 1.4).abs() < 1e-15);
        assert_eq!(q[1], 0.0);
        let es = shallow_water_eigen(&[1.0, 0.0]);
        assert!((es.lambdas[0] + 1.0).abs() < 1e-14);
        assert!((es.lambdas[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn catalog_lookup() {
        for name in CATALOG {
            assert!(by_name(name).is_some());
        }
        assert!(by_name("nope").is_none());
    }
}
