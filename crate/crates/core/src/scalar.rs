//! Scalar time stepper: two-sweep fractional step with fast sweeping.
//!
//! One time step runs a forward sweep for `f⁺` (producing the intermediate
//! level `u^{n+1/2}`) and a backward sweep for `f⁻` (producing `u^{n+1}`).
//! Within a sweep, nodes are solved in the upwind order, so every node
//! carries one scalar algebraic equation in its own unknown; the face flux
//! assembled at a node is reused verbatim by its downwind neighbour, which
//! makes the update conservative by construction.

use thiserror::Error;

use crate::boundary::{rotate_periodic, BoundaryError, BoundaryPolicy, EndBc};
use crate::config::{Scheme, SolverConfig};
use crate::field::{mass, total_variation, ScalarField};
use crate::flux::ScalarSplitting;
use crate::limiter::{effective_psi, l_of, omega_for, psi_of, LimiterParams};
use crate::mesh::{CourantBounds, Grid1D, TimeStepping};
use crate::problems::ScalarProblem;

#[derive(Debug, Error, PartialEq)]
pub enum NodeError {
    #[error("no sign-changing bracket after {doublings} doublings")]
    NoBracket { doublings: usize },
    #[error("no convergence after {iters} iterations (|residual| = {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("singular Jacobian in system solve")]
    SingularJacobian,
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("node {node}: {source}")]
    Node {
        node: usize,
        #[source]
        source: NodeError,
    },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("step {step} (t = {t}): {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: SweepError,
    },
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
}

/// Solve `u + coef * g(u) = rhs` for a nondecreasing `g` and `coef >= 0`,
/// so the left side is strictly increasing in `u`. Newton from `guess`
/// with a bisection safeguard on a bracket grown geometrically around the
/// guess.
pub fn solve_node_scalar(
    coef: f64,
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    rhs: f64,
    guess: f64,
    cfg: &SolverConfig,
) -> Result<f64, NodeError> {
    debug_assert!(coef >= 0.0);
    let phi = |u: f64| u + coef * g(u) - rhs;
    let tol = cfg.root_abs_tol;

    let r0 = phi(guess);
    if r0.abs() <= tol {
        return Ok(guess);
    }

    // Bracket the root; phi is increasing, so grow towards the sign change.
    let mut width = 0.5 * guess.abs().max(1.0);
    let (mut lo, mut hi);
    if r0 > 0.0 {
        hi = guess;
        lo = guess - width;
        let mut k = 0;
        while phi(lo) > 0.0 {
            k += 1;
            if k > 60 {
                return Err(NodeError::NoBracket { doublings: k - 1 });
            }
            width *= 2.0;
            lo = guess - width;
        }
    } else {
        lo = guess;
        hi = guess + width;
        let mut k = 0;
        while phi(hi) < 0.0 {
            k += 1;
            if k > 60 {
                return Err(NodeError::NoBracket { doublings: k - 1 });
            }
            width *= 2.0;
            hi = guess + width;
        }
    }

    let mut u = guess;
    let mut r = r0;
    for _ in 0..cfg.root_max_iters {
        let slope = 1.0 + coef * dg(u);
        let newton = u - r / slope;
        u = if slope.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        r = phi(u);
        if r.abs() <= tol {
            return Ok(u);
        }
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
    }
    Err(NodeError::NoConvergence { iters: cfg.root_max_iters, residual: r.abs() })
}

/// Local characteristic speed of `f⁺` between two states: the divided
/// difference, or `df⁺` when the states coincide. The caller scales by
/// `tau/h` and floors at 1.
pub fn local_courant(u_new_k: f64, u_old: f64, s: &ScalarSplitting) -> f64 {
    if u_new_k != u_old {
        (s.f_plus(u_new_k) - s.f_plus(u_old)) / (u_new_k - u_old)
    } else {
        s.df_plus(u_new_k)
    }
}

fn local_speed_minus(u_new_k: f64, u_old: f64, s: &ScalarSplitting) -> f64 {
    if u_new_k != u_old {
        (s.f_minus(u_new_k) - s.f_minus(u_old)) / (u_new_k - u_old)
    } else {
        s.df_minus(u_new_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Solved node range plus the new-level ghost values the fixed-omega
/// boundary flux may need when the range starts right at the boundary.
#[derive(Debug, Clone, Copy)]
pub struct SweepBc {
    pub first: usize,
    pub last: usize,
    pub ghost_left: Option<f64>,
    pub ghost_right: Option<f64>,
}

impl SweepBc {
    pub fn new(first: usize, last: usize) -> Self {
        Self { first, last, ghost_left: None, ghost_right: None }
    }
}

/// Per-step buffers of one simulation.
#[derive(Debug, Clone)]
pub struct SweepWorkspace {
    /// Level `n`.
    pub u_old: Vec<f64>,
    /// Level `n+1/2` (written by the forward sweep).
    pub u_half: Vec<f64>,
    /// Level `n+1` (written by the backward sweep).
    pub u_new: Vec<f64>,
    /// `F⁺_{i+1/2}` at index `i`.
    pub flux_plus: Vec<f64>,
    /// `F⁻_{i-1/2}` at index `i`.
    pub flux_minus: Vec<f64>,
    /// Realized flux parameters per node (effective `ψ`), one set per sweep.
    pub lim_forward: Vec<LimiterParams>,
    pub lim_backward: Vec<LimiterParams>,
    /// Corrector solves spent per node, maximum over both sweeps.
    pub corrector_iters: Vec<usize>,
}

impl SweepWorkspace {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.n_nodes();
        Self {
            u_old: vec![0.0; n],
            u_half: vec![0.0; n],
            u_new: vec![0.0; n],
            flux_plus: vec![0.0; n],
            flux_minus: vec![0.0; n],
            lim_forward: vec![LimiterParams::default(); n],
            lim_backward: vec![LimiterParams::default(); n],
            corrector_iters: vec![0; n],
        }
    }

    /// Reset for a new step starting from `u`.
    pub fn begin_step(&mut self, u: &[f64]) {
        self.u_old.copy_from_slice(u);
        self.u_half.copy_from_slice(u);
        self.u_new.copy_from_slice(u);
        self.flux_plus.fill(0.0);
        self.flux_minus.fill(0.0);
        self.lim_forward.fill(LimiterParams::default());
        self.lim_backward.fill(LimiterParams::default());
        self.corrector_iters.fill(0);
    }
}

#[derive(Debug, Clone, Copy)]
enum FluxForm {
    FirstOrder,
    FixedOmega(f64),
    HighRes,
}

/// One fast sweep; fills the direction's new level and face fluxes over
/// `bc.first..=bc.last`, reading finalized neighbour values as it goes.
fn sweep_scalar(
    dir: Direction,
    form: FluxForm,
    ws: &mut SweepWorkspace,
    s: &ScalarSplitting,
    grid: &Grid1D,
    tau: f64,
    cb: &CourantBounds,
    cfg: &SolverConfig,
    bc: &SweepBc,
) -> Result<(), SweepError> {
    let lam = tau / grid.spacing();
    let forward = dir == Direction::Forward;
    let sgn = if forward { 1.0 } else { -1.0 };
    let fsplit = |u: f64| if forward { s.f_plus(u) } else { s.f_minus(u) };
    let g = |u: f64| sgn * fsplit(u);
    let dg = |u: f64| sgn * if forward { s.df_plus(u) } else { s.df_minus(u) };

    // Old-level split fluxes, the per-sweep zero gate and the Courant bound.
    let fold: Vec<f64> = ws.u_old.iter().map(|&u| fsplit(u)).collect();
    let scale = fold.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = cfg.epsilon_scale * scale.max(1.0);
    let c_global = if forward { cb.effective_plus() } else { cb.effective_minus() };

    // Old-level flux with linearly extrapolated ghost states outside the grid.
    let n_nodes = ws.u_old.len();
    let fold_at = |j: isize| -> f64 {
        if j < 0 {
            fsplit(2.0 * ws.u_old[0] - ws.u_old[1])
        } else if j as usize >= n_nodes {
            fsplit(2.0 * ws.u_old[n_nodes - 1] - ws.u_old[n_nodes - 2])
        } else {
            fold[j as usize]
        }
    };

    // Boundary-face flux entering the first solved node.
    let (first, last) = (bc.first, bc.last);
    let upwind_bnd = if forward { first - 1 } else { last + 1 };
    let new_level: &[f64] = if forward { &ws.u_half } else { &ws.u_new };
    let ub = new_level[upwind_bnd];
    let seed = match form {
        FluxForm::FirstOrder => fsplit(ub),
        // The interior flux form evaluated at the boundary node, with the
        // second upwind value taken from a ghost when the range touches the
        // domain edge.
        FluxForm::FixedOmega(w) => {
            let ghost_new = if forward {
                if first >= 2 {
                    new_level[first - 2]
                } else {
                    bc.ghost_left
                        .unwrap_or(2.0 * ws.u_old[first - 1] - ws.u_old[first])
                }
            } else if last + 2 < new_level.len() {
                new_level[last + 2]
            } else {
                bc.ghost_right
                    .unwrap_or(2.0 * ws.u_old[last + 1] - ws.u_old[last])
            };
            let (fb, f_dw, f_here) = if forward {
                (fsplit(ub), fold[first], fold[first - 1])
            } else {
                (fsplit(ub), fold[last], fold[last + 1])
            };
            fb - 0.5 * ((1.0 - w) * (fb - f_dw) + w * (fsplit(ghost_new) - f_here))
        }
        // Central weight at the boundary face: second-order and free of
        // ghost values; its chain value is the default 1.
        FluxForm::HighRes => {
            let f_dw = if forward { fold[first] } else { fold[last] };
            0.5 * (fsplit(ub) + f_dw)
        }
    };
    if forward {
        ws.flux_plus[first - 1] = seed;
    } else {
        ws.flux_minus[last + 1] = seed;
    }

    let mut face = seed;
    let mut chain = 1.0;
    let nodes: Box<dyn Iterator<Item = usize>> = if forward {
        Box::new(first..=last)
    } else {
        Box::new((first..=last).rev())
    };

    for i in nodes {
        let base = if forward { ws.u_old[i] } else { ws.u_half[i] };
        let upwind_new = if forward { ws.u_half[i - 1] } else { ws.u_new[i + 1] };
        let fold_dw = fold_at(if forward { i as isize + 1 } else { i as isize - 1 });
        let dup = fsplit(upwind_new) - fold[i];

        let mut omega;
        let mut l = 1.0;
        let mut a;
        let mut b;
        let mut v;
        let mut iters = 0usize;

        let solve = |a: f64, b: f64, guess: f64| -> Result<f64, SweepError> {
            let rhs = base + sgn * lam * (face - b);
            solve_node_scalar(lam * a, g, dg, rhs, guess, cfg)
                .map_err(|source| SweepError::Node { node: i, source })
        };

        match form {
            FluxForm::FirstOrder => {
                omega = 1.0;
                a = 1.0;
                b = 0.0;
                v = solve(a, b, base)?;
            }
            FluxForm::FixedOmega(w) => {
                omega = w;
                a = 1.0 - (1.0 - w) / 2.0;
                b = 0.5 * (1.0 - w) * fold_dw - 0.5 * w * dup;
                v = solve(a, b, base)?;
            }
            FluxForm::HighRes => {
                if dup.abs() <= eps {
                    // Flat upwind data: fully upwinded weight, no predictor.
                    omega = 1.0;
                    a = 1.0;
                    b = -0.5 * dup;
                    v = solve(a, b, base)?;
                } else {
                    // Predictor with the central weight (omega = 0, l = 1).
                    omega = 0.0;
                    a = 0.5;
                    b = 0.5 * fold_dw;
                    v = solve(a, b, base)?;
                    for _ in 0..cfg.max_corrector_iters {
                        iters += 1;
                        let ddw = fsplit(v) - fold_dw;
                        if ddw.abs() > eps {
                            let r = dup / ddw;
                            let c = if cfg.use_local_courant {
                                let speed = if forward {
                                    local_courant(v, ws.u_old[i], s)
                                } else {
                                    -local_speed_minus(v, ws.u_old[i], s)
                                };
                                (lam * speed).max(1.0)
                            } else {
                                c_global
                            };
                            omega = omega_for(cfg.limiter, r, c);
                            let psi = psi_of(omega, r);
                            if psi.abs() > eps {
                                l = l_of(r, psi, c, chain, eps);
                            }
                        }
                        a = 1.0 - l * (1.0 - omega) / 2.0;
                        b = 0.5 * l * (1.0 - omega) * fold_dw - 0.5 * l * omega * dup;
                        let vn = solve(a, b, v)?;
                        let done = (vn - v).abs() < cfg.corrector_stop_tol;
                        v = vn;
                        if done {
                            break;
                        }
                    }
                }
            }
        }

        // Face flux with the parameters the node was solved with; the
        // downwind neighbour reads exactly this value.
        face = a * fsplit(v) + b;
        let psi_eff = effective_psi(omega, dup, fsplit(v) - fold_dw, eps);
        chain = l * psi_eff;

        if forward {
            ws.u_half[i] = v;
            ws.flux_plus[i] = face;
            ws.lim_forward[i] = LimiterParams { omega, psi: psi_eff, l };
        } else {
            ws.u_new[i] = v;
            ws.flux_minus[i] = face;
            ws.lim_backward[i] = LimiterParams { omega, psi: psi_eff, l };
        }
        ws.corrector_iters[i] = ws.corrector_iters[i].max(iters);
    }
    Ok(())
}

/// Forward sweep with first-order upwind fluxes: for `i` in sweep order,
/// `u_i^{n+1/2} + (tau/h) f⁺(u_i^{n+1/2}) = u_i^n + (tau/h) F⁺_{i-1/2}`.
pub fn first_order_sweep_forward(
    ws: &mut SweepWorkspace,
    s: &ScalarSplitting,
    grid: &Grid1D,
    tau: f64,
    bc: &SweepBc,
    cfg: &SolverConfig,
) -> Result<(), SweepError> {
    sweep_scalar(Direction::Forward, FluxForm::FirstOrder, ws, s, grid, tau, &CourantBounds::default(), cfg, bc)
}

/// Backward mirror of [`first_order_sweep_forward`], stepping `u^{n+1/2}`
/// to `u^{n+1}` with `f⁻`.
pub fn first_order_sweep_backward(
    ws: &mut SweepWorkspace,
    s: &ScalarSplitting,
    grid: &Grid1D,
    tau: f64,
    bc: &SweepBc,
    cfg: &SolverConfig,
) -> Result<(), SweepError> {
    sweep_scalar(Direction::Backward, FluxForm::FirstOrder, ws, s, grid, tau, &CourantBounds::default(), cfg, bc)
}

/// Full two-sweep step with the compact second-order flux at a constant
/// weight `omega` and no damping.
pub fn fixed_omega_step(
    ws: &mut SweepWorkspace,
    s: &ScalarSplitting,
    grid: &Grid1D,
    tau: f64,
    omega: f64,
    bc: &SweepBc,
    cfg: &SolverConfig,
) -> Result<(), SweepError> {
    let cb = CourantBounds::default();
    if !s.plus_is_zero() {
        sweep_scalar(Direction::Forward, FluxForm::FixedOmega(omega), ws, s, grid, tau, &cb, cfg, bc)?;
    }
    let half = ws.u_half.clone();
    ws.u_new.copy_from_slice(&half);
    if !s.minus_is_zero() {
        sweep_scalar(Direction::Backward, FluxForm::FixedOmega(omega), ws, s, grid, tau, &cb, cfg, bc)?;
    }
    Ok(())
}

/// One high-resolution sweep: per node, gate on the upwind flux jump,
/// predict with the central weight, derive `(ω, l)` from the jump ratio
/// and re-solve with them frozen (repeating up to
/// `cfg.max_corrector_iters` times).
pub fn hires_sweep(
    dir: Direction,
    ws: &mut SweepWorkspace,
    s: &ScalarSplitting,
    grid: &Grid1D,
    tau: f64,
    cb: &CourantBounds,
    cfg: &SolverConfig,
    bc: &SweepBc,
) -> Result<(), SweepError> {
    sweep_scalar(dir, FluxForm::HighRes, ws, s, grid, tau, cb, cfg, bc)
}

/// Per-step monitors recorded by the drivers.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub tv: f64,
    pub min: f64,
    pub max: f64,
    pub mass: f64,
    /// Solved-range conservation defect, relative to `max(1, h Σ|u^n|)`.
    pub mass_residual: f64,
    pub corrector_iters_max: usize,
    pub courant: CourantBounds,
}

#[derive(Debug, Clone)]
pub struct ScalarTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<ScalarField>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl ScalarTrajectory {
    pub fn final_field(&self) -> &ScalarField {
        self.fields.last().expect("trajectory holds the initial field")
    }
}

pub(crate) fn courant_bounds_scalar(s: &ScalarSplitting, u: &[f64], lam: f64) -> CourantBounds {
    let mut dp = 0.0f64;
    let mut dm = 0.0f64;
    for &v in u {
        dp = dp.max(s.df_plus(v));
        dm = dm.max(-s.df_minus(v));
    }
    CourantBounds { c_plus: lam * dp, c_minus: lam * dm }
}

/// Telescoped conservation defect of both partial steps over the solved
/// range, using the stored face fluxes.
fn conservation_residual(ws: &SweepWorkspace, bc: &SweepBc, h: f64, tau: f64) -> f64 {
    let (first, last) = (bc.first, bc.last);
    let mut fwd = 0.0;
    let mut bwd = 0.0;
    for i in first..=last {
        fwd += ws.u_half[i] - ws.u_old[i];
        bwd += ws.u_new[i] - ws.u_half[i];
    }
    let fwd = h * fwd + tau * (ws.flux_plus[last] - ws.flux_plus[first - 1]);
    let bwd = h * bwd - tau * (ws.flux_minus[first] - ws.flux_minus[last + 1]);
    let scale = ws.u_old.iter().map(|v| v.abs()).sum::<f64>() * h;
    (fwd + bwd).abs() / scale.max(1.0)
}

/// Run `steps` time steps of the configured scheme, recording every level
/// and the per-step monitors.
pub fn run_scalar(
    problem: &ScalarProblem,
    grid: &Grid1D,
    ts: &TimeStepping,
    cfg: &SolverConfig,
    bc: &BoundaryPolicy,
) -> Result<ScalarTrajectory, RunError> {
    cfg.validate()?;
    bc.validate(grid.cells())?;
    let bv = problem.boundary_values();
    if bc.needs_dirichlet_values() && bv.is_none() {
        return Err(BoundaryError::MissingBoundaryValues.into());
    }

    let s = &problem.splitting;
    let cells = grid.cells();
    let first = bc.left_width();
    let last = cells - bc.right_width();
    let lam = ts.tau() / grid.spacing();

    let mut field = ScalarField::from_fn(grid, |x| (problem.initial)(x));
    let mut traj = ScalarTrajectory {
        times: vec![0.0],
        fields: vec![field.clone()],
        diagnostics: Vec::with_capacity(ts.steps()),
    };
    let mut ws = SweepWorkspace::new(grid);

    for step in 0..ts.steps() {
        let t1 = ts.t(step + 1);
        ws.begin_step(&field.values);

        // Install prescribed new-level values and the fixed-omega ghosts.
        let mut sweep_bc = SweepBc::new(first, last);
        match bc {
            BoundaryPolicy::Ends { left, right } => {
                match left {
                    EndBc::Freeze => {} // begin_step already copied level n
                    EndBc::Dirichlet => {
                        let bv = bv.as_ref().unwrap();
                        let v = bv(grid.x_lo(), t1);
                        ws.u_half[0] = v;
                        ws.u_new[0] = v;
                        sweep_bc.ghost_left = Some(bv(grid.node_signed(-1), t1));
                    }
                    EndBc::Extrapolate => {
                        sweep_bc.ghost_left = Some(2.0 * ws.u_old[0] - ws.u_old[1]);
                    }
                }
                match right {
                    EndBc::Freeze => {}
                    EndBc::Dirichlet => {
                        let bv = bv.as_ref().unwrap();
                        let v = bv(grid.x_hi(), t1);
                        ws.u_half[cells] = v;
                        ws.u_new[cells] = v;
                        sweep_bc.ghost_right = Some(bv(grid.node_signed(cells as isize + 1), t1));
                    }
                    EndBc::Extrapolate => {
                        sweep_bc.ghost_right = Some(2.0 * ws.u_old[cells] - ws.u_old[cells - 1]);
                    }
                }
            }
            BoundaryPolicy::PeriodicRotate { .. } => {}
        }

        let cb = courant_bounds_scalar(s, &ws.u_old, lam);
        let run_sweeps = |ws: &mut SweepWorkspace| -> Result<(), SweepError> {
            match cfg.scheme {
                Scheme::FirstOrder => {
                    if !s.plus_is_zero() {
                        first_order_sweep_forward(ws, s, grid, ts.tau(), &sweep_bc, cfg)?;
                    }
                    finish_forward(ws, bc, cells);
                    if !s.minus_is_zero() {
                        first_order_sweep_backward(ws, s, grid, ts.tau(), &sweep_bc, cfg)?;
                    }
                }
                Scheme::FixedOmega(w) => {
                    if !s.plus_is_zero() {
                        sweep_scalar(Direction::Forward, FluxForm::FixedOmega(w), ws, s, grid, ts.tau(), &cb, cfg, &sweep_bc)?;
                    }
                    finish_forward(ws, bc, cells);
                    if !s.minus_is_zero() {
                        sweep_scalar(Direction::Backward, FluxForm::FixedOmega(w), ws, s, grid, ts.tau(), &cb, cfg, &sweep_bc)?;
                    }
                }
                Scheme::HighResolution => {
                    if !s.plus_is_zero() {
                        hires_sweep(Direction::Forward, ws, s, grid, ts.tau(), &cb, cfg, &sweep_bc)?;
                    }
                    finish_forward(ws, bc, cells);
                    if !s.minus_is_zero() {
                        hires_sweep(Direction::Backward, ws, s, grid, ts.tau(), &cb, cfg, &sweep_bc)?;
                    }
                }
            }
            Ok(())
        };
        run_sweeps(&mut ws).map_err(|source| RunError::Step { step, t: t1, source })?;

        // Outflow extrapolation of the final level.
        if let BoundaryPolicy::Ends { left, right } = bc {
            if *left == EndBc::Extrapolate {
                ws.u_new[0] = ws.u_new[1];
            }
            if *right == EndBc::Extrapolate {
                ws.u_new[cells] = ws.u_new[cells - 1];
            }
        }

        let mass_residual = conservation_residual(&ws, &sweep_bc, grid.spacing(), ts.tau());

        if let BoundaryPolicy::PeriodicRotate { cells: shift } = bc {
            rotate_periodic(&mut ws.u_new, *shift);
        }

        field.values.copy_from_slice(&ws.u_new);
        let min = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        traj.diagnostics.push(StepDiagnostics {
            tv: total_variation(&field.values),
            min,
            max,
            mass: mass(&field.values, grid.spacing()),
            mass_residual,
            corrector_iters_max: ws.corrector_iters.iter().copied().max().unwrap_or(0),
            courant: cb,
        });
        traj.times.push(t1);
        traj.fields.push(field.clone());
    }
    Ok(traj)
}

/// Copy the half level into the new level between the sweeps, and apply
/// half-level outflow extrapolation so the backward seed sees a value.
fn finish_forward(ws: &mut SweepWorkspace, bc: &BoundaryPolicy, cells: usize) {
    if let BoundaryPolicy::Ends { left, right } = bc {
        if *left == EndBc::Extrapolate {
            ws.u_half[0] = ws.u_half[1];
        }
        if *right == EndBc::Extrapolate {
            ws.u_half[cells] = ws.u_half[cells - 1];
        }
    }
    let half = ws.u_half.clone();
    ws.u_new.copy_from_slice(&half);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    fn cfg_fo() -> SolverConfig {
        SolverConfig::first_order()
    }

    #[test]
    fn node_solver_examples() {
        let cfg = cfg_fo();
        // Linear: u (1 + 4) = 4.
        let u = solve_node_scalar(4.0, |u| u, |_| 1.0, 4.0, 0.0, &cfg).unwrap();
        assert!((u - 0.8).abs() < 1e-12);
        // Explicit case.
        let u = solve_node_scalar(0.0, |u| u * u, |u| 2.0 * u, 7.0, 1.0, &cfg).unwrap();
        assert!((u - 7.0).abs() < 1e-12);
        // Burgers f⁺ with rhs 1.5: root of u²/2 + u = 1.5, i.e. u = 1.
        let s = ScalarSplitting::burgers();
        let u = solve_node_scalar(1.0, |u| s.f_plus(u), |u| s.df_plus(u), 1.5, 0.3, &cfg).unwrap();
        assert!((u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn node_solver_reports_no_bracket_for_bad_splitting() {
        // g decreasing with slope < -1 makes u + g(u) decreasing: no
        // bracket on the wrong side ever changes sign the way we search.
        let cfg = cfg_fo();
        let r = solve_node_scalar(2.0, |u| -u, |_| -1.0, 1.0, 0.0, &cfg);
        assert!(matches!(r, Err(NodeError::NoBracket { .. })));
    }

    #[test]
    fn forward_sweep_matches_hand_solve() {
        // Advection v = 1, C = 4, u^n = [1, 0, 0, ...], node 0 pinned at 1:
        // u_1 = (0 + 4*1) / 5 = 0.8.
        let grid = Grid1D::new(0.0, 1.0, 8).unwrap();
        let s = ScalarSplitting::advection(1.0);
        let mut ws = SweepWorkspace::new(&grid);
        let mut u0 = vec![0.0; 9];
        u0[0] = 1.0;
        ws.begin_step(&u0);
        let bc = SweepBc::new(1, 8);
        first_order_sweep_forward(&mut ws, &s, &grid, 4.0 * grid.spacing(), &bc, &cfg_fo()).unwrap();
        assert!((ws.u_half[1] - 0.8).abs() < 1e-12);
        assert!((ws.u_half[2] - 0.64).abs() < 1e-12);
    }

    #[test]
    fn backward_sweep_mirrors_forward() {
        // Mirror: v = -1, C = 4, u^n = [..., 0, 0, 1], node I pinned.
        let grid = Grid1D::new(0.0, 1.0, 8).unwrap();
        let s = ScalarSplitting::advection(-1.0);
        let mut ws = SweepWorkspace::new(&grid);
        let mut u0 = vec![0.0; 9];
        u0[8] = 1.0;
        ws.begin_step(&u0);
        let bc = SweepBc::new(0, 7);
        first_order_sweep_backward(&mut ws, &s, &grid, 4.0 * grid.spacing(), &bc, &cfg_fo()).unwrap();
        assert!((ws.u_new[7] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn constant_state_is_preserved() {
        let grid = Grid1D::new(0.0, 1.0, 16).unwrap();
        let splits = [ScalarSplitting::burgers(), ScalarSplitting::advection(1.0)];
        let schemes = [Scheme::FirstOrder, Scheme::FixedOmega(0.5), Scheme::HighResolution];
        for s in &splits {
            for scheme in schemes {
                let mut cfg = SolverConfig::default();
                cfg.scheme = scheme;
                let mut ws = SweepWorkspace::new(&grid);
                ws.begin_step(&[0.7; 17]);
                let bc = SweepBc::new(1, 15);
                let cb = CourantBounds { c_plus: 4.0, c_minus: 4.0 };
                let tau = 4.0 * grid.spacing();
                match scheme {
                    Scheme::FirstOrder => {
                        first_order_sweep_forward(&mut ws, s, &grid, tau, &bc, &cfg).unwrap();
                    }
                    Scheme::FixedOmega(w) => {
                        sweep_scalar(Direction::Forward, FluxForm::FixedOmega(w), &mut ws, s, &grid, tau, &cb, &cfg, &bc).unwrap();
                    }
                    Scheme::HighResolution => {
                        hires_sweep(Direction::Forward, &mut ws, s, &grid, tau, &cb, &cfg, &bc).unwrap();
                    }
                }
                for i in 1..=15 {
                    assert!(
                        (ws.u_half[i] - 0.7).abs() <= 10.0 * cfg.root_abs_tol,
                        "{scheme:?} drifted at node {i}: {}",
                        ws.u_half[i]
                    );
                }
            }
        }
    }

    #[test]
    fn forward_sweep_equals_one_step_scheme_for_positive_burgers() {
        // For data with u >= 0, f⁻ = 0 and the two-sweep step must equal
        // the one-step conservative scheme with first-order fluxes, solved
        // here independently by plain bisection.
        let grid = Grid1D::new(0.0, 1.0, 10).unwrap();
        let s = ScalarSplitting::burgers();
        let u0: Vec<f64> = grid.nodes().map(|x| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).sin()).collect();
        let tau = 2.0 * grid.spacing();
        let lam = 2.0;

        let mut ws = SweepWorkspace::new(&grid);
        ws.begin_step(&u0);
        let bc = SweepBc::new(1, 10);
        first_order_sweep_forward(&mut ws, &s, &grid, tau, &bc, &cfg_fo()).unwrap();

        // Independent oracle: u + lam f⁺(u) = u^n + lam f⁺(u_{i-1}^{n+1}).
        let mut oracle = u0.clone();
        for i in 1..=10 {
            let rhs = u0[i] + lam * s.f_plus(oracle[i - 1]);
            let (mut lo, mut hi) = (-10.0, 10.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid + lam * s.f_plus(mid) - rhs > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            oracle[i] = 0.5 * (lo + hi);
        }
        for i in 1..=10 {
            assert!((ws.u_half[i] - oracle[i]).abs() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn first_order_advection_matches_closed_form() {
        // u_i = (u_i^n + C u_{i-1}^{n+1}) / (1 + C), brute forced on a
        // small grid.
        let grid = Grid1D::new(0.0, 1.0, 32).unwrap();
        let s = ScalarSplitting::advection(1.0);
        let u0: Vec<f64> = grid.nodes().map(|x| (x * 9.0).sin().max(0.0)).collect();
        let c = 7.0;
        let mut ws = SweepWorkspace::new(&grid);
        ws.begin_step(&u0);
        let bc = SweepBc::new(1, 32);
        first_order_sweep_forward(&mut ws, &s, &grid, c * grid.spacing(), &bc, &cfg_fo()).unwrap();
        let mut expect = u0.clone();
        for i in 1..=32 {
            expect[i] = (u0[i] + c * expect[i - 1]) / (1.0 + c);
        }
        for i in 1..=32 {
            assert!((ws.u_half[i] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn hires_flat_upwind_reduces_to_first_order_flux() {
        // With flat upwind data the gate fires, omega = 1, and the face
        // flux differs from f⁺(u_i) only by the epsilon-small jump.
        let grid = Grid1D::new(0.0, 1.0, 8).unwrap();
        let s = ScalarSplitting::advection(1.0);
        let mut u0 = vec![0.3; 9];
        u0[6] = 0.9; // downwind disturbance only
        let mut ws = SweepWorkspace::new(&grid);
        ws.begin_step(&u0);
        let bc = SweepBc::new(1, 8);
        let cb = CourantBounds { c_plus: 4.0, c_minus: 0.0 };
        hires_sweep(Direction::Forward, &mut ws, &s, &grid, 4.0 * grid.spacing(), &cb, &SolverConfig::default(), &bc).unwrap();
        // Node 1..4 sit in flat data: first-order flux = value itself.
        for i in 1..=4 {
            assert!((ws.flux_plus[i] - s.f_plus(ws.u_half[i])).abs() < 1e-11);
            assert!((ws.u_half[i] - 0.3).abs() < 1e-11);
        }
    }

    #[test]
    fn local_courant_examples() {
        let adv = ScalarSplitting::advection(1.0);
        assert!((local_courant(0.4, -0.3, &adv) - 1.0).abs() < 1e-15);
        let b = ScalarSplitting::burgers();
        assert!((local_courant(2.0, 0.0, &b) - 1.0).abs() < 1e-15);
        assert!((local_courant(3.0, 3.0, &b) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn run_records_initial_field_for_zero_steps() {
        let p = problems::burgers_smooth();
        let grid = Grid1D::new(p.domain.0, p.domain.1, 40).unwrap();
        let ts = TimeStepping::new(0.1, 0).unwrap();
        let traj = run_scalar(&p, &grid, &ts, &SolverConfig::first_order(), &p.boundary).unwrap();
        assert_eq!(traj.fields.len(), 1);
        assert!((traj.fields[0].values[4] - (problems::burgers_smooth().initial)(grid.node(4))).abs() < 1e-15);
    }

    #[test]
    fn node_solver_reports_no_convergence_when_capped() {
        let mut cfg = cfg_fo();
        cfg.root_max_iters = 1;
        let r = solve_node_scalar(4.0, |u| u * u * u, |u| 3.0 * u * u, 123.0, 0.0, &cfg);
        assert!(matches!(r, Err(NodeError::NoConvergence { iters: 1, .. })));
    }

    #[test]
    fn run_attaches_step_and_node_context_to_failures() {
        // A deliberately non-monotone "splitting": f⁺ has negative slope,
        // so the per-node map is decreasing and bracketing fails.
        let bad = ScalarSplitting::lax_friedrichs(
            std::sync::Arc::new(|u: f64| -3.0 * u),
            std::sync::Arc::new(|_| -3.0),
            1.0,
        )
        .unwrap();
        let p = problems::ScalarProblem {
            splitting: bad,
            exact: None,
            boundary_value: Some(std::sync::Arc::new(|_, _| 0.5)),
            initial: std::sync::Arc::new(|x| x),
            ..problems::burgers_smooth()
        };
        let grid = Grid1D::new(0.0, 1.0, 8).unwrap();
        let ts = TimeStepping::new(grid.spacing(), 1).unwrap();
        let err = run_scalar(&p, &grid, &ts, &SolverConfig::first_order(), &p.boundary).unwrap_err();
        match err {
            RunError::Step { step: 0, source: SweepError::Node { node, source }, .. } => {
                assert_eq!(node, 1);
                assert!(matches!(source, NodeError::NoBracket { .. }));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn fixed_omega_step_keeps_constant_state() {
        let grid = Grid1D::new(0.0, 1.0, 12).unwrap();
        let s = ScalarSplitting::burgers();
        for omega in [0.0, 0.3, 1.0] {
            let mut ws = SweepWorkspace::new(&grid);
            ws.begin_step(&[1.3; 13]);
            let bc = SweepBc::new(1, 11);
            fixed_omega_step(&mut ws, &s, &grid, 4.0 * grid.spacing(), omega, &bc, &cfg_fo()).unwrap();
            for i in 1..=11 {
                assert!((ws.u_new[i] - 1.3).abs() <= 1e-11, "omega {omega} node {i}");
            }
        }
    }

    #[test]
    fn conservation_identity_per_step() {
        let p = problems::burgers_shock_rarefaction();
        let grid = Grid1D::new(p.domain.0, p.domain.1, 80).unwrap();
        let ts = TimeStepping::from_ratio(&grid, 4.0, 1.0).unwrap();
        for cfg in [SolverConfig::first_order(), SolverConfig::high_resolution()] {
            let traj = run_scalar(&p, &grid, &ts, &cfg, &p.boundary).unwrap();
            for d in &traj.diagnostics {
                assert!(d.mass_residual <= 1e-10, "residual {}", d.mass_residual);
            }
        }
    }
}
