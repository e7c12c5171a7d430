//! Error metrics, convergence studies and CSV report emission.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::config::SolverConfig;
use crate::mesh::{Grid1D, GridError, TimeStepping};
use crate::problems::{ScalarSpaceTimeMap, TestProblem, VectorSpaceTimeMap};
use crate::scalar::{run_scalar, RunError, ScalarTrajectory};
use crate::system::{run_system, SystemTrajectory};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("convergence order needs positive errors, got ({0}, {1})")]
    NonPositiveError(f64, f64),
    #[error("cell counts must increase by factors of 2, got {0:?}")]
    NotDyadic(Vec<usize>),
    #[error("problem '{0}' has no exact solution to measure against")]
    NoExactSolution(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One row of a convergence table plus the run monitors.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub cells: usize,
    pub steps: usize,
    /// Global space-time l1 error `E = h tau Σ_i Σ_{n>=1} |u_i^n - u(x_i, t^n)|`.
    pub e_l1: f64,
    /// Order versus the next-coarser row; absent on the first row.
    pub eoc: Option<f64>,
    pub tv_max_increase: f64,
    pub extrema_excess: f64,
    pub mass_residual: f64,
}

/// Space-time l1 error of a scalar trajectory against an exact solution.
pub fn error_l1_scalar(
    traj: &ScalarTrajectory,
    exact: &ScalarSpaceTimeMap,
    grid: &Grid1D,
    ts: &TimeStepping,
) -> f64 {
    let mut sum = 0.0;
    for n in 1..traj.fields.len() {
        let t = traj.times[n];
        for (i, x) in grid.nodes().enumerate() {
            sum += (traj.fields[n].values[i] - exact(x, t)).abs();
        }
    }
    grid.spacing() * ts.tau() * sum
}

/// System variant of [`error_l1_scalar`], summed over components.
pub fn error_l1_system(
    traj: &SystemTrajectory,
    exact: &VectorSpaceTimeMap,
    grid: &Grid1D,
    ts: &TimeStepping,
) -> f64 {
    let m = traj.fields[0].m;
    let mut sum = 0.0;
    for n in 1..traj.fields.len() {
        let t = traj.times[n];
        for (i, x) in grid.nodes().enumerate() {
            let e = exact(x, t);
            let q = traj.fields[n].node(i);
            for p in 0..m {
                sum += (q[p] - e[p]).abs();
            }
        }
    }
    grid.spacing() * ts.tau() * sum
}

/// Spatial l1 error of a single field against a reference profile.
pub fn snapshot_l1(values: &[f64], grid: &Grid1D, reference: impl Fn(f64) -> f64) -> f64 {
    grid.spacing()
        * grid
            .nodes()
            .enumerate()
            .map(|(i, x)| (values[i] - reference(x)).abs())
            .sum::<f64>()
}

/// Experimental order of convergence under mesh halving:
/// `log2(e_coarse / e_fine)`.
pub fn eoc(e_coarse: f64, e_fine: f64) -> Result<f64, HarnessError> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(HarnessError::NonPositiveError(e_coarse, e_fine));
    }
    Ok((e_coarse / e_fine).log2())
}

fn check_dyadic(cells: &[usize]) -> Result<(), HarnessError> {
    let ok = !cells.is_empty()
        && cells.windows(2).all(|w| w[1] == 2 * w[0]);
    if ok {
        Ok(())
    } else {
        Err(HarnessError::NotDyadic(cells.to_vec()))
    }
}

fn report_from_scalar(
    traj: &ScalarTrajectory,
    exact: &ScalarSpaceTimeMap,
    grid: &Grid1D,
    ts: &TimeStepping,
) -> ErrorReport {
    let init = &traj.fields[0].values;
    let lo = init.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = init.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut tv_prev = crate::field::total_variation(init);
    let mut tv_inc = 0.0f64;
    let mut excess = 0.0f64;
    let mut residual = 0.0f64;
    for d in &traj.diagnostics {
        tv_inc = tv_inc.max(d.tv - tv_prev);
        tv_prev = d.tv;
        excess = excess.max((d.max - hi).max(0.0) + (lo - d.min).max(0.0));
        residual = residual.max(d.mass_residual);
    }
    ErrorReport {
        cells: grid.cells(),
        steps: ts.steps(),
        e_l1: error_l1_scalar(traj, exact, grid, ts),
        eoc: None,
        tv_max_increase: tv_inc.max(0.0),
        extrema_excess: excess,
        mass_residual: residual,
    }
}

fn report_from_system(
    traj: &SystemTrajectory,
    exact: &VectorSpaceTimeMap,
    grid: &Grid1D,
    ts: &TimeStepping,
) -> ErrorReport {
    let m = traj.fields[0].m;
    let mut tv_prev: Vec<f64> = (0..m)
        .map(|p| crate::field::total_variation(&traj.fields[0].component(p)))
        .collect();
    let mut tv_inc = 0.0f64;
    let mut residual = 0.0f64;
    let init = &traj.fields[0];
    let (mut lo, mut hi) = (vec![f64::INFINITY; m], vec![f64::NEG_INFINITY; m]);
    for i in 0..init.n_nodes() {
        for p in 0..m {
            lo[p] = lo[p].min(init.node(i)[p]);
            hi[p] = hi[p].max(init.node(i)[p]);
        }
    }
    let mut excess = 0.0f64;
    for d in &traj.diagnostics {
        for p in 0..m {
            tv_inc = tv_inc.max(d.tv[p] - tv_prev[p]);
            tv_prev[p] = d.tv[p];
            excess = excess.max((d.max[p] - hi[p]).max(0.0) + (lo[p] - d.min[p]).max(0.0));
            residual = residual.max(d.mass_residual[p]);
        }
    }
    ErrorReport {
        cells: grid.cells(),
        steps: ts.steps(),
        e_l1: error_l1_system(traj, exact, grid, ts),
        eoc: None,
        tv_max_increase: tv_inc.max(0.0),
        extrema_excess: excess,
        mass_residual: residual,
    }
}

/// Run a problem at each resolution (concurrently) and assemble the
/// convergence table. Resolutions must double; `t_end` and `tau/h` come
/// from the arguments so studies can deviate from the problem defaults.
pub fn convergence_study(
    problem: &TestProblem,
    cfg: &SolverConfig,
    cells_list: &[usize],
    tau_over_h: f64,
    t_end: f64,
) -> Result<Vec<ErrorReport>, HarnessError> {
    check_dyadic(cells_list)?;
    let (x_lo, x_hi) = problem.domain();

    let run_one = |cells: usize| -> Result<ErrorReport, HarnessError> {
        let grid = Grid1D::new(x_lo, x_hi, cells)?;
        let ts = TimeStepping::from_ratio(&grid, tau_over_h, t_end)?;
        match problem {
            TestProblem::Scalar(p) => {
                let exact = p.exact.clone().ok_or(HarnessError::NoExactSolution(p.name))?;
                let traj = run_scalar(p, &grid, &ts, cfg, &p.boundary)?;
                Ok(report_from_scalar(&traj, &exact, &grid, &ts))
            }
            TestProblem::System(p) => {
                let exact = p.exact.clone().ok_or(HarnessError::NoExactSolution(p.name))?;
                let traj = run_system(p, &grid, &ts, cfg, &p.boundary)?;
                Ok(report_from_system(&traj, &exact, &grid, &ts))
            }
        }
    };

    let mut rows: Vec<ErrorReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells_list
            .iter()
            .map(|&cells| scope.spawn(move || run_one(cells)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;

    for i in 1..rows.len() {
        rows[i].eoc = Some(eoc(rows[i - 1].e_l1, rows[i].e_l1)?);
    }
    Ok(rows)
}

/// Decimal with 17 significant digits, the round-trip precision of f64.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `I,N,e_l1,eoc,tv_max_increase,extrema_excess,mass_residual` with one
/// row per resolution; `eoc` is empty on the first row.
pub fn report_csv(rows: &[ErrorReport]) -> String {
    let mut out = String::from("I,N,e_l1,eoc,tv_max_increase,extrema_excess,mass_residual\n");
    for r in rows {
        let eoc = r.eoc.map(fmt_g17).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.cells,
            r.steps,
            fmt_g17(r.e_l1),
            eoc,
            fmt_g17(r.tv_max_increase),
            fmt_g17(r.extrema_excess),
            fmt_g17(r.mass_residual),
        );
    }
    out
}

pub fn write_report_csv(path: &Path, rows: &[ErrorReport]) -> Result<(), HarnessError> {
    std::fs::write(path, report_csv(rows))?;
    Ok(())
}

/// Scalar snapshot `x,u[,u_exact]`.
pub fn snapshot_csv_scalar(grid: &Grid1D, values: &[f64], exact: Option<&dyn Fn(f64) -> f64>) -> String {
    let mut out = String::new();
    out.push_str(if exact.is_some() { "x,u,u_exact\n" } else { "x,u\n" });
    for (i, x) in grid.nodes().enumerate() {
        match exact {
            Some(e) => {
                let _ = writeln!(out, "{},{},{}", fmt_g17(x), fmt_g17(values[i]), fmt_g17(e(x)));
            }
            None => {
                let _ = writeln!(out, "{},{}", fmt_g17(x), fmt_g17(values[i]));
            }
        }
    }
    out
}

/// System snapshot `x,q1,..,qm[,q1_exact,..,qm_exact]`.
pub fn snapshot_csv_system(
    grid: &Grid1D,
    field: &crate::field::SystemField,
    exact: Option<&dyn Fn(f64) -> Vec<f64>>,
) -> String {
    let m = field.m;
    let mut out = String::from("x");
    for p in 0..m {
        let _ = write!(out, ",q{}", p + 1);
    }
    if exact.is_some() {
        for p in 0..m {
            let _ = write!(out, ",q{}_exact", p + 1);
        }
    }
    out.push('\n');
    for (i, x) in grid.nodes().enumerate() {
        let _ = write!(out, "{}", fmt_g17(x));
        for p in 0..m {
            let _ = write!(out, ",{}", fmt_g17(field.node(i)[p]));
        }
        if let Some(e) = exact {
            let vals = e(x);
            for p in 0..m {
                let _ = write!(out, ",{}", fmt_g17(vals[p]));
            }
        }
        out.push('\n');
    }
    out
}
