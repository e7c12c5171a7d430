//! Command-line front end: run a catalog problem, run a convergence study,
//! regenerate the error tables, or list the catalog.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sweepcl::boundary::BoundaryPolicy;
use sweepcl::config::{Scheme, SolverConfig};
use sweepcl::harness::{self, convergence_study, fmt_g17, ErrorReport};
use sweepcl::mesh::{Grid1D, TimeStepping};
use sweepcl::problems::{self, TestProblem};
use sweepcl::scalar::run_scalar;
use sweepcl::system::run_system;

#[derive(Parser)]
#[command(name = "sweepcl", about = "Implicit high-resolution solvers for 1D conservation laws", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem and write solution snapshots plus diagnostics.
    Run(RunArgs),
    /// Run a problem over a doubling sequence of grids and write the
    /// error/EOC table.
    Convergence(ConvergenceArgs),
    /// Regenerate the two standard error tables (table1.csv, table2.csv).
    Tables(TablesArgs),
    /// List the problem catalog.
    ListProblems,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: Option<String>,
    /// first-order | fixed-omega | hires
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    cells: Option<usize>,
    /// Time step as a multiple of h (mutually exclusive with --courant).
    #[arg(long)]
    tau_ratio: Option<f64>,
    /// Courant number; advection problems only (tau = C h / |v|).
    #[arg(long)]
    courant: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Upwind weight for --scheme fixed-omega.
    #[arg(long)]
    omega: Option<f64>,
    /// Corrector passes per node for --scheme hires.
    #[arg(long)]
    correctors: Option<usize>,
    #[arg(long)]
    corrector_tol: Option<f64>,
    #[arg(long)]
    epsilon_scale: Option<f64>,
    #[arg(long)]
    use_local_courant: bool,
    /// Comma-separated times at which to write solution snapshots.
    #[arg(long)]
    snapshot: Option<String>,
    /// Defaults to $SWEEPCL_OUTPUT, then the current directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Flat key=value file mirroring the flag names; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated cell counts, each double the previous.
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    tau_ratio: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    correctors: Option<usize>,
    #[arg(long)]
    corrector_tol: Option<f64>,
    #[arg(long)]
    epsilon_scale: Option<f64>,
    #[arg(long)]
    use_local_courant: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::Tables(args) => cmd_tables(args),
        Command::ListProblems => {
            for name in problems::CATALOG {
                println!("{name}");
            }
            Ok(())
        }
    }
}

/// Flat `key=value` file; '#' starts a comment line.
fn load_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn cfg_get<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|e| anyhow!("config key '{key}': {e}")),
    }
}

fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SWEEPCL_OUTPUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn lookup_problem(name: &str) -> Result<TestProblem> {
    problems::by_name(name).ok_or_else(|| {
        let mut msg = format!("unknown problem '{name}'; available problems:\n");
        for n in problems::CATALOG {
            let _ = writeln!(msg, "  {n}");
        }
        anyhow!(msg)
    })
}

fn parse_scheme(scheme: &str, omega: Option<f64>) -> Result<Scheme> {
    match scheme {
        "first-order" => Ok(Scheme::FirstOrder),
        "fixed-omega" => {
            let w = omega.ok_or_else(|| anyhow!("--scheme fixed-omega requires --omega"))?;
            Ok(Scheme::FixedOmega(w))
        }
        "hires" => Ok(Scheme::HighResolution),
        other => bail!("unknown scheme '{other}' (use first-order | fixed-omega | hires)"),
    }
}

fn solver_config(
    scheme: Scheme,
    correctors: Option<usize>,
    corrector_tol: Option<f64>,
    epsilon_scale: Option<f64>,
    use_local_courant: bool,
) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    cfg.scheme = scheme;
    if let Some(n) = correctors {
        cfg.max_corrector_iters = n;
    }
    if let Some(t) = corrector_tol {
        cfg.corrector_stop_tol = t;
    }
    if let Some(e) = epsilon_scale {
        cfg.epsilon_scale = e;
    }
    cfg.use_local_courant = use_local_courant;
    cfg.validate()?;
    Ok(cfg)
}

fn scheme_slug(scheme: Scheme) -> String {
    match scheme {
        Scheme::FirstOrder => "first-order".into(),
        Scheme::FixedOmega(w) => format!("fixed-omega{w}"),
        Scheme::HighResolution => "hires".into(),
    }
}

fn cmd_run(mut args: RunArgs) -> Result<()> {
    if let Some(path) = &args.config {
        let map = load_config(path)?;
        args.problem = args.problem.or_else(|| map.get("problem").cloned());
        args.scheme = args.scheme.or_else(|| map.get("scheme").cloned());
        args.cells = args.cells.or(cfg_get(&map, "cells")?);
        args.tau_ratio = args.tau_ratio.or(cfg_get(&map, "tau-ratio")?);
        args.courant = args.courant.or(cfg_get(&map, "courant")?);
        args.t_end = args.t_end.or(cfg_get(&map, "t-end")?);
        args.omega = args.omega.or(cfg_get(&map, "omega")?);
        args.correctors = args.correctors.or(cfg_get(&map, "correctors")?);
        args.corrector_tol = args.corrector_tol.or(cfg_get(&map, "corrector-tol")?);
        args.epsilon_scale = args.epsilon_scale.or(cfg_get(&map, "epsilon-scale")?);
        args.use_local_courant =
            args.use_local_courant || cfg_get(&map, "use-local-courant")?.unwrap_or(false);
        args.snapshot = args.snapshot.or_else(|| map.get("snapshot").cloned());
        if args.output_dir.is_none() {
            args.output_dir = map.get("output-dir").map(PathBuf::from);
        }
    }

    let name = args.problem.ok_or_else(|| anyhow!("--problem is required"))?;
    let problem = lookup_problem(&name)?;
    let scheme = parse_scheme(args.scheme.as_deref().unwrap_or("hires"), args.omega)?;
    let cfg = solver_config(scheme, args.correctors, args.corrector_tol, args.epsilon_scale, args.use_local_courant)?;

    let cells = args.cells.unwrap_or(problem.defaults().cells[0]);
    let (x_lo, x_hi) = problem.domain();
    let grid = Grid1D::new(x_lo, x_hi, cells)?;

    // Exactly one of --tau-ratio / --courant decides the time step.
    let tau_ratio = match (args.tau_ratio, args.courant) {
        (Some(_), Some(_)) => bail!("--tau-ratio and --courant are mutually exclusive"),
        (Some(r), None) => r,
        (None, Some(c)) => {
            if !matches!(&problem, TestProblem::Scalar(p) if p.name == "balsara") {
                bail!("--courant applies to the advection problem only; use --tau-ratio");
            }
            c // unit advection speed: tau = C h
        }
        (None, None) => problem.defaults().tau_over_h,
    };
    let t_end = args.t_end.unwrap_or(problem.defaults().t_end);
    // Round to a whole number of steps; snapshots snap to the nearest level.
    let tau = tau_ratio * grid.spacing();
    let steps = ((t_end / tau).round() as usize).max(1);
    let ts = TimeStepping::new(tau, steps)?;
    if (ts.t_end() - t_end).abs() > 1e-9 * t_end.abs().max(1.0) {
        eprintln!(
            "note: running {steps} steps of tau = {tau}, final time {} (requested {t_end})",
            ts.t_end()
        );
    }

    // The rotation protocol needs a whole-cell shift per step.
    let boundary = match problem.boundary() {
        BoundaryPolicy::PeriodicRotate { .. } => {
            let shift = tau_ratio.round();
            if (tau_ratio - shift).abs() > 1e-9 || shift < 1.0 {
                bail!("problem '{name}' rotates the solution back each step and needs an integer cell shift; got tau/h = {tau_ratio}");
            }
            BoundaryPolicy::periodic_rotate(shift as usize)
        }
        other => other.clone(),
    };

    let snapshot_times: Vec<f64> = match &args.snapshot {
        None => vec![t_end],
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("--snapshot: {e}")))
            .collect::<Result<_>>()?,
    };
    for &t in &snapshot_times {
        if !(0.0..=t_end + 1e-12).contains(&t) {
            bail!("snapshot time {t} outside [0, {t_end}]");
        }
    }

    let dir = output_dir(args.output_dir);
    std::fs::create_dir_all(&dir)?;
    let level_of = |t: f64| -> Result<usize> {
        let n = (t / ts.tau()).round();
        if (n * ts.tau() - t).abs() > 0.5 * ts.tau() + 1e-12 {
            bail!("snapshot time {t} is not near a time level (tau = {})", ts.tau());
        }
        Ok(n as usize)
    };

    match &problem {
        TestProblem::Scalar(p) => {
            let traj = run_scalar(p, &grid, &ts, &cfg, &boundary)?;
            // Under the rotation protocol levels live in the co-moving
            // frame, so the reference profile is the initial condition.
            let co_moving = matches!(boundary, BoundaryPolicy::PeriodicRotate { .. });
            for &t in &snapshot_times {
                let level = level_of(t)?;
                let exact_col = p.exact.as_ref().map(|e| {
                    let e = e.clone();
                    move |x: f64| if co_moving { e(x, 0.0) } else { e(x, t) }
                });
                let csv = harness::snapshot_csv_scalar(
                    &grid,
                    &traj.fields[level].values,
                    exact_col.as_ref().map(|f| f as &dyn Fn(f64) -> f64),
                );
                let path = dir.join(format!("{name}_{}_t{t:.3}.csv", scheme_slug(scheme)));
                std::fs::write(&path, csv)?;
                println!("wrote {}", path.display());
            }
            let mut diag = String::from("step,t,tv,min,max,mass,mass_residual,corrector_iters\n");
            for (i, d) in traj.diagnostics.iter().enumerate() {
                let _ = writeln!(
                    diag,
                    "{},{},{},{},{},{},{},{}",
                    i + 1,
                    fmt_g17(traj.times[i + 1]),
                    fmt_g17(d.tv),
                    fmt_g17(d.min),
                    fmt_g17(d.max),
                    fmt_g17(d.mass),
                    fmt_g17(d.mass_residual),
                    d.corrector_iters_max
                );
            }
            let path = dir.join(format!("{name}_{}_diagnostics.csv", scheme_slug(scheme)));
            std::fs::write(&path, diag)?;
            println!("wrote {}", path.display());
        }
        TestProblem::System(p) => {
            let traj = run_system(p, &grid, &ts, &cfg, &boundary)?;
            for &t in &snapshot_times {
                let level = level_of(t)?;
                let exact_col = p.exact.as_ref().map(|e| {
                    let e = e.clone();
                    move |x: f64| e(x, t)
                });
                let csv = harness::snapshot_csv_system(
                    &grid,
                    &traj.fields[level],
                    exact_col.as_ref().map(|f| f as &dyn Fn(f64) -> Vec<f64>),
                );
                let path = dir.join(format!("{name}_{}_t{t:.3}.csv", scheme_slug(scheme)));
                std::fs::write(&path, csv)?;
                println!("wrote {}", path.display());
            }
            let m = p.m;
            let mut diag = String::from("step,t");
            for pcomp in 1..=m {
                let _ = write!(diag, ",tv_q{pcomp},min_q{pcomp},max_q{pcomp},mass_q{pcomp},mass_residual_q{pcomp}");
            }
            diag.push_str(",corrector_iters\n");
            for (i, d) in traj.diagnostics.iter().enumerate() {
                let _ = write!(diag, "{},{}", i + 1, fmt_g17(traj.times[i + 1]));
                for pcomp in 0..m {
                    let _ = write!(
                        diag,
                        ",{},{},{},{},{}",
                        fmt_g17(d.tv[pcomp]),
                        fmt_g17(d.min[pcomp]),
                        fmt_g17(d.max[pcomp]),
                        fmt_g17(d.mass[pcomp]),
                        fmt_g17(d.mass_residual[pcomp])
                    );
                }
                let _ = writeln!(diag, ",{}", d.corrector_iters_max);
            }
            let path = dir.join(format!("{name}_{}_diagnostics.csv", scheme_slug(scheme)));
            std::fs::write(&path, diag)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_convergence(mut args: ConvergenceArgs) -> Result<()> {
    if let Some(path) = &args.config {
        let map = load_config(path)?;
        args.problem = args.problem.or_else(|| map.get("problem").cloned());
        args.scheme = args.scheme.or_else(|| map.get("scheme").cloned());
        args.cells = args.cells.or_else(|| map.get("cells").cloned());
        args.tau_ratio = args.tau_ratio.or(cfg_get(&map, "tau-ratio")?);
        args.t_end = args.t_end.or(cfg_get(&map, "t-end")?);
        args.omega = args.omega.or(cfg_get(&map, "omega")?);
        args.correctors = args.correctors.or(cfg_get(&map, "correctors")?);
        args.corrector_tol = args.corrector_tol.or(cfg_get(&map, "corrector-tol")?);
        args.epsilon_scale = args.epsilon_scale.or(cfg_get(&map, "epsilon-scale")?);
        args.use_local_courant =
            args.use_local_courant || cfg_get(&map, "use-local-courant")?.unwrap_or(false);
        if args.output_dir.is_none() {
            args.output_dir = map.get("output-dir").map(PathBuf::from);
        }
    }

    let name = args.problem.ok_or_else(|| anyhow!("--problem is required"))?;
    let problem = lookup_problem(&name)?;
    let scheme = parse_scheme(args.scheme.as_deref().unwrap_or("hires"), args.omega)?;
    let cfg = solver_config(scheme, args.correctors, args.corrector_tol, args.epsilon_scale, args.use_local_courant)?;

    let cells: Vec<usize> = match &args.cells {
        None => problem.defaults().cells.clone(),
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| anyhow!("--cells: {e}")))
            .collect::<Result<_>>()?,
    };
    let tau_ratio = args.tau_ratio.unwrap_or(problem.defaults().tau_over_h);
    let t_end = args.t_end.unwrap_or(problem.defaults().t_end);

    let rows = convergence_study(&problem, &cfg, &cells, tau_ratio, t_end)?;
    print_report(&rows);

    let dir = output_dir(args.output_dir);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("convergence_{name}_{}.csv", scheme_slug(scheme)));
    harness::write_report_csv(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn print_report(rows: &[ErrorReport]) {
    println!("{:>6} {:>6} {:>12} {:>6}", "I", "N", "e_l1", "eoc");
    for r in rows {
        let eoc = r.eoc.map(|e| format!("{e:.2}")).unwrap_or_else(|| "-".into());
        println!("{:>6} {:>6} {:>12.6} {:>6}", r.cells, r.steps, r.e_l1, eoc);
    }
}

fn cmd_tables(args: TablesArgs) -> Result<()> {
    let dir = output_dir(args.output_dir);
    std::fs::create_dir_all(&dir)?;

    // Table 1: smooth Burgers, first order and three fixed weights.
    let smooth = TestProblem::Scalar(problems::burgers_smooth());
    let cells = [40, 80, 160, 320];
    let columns = [
        ("first_order", Scheme::FirstOrder),
        ("omega0", Scheme::FixedOmega(0.0)),
        ("omega05", Scheme::FixedOmega(0.5)),
        ("omega1", Scheme::FixedOmega(1.0)),
    ];
    let mut studies = Vec::new();
    for (_, scheme) in columns {
        let cfg = solver_config(scheme, None, None, None, false)?;
        studies.push(convergence_study(&smooth, &cfg, &cells, 4.0, 1.0)?);
    }
    let mut out = String::from("I,N");
    for (label, _) in columns {
        let _ = write!(out, ",e_{label},eoc_{label}");
    }
    out.push('\n');
    for (i, &cell) in cells.iter().enumerate() {
        let _ = write!(out, "{},{}", cell, studies[0][i].steps);
        for study in &studies {
            let eoc = study[i].eoc.map(fmt_g17).unwrap_or_default();
            let _ = write!(out, ",{},{}", fmt_g17(study[i].e_l1), eoc);
        }
        out.push('\n');
    }
    let path = dir.join("table1.csv");
    std::fs::write(&path, out)?;
    println!("wrote {}", path.display());

    // Table 2: shock/rarefaction, high resolution and first order.
    let complex = TestProblem::Scalar(problems::burgers_shock_rarefaction());
    let cells = [160, 320, 640, 1280];
    let hr = convergence_study(&complex, &SolverConfig::high_resolution(), &cells, 4.0, 1.0)?;
    let fo = convergence_study(&complex, &SolverConfig::first_order(), &cells, 4.0, 1.0)?;
    let mut out = String::from("I,N,e_hires,eoc_hires,e_first_order,eoc_first_order\n");
    for i in 0..cells.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            cells[i],
            hr[i].steps,
            fmt_g17(hr[i].e_l1),
            hr[i].eoc.map(fmt_g17).unwrap_or_default(),
            fmt_g17(fo[i].e_l1),
            fo[i].eoc.map(fmt_g17).unwrap_or_default(),
        );
    }
    let path = dir.join("table2.csv");
    std::fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(())
}
