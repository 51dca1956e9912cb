//! `hjlab` command line.
//!
//! Exit codes: 0 success, 1 failed verdict or numerical failure, 2 usage or
//! configuration error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::ergodic::{estimate_lambda_min, ErgodicOptions};
use crate::error::{HjError, Result};
use crate::experiments::{self, merge_json, series_csv, write_report, OutputFormat, EXPERIMENTS};
use crate::fd::{evolve_lf, BoundaryPolicy, EvolveConfig, Flux};
use crate::grid::{Extension, Grid1D, SampledFn};
use crate::hamiltonian::{check_h4, HamiltonianSpec, TabulatedH};
use crate::variational::{backtrack_minimizer, build_staircase_u0, HopfLax, StaircaseSpec};

#[derive(Debug, Parser)]
#[command(
    name = "hjlab",
    version,
    about = "Large-time behaviour of Hamilton-Jacobi equations in 1-D"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a named experiment (or `all`) and write its report.
    Experiment(ExperimentArgs),
    /// Bracket the least solvable λ for H(x, Du) = λ.
    Ergodic(ErgodicArgs),
    /// Lax-Friedrichs evolution with snapshots.
    Evolve(EvolveArgs),
    /// Pointwise Oleinik-Lax values.
    Hopflax(PointArgs),
    /// Sample the strong-convexity condition.
    H4check(H4Args),
    /// Straight-line minimizer ending at (x, t).
    Trajectory(PointArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Quadratic,
    EikonalShift,
    QuadPotential,
    AbsShift,
    Tabulated,
}

#[derive(Debug, Args)]
struct HamArgs {
    #[arg(long, value_enum, default_value = "quadratic")]
    family: Family,
    #[arg(long, default_value_t = 0.0)]
    drift: f64,
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Subtract a constant: H − shift.
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    /// Potential f for quad-potential (CSV `x,value`); defaults to a unit well at 0.
    #[arg(long)]
    f: Option<PathBuf>,
    /// Samples of p ↦ H(p) on a uniform p grid (CSV `x,value`).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment name, or `all`.
    name: String,
    /// JSON file with config overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `key=value` (dotted keys, JSON values).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ErgodicArgs {
    #[command(flatten)]
    ham: HamArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 10.0])]
    radii: Vec<f64>,
    #[arg(long)]
    lambda_lo: Option<f64>,
    #[arg(long)]
    lambda_hi: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DomainArgs {
    /// Initial data: `zero`, `abs`, `identity`, `well`, `staircase` or a CSV file `x,value`.
    #[arg(long, default_value = "abs")]
    u0: String,
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 8.0)]
    x_max: f64,
    #[arg(long, default_value_t = 801)]
    nodes: usize,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[command(flatten)]
    ham: HamArgs,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    t_end: f64,
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    cfl: f64,
    #[arg(long)]
    godunov: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    ham: HamArgs,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    x: Vec<f64>,
    #[arg(long)]
    t: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct H4Args {
    #[command(flatten)]
    ham: HamArgs,
    #[arg(long, default_value_t = 0.25)]
    eta: f64,
    #[arg(long, default_value_t = 5.0)]
    k_box: f64,
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

/// Runs the command line and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HjError::Config(_)
                | HjError::InvalidInput(_)
                | HjError::UnknownExperiment(_)
                | HjError::Io(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Experiment(a) => cmd_experiment(a),
        Command::Ergodic(a) => cmd_ergodic(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Hopflax(a) => cmd_hopflax(a),
        Command::H4check(a) => cmd_h4(a),
        Command::Trajectory(a) => cmd_trajectory(a),
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Result<bool> {
    let mut overrides = match &a.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
            .map_err(|e| HjError::Config(e.to_string()))?,
        None => json!({}),
    };
    for kv in &a.set {
        merge_json(&mut overrides, &parse_set(kv)?);
    }
    let names: Vec<&str> = if a.name == "all" {
        EXPERIMENTS.to_vec()
    } else {
        vec![a.name.as_str()]
    };
    if names.len() > 1 && overrides.as_object().is_some_and(|o| !o.is_empty()) {
        return Err(HjError::Config(
            "overrides apply to a single experiment".into(),
        ));
    }
    let mut all_pass = true;
    for name in names {
        let report = experiments::run_experiment(name, &overrides)?;
        write_report(&report, &a.output.out, a.output.format)?;
        for v in &report.verdicts {
            println!("{name} {} {}", v.id, if v.pass { "PASS" } else { "FAIL" });
        }
        all_pass &= report.passed();
    }
    Ok(all_pass)
}

/// `a.b=1` → `{"a": {"b": 1}}`; values that are not JSON become strings.
fn parse_set(kv: &str) -> Result<Value> {
    let (key, raw) = kv
        .split_once('=')
        .ok_or_else(|| HjError::Config(format!("expected KEY=VALUE, got {kv}")))?;
    if key.is_empty() {
        return Err(HjError::Config(format!("empty key in {kv}")));
    }
    let mut value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    for part in key.rsplit('.') {
        value = json!({ part: value });
    }
    Ok(value)
}

fn cmd_ergodic(a: ErgodicArgs) -> Result<bool> {
    let h = hamiltonian(&a.ham)?;
    let opts = ErgodicOptions {
        radii: a.radii,
        lambda_tol: a.tol,
        lambda_lo: a.lambda_lo,
        lambda_hi: a.lambda_hi,
        ..Default::default()
    };
    let report = estimate_lambda_min(&h, &opts)?;
    let (lo, hi) = report.lambda_min_bracket;
    println!("lambda_min in [{lo}, {hi}]");
    let status: Vec<[f64; 2]> = report
        .lambda_grid
        .iter()
        .zip(&report.statuses)
        .map(|(l, s)| {
            [
                *l,
                if *s == crate::ergodic::SolveStatus::Solved {
                    1.0
                } else {
                    0.0
                },
            ]
        })
        .collect();
    let doc = json!({ "hamiltonian": h.label(), "report": report });
    emit(
        &a.output,
        "ergodic",
        &doc,
        &[("ergodic_status", "x", &status)],
    )?;
    Ok(true)
}

fn cmd_evolve(a: EvolveArgs) -> Result<bool> {
    let h = hamiltonian(&a.ham)?;
    let grid = Grid1D::new(a.domain.x_min, a.domain.x_max, a.domain.nodes)?;
    let u0 = initial_data(&a.domain, grid)?;
    let mut cfg = EvolveConfig::new(grid, a.t_end)
        .with_snapshots(a.snapshots)
        .with_cfl(a.cfl);
    cfg.theta = a.theta;
    cfg.boundary = BoundaryPolicy::LipschitzExtrapolate;
    if a.godunov {
        cfg = cfg.with_flux(Flux::Godunov);
    }
    let res = evolve_lf(&h, &u0, &cfg)?;
    let snaps: Vec<(String, Vec<[f64; 2]>)> = res
        .snapshots
        .iter()
        .map(|s| {
            (
                format!("evolve_t{}", s.time),
                s.u.points().map(|(x, v)| [x, v]).collect(),
            )
        })
        .collect();
    let m: Vec<[f64; 2]> = res.m_series.iter().map(|&(t, v)| [t, v]).collect();
    let doc = json!({
        "hamiltonian": h.label(),
        "dt": res.dt,
        "theta": res.theta,
        "steps": res.steps,
        "snapshot_times": res.snapshots.iter().map(|s| s.time).collect::<Vec<_>>(),
    });
    let mut csvs: Vec<(&str, &str, &[[f64; 2]])> = snaps
        .iter()
        .map(|(n, p)| (n.as_str(), "x", p.as_slice()))
        .collect();
    csvs.push(("evolve_m", "t", &m));
    emit(&a.output, "evolve", &doc, &csvs)?;
    println!(
        "evolved to t = {} in {} steps (dt = {})",
        a.t_end, res.steps, res.dt
    );
    Ok(true)
}

fn cmd_hopflax(a: PointArgs) -> Result<bool> {
    let h = hamiltonian(&a.ham)?;
    let u0 = point_data(&a.domain)?;
    let solver = HopfLax::new(&h, &u0)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &x in &a.x {
        let p = solver.solve(x, a.t)?;
        println!("{x},{}", p.value);
        points.push([x, p.value]);
        rows.push(json!({ "x": x, "t": a.t, "value": p.value, "argmin": p.argmin, "non_unique": p.non_unique }));
    }
    emit(
        &a.output,
        "hopflax",
        &json!({ "hamiltonian": h.label(), "points": rows }),
        &[("hopflax", "x", &points)],
    )?;
    Ok(true)
}

fn cmd_trajectory(a: PointArgs) -> Result<bool> {
    let h = hamiltonian(&a.ham)?;
    let u0 = point_data(&a.domain)?;
    let mut docs = Vec::new();
    let mut csvs = Vec::new();
    for &x in &a.x {
        let tr = backtrack_minimizer(&h, &u0, x, a.t)?;
        println!(
            "x={x} t={} start={} action={}",
            a.t, tr.start_point, tr.action
        );
        csvs.push((
            format!("trajectory_x{x}"),
            tr.times
                .iter()
                .zip(&tr.positions)
                .map(|(t, p)| [*t, *p])
                .collect::<Vec<_>>(),
        ));
        docs.push(tr);
    }
    let refs: Vec<(&str, &str, &[[f64; 2]])> = csvs
        .iter()
        .map(|(n, p)| (n.as_str(), "t", p.as_slice()))
        .collect();
    emit(
        &a.output,
        "trajectory",
        &json!({ "hamiltonian": h.label(), "trajectories": docs }),
        &refs,
    )?;
    Ok(true)
}

fn cmd_h4(a: H4Args) -> Result<bool> {
    let h = hamiltonian(&a.ham)?;
    let rep = check_h4(&h, a.eta, a.k_box, a.samples)?;
    println!(
        "{:?} psi={} worst_margin={}",
        rep.status, rep.psi_estimate, rep.worst_margin
    );
    emit(
        &a.output,
        "h4check",
        &json!({ "hamiltonian": h.label(), "report": rep }),
        &[],
    )?;
    Ok(true)
}

fn emit(
    out: &OutputArgs,
    stem: &str,
    doc: &Value,
    csvs: &[(&str, &str, &[[f64; 2]])],
) -> Result<()> {
    fs::create_dir_all(&out.out)?;
    if matches!(out.format, OutputFormat::Json | OutputFormat::Both) {
        write_atomic(
            &out.out.join(format!("{stem}.json")),
            &serde_json::to_string_pretty(doc)?,
        )?;
    }
    if matches!(out.format, OutputFormat::Csv | OutputFormat::Both) {
        for (name, first, pts) in csvs {
            write_atomic(
                &out.out.join(format!("{name}.csv")),
                &series_csv(first, pts),
            )?;
        }
    }
    Ok(())
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a two-column CSV with header `x,value` (or `p,value`/`t,value`).
pub fn read_xy_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| HjError::Config(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() != 2 || cols[1] != "value" {
        return Err(HjError::Config(format!(
            "{}: expected header `x,value`",
            path.display()
        )));
    }
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let mut it = line.split(',').map(|s| s.trim().parse::<f64>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(x)), Some(Ok(v)), None) => {
                xs.push(x);
                vs.push(v);
            }
            _ => {
                return Err(HjError::Config(format!(
                    "{}: bad row {}",
                    path.display(),
                    k + 2
                )))
            }
        }
    }
    Ok((xs, vs))
}

fn uniform_from_csv(path: &Path) -> Result<(Grid1D, Vec<f64>)> {
    let (xs, vs) = read_xy_csv(path)?;
    if xs.len() < 2 {
        return Err(HjError::Config(format!(
            "{}: need at least two rows",
            path.display()
        )));
    }
    let grid = Grid1D::new(xs[0], *xs.last().unwrap(), xs.len())?;
    if xs
        .iter()
        .enumerate()
        .any(|(i, x)| (x - grid.node(i)).abs() > 1e-9 * grid.dx().max(x.abs()))
    {
        return Err(HjError::Config(format!(
            "{}: nodes must be uniformly spaced",
            path.display()
        )));
    }
    Ok((grid, vs))
}

fn hamiltonian(a: &HamArgs) -> Result<HamiltonianSpec> {
    let base = match a.family {
        Family::Quadratic => HamiltonianSpec::quadratic(a.drift),
        Family::EikonalShift => HamiltonianSpec::eikonal_shift(a.c),
        Family::AbsShift => HamiltonianSpec::abs_shift(a.alpha),
        Family::QuadPotential => {
            let f = match &a.f {
                Some(p) => {
                    let (xs, vs) = read_xy_csv(p)?;
                    SampledFn::from_points(xs, vs, Extension::Constant)?
                }
                None => experiments::sampled_bump(Grid1D::new(-1.5, 1.5, 301)?, -1.0, 0.0, 1.0)?,
            };
            HamiltonianSpec::quad_potential(a.eps, f)
        }
        Family::Tabulated => {
            let path = a
                .table
                .as_ref()
                .ok_or_else(|| HjError::Config("--table is required for tabulated".into()))?;
            let (grid, vs) = uniform_from_csv(path)?;
            HamiltonianSpec::Tabulated(TabulatedH::x_independent(grid, vs)?)
        }
    };
    Ok(if a.shift != 0.0 {
        base.shifted(a.shift)
    } else {
        base
    })
}

fn builtin(name: &str, grid: Grid1D) -> Result<Option<SampledFn>> {
    let ext = Extension::LinearExtrapolate;
    Ok(Some(match name {
        "zero" => SampledFn::constant(grid, 0.0)?,
        "abs" => SampledFn::from_fn(grid, f64::abs, ext)?,
        "identity" => SampledFn::from_fn(grid, |x| x, ext)?,
        "well" => experiments::sampled_bump(grid, -1.0, 0.0, 1.0)?.with_extension(ext),
        _ => return Ok(None),
    }))
}

fn initial_data(d: &DomainArgs, grid: Grid1D) -> Result<SampledFn> {
    if d.u0 == "staircase" {
        return Err(HjError::Config(
            "staircase data is only available for hopflax and trajectory".into(),
        ));
    }
    if let Some(f) = builtin(&d.u0, grid)? {
        return Ok(f);
    }
    let (xs, vs) = read_xy_csv(Path::new(&d.u0))?;
    let f = SampledFn::from_points(xs, vs, Extension::LinearExtrapolate)?;
    SampledFn::from_fn(grid, |x| f.eval(x), Extension::LinearExtrapolate)
}

fn point_data(d: &DomainArgs) -> Result<SampledFn> {
    if d.u0 == "staircase" {
        let a = StaircaseSpec::default_sequence();
        return build_staircase_u0(a.a(), Grid1D::new(0.0, *a.a().last().unwrap(), 3)?);
    }
    let grid = Grid1D::new(d.x_min, d.x_max, d.nodes)?;
    if let Some(f) = builtin(&d.u0, grid)? {
        return Ok(f);
    }
    let (xs, vs) = read_xy_csv(Path::new(&d.u0))?;
    SampledFn::from_points(xs, vs, Extension::LinearExtrapolate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_builds_nested_objects() {
        assert_eq!(parse_set("a.b=1").unwrap(), json!({"a": {"b": 1}}));
        assert_eq!(
            parse_set("flux=godunov").unwrap(),
            json!({"flux": "godunov"})
        );
        assert!(parse_set("novalue").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_cli(["hjlab", "badcmd"]), 2);
        assert_eq!(run_cli(["hjlab", "ergodic", "--bogus"]), 2);
        assert_eq!(run_cli(["hjlab", "--help"]), 0);
    }
}
