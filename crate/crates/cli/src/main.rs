//! `qpw`: batch front end for Q_p norms, Carleson estimates and the
//! constructive ideal problem.
//!
//! Exit status: 0 when every certificate passes, 2 when a certificate
//! fails, 1 on input or numerical errors.

mod plot;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use qpw_core::carleson::{box_norm, default_a_samples, invariant_norm, max_arc_level};
use qpw_core::{
    qp_norm, solve_ideal, verify_solution, BoundaryGrid, CertificationReport, DiskGrid, IdealSolution,
    SolutionEvaluator, SolutionReport, SolveOptions, SolverKind,
};
use serde::Serialize;
use serde_json::{json, Value};

use plot::{plot_points, PolarField};
use spec::{parse_resolution, GridSpec, ProblemSpec};

const BOUNDARY_SAMPLES: usize = 256;
/// Agreement required between a saved artifact and its recomputation.
const REPRODUCE_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "qpw", version, about = "Q_p spaces, Carleson measures and the ideal problem on the disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Q_p norm of every function in the spec.
    Qpnorm(Common),
    /// Box and Moebius-invariant Carleson estimates of the spec's density.
    Carleson(Common),
    /// Solve sum f_j g_j = g^3 and certify the result.
    Solve(Common),
    /// Recompute a saved report (and its g CSV, if present) from scratch.
    Verify(Common),
    /// Heatmap of a scalar field over the disk.
    Plot(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Problem spec (JSON); for `verify`, a report written by `solve`.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory. Without it the main JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid resolution `RxA`, overriding the spec.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_parser = ["cauchy", "nx"])]
    solver: Option<String>,
    #[arg(long)]
    arc_level: Option<u32>,
    /// Field to plot: residual, abs_g, corona, abs:<name>, abs_gj:<j>.
    #[arg(long)]
    plot: Option<String>,
    /// Exponent, overriding the spec.
    #[arg(long)]
    p: Option<f64>,
    /// Plot and CSV resolution `RxA`.
    #[arg(long, default_value = "32x128")]
    resolution: String,
    /// Write g_j values on the plot layout to `g.csv` (solve only).
    #[arg(long)]
    dump_g: bool,
}

enum Outcome {
    Accepted,
    Rejected(Vec<String>),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli.command)) {
        Ok(Outcome::Accepted) => ExitCode::SUCCESS,
        Ok(Outcome::Rejected(failing)) => {
            eprintln!("certificate failure: {}", failing.join(", "));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("QPW_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .with_context(|| format!("QPW_THREADS={value:?} is not a thread count"))?;
    if n == 0 {
        bail!("QPW_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Qpnorm(a) => qpnorm(&a),
        Command::Carleson(a) => carleson(&a),
        Command::Solve(a) => solve(&a),
        Command::Verify(a) => verify(&a),
        Command::Plot(a) => plot_cmd(&a),
    }
}

/// The spec with command-line overrides applied.
fn effective_spec(args: &Common) -> Result<ProblemSpec> {
    let mut spec = ProblemSpec::load(&args.spec)?;
    if let Some(g) = &args.grid {
        let (n_radial, n_angular) = parse_resolution(g)?;
        spec.grid = GridSpec {
            n_radial,
            n_angular,
            ..spec.grid
        };
    }
    if let Some(s) = &args.solver {
        spec.solver = if s == "nx" { SolverKind::Nx } else { SolverKind::Cauchy };
    }
    if let Some(level) = args.arc_level {
        spec.arc_level = Some(level);
    }
    if let Some(p) = args.p {
        spec.p = p;
    }
    Ok(spec)
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    spec_hash: String,
    grid: &'a GridSpec,
}

fn provenance(spec: &ProblemSpec) -> Provenance<'_> {
    Provenance {
        tool: "qpw",
        version: env!("CARGO_PKG_VERSION"),
        spec_hash: spec.hash(),
        grid: &spec.grid,
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(args: &Common, file: &str, value: &Value) -> Result<()> {
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_json(&dir.join(file), value)
        }
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn write_timings(args: &Common, timings: &[(&str, f64)]) -> Result<()> {
    if let Some(dir) = &args.out {
        let map: serde_json::Map<String, Value> =
            timings.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        write_json(&dir.join("timings.json"), &Value::Object(map))?;
    }
    Ok(())
}

fn arc_level(spec: &ProblemSpec, grid: &DiskGrid) -> u32 {
    spec.arc_level.unwrap_or_else(|| max_arc_level(grid))
}

fn qpnorm(args: &Common) -> Result<Outcome> {
    let spec = effective_spec(args)?;
    spec.check_open_p()?;
    let grid = spec.grid.build()?;
    let boundary = BoundaryGrid::new(BOUNDARY_SAMPLES)?;
    let a_samples = default_a_samples();
    let t = Instant::now();
    let reports = spec
        .named_functions()?
        .into_iter()
        .map(|(name, f)| {
            let report = qp_norm(&f, spec.p, &grid, &boundary, &a_samples)
                .with_context(|| format!("Q_p norm of {name}"))?;
            Ok(json!({ "name": name, "report": report }))
        })
        .collect::<Result<Vec<_>>>()?;
    let elapsed = t.elapsed().as_secs_f64();
    emit(
        args,
        "qpnorm.json",
        &json!({ "provenance": provenance(&spec), "p": spec.p, "norms": reports }),
    )?;
    write_timings(args, &[("qpnorm", elapsed)])?;
    Ok(Outcome::Accepted)
}

fn carleson(args: &Common) -> Result<Outcome> {
    let spec = effective_spec(args)?;
    let grid = spec.grid.build()?;
    let level = arc_level(&spec, &grid);
    let density = spec.density()?;
    let t = Instant::now();
    let boxed = box_norm(&density, spec.p, &grid, level)?;
    let invariant = invariant_norm(&density, spec.p, &grid, &default_a_samples())?;
    let elapsed = t.elapsed().as_secs_f64();
    emit(
        args,
        "carleson.json",
        &json!({
            "provenance": provenance(&spec),
            "p": spec.p,
            "arc_level": level,
            "box": boxed,
            "invariant": invariant,
        }),
    )?;
    write_timings(args, &[("carleson", elapsed)])?;
    Ok(Outcome::Accepted)
}

struct Solved {
    solution: IdealSolution,
    certification: CertificationReport,
    artifact: Value,
    timings: Vec<(&'static str, f64)>,
}

/// Solve and certify from the spec alone; shared by `solve` and `verify`
/// only through the spec.
fn solve_from_spec(spec: &ProblemSpec) -> Result<Solved> {
    let problem = spec.problem()?;
    let grid = spec.grid.build()?;
    let options = SolveOptions {
        arc_level: arc_level(spec, &grid),
        ..SolveOptions::default()
    };
    let t = Instant::now();
    let solution = solve_ideal(&problem, spec.solver, &grid, &options)?;
    let t_solve = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let certification = verify_solution(&problem, &solution, &grid, &options)?;
    let t_certify = t.elapsed().as_secs_f64();
    let report: &SolutionReport = &solution.report;
    let mut failing = report.failing.clone();
    for name in &certification.failing {
        let name = format!("verify.{name}");
        if !failing.contains(&name) {
            failing.push(name);
        }
    }
    let artifact = json!({
        "provenance": provenance(spec),
        "arc_level": options.arc_level,
        "accepted": failing.is_empty(),
        "failing": failing,
        "spec": spec,
        "solution": report,
        "certification": certification,
    });
    Ok(Solved {
        solution,
        certification,
        artifact,
        timings: vec![("solve", t_solve), ("certify", t_certify)],
    })
}

fn outcome_of(artifact: &Value) -> Outcome {
    if artifact["accepted"] == Value::Bool(true) {
        Outcome::Accepted
    } else {
        let failing = artifact["failing"]
            .as_array()
            .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            .unwrap_or_default();
        Outcome::Rejected(failing)
    }
}

fn g_csv(solution: &IdealSolution, n_r: usize, n_a: usize) -> Result<String> {
    let points = plot_points(n_r, n_a);
    let rows = qpw_core::par::map(points.len(), |i| {
        let (r, t) = points[i];
        solution.eval_all(Complex64::from_polar(r, t))
    });
    let n = solution.n();
    let mut out = String::from("r,theta");
    for j in 1..=n {
        out.push_str(&format!(",g{j}_re,g{j}_im"));
    }
    out.push('\n');
    for ((r, t), row) in points.into_iter().zip(rows) {
        out.push_str(&format!("{r},{t}"));
        for v in row? {
            out.push_str(&format!(",{:e},{:e}", v.re, v.im));
        }
        out.push('\n');
    }
    Ok(out)
}

fn solve(args: &Common) -> Result<Outcome> {
    let spec = effective_spec(args)?;
    let solved = solve_from_spec(&spec)?;
    let mut timings = solved.timings.clone();
    let report = &solved.solution.report;
    eprintln!(
        "identity residual {:.3e}, analyticity residual {:.3e}, verify identity {:.3e}, verify analyticity {:.3e}",
        report.identity_residual,
        report.analyticity_residual,
        solved.certification.identity_residual,
        solved.certification.analyticity_residual
    );
    emit(args, "report.json", &solved.artifact)?;
    if let Some(dir) = &args.out {
        let (n_r, n_a) = parse_resolution(&args.resolution)?;
        if args.dump_g {
            let t = Instant::now();
            fs::write(dir.join("g.csv"), g_csv(&solved.solution, n_r, n_a)?)?;
            timings.push(("g_csv", t.elapsed().as_secs_f64()));
        }
        if let Some(field) = &args.plot {
            let t = Instant::now();
            write_plot(dir, field, &spec, Some(&solved.solution), n_r, n_a)?;
            timings.push(("plot", t.elapsed().as_secs_f64()));
        }
    } else if args.dump_g || args.plot.is_some() {
        bail!("--dump-g and --plot need --out");
    }
    write_timings(args, &timings)?;
    Ok(outcome_of(&solved.artifact))
}

/// Leaves of `saved` and `fresh` that differ by more than the
/// reproduction tolerance, with their JSON paths.
fn compare(saved: &Value, fresh: &Value, path: &str, out: &mut Vec<String>) {
    match (saved, fresh) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            if !((a - b).abs() <= REPRODUCE_TOL * a.abs().max(b.abs()).max(1.0)) {
                out.push(format!("{path}: saved {a:e}, recomputed {b:e}"));
            }
        }
        (Value::Array(a), Value::Array(b)) if a.len() == b.len() => {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                compare(x, y, &format!("{path}[{i}]"), out);
            }
        }
        (Value::Object(a), Value::Object(b)) if a.len() == b.len() => {
            for (k, x) in a {
                match b.get(k) {
                    Some(y) => compare(x, y, &format!("{path}.{k}"), out),
                    None => out.push(format!("{path}.{k}: missing from recomputation")),
                }
            }
        }
        (a, b) if a == b => {}
        _ => out.push(format!("{path}: structure differs")),
    }
}

fn compare_g_csv(text: &str, solution: &IdealSolution, out: &mut Vec<String>) -> Result<usize> {
    let mut rows = 0;
    for (line_no, line) in text.lines().enumerate().skip(1) {
        let fields = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("g.csv line {}", line_no + 1))?;
        if fields.len() != 2 + 2 * solution.n() {
            bail!("g.csv line {}: expected {} columns", line_no + 1, 2 + 2 * solution.n());
        }
        let z = Complex64::from_polar(fields[0], fields[1]);
        for (j, v) in solution.eval_all(z)?.into_iter().enumerate() {
            let saved = Complex64::new(fields[2 + 2 * j], fields[3 + 2 * j]);
            if !((saved - v).norm() <= REPRODUCE_TOL * v.norm().max(1.0)) {
                out.push(format!("g.csv line {}: g{} saved {saved}, recomputed {v}", line_no + 1, j + 1));
            }
        }
        rows += 1;
    }
    Ok(rows)
}

fn verify(args: &Common) -> Result<Outcome> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let saved: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.spec.display()))?;
    let spec_value = saved
        .get("spec")
        .cloned()
        .ok_or_else(|| anyhow!("{} is not a solve report (no spec)", args.spec.display()))?;
    let spec = ProblemSpec::from_value(spec_value).context("embedded spec")?;
    let t = Instant::now();
    let solved = solve_from_spec(&spec)?;
    let mut mismatches = Vec::new();
    compare(&saved, &solved.artifact, "$", &mut mismatches);
    let csv_path = args.spec.with_file_name("g.csv");
    let csv_rows = if csv_path.exists() {
        compare_g_csv(&fs::read_to_string(&csv_path)?, &solved.solution, &mut mismatches)?
    } else {
        0
    };
    let elapsed = t.elapsed().as_secs_f64();
    for m in mismatches.iter().take(20) {
        eprintln!("mismatch {m}");
    }
    let summary = json!({
        "provenance": provenance(&spec),
        "reproduced": mismatches.is_empty(),
        "mismatches": mismatches,
        "g_csv_rows": csv_rows,
        "accepted": solved.artifact["accepted"],
        "failing": solved.artifact["failing"],
    });
    emit(args, "verification.json", &summary)?;
    write_timings(args, &[("verify", elapsed)])?;
    if !mismatches.is_empty() {
        let mut failing = vec!["reproduction".to_string()];
        if let Outcome::Rejected(f) = outcome_of(&solved.artifact) {
            failing.extend(f);
        }
        return Ok(Outcome::Rejected(failing));
    }
    Ok(outcome_of(&solved.artifact))
}

fn write_plot(
    dir: &Path,
    field: &str,
    spec: &ProblemSpec,
    solution: Option<&IdealSolution>,
    n_r: usize,
    n_a: usize,
) -> Result<()> {
    let need = || solution.ok_or_else(|| anyhow!("field {field:?} needs a solution"));
    let data = match field.split_once(':') {
        None if field == "residual" => {
            let sol = need()?;
            let problem = sol.problem();
            PolarField::sample(n_r, n_a, |z| {
                let g = sol.eval_all(z)?;
                let lhs: Complex64 = problem.f.iter().zip(&g).map(|(f, v)| f.eval(z) * v).sum();
                Ok((lhs - problem.g.eval(z).powi(3)).norm())
            })?
        }
        None if field == "abs_g" => {
            let name = spec.g.as_deref().ok_or_else(|| anyhow!("spec has no g"))?;
            let g = spec.function(name)?;
            PolarField::sample(n_r, n_a, |z| Ok(g.eval(z).norm()))?
        }
        None if field == "corona" => {
            let f = spec.f.iter().map(|n| spec.function(n)).collect::<Result<Vec<_>>>()?;
            PolarField::sample(n_r, n_a, |z| Ok(f.iter().map(|h| h.eval(z).norm_sqr()).sum()))?
        }
        Some(("abs", name)) => {
            let f = spec.function(name)?;
            PolarField::sample(n_r, n_a, |z| Ok(f.eval(z).norm()))?
        }
        Some(("abs_gj", j)) => {
            let sol = need()?;
            let j: usize = j.parse().with_context(|| format!("index in {field:?}"))?;
            if j == 0 || j > sol.n() {
                bail!("field {field:?}: index must lie in 1..={}", sol.n());
            }
            PolarField::sample(n_r, n_a, |z| Ok(sol.eval(j - 1, z)?.norm()))?
        }
        _ => bail!("unknown field {field:?}; expected residual, abs_g, corona, abs:<name> or abs_gj:<j>"),
    };
    let stem = field.replace(':', "_");
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{stem}.csv")), data.csv())?;
    fs::write(dir.join(format!("{stem}.svg")), data.svg(field))?;
    Ok(())
}

fn plot_cmd(args: &Common) -> Result<Outcome> {
    let spec = effective_spec(args)?;
    let field = args.plot.as_deref().ok_or_else(|| anyhow!("--plot <field> is required"))?;
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let (n_r, n_a) = parse_resolution(&args.resolution)?;
    let needs_solution = field == "residual" || field.starts_with("abs_gj:");
    let t = Instant::now();
    let solution = if needs_solution {
        let grid = spec.grid.build()?;
        let options = SolveOptions {
            arc_level: arc_level(&spec, &grid),
            ..SolveOptions::default()
        };
        Some(solve_ideal(&spec.problem()?, spec.solver, &grid, &options)?)
    } else {
        None
    };
    write_plot(&dir, field, &spec, solution.as_ref(), n_r, n_a)?;
    let args = Common {
        out: Some(dir),
        ..args.clone()
    };
    write_timings(&args, &[("plot", t.elapsed().as_secs_f64())])?;
    Ok(Outcome::Accepted)
}
