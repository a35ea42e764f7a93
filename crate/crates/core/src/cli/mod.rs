//! Command-line front end: JSON instance files in, one-line JSON reports out.
//!
//! Exit codes: 0 success, 2 invalid input, 3 scale guard, 4 numerically
//! inconclusive.

mod instance;
pub mod json;

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

pub use instance::{InstanceFile, SCHEMA};

use crate::convex::{classify_c0, HullCase, HullClassification};
use crate::error::{Error, Result};
use crate::geom::{Tolerances, Vector};
use crate::oracle::{boundary_sample_max, exhaustive_corner_oracle};
use crate::solver::{solve, SolveReport};
use crate::ssp::{build_geometry, corner, recovery_experiment, uniform_rho_solve, SspGeometry, SspInstance};
use json::{num, one_based, vec, vecs};

/// Largest gap between oracle and solver distances counted as agreement.
pub const ORACLE_AGREEMENT: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "ballmax", version, about = "Farthest point of an intersection of equal-radius balls")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate C0 relative to the convex hull of the centers.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Compute the farthest point of the ball intersection from C0.
    Solve(SolveArgs),
    /// Subset-sum embedding tools.
    Ssp {
        #[command(subcommand)]
        action: SspAction,
    },
    /// Print boundary points of a planar ball intersection as CSV.
    EmitBoundary {
        file: PathBuf,
        /// Angular samples per circle.
        #[arg(long, default_value_t = 720)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Override a tolerance, e.g. `--tol tie=1e-6` (repeatable).
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
    /// Attach a brute-force sampling comparison (n = 2 or 3).
    #[arg(long)]
    oracle: bool,
    /// Sample budget of the oracle.
    #[arg(long, default_value_t = 1_000_000)]
    budget: usize,
    #[arg(long, env = "BALLMAX_SEED", default_value_t = 0)]
    seed: u64,
    /// Instance files solved in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Leave the wall-time field out of the report.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct SspArgs {
    /// Weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    s: Vec<f64>,
    /// Target sum.
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    r: f64,
}

#[derive(Debug, Subcommand)]
enum SspAction {
    /// Print the embedding.
    Build(SspArgs),
    /// Check one binary corner.
    Check {
        #[command(flatten)]
        ssp: SspArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<u8>,
    },
    /// Decide the instance by enumerating every corner (n <= 20).
    Decide(SspArgs),
    /// Recover the solution from perturbed query points.
    Experiment {
        #[command(flatten)]
        ssp: SspArgs,
        /// Known solution; found by enumeration when omitted.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<u8>>,
        #[arg(long)]
        eps: f64,
        /// Common level for every query point instead of the exact ones.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, env = "BALLMAX_SEED", default_value_t = 0)]
        seed: u64,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, stderr: String::new(), code: 0 }
    }
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { Outcome::ok(text) } else { Outcome { stdout: String::new(), stderr: text, code } };
        }
    };
    match cli.command {
        Command::Classify { file, tol } => single(classify_report(&file, &tol)),
        Command::Solve(args) => solve_files(&args),
        Command::Ssp { action } => single(ssp_report(&action)),
        Command::EmitBoundary { file, samples } => match emit_boundary(&file, samples) {
            Ok(csv) => Outcome::ok(csv),
            Err(e) => Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() },
        },
    }
}

fn single((report, code): (Value, i32)) -> Outcome {
    let stderr =
        report.get("error").map(|e| format!("error: {}\n", e["message"].as_str().unwrap_or(""))).unwrap_or_default();
    Outcome { stdout: json::to_line(&report) + "\n", stderr, code }
}

fn finish(mut head: Map<String, Value>, body: Result<Map<String, Value>>) -> (Value, i32) {
    match body {
        Ok(body) => {
            head.extend(body);
            (Value::Object(head), 0)
        }
        Err(e) => {
            head.insert("error".into(), json!({ "kind": e.kind(), "message": e.to_string() }));
            (Value::Object(head), e.exit_code())
        }
    }
}

fn header(command: Value) -> Map<String, Value> {
    let mut head = Map::new();
    head.insert("schema".into(), json!(SCHEMA));
    head.insert("command".into(), command);
    head
}

fn tolerances(args: &TolArgs) -> Result<Tolerances> {
    let mut value = serde_json::to_value(Tolerances::default()).expect("tolerances serialize");
    for item in &args.overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("--tol expects NAME=VALUE, got {item:?}")))?;
        let slot =
            value.get_mut(key.trim()).ok_or_else(|| Error::InvalidInput(format!("unknown tolerance {key:?}")))?;
        *slot = serde_json::from_str(raw.trim())
            .map_err(|_| Error::InvalidInput(format!("tolerance {key} needs a number, got {raw:?}")))?;
    }
    serde_json::from_value(value).map_err(|e| Error::InvalidInput(format!("tolerances: {e}")))
}

fn instance_json(file: &InstanceFile) -> Value {
    serde_json::to_value(file).expect("instance files serialize")
}

fn classification_json(cls: &HullClassification) -> Map<String, Value> {
    let mut out = Map::new();
    let case = match cls.case {
        HullCase::Interior => "interior",
        HullCase::Boundary => "boundary",
        HullCase::Outside => "outside",
    };
    out.insert("case".into(), json!(case));
    if cls.case == HullCase::Boundary {
        out.insert("sigma".into(), one_based(&cls.sigma));
        out.insert("alpha".into(), Value::Array(cls.alpha.iter().map(|a| num(*a)).collect()));
        if let Some(normal) = &cls.normal {
            out.insert("normal".into(), vec(normal));
        }
    }
    out.insert("gap".into(), num(cls.gap));
    out
}

fn classify_report(path: &Path, tol: &TolArgs) -> (Value, i32) {
    let head = header(json!({ "name": "classify", "file": path.display().to_string(), "tol": tol.overrides }));
    let body = (|| {
        let file = InstanceFile::read(path)?;
        let inst = file.instance(tolerances(tol)?)?;
        let mut out = Map::new();
        out.insert("instance".into(), instance_json(&file));
        out.extend(classification_json(&classify_c0(&inst)?));
        Ok(out)
    })();
    finish(head, body)
}

fn solve_files(args: &SolveArgs) -> Outcome {
    let jobs = args.jobs.clamp(1, args.files.len());
    let mut results: Vec<Option<(Value, i32)>> = vec![None; args.files.len()];
    std::thread::scope(|scope| {
        for chunk in results.chunks_mut(args.files.len().div_ceil(jobs)).enumerate() {
            let (c, slots) = chunk;
            let start = c * args.files.len().div_ceil(jobs);
            scope.spawn(move || {
                for (i, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(solve_report(&args.files[start + i], args));
                }
            });
        }
    });
    let mut out = Outcome::ok(String::new());
    for (report, code) in results.into_iter().flatten() {
        if let Some(e) = report.get("error") {
            let _ = writeln!(out.stderr, "error: {}", e["message"].as_str().unwrap_or(""));
        }
        out.stdout.push_str(&json::to_line(&report));
        out.stdout.push('\n');
        out.code = out.code.max(code);
    }
    out
}

fn solve_report(path: &Path, args: &SolveArgs) -> (Value, i32) {
    let start = Instant::now();
    let mut echo = json!({
        "name": "solve",
        "file": path.display().to_string(),
        "tol": args.tol.overrides,
        "oracle": args.oracle,
    });
    if args.oracle {
        echo["budget"] = json!(args.budget);
        echo["seed"] = json!(args.seed);
    }
    let head = header(echo);
    let body = (|| {
        let file = InstanceFile::read(path)?;
        let tol = tolerances(&args.tol)?;
        let inst = file.instance(tol)?;
        let report = solve(&inst)?;
        let mut out = Map::new();
        out.insert("instance".into(), instance_json(&file));
        out.insert("tolerances".into(), serde_json::to_value(tol).expect("tolerances serialize"));
        out.extend(solve_json(&report));
        if args.oracle {
            let oracle = match boundary_sample_max(&inst, args.budget, args.seed) {
                Ok(o) => {
                    let diff = (o.best - report.rstar).abs();
                    json!({
                        "best": num(o.best),
                        "clusters": o.clusters,
                        "argmax": vecs(&o.argmax),
                        "budget": o.budget,
                        "cluster_radius": num(o.cluster_radius),
                        "abs_diff": num(diff),
                        "agrees": diff <= ORACLE_AGREEMENT,
                    })
                }
                Err(e) => json!({ "error": { "kind": e.kind(), "message": e.to_string() } }),
            };
            out.insert("oracle".into(), oracle);
        }
        if !args.no_timing {
            out.insert("wall_time_s".into(), num(start.elapsed().as_secs_f64()));
        }
        Ok(out)
    })();
    finish(head, body)
}

/// Report fields of a solve, with one-based sphere indices.
pub fn solve_json(report: &SolveReport) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("case".into(), serde_json::to_value(report.case).expect("enum serializes"));
    out.insert("classification".into(), Value::Object(classification_json(&report.classification)));
    out.insert("rstar".into(), num(report.rstar));
    out.insert("maximizers".into(), vecs(&report.maximizers));
    out.insert("multiplicity".into(), serde_json::to_value(report.multiplicity).expect("enum serializes"));
    out.insert(
        "certificates".into(),
        Value::Array(
            report
                .certificates
                .iter()
                .map(|c| {
                    json!({
                        "residuals": c.residuals.iter().map(|r| num(*r)).collect::<Vec<_>>(),
                        "active": one_based(&c.active),
                    })
                })
                .collect(),
        ),
    );
    out.insert("rbar".into(), report.rbar.map_or(Value::Null, num));
    out.insert("rbar_attained".into(), json!(report.rbar_attained));
    out.insert("hull_inclusion".into(), serde_json::to_value(report.hull_inclusion).expect("enum serializes"));
    out.insert("uniqueness".into(), serde_json::to_value(report.uniqueness).expect("enum serializes"));
    out
}

fn ssp_geometry(args: &SspArgs) -> Result<SspGeometry> {
    build_geometry(&SspInstance::new(args.s.clone(), args.t, args.beta, args.r)?)
}

fn ssp_echo(name: &str, args: &SspArgs) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("name".into(), json!(format!("ssp {name}")));
    m.insert("s".into(), Value::Array(args.s.iter().map(|v| num(*v)).collect()));
    m.insert("t".into(), num(args.t));
    m.insert("beta".into(), num(args.beta));
    m.insert("r".into(), num(args.r));
    m
}

fn ssp_report(action: &SspAction) -> (Value, i32) {
    match action {
        SspAction::Build(args) => {
            finish(header(Value::Object(ssp_echo("build", args))), ssp_geometry(args).map(|g| geometry_json(&g)))
        }
        SspAction::Check { ssp, x } => {
            let mut echo = ssp_echo("check", ssp);
            echo.insert("x".into(), json!(x));
            let body = (|| {
                let g = ssp_geometry(ssp)?;
                let check = g.corner_check(x)?;
                let point = corner(x);
                let mut out = Map::new();
                out.insert("is_solution".into(), json!(check.is_solution));
                out.insert("distance".into(), num(check.distance));
                out.insert("r0".into(), num(g.r0));
                out.insert("in_q".into(), json!(g.contains(&point)));
                out.insert("slab_residual".into(), num(((&point - &g.cs).norm() - g.instance.r).abs()));
                Ok(out)
            })();
            finish(header(Value::Object(echo)), body)
        }
        SspAction::Decide(args) => {
            let body = (|| {
                let g = ssp_geometry(args)?;
                let dec = g.decide_small()?;
                let oracle = exhaustive_corner_oracle(&g)?;
                let mut out = Map::new();
                out.insert("max".into(), num(dec.max));
                out.insert("equals_r0".into(), json!(dec.equals_r0));
                out.insert("corners".into(), json!(dec.corners));
                out.insert("solvable".into(), json!(dec.solvable));
                out.insert("r0".into(), num(g.r0));
                out.insert("gap".into(), num(dec.gap));
                out.insert("oracle_best".into(), num(oracle.best));
                Ok(out)
            })();
            finish(header(Value::Object(ssp_echo("decide", args))), body)
        }
        SspAction::Experiment { ssp, x, eps, rho, seed } => {
            let mut echo = ssp_echo("experiment", ssp);
            echo.insert("x".into(), json!(x));
            echo.insert("eps".into(), num(*eps));
            echo.insert("rho".into(), rho.map_or(Value::Null, num));
            echo.insert("seed".into(), json!(seed));
            let body = (|| {
                let g = ssp_geometry(ssp)?;
                let xstar = match x {
                    Some(x) => x.clone(),
                    None => {
                        let all = g.solutions()?;
                        match all.as_slice() {
                            [only] => only.clone(),
                            _ => {
                                return Err(Error::Precondition(format!(
                                    "the instance has {} solutions; pass --x",
                                    all.len()
                                )))
                            }
                        }
                    }
                };
                let mut out = Map::new();
                out.insert("xstar".into(), json!(xstar));
                out.insert("r0".into(), num(g.r0));
                match rho {
                    None => {
                        let rep = recovery_experiment(&g, &xstar, *eps, *seed)?;
                        out.insert("recovered".into(), json!(rep.recovered));
                        out.insert("recovered_by".into(), json!(rep.recovered_by));
                        out.insert("attempts".into(), json!(rep.attempts));
                        out.insert("queries".into(), vecs(&rep.queries));
                        out.insert("levels".into(), Value::Array(rep.levels.iter().map(|l| num(*l)).collect()));
                        out.insert("separation_holds".into(), json!(rep.separation_holds));
                        out.insert("cap_residual".into(), num(rep.cap_residual));
                        let outcomes = rep
                            .outcomes
                            .iter()
                            .map(|o| {
                                json!({
                                    "label": o.label,
                                    "maximizer": o.maximizer.as_ref().map_or(Value::Null, vec),
                                    "distance": o.distance.map_or(Value::Null, num),
                                    "recovered": o.recovered,
                                    "xstar_on_sphere": o.xstar_on_sphere,
                                    "xstar_trim_residual": num(o.xstar_trim_residual),
                                    "error": o.error,
                                })
                            })
                            .collect();
                        out.insert("outcomes".into(), Value::Array(outcomes));
                    }
                    Some(rho) => {
                        let rep = uniform_rho_solve(&g, &xstar, *eps, *rho, *seed)?;
                        out.insert("labels".into(), json!(rep.labels));
                        out.insert(
                            "deltas".into(),
                            Value::Array(rep.deltas.iter().map(|d| d.map_or(Value::Null, num)).collect()),
                        );
                        out.insert("max_delta".into(), rep.max_delta.map_or(Value::Null, num));
                        out.insert("errors".into(), json!(rep.errors));
                    }
                }
                Ok(out)
            })();
            finish(header(Value::Object(echo)), body)
        }
    }
}

fn geometry_json(g: &SspGeometry) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("n".into(), json!(g.dim()));
    out.insert("c".into(), vec(&g.c));
    out.insert("d".into(), num(g.d));
    out.insert("d_min".into(), num(g.d_min));
    let centers: Vec<Value> = g
        .center_labels()
        .into_iter()
        .zip(g.centers())
        .map(|(label, c)| json!({ "label": label, "center": vec(&c) }))
        .collect();
    out.insert("centers".into(), Value::Array(centers));
    out.insert("ps".into(), vec(&g.ps));
    out.insert("ds".into(), num(g.ds));
    out.insert("cs".into(), vec(&g.cs));
    out.insert("c0".into(), vec(&g.c0));
    out.insert("r0".into(), num(g.r0));
    out.insert("inclusion".into(), serde_json::to_value(g.inclusion).expect("enum serializes"));
    out
}

/// Points of each circle lying in every other disc, as `x1,x2,active_ball_index`.
pub fn emit_boundary(path: &Path, samples: usize) -> Result<String> {
    let file = InstanceFile::read(path)?;
    if file.n != 2 {
        return Err(Error::InvalidInput(format!("boundary export needs n = 2, got {}", file.n)));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("--samples must be positive".into()));
    }
    let sys = file.system()?;
    let r = sys.radius();
    let mut csv = String::from("x1,x2,active_ball_index\n");
    for (k, c) in sys.centers().iter().enumerate() {
        for j in 0..samples {
            let theta = 2.0 * PI * j as f64 / samples as f64;
            let x: Vector = c + Vector::from_vec(vec![theta.cos() * r, theta.sin() * r]);
            if sys.contains(&x, 1e-9) {
                let _ = writeln!(csv, "{:.16e},{:.16e},{}", x[0], x[1], k + 1);
            }
        }
    }
    Ok(csv)
}
