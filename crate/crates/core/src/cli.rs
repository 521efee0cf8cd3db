//! Command-line front end. Every subcommand writes JSON records (one per line) or CSV
//! tables; the same arguments always reproduce the same numeric output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::analytics::{
    beta, estimate_balancedness, gamma, generate_instance, optimality_limit, Estimator,
    InstanceSpec,
};
use crate::csfm::{
    brute_force_opt, continuous_greedy, multilinear_estimate, round_and_evaluate, OracleKind,
    SubmodularOracle, MAX_GENERAL_MATCHING_EDGES,
};
use crate::error::{CrsError, Result};
use crate::graph::FractionalPoint;
use crate::instance::Instance;
use crate::mc::{z_score, ZBattery};
use crate::oracle::{
    exact_balancedness, exact_expected_marginals, verify_monotonicity, MonotonicityMode,
    MonotonicityOutcome, MAX_EXACT_SUPPORT, MAX_MONOTONICITY_SUPPORT,
};
use crate::rng::RngStream;
use crate::sampler::{birkhoff_decompose, matching_polytope_decompose};
use crate::schemes::{Procedure, SchemeKind};

/// Exit code for usage errors.
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "crs",
    version,
    about = "Monotone contention resolution schemes for matchings"
)]
struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true, env = "CRS_DEFAULT_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Balancedness of a scheme on an instance.
    Estimate(EstimateArgs),
    /// Runs the invariant battery on a small instance.
    Verify(VerifyArgs),
    /// Optimal bipartite balancedness constant.
    Beta(ConstantArgs),
    /// General-matching balancedness constant.
    Gamma(ConstantArgs),
    /// Balancedness limit of the optimal scheme on the complete bipartite graph.
    Limit(LimitArgs),
    /// Decomposes a marginal vector into matchings.
    Decompose(DecomposeArgs),
    /// Continuous greedy followed by contention resolution.
    Pipeline(PipelineArgs),
    /// Writes an instance file.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Instance spec: knn:n,b | fig5:eps,k | path3:eps | randbip:n,p,b,seed | randgen:n,p,b,seed | file:PATH
    #[arg(long, conflicts_with = "graph")]
    instance: Option<String>,
    /// Instance JSON file (same as --instance file:PATH).
    #[arg(long)]
    graph: Option<PathBuf>,
}

impl InstanceArgs {
    fn spec(&self) -> Result<InstanceSpec> {
        match (&self.instance, &self.graph) {
            (Some(s), _) => InstanceSpec::from_str(s),
            (None, Some(p)) => Ok(InstanceSpec::File(p.clone())),
            (None, None) => Err(CrsError::Input(
                "one of --instance or --graph is required".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EstimatorArg {
    Direct,
    Conditional,
    Exact,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    scheme: String,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Conditional)]
    estimator: EstimatorArg,
    /// Output file; `.csv` writes a table, anything else JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Largest edge count accepted.
    #[arg(long, default_value_t = 8)]
    max_edges: usize,
    /// Restrict to one scheme.
    #[arg(long)]
    scheme: Option<String>,
    /// Monte Carlo trials for the exact-vs-sampled comparison.
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstantArgs {
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Print a JSON record instead of the bare value.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// JSON array of marginals (numbers or "p/q" strings); defaults to the instance's x.
    #[arg(long)]
    marginals: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FunctionArg {
    Modular,
    Coverage,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = FunctionArg::Coverage)]
    function: FunctionArg,
    #[arg(long, default_value = "alg1")]
    scheme: String,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 20)]
    steps: u32,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    instance: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let mut buf = Vec::new();
    let result = match cli.jobs {
        Some(0) => Err(CrsError::Input("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CrsError::Input(e.to_string()))
            .and_then(|pool| pool.install(|| run(&cli, &mut buf))),
        None => run(&cli, &mut buf),
    };
    let _ = stdout.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let seed = cli.seed;
    match &cli.command {
        Command::Estimate(a) => estimate(a, seed, start, stdout),
        Command::Verify(a) => verify(a, seed, stdout),
        Command::Beta(a) => constant("beta", beta(a.b)?, a, stdout),
        Command::Gamma(a) => constant("gamma", gamma(a.b)?, a, stdout),
        Command::Limit(a) => {
            let est = optimality_limit(a.n, a.b, a.trials, &RngStream::new(seed, 0))?;
            let rec = json!({
                "command": "limit",
                "n": a.n,
                "b": a.b,
                "mean": est.value,
                "std_error": est.std_error,
                "ci": ci(est.value, est.std_error),
                "exact": est.exact,
                "trials": if est.exact { Value::Null } else { json!(a.trials) },
                "seed": seed,
            });
            emit_json(&[rec], a.out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Decompose(a) => decompose(a, stdout),
        Command::Pipeline(a) => pipeline(a, seed, start, stdout),
        Command::Generate(a) => {
            let inst = generate_instance(&InstanceSpec::from_str(&a.instance)?)?;
            let text = inst.to_json()?;
            match &a.out {
                Some(p) => fs::write(p, text + "\n")?,
                None => writeln!(stdout, "{text}")?,
            }
            Ok(0)
        }
    }
}

fn ci(mean: f64, se: f64) -> Value {
    let h = crate::analytics::Z99 * se;
    json!([mean - h, mean + h])
}

fn emit_json(records: &[Value], out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_csv(
    header: &[&str],
    rows: &[Vec<String>],
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CrsError::Io(e.into_error()))?;
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => stdout.write_all(&bytes)?,
    }
    Ok(())
}

fn is_csv(out: Option<&Path>) -> bool {
    out.and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn constant(name: &str, value: f64, a: &ConstantArgs, stdout: &mut dyn Write) -> Result<i32> {
    if a.json || a.out.is_some() {
        let rec = json!({ "command": name, "b": a.b, "mean": value });
        emit_json(&[rec], a.out.as_deref(), stdout)?;
    } else {
        writeln!(stdout, "{value:.10}")?;
    }
    Ok(0)
}

fn estimate(a: &EstimateArgs, seed: u64, start: Instant, stdout: &mut dyn Write) -> Result<i32> {
    let procedure = Procedure::from_str(&a.scheme)?;
    let spec = a.instance.spec()?;
    let inst = generate_instance(&spec)?;
    let report = match a.estimator {
        EstimatorArg::Exact => match procedure {
            Procedure::Cr(kind) => exact_balancedness(kind, &inst.graph, &inst.x)?,
            Procedure::Merged(_) => {
                return Err(CrsError::Capability(
                    "exact balancedness covers contention resolution schemes only".into(),
                ))
            }
        },
        EstimatorArg::Direct | EstimatorArg::Conditional => {
            let est = if matches!(a.estimator, EstimatorArg::Direct) {
                Estimator::Direct
            } else {
                Estimator::Conditional
            };
            estimate_balancedness(
                procedure,
                &inst.graph,
                &inst.x,
                a.trials,
                &RngStream::new(seed, 0),
                est,
            )?
        }
    };
    let trials = report.trials;
    let records: Vec<Value> = report
        .edges
        .iter()
        .map(|b| {
            let interval = match b.half_width {
                Some(h) => json!([b.value - h, b.value + h]),
                None => json!([b.value - report.error_bound, b.value + report.error_bound]),
            };
            json!({
                "scheme": procedure.to_string(),
                "instance": spec.to_string(),
                "edge": b.edge,
                "mean": b.value,
                "ci": interval,
                "trials": trials,
                "seed": seed,
            })
        })
        .collect();
    if is_csv(a.out.as_deref()) {
        let rows: Vec<Vec<String>> = report
            .edges
            .iter()
            .map(|b| {
                let h = b.half_width.unwrap_or(report.error_bound);
                vec![
                    procedure.to_string(),
                    spec.to_string(),
                    b.edge.to_string(),
                    b.value.to_string(),
                    (b.value - h).to_string(),
                    (b.value + h).to_string(),
                    trials.map_or(String::new(), |t| t.to_string()),
                    seed.to_string(),
                ]
            })
            .collect();
        emit_csv(
            &[
                "scheme", "instance", "edge", "mean", "ci_low", "ci_high", "trials", "seed",
            ],
            &rows,
            a.out.as_deref(),
            stdout,
        )?;
    } else {
        emit_json(&records, a.out.as_deref(), stdout)?;
    }
    let summary = json!({
        "summary": "estimate",
        "scheme": procedure.to_string(),
        "instance": spec.to_string(),
        "mode": report.mode,
        "min": report.min,
        "min_edge": report.min_edge,
        "trials": trials,
        "seed": seed,
        "wall_time_ms": start.elapsed().as_millis() as u64,
    });
    writeln!(stdout, "{}", serde_json::to_string(&summary)?)?;
    Ok(0)
}

/// Proven lower bounds on balancedness at `b = 1`, per scheme kind.
fn known_floor(kind: SchemeKind) -> Option<(f64, &'static str)> {
    match kind {
        SchemeKind::BipSimple => Some((1.0 / 3.0, "1/3")),
        SchemeKind::GenRandomOrder => Some((1.0 / 3.0, "1/3")),
        SchemeKind::BipPoisson => beta(1.0).ok().map(|v| (v, "beta(1)")),
        SchemeKind::GenPoisson | SchemeKind::Mixed => gamma(1.0).ok().map(|v| (v, "gamma(1)")),
        SchemeKind::RefIsolated => Some((1.0 / 8.0, "1/8")),
        _ => None,
    }
}

struct Row {
    check: &'static str,
    scheme: String,
    status: &'static str,
    detail: String,
}

impl Row {
    fn new(check: &'static str, scheme: &str, ok: bool, detail: String) -> Self {
        Row {
            check,
            scheme: scheme.to_string(),
            status: if ok { "pass" } else { "fail" },
            detail,
        }
    }

    fn skip(check: &'static str, scheme: &str, detail: impl Into<String>) -> Self {
        Row {
            check,
            scheme: scheme.to_string(),
            status: "skip",
            detail: detail.into(),
        }
    }
}

fn verify(a: &VerifyArgs, seed: u64, stdout: &mut dyn Write) -> Result<i32> {
    let inst = generate_instance(&a.instance.spec()?)?;
    let m = inst.graph.edge_count();
    if m > a.max_edges {
        return Err(CrsError::Capability(format!(
            "instance has {m} edges, above --max-edges {}",
            a.max_edges
        )));
    }
    let procedures = match &a.scheme {
        Some(s) => vec![Procedure::from_str(s)?],
        None => Procedure::all(),
    };
    let rows = verify_rows(&inst, &procedures, a.trials, seed)?;
    let failed = rows.iter().any(|r| r.status == "fail");
    let table: Vec<Vec<String>> = rows
        .into_iter()
        .map(|r| {
            vec![
                r.check.to_string(),
                r.scheme,
                r.status.to_string(),
                r.detail,
            ]
        })
        .collect();
    emit_csv(
        &["check", "scheme", "status", "detail"],
        &table,
        a.out.as_deref(),
        stdout,
    )?;
    Ok(if failed { 1 } else { 0 })
}

fn verify_rows(
    inst: &Instance,
    procedures: &[Procedure],
    trials: u64,
    seed: u64,
) -> Result<Vec<Row>> {
    let (g, x) = (&inst.graph, &inst.x);
    let supp = x.support();
    let bipartite = g.is_bipartite();
    let in_p = g.in_matching_polytope(x.values(), 1.0)?;
    let mut rows = vec![Row::new(
        "input-in-matching-polytope",
        "-",
        in_p,
        format!(
            "|E| = {}, |supp(x)| = {}, bipartite = {bipartite}",
            g.edge_count(),
            supp.len()
        ),
    )];
    for (pi, &p) in procedures.iter().enumerate() {
        let name = p.to_string();
        let kind = p.kind();
        if kind.requires_bipartite() && !bipartite {
            rows.push(Row::skip("all", &name, "scheme requires a bipartite graph"));
            continue;
        }
        let mc_stream = RngStream::new(seed, pi as u64);
        let mc = estimate_balancedness(p, g, x, trials, &mc_stream, Estimator::Direct)?;
        let Procedure::Cr(kind) = p else {
            let (floor, label) = known_floor(kind).expect("merged kinds have floors");
            let zs: Vec<f64> = mc
                .edges
                .iter()
                .map(|b| ((floor - b.value) / b.std_error.unwrap_or(0.0).max(1e-300)).max(0.0))
                .collect();
            let bat = ZBattery::new(&zs);
            rows.push(Row::new(
                "floor",
                &name,
                !in_p || bat.passed(),
                format!("sampled min {:.6} vs {label} = {floor:.6}", mc.min),
            ));
            continue;
        };

        if supp.len() <= MAX_MONOTONICITY_SUPPORT {
            let n = supp.len();
            let mut ok = true;
            let mut worst = String::new();
            'outer: for mask in 0u32..1 << n {
                let ids: Vec<usize> = (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| supp[i])
                    .collect();
                let a = crate::graph::EdgeSet::from_ids(g.edge_count(), &ids)?;
                let y = exact_expected_marginals(kind, g, x, &a)?;
                let tol = 1e-9;
                if !g.in_matching_polytope(&y, 1.0 + tol)? {
                    ok = false;
                    worst = format!("E[y^A] outside the matching polytope for A = {ids:?}");
                    break 'outer;
                }
                if let Some(e) = (0..y.len()).find(|&e| y[e] > 0.0 && !a.contains(e)) {
                    ok = false;
                    worst = format!("edge {e} outside A = {ids:?} has mass");
                    break 'outer;
                }
            }
            rows.push(Row::new(
                "marginals-in-polytope",
                &name,
                ok,
                if ok {
                    format!("{} subsets", 1u64 << n)
                } else {
                    worst
                },
            ));
            let mono = verify_monotonicity(kind, g, x, MonotonicityMode::Exhaustive)?;
            let detail = match &mono {
                MonotonicityOutcome::Pass { pairs_checked } => format!("{pairs_checked} pairs"),
                MonotonicityOutcome::Fail(v) => format!(
                    "edge {} drops from {:.6} on {:?} to {:.6} on {:?}",
                    v.edge, v.value_smaller, v.smaller, v.value_larger, v.larger
                ),
            };
            rows.push(Row::new("monotonicity", &name, mono.passed(), detail));
        } else {
            rows.push(Row::skip(
                "monotonicity",
                &name,
                "support too large for exhaustive check",
            ));
        }

        if supp.len() <= MAX_EXACT_SUPPORT {
            let exact = exact_balancedness(kind, g, x)?;
            let zs: Vec<f64> = exact
                .edges
                .iter()
                .map(|b| {
                    let s = mc.entry(b.edge).expect("same support");
                    z_score(
                        s.value,
                        b.value,
                        s.std_error.unwrap_or(0.0),
                        exact.error_bound,
                    )
                })
                .collect();
            let bat = ZBattery::new(&zs);
            rows.push(Row::new(
                "exact-vs-sampled",
                &name,
                bat.passed(),
                format!(
                    "{} edges, {} beyond 3 sigma (allowed {}), max |z| = {:.2}",
                    bat.comparisons, bat.exceedances, bat.allowed, bat.max_abs_z
                ),
            ));
            match known_floor(kind) {
                Some((floor, label)) if in_p => rows.push(Row::new(
                    "floor",
                    &name,
                    exact.min >= floor - exact.error_bound - 1e-12,
                    format!("exact min {:.6} vs {label} = {floor:.6}", exact.min),
                )),
                Some(_) => rows.push(Row::skip(
                    "floor",
                    &name,
                    "x is outside the matching polytope",
                )),
                None => {}
            }
        } else {
            rows.push(Row::skip(
                "exact-vs-sampled",
                &name,
                "support too large for the exact oracle",
            ));
        }
    }
    Ok(rows)
}

fn parse_marginal(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            let f = n
                .as_f64()
                .ok_or_else(|| CrsError::Input(format!("bad number {n}")))?;
            BigRational::from_float(f).ok_or_else(|| CrsError::Input(format!("bad number {n}")))
        }
        Value::String(s) => BigRational::from_str(s.trim())
            .map_err(|_| CrsError::Input(format!("cannot parse rational '{s}'"))),
        other => Err(CrsError::Input(format!(
            "unexpected marginal entry {other}"
        ))),
    }
}

fn decompose(a: &DecomposeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let inst = generate_instance(&a.instance.spec()?)?;
    let g = &inst.graph;
    let y: Vec<BigRational> = match &a.marginals {
        Some(p) => {
            let v: Vec<Value> = serde_json::from_str(&fs::read_to_string(p)?)?;
            v.iter().map(parse_marginal).collect::<Result<_>>()?
        }
        None => inst.x.to_rational(),
    };
    if y.len() != g.edge_count() {
        return Err(CrsError::Input(format!(
            "{} marginals for {} edges",
            y.len(),
            g.edge_count()
        )));
    }
    let comb = if g.is_bipartite() {
        birkhoff_decompose(g, &y)?
    } else {
        matching_polytope_decompose(g, &y)?
    };
    debug_assert!(comb.total_weight() == BigRational::one() || comb.terms.is_empty());
    let rows: Vec<Vec<String>> = comb
        .terms
        .iter()
        .filter(|(w, _)| !w.is_zero())
        .map(|(w, m)| {
            let ids: Vec<String> = m.iter().map(|e| e.to_string()).collect();
            vec![w.to_string(), ids.join(",")]
        })
        .collect();
    emit_csv(&["weight", "edges"], &rows, a.out.as_deref(), stdout)?;
    Ok(0)
}

fn pipeline(a: &PipelineArgs, seed: u64, start: Instant, stdout: &mut dyn Write) -> Result<i32> {
    let procedure = Procedure::from_str(&a.scheme)?;
    let spec = a.instance.spec()?;
    let inst = generate_instance(&spec)?;
    let g = &inst.graph;
    let kind = match a.function {
        FunctionArg::Modular => OracleKind::Modular,
        FunctionArg::Coverage => OracleKind::Coverage,
    };
    let base = RngStream::new(seed, 0);
    let f = SubmodularOracle::random(kind, g.edge_count(), &mut base.derive(0))?;
    let samples = a.trials.clamp(1, 2000);
    let x: FractionalPoint = continuous_greedy(&f, g, a.b, a.steps, samples, &base.derive(1))?;
    let fml = multilinear_estimate(&f, &x, a.trials, &base.derive(2))?;
    let rounded = round_and_evaluate(&f, g, &x, procedure, a.trials, &base.derive(3))?;
    let opt = if g.edge_count() <= MAX_GENERAL_MATCHING_EDGES {
        Some(brute_force_opt(&f, g)?.0)
    } else {
        None
    };
    let rec = json!({
        "command": "pipeline",
        "function": kind.to_string(),
        "scheme": procedure.to_string(),
        "instance": spec.to_string(),
        "b": a.b,
        "steps": a.steps,
        "x": x.values(),
        "f_ml": fml.value,
        "f_ml_stderr": fml.stderr,
        "mean": rounded.mean,
        "stderr": rounded.stderr,
        "ci": ci(rounded.mean, rounded.stderr),
        "ratio": if fml.value > 0.0 { json!(rounded.mean / fml.value) } else { Value::Null },
        "opt": opt,
        "trials": a.trials,
        "seed": seed,
    });
    emit_json(&[rec], a.out.as_deref(), stdout)?;
    let summary = json!({
        "summary": "pipeline",
        "wall_time_ms": start.elapsed().as_millis() as u64,
    });
    writeln!(stdout, "{}", serde_json::to_string(&summary)?)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("crs").chain(args.iter().copied());
        let code = dispatch(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn beta_prints_value() {
        let (code, out, _) = run_cli(&["beta", "--b", "1"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("0.4762"));
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run_cli(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_cli(&["beta", "--nope"]).0, EXIT_USAGE);
        assert_eq!(run_cli(&["--help"]).0, 0);
    }

    #[test]
    fn input_and_capability_codes() {
        assert_eq!(run_cli(&["beta", "--b=-1"]).0, 1);
        let (code, _, err) = run_cli(&[
            "estimate",
            "--scheme",
            "alg1",
            "--instance",
            "randgen:5,1,1,3",
            "--trials",
            "1000",
        ]);
        assert_eq!(code, 2, "{err}");
    }
}
