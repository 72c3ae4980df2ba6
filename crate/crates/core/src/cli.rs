//! Command-line front end.
//!
//! Exit codes: `0` on success, `1` when an asserted bound fails (or a
//! condition-number flow meets a singular node), `2` on invalid input.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::charmap::{char_map_hermitian_with, char_map_normal_with, condition_number_flow_with, embedded_flow, graph_surface_area};
use crate::config::Tolerances;
use crate::error::Error;
use crate::io::{export_family, load_family};
use crate::lab::fuzz::worst_pair_json;
use crate::lab::{
    fuzz_inequalities, make_companion, make_family, run_convergence, run_example, ConvergenceParams, ConvergenceStudy,
    Counterexample, FamilyId, InequalityKind,
};
use crate::report::{write_atomic, ExperimentReport, Relation};
use crate::sobolev::{ordered_as_vectors, w1q_norm, CsvValue, Grid, SampledFamily, SobolevReport};
use crate::unordered::AlmgrenEmbedding;

pub const THREADS_VAR: &str = "EIGENFLOW_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "eigenflow", version, about = "Eigenvalue stability laboratory for Hermitian and normal matrix families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one counterexample and check its bounds.
    Example(ExampleArgs),
    /// Check a perturbation inequality on random pairs.
    Fuzz(FuzzArgs),
    /// Compute a spectral flow of a matrix family stored on disk.
    Flow(FlowArgs),
    /// Write a counterexample family to disk in the manifest format.
    ExportFamily(ExportArgs),
    /// Run a convergence study over a sweep of n.
    Convergence(ConvergenceArgs),
}

fn parse_family(s: &str) -> Result<FamilyId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<InequalityKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_study(s: &str) -> Result<ConvergenceStudy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// exA, exUcq, exAuc or exA2.
    #[arg(long, value_parser = parse_family)]
    pub id: FamilyId,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Number of grid nodes (family default when omitted).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value = "eigenflow-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// weyl, loewner, hw, sv or bdm.
    #[arg(long, value_parser = parse_kind)]
    pub kind: InequalityKind,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "eigenflow-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowMap {
    Ordered,
    Unordered,
    Kappa,
    Area,
}

impl FlowMap {
    fn name(self) -> &'static str {
        match self {
            FlowMap::Ordered => "ordered",
            FlowMap::Unordered => "unordered",
            FlowMap::Kappa => "kappa",
            FlowMap::Area => "area",
        }
    }
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Path to the manifest JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub map: FlowMap,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// JSON file overriding any subset of the numerical tolerances.
    #[arg(long)]
    pub tolerances: Option<PathBuf>,
    #[arg(long, default_value = "eigenflow-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_parser = parse_family)]
    pub id: FamilyId,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Export the companion family instead (the limit, `B_n` or `A_{2n}`).
    #[arg(long)]
    pub companion: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, value_parser = parse_study)]
    pub study: ConvergenceStudy,
    /// Comma-separated sweep of n.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32, 64, 128, 256])]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 4001)]
    pub nodes: usize,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value = "eigenflow-out")]
    pub out: PathBuf,
}

/// A failed command: the exit code and the message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_INVALID, message: format!("error: {e}") }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::invalid(e)
    }
}

/// Sizes the global thread pool from `EIGENFLOW_THREADS` when it is set.
pub fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::invalid(format!("{THREADS_VAR} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(Failure::invalid)
}

/// Parses `args`, runs the command and returns the exit code, printing
/// progress to stdout and failures to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = init_threads().and_then(|()| run(&cli.command));
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("{}", f.message);
            f.code
        }
    }
}

pub fn run(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Example(a) => cmd_example(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Flow(a) => cmd_flow(a),
        Command::ExportFamily(a) => cmd_export(a),
        Command::Convergence(a) => cmd_convergence(a),
    }
}

fn describe_violations(r: &ExperimentReport) -> String {
    r.violations()
        .iter()
        .map(|c| {
            let rel = match c.relation {
                Relation::AtLeast => ">=",
                Relation::AtMost => "<=",
            };
            format!("bound violated: {} = {:e}, expected {rel} {:e} ({})", c.name, c.value, c.bound, c.claim)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Writes the report files, prints one line per check and fails with exit
/// code 1 when any check fails.
fn finish(r: &ExperimentReport, out: &Path) -> Result<(), Failure> {
    let (json, csv) = r.write_to(out)?;
    for c in &r.checks {
        println!("{} {}: {:e}", if c.holds { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    for flag in &r.flags {
        println!("note: {flag}");
    }
    println!("wrote {} and {}", json.display(), csv.display());
    if r.all_hold() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VIOLATION, message: describe_violations(r) })
    }
}

fn cmd_example(a: &ExampleArgs) -> Result<(), Failure> {
    let r = run_example(a.id, a.n, a.q, a.alpha, a.grid)?;
    finish(&r, &a.out)
}

fn cmd_fuzz(a: &FuzzArgs) -> Result<(), Failure> {
    let r = fuzz_inequalities(a.seed, a.trials, a.d, a.kind)?;
    if !r.all_hold() {
        if let Some(pair) = worst_pair_json(&r) {
            fs::create_dir_all(&a.out).map_err(Failure::invalid)?;
            let path = a.out.join(format!("{}_worst.json", r.file_stem()));
            let text = serde_json::to_string_pretty(&pair).map_err(Failure::invalid)?;
            write_atomic(&path, text.as_bytes())?;
            eprintln!("worst offender written to {}", path.display());
        }
    }
    finish(&r, &a.out)
}

fn cmd_convergence(a: &ConvergenceArgs) -> Result<(), Failure> {
    let params = ConvergenceParams {
        ns: a.ns.clone(),
        nodes: a.nodes,
        q: a.q,
        seed: a.seed,
        d: a.d,
        epsilon: a.epsilon,
        threshold: a.threshold,
    };
    finish(&run_convergence(a.study, &params)?, &a.out)
}

fn family_domain(id: FamilyId) -> (f64, f64) {
    match id {
        FamilyId::ExA | FamilyId::ExAuc => (-1.0, 1.0),
        FamilyId::ExUcq | FamilyId::ExA2 => (0.0, 1.0),
    }
}

fn cmd_export(a: &ExportArgs) -> Result<(), Failure> {
    let (lower, upper) = family_domain(a.id);
    let c = Counterexample::new(a.id, a.n, a.alpha, Grid::interval(lower, upper, a.grid)?)?;
    let (family, _) = if a.companion { make_companion(&c)? } else { make_family(&c)? };
    let path = export_family(&family, &a.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_tolerances(path: Option<&Path>) -> Result<Tolerances, Failure> {
    match path {
        None => Ok(Tolerances::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))
        }
    }
}

fn record_sobolev(r: &mut ExperimentReport, s: &SobolevReport) -> Result<(), Error> {
    r.scalar("lq", s.lq)?;
    r.scalar("w1q", s.w1q)?;
    for (j, d) in s.derivative_lq.iter().enumerate() {
        r.scalar(&format!("derivative_lq_{j}"), *d)?;
    }
    Ok(())
}

fn write_flow_csv<V: CsvValue>(f: &SampledFamily<V>, path: &Path) -> Result<(), Error> {
    let mut bytes = Vec::new();
    f.write_csv(&mut bytes)?;
    write_atomic(path, &bytes)
}

fn cmd_flow(a: &FlowArgs) -> Result<(), Failure> {
    let tol = load_tolerances(a.tolerances.as_deref())?;
    let family = load_family(&a.input)?;
    let mut r = ExperimentReport::new(format!("flow_{}", a.map.name()));
    r.meta("map", a.map.name());
    r.meta("q", a.q);
    r.meta("nodes", family.len());
    fs::create_dir_all(&a.out).map_err(Failure::invalid)?;
    let csv = a.out.join(format!("flow_{}.csv", a.map.name()));
    match a.map {
        FlowMap::Ordered | FlowMap::Area => {
            let flow = char_map_hermitian_with(&family, &tol)?;
            r.scalar("solver_residual_max", flow.solver_residual_max)?;
            if a.map == FlowMap::Ordered {
                record_sobolev(&mut r, &w1q_norm(&ordered_as_vectors(&flow.flow), a.q)?)?;
            } else {
                let d = flow.flow.samples().first().map_or(0, |s| s.len());
                for j in 0..d {
                    let branch = flow.flow.map(|s| s.values()[j]);
                    r.scalar(&format!("area_{j}"), graph_surface_area(&branch)?)?;
                }
            }
            write_flow_csv(&flow.flow, &csv)?;
        }
        FlowMap::Unordered => {
            let flow = char_map_normal_with(&family, &tol)?;
            r.scalar("solver_residual_max", flow.solver_residual_max)?;
            let d = flow.flow.samples().first().map_or(0, |s| s.len());
            let e = AlmgrenEmbedding::new(d);
            r.meta("embedding_rotations", e.h());
            record_sobolev(&mut r, &w1q_norm(&embedded_flow(&flow.flow, &e)?, a.q)?)?;
            write_flow_csv(&flow.flow, &csv)?;
        }
        FlowMap::Kappa => {
            let flow = condition_number_flow_with(&family, &tol).map_err(|e| match e.root() {
                Error::SingularNode { .. } => Failure { code: EXIT_VIOLATION, message: format!("error: {e}") },
                _ => Failure::from(e),
            })?;
            r.scalar("min_sigma", flow.min_sigma)?;
            r.scalar("min_sigma_node", flow.min_sigma_node as f64)?;
            record_sobolev(&mut r, &w1q_norm(&flow.kappa, a.q)?)?;
            write_flow_csv(&flow.kappa, &csv)?;
        }
    }
    let json = a.out.join(format!("flow_{}.json", a.map.name()));
    write_atomic(&json, r.to_json()?.as_bytes())?;
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}
