use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contangle_core::harness::{
    linear_grid, run_monte_carlo, run_monte_carlo_with_threads, scan_squeezing_with,
    MonteCarloConfig, SampleRecord,
};
use contangle_core::monogamy::{ResidualOptions, DEFAULT_BUDGET};
use contangle_core::partitions::{ranking_number, sorted_partitions, ModePartition};
use contangle_core::symplectic::{is_physical_by_spectrum, DEFAULT_TOL_PHYS};
use contangle_core::{
    atomic_residual_with, block_pair_breakdown, build_multi_glems_cm, build_pure_fs_cm,
    is_physical, purity, residual_contangle_with, symplectic_eigenvalues, CovMatrix, Precision,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{fmt_num, read_source, to_json, write_target};
use crate::CliError;

/// Environment variable capping Monte Carlo worker threads.
pub const THREADS_ENV: &str = "CONTANGLE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "contangle",
    version,
    about = "Genuine multipartite entanglement of fully symmetric Gaussian states"
)]
pub struct Cli {
    /// Significant digits of numeric output (17 = full precision)
    #[arg(long, global = true, default_value_t = 17)]
    digits: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Covariance matrix of a pure fully symmetric state
    GenCm(GenCmArgs),
    /// Contangle between two molecules of a fully symmetric state
    Pair(PairArgs),
    /// Sorted partitions of M modes into K molecules
    Partitions(PartitionsArgs),
    /// Residual (genuine multipartite) contangle among molecules
    Residual(ResidualArgs),
    /// Closed-form residual contangle among single modes
    Atomic(AtomicArgs),
    /// Unitarily localized multi-GLEMS covariance matrix
    Localize(LocalizeArgs),
    /// Residual contangle over a squeezing grid (CSV)
    Scan(ScanArgs),
    /// Randomized strong-monogamy test
    Montecarlo(MonteCarloArgs),
    /// Physicality, spectrum and purity of a covariance-matrix file
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct StateArgs {
    /// Modes N of the parent state
    #[arg(long)]
    modes: usize,
    /// Squeezing r
    #[arg(long, allow_negative_numbers = true)]
    squeezing: f64,
}

#[derive(Debug, Args)]
struct GenCmArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Molecule sizes MI,MJ
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct PartitionsArgs {
    #[arg(long)]
    total: usize,
    #[arg(long)]
    blocks: usize,
    #[arg(long, value_enum, default_value_t = TableFormat::Json)]
    format: TableFormat,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Working precision
    #[arg(long, default_value = "extended")]
    precision: Precision,
}

#[derive(Debug, Args)]
struct ResidualArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Molecule sizes m1,m2,...
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    partition: Vec<usize>,
    #[command(flatten)]
    eval: EvalArgs,
    /// Always use the recursion, even for all-ones partitions
    #[arg(long)]
    no_fast_path: bool,
    /// Maximum number of distinct sub-multisets
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Debug, Args)]
struct AtomicArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Number K of single-mode parties
    #[arg(long)]
    blocks: usize,
    #[command(flatten)]
    eval: EvalArgs,
}

#[derive(Debug, Args)]
struct LocalizeArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    partition: Vec<usize>,
    /// Write the covariance matrix JSON here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify spectrum and two-mode reduction invariants
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    partition: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
    #[arg(long, default_value_t = 2.0)]
    rmax: f64,
    #[arg(long, default_value_t = 21)]
    steps: usize,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    nmax: usize,
    #[arg(long, default_value_t = 12)]
    kmax: usize,
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
    #[arg(long, default_value_t = 2.0)]
    rmax: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[command(flatten)]
    eval: EvalArgs,
    /// Worker threads (overrides CONTANGLE_THREADS)
    #[arg(long)]
    threads: Option<usize>,
    /// Report JSON (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-sample CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Covariance-matrix JSON file ("-" or omitted reads standard input)
    file: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL_PHYS)]
    tol: f64,
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let digits = cli.digits;
    match cli.command {
        Command::GenCm(a) => gen_cm(a, digits),
        Command::Pair(a) => pair(a, digits),
        Command::Partitions(a) => partitions(a),
        Command::Residual(a) => residual(a, digits),
        Command::Atomic(a) => atomic(a, digits),
        Command::Localize(a) => localize(a, digits),
        Command::Scan(a) => scan(a, digits),
        Command::Montecarlo(a) => montecarlo(a, digits),
        Command::Check(a) => check(a, digits),
    }
}

fn line(s: String) -> String {
    s + "\n"
}

fn gen_cm(a: GenCmArgs, digits: usize) -> Result<(), CliError> {
    let cm = build_pure_fs_cm(a.state.modes, a.state.squeezing)?;
    write_target(a.out.as_deref(), &line(to_json(&cm.to_json(), digits)))
}

fn pair(a: PairArgs, digits: usize) -> Result<(), CliError> {
    let [mi, mj] = a.sizes[..] else {
        return Err(CliError::Usage(
            "--sizes takes exactly two values MI,MJ".into(),
        ));
    };
    let b = block_pair_breakdown(a.state.modes, a.state.squeezing, mi, mj)?;
    let payload = json!({
        "modes": a.state.modes,
        "squeezing": a.state.squeezing,
        "sizes": [mi, mj],
        "contangle": b.contangle,
        "a": b.a,
        "b": b.b,
        "c": b.c,
        "d2": b.d2,
    });
    write_target(None, &line(to_json(&payload, digits)))
}

#[derive(Serialize)]
struct PartitionRow {
    eta: u128,
    sizes: Vec<usize>,
}

fn partitions(a: PartitionsArgs) -> Result<(), CliError> {
    let rows = sorted_partitions(a.total, a.blocks)?
        .into_iter()
        .map(|sizes| {
            Ok(PartitionRow {
                eta: ranking_number(&sizes, a.total)?,
                sizes,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let text = match a.format {
        TableFormat::Json => line(serde_json::to_string(&rows).expect("rows serialize")),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["eta", "sizes"]).map_err(csv_err)?;
            for r in &rows {
                w.write_record([r.eta.to_string(), join_sizes(&r.sizes)])
                    .map_err(csv_err)?;
            }
            csv_text(w)?
        }
    };
    write_target(None, &text)
}

fn join_sizes(sizes: &[usize]) -> String {
    sizes
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("|")
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(format!("csv: {e}"))
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn residual(a: ResidualArgs, digits: usize) -> Result<(), CliError> {
    let partition = ModePartition::new(a.state.modes, a.partition)?;
    let opts = ResidualOptions {
        precision: a.eval.precision,
        budget: a.budget,
        atomic_fast_path: !a.no_fast_path,
    };
    let rep = residual_contangle_with(&partition, a.state.squeezing, &opts)?;
    let terms: Vec<_> = rep
        .subtracted_terms
        .iter()
        .map(|t| {
            json!({
                "subset": t.sizes,
                "multiplicity": t.multiplicity,
                "value": t.value,
                "contribution": t.contribution,
                "sign": -1,
            })
        })
        .collect();
    let payload = json!({
        "value": rep.value,
        "probe_size": rep.probe_size,
        "leading_term": rep.leading_term,
        "partition": rep.sizes,
        "modes": rep.parent_modes,
        "squeezing": rep.squeezing,
        "precision": rep.precision,
        "atomic_fast_path": rep.atomic_fast_path,
        "terms": terms,
    });
    write_target(None, &line(to_json(&payload, digits)))
}

fn atomic(a: AtomicArgs, digits: usize) -> Result<(), CliError> {
    let v = atomic_residual_with(a.state.modes, a.blocks, a.state.squeezing, a.eval.precision)?;
    let payload = json!({
        "value": v,
        "modes": a.state.modes,
        "blocks": a.blocks,
        "squeezing": a.state.squeezing,
        "precision": a.eval.precision,
    });
    write_target(None, &line(to_json(&payload, digits)))
}

fn localize(a: LocalizeArgs, digits: usize) -> Result<(), CliError> {
    let partition = ModePartition::new(a.state.modes, a.partition)?;
    let loc = build_multi_glems_cm(&partition, a.state.squeezing)?;
    let cm_json = to_json(&loc.cm.to_json(), digits);
    if let Some(out) = a.out.as_deref() {
        write_target(Some(out), &line(cm_json.clone()))?;
    }
    if a.check || a.out.is_some() {
        let mut payload = json!({
            "modes": loc.parent_modes,
            "squeezing": loc.squeezing,
            "partition": loc.sizes,
            "purity": purity(&loc.cm)?,
        });
        if a.check {
            payload["check"] = serde_json::to_value(loc.check()?).expect("check serializes");
        }
        if a.out.is_none() {
            payload["cm"] = serde_json::to_value(loc.cm.to_json()).expect("cm serializes");
        }
        write_target(None, &line(to_json(&payload, digits)))
    } else {
        write_target(None, &line(cm_json))
    }
}

fn scan(a: ScanArgs, digits: usize) -> Result<(), CliError> {
    let partition = ModePartition::new(a.modes, a.partition)?;
    let grid = linear_grid(a.rmin, a.rmax, a.steps)?;
    let opts = ResidualOptions {
        precision: a.eval.precision,
        ..Default::default()
    };
    let rows = scan_squeezing_with(&partition, &grid, &opts)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "value"]).map_err(csv_err)?;
    for row in rows {
        w.write_record([fmt_num(row.r, digits), fmt_num(row.value, digits)])
            .map_err(csv_err)?;
    }
    write_target(a.out.as_deref(), &csv_text(w)?)
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{THREADS_ENV} must be a positive integer, got '{v}'"
                ))
            }),
        Err(_) => Ok(None),
    }
}

fn sample_csv(samples: &[SampleRecord], digits: usize) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "r", "N", "M", "K", "sizes", "value", "status"])
        .map_err(csv_err)?;
    for s in samples {
        let status = serde_json::to_value(s.status).expect("status serializes");
        w.write_record([
            s.index.to_string(),
            fmt_num(s.r, digits),
            s.n.to_string(),
            s.m.to_string(),
            s.k.to_string(),
            join_sizes(&s.sizes),
            s.value.map(|v| fmt_num(v, digits)).unwrap_or_default(),
            status.as_str().unwrap_or_default().to_string(),
        ])
        .map_err(csv_err)?;
    }
    csv_text(w)
}

fn montecarlo(a: MonteCarloArgs, digits: usize) -> Result<(), CliError> {
    let cfg = MonteCarloConfig {
        samples: a.samples,
        master_seed: a.seed,
        r_range: [a.rmin, a.rmax],
        n_max: a.nmax,
        k_max: a.kmax,
        budget: a.budget,
        precision: a.eval.precision,
    };
    let report = match thread_count(a.threads)? {
        Some(t) => run_monte_carlo_with_threads(&cfg, t)?,
        None => run_monte_carlo(&cfg)?,
    };
    if let Some(path) = a.csv.as_deref() {
        write_target(Some(path), &sample_csv(&report.samples, digits)?)?;
    }
    let text = line(to_json(&report, digits));
    match a.out.as_deref() {
        Some(path) => {
            write_target(Some(path), &text)?;
            let summary = json!({
                "samples": cfg.samples,
                "evaluated": report.evaluated,
                "skipped": report.skipped,
                "violations": report.violations.len(),
                "min_value": report.min_value,
            });
            write_target(None, &line(to_json(&summary, digits)))
        }
        None => write_target(None, &text),
    }
}

fn check(a: CheckArgs, digits: usize) -> Result<(), CliError> {
    let cm = CovMatrix::from_json_str(&read_source(a.file.as_deref())?)?;
    let spectrum = symplectic_eigenvalues(&cm)?;
    let tol = a.tol * cm.max_abs().max(1.0);
    let pure = spectrum.values.iter().all(|v| (v - 1.0).abs() <= tol);
    let payload = json!({
        "n_modes": cm.n_modes(),
        "physical": is_physical(&cm, a.tol),
        "physical_by_spectrum": is_physical_by_spectrum(&cm, a.tol),
        "pure": pure,
        "purity": purity(&cm)?,
        "symplectic_eigenvalues": spectrum.values,
    });
    write_target(None, &line(to_json(&payload, digits)))
}
