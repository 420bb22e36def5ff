//! `sri`: solve, enumerate, check, generate, reduce, export and benchmark
//! stable roommates instances.
//!
//! Exit codes: 0 success, 1 unsat or rejected, 2 timeout, 3 input error.

mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sri_core::bench::{self, BenchGrid};
use sri_core::criteria::{solve_criterion, Criterion};
use sri_core::engine::{SearchConfig, Status};
use sri_core::ipexport::{self, IpObjective};
use sri_core::model::{self, Acceptability, Instance, RandomSpec};
use sri_core::oracle;
use sri_core::reductions::{self, GadgetSpec, GadgetVariant, SimpleGraph};

use report::{CheckReport, EnumerateDoc, ResultDoc};

const EXIT_UNSAT: u8 = 1;
const EXIT_TIMEOUT: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "sri", version, about = "Optimal stable matchings for stable roommates instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Solve an instance under one criterion.
    Solve(SolveArgs),
    /// List every stable matching (exhaustive; small instances only).
    Enumerate(EnumerateArgs),
    /// Verify a matching file against an instance.
    Check(CheckArgs),
    /// Build a hardness gadget instance from a graph file.
    Reduce(ReduceArgs),
    /// Write the integer programming model in LP format.
    ExportLp(ExportArgs),
    /// Run a benchmark grid and write CSV rows.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file.
    instance: PathBuf,
    /// Drop one-sided list entries instead of rejecting them.
    #[arg(long)]
    symmetrize: bool,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        let text = read(&self.instance)?;
        let mode = if self.symmetrize {
            Acceptability::Symmetrize
        } else {
            Acceptability::Strict
        };
        model::parse_instance_with(&text, mode).with_context(|| format!("{}", self.instance.display()))
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output file (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    size: usize,
    #[arg(long)]
    completeness: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[arg(long, default_value = "any-stable")]
    criterion: Criterion,
    /// Time limit for the whole solve.
    #[arg(long, default_value_t = 3_000_000)]
    timeout_ms: u64,
    #[command(flatten)]
    output: OutArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[command(flatten)]
    output: OutArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InstanceArgs,
    /// Matching file: one "i j" pair per line.
    matching: PathBuf,
    #[arg(long, default_value = "any-stable")]
    criterion: Criterion,
    /// Also solve and reject a matching worse than the optimum.
    #[arg(long)]
    assert_optimal: bool,
    #[arg(long, default_value_t = 3_000_000)]
    timeout_ms: u64,
    #[command(flatten)]
    output: OutArgs,
}

#[derive(Args)]
struct ReduceArgs {
    /// Graph file: "n m" then m lines "u v" (1-based).
    graph: PathBuf,
    #[arg(long)]
    variant: GadgetVariant,
    /// Solve the gadget and print the predicted and actual optimum.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InstanceArgs,
    /// Objective: any-stable (none), egalitarian, fc-max, almost-stable,
    /// rank-maximal (maximize a level) or generous (minimize a level).
    #[arg(long, default_value = "any-stable")]
    criterion: Criterion,
    /// Level for rank-maximal / generous; defaults to 1 and L.
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "20,40")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.0")]
    completeness: Vec<f64>,
    /// Seeds 0..N per cell.
    #[arg(long, default_value_t = bench::DEFAULT_SEEDS)]
    seeds: u64,
    /// Criteria to run (all if absent).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<Criterion>,
    /// Per-solve time limit.
    #[arg(long, default_value_t = 3_000_000)]
    timeout_ms: u64,
    /// Run independent rows on all cores.
    #[arg(long)]
    parallel: bool,
    /// Also write per-cell means (with TO for timed-out cells) here.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn config(timeout_ms: u64) -> SearchConfig {
    SearchConfig::default().with_time_limit(Duration::from_millis(timeout_ms))
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Optimal => 0,
        Status::Unsat => EXIT_UNSAT,
        Status::BudgetExceeded => EXIT_TIMEOUT,
    }
}

fn generate(a: &GenerateArgs) -> Result<u8> {
    let spec = RandomSpec::new(a.size, a.completeness, a.seed)?;
    emit(a.out.as_deref(), &model::serialize_instance(&model::generate_random(&spec)))?;
    Ok(0)
}

fn solve(a: &SolveArgs) -> Result<u8> {
    let inst = a.input.load()?;
    let r = solve_criterion(&inst, a.criterion, &config(a.timeout_ms));
    let doc = ResultDoc::new(&r);
    let text = match a.output.format {
        Format::Json => report::json(&doc)?,
        Format::Text => doc.to_text(),
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(status_code(r.status()))
}

fn enumerate(a: &EnumerateArgs) -> Result<u8> {
    let inst = a.input.load()?;
    let set = match oracle::enumerate_stable(&inst) {
        Ok(set) => set,
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_TIMEOUT);
        }
    };
    let doc = EnumerateDoc::new(&set.matchings);
    let text = match a.output.format {
        Format::Json => report::json(&doc)?,
        Format::Text => doc.to_text(),
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

fn check(a: &CheckArgs) -> Result<u8> {
    let inst = a.input.load()?;
    let text = read(&a.matching)?;
    let m = model::parse_matching(&text, inst.n()).with_context(|| format!("{}", a.matching.display()))?;
    m.validate(&inst).with_context(|| format!("{}", a.matching.display()))?;
    let mut report = CheckReport::new(&inst, &m, a.criterion);
    if a.assert_optimal {
        let r = solve_criterion(&inst, a.criterion, &config(a.timeout_ms));
        if r.status() == Status::BudgetExceeded {
            eprintln!("optimum not established within the time limit");
            return Ok(EXIT_TIMEOUT);
        }
        report.compare_with(&inst, &r);
    }
    let out = match a.output.format {
        Format::Json => report::json(&report)?,
        Format::Text => report.to_text(),
    };
    emit(a.output.out.as_deref(), &out)?;
    Ok(if report.accepted { 0 } else { EXIT_UNSAT })
}

fn reduce(a: &ReduceArgs) -> Result<u8> {
    let g = SimpleGraph::parse(&read(&a.graph)?).with_context(|| format!("{}", a.graph.display()))?;
    let inst = match a.variant {
        GadgetVariant::IndependentSet => reductions::build_is_gadget(&g),
        v => reductions::build_vc_gadget(&g, v)?,
    };
    emit(a.out.as_deref(), &model::serialize_instance(&inst))?;
    if a.verify {
        let spec = GadgetSpec {
            variant: a.variant,
            graph: g,
        };
        let r = reductions::predict_and_verify(&spec, &SearchConfig::default())?;
        eprintln!(
            "{}: parameter {} predicts {}, solver found {} ({})",
            a.variant,
            r.prediction.k,
            r.prediction.value,
            r.actual,
            if r.holds() { "match" } else { "MISMATCH" }
        );
        if !r.holds() {
            return Ok(EXIT_UNSAT);
        }
    }
    Ok(0)
}

fn export_lp(a: &ExportArgs) -> Result<u8> {
    let inst = a.input.load()?;
    let objective = match a.criterion {
        Criterion::AnyStable => IpObjective::None,
        Criterion::Egalitarian => IpObjective::Egalitarian,
        Criterion::FcMax => IpObjective::FirstChoice,
        Criterion::AlmostStable => IpObjective::AlmostStable,
        Criterion::RankMaximal => IpObjective::MaximizeLevel(a.level.unwrap_or(1)),
        Criterion::Generous => IpObjective::MinimizeLevel(a.level.unwrap_or(inst.max_list_len() as u32)),
        Criterion::MinRegret => bail!("min-regret has no single linear objective; export any-stable with caps instead"),
    };
    emit(a.out.as_deref(), &ipexport::export_lp(&ipexport::build_ip(&inst, objective)))?;
    Ok(0)
}

fn run_bench(a: &BenchArgs) -> Result<u8> {
    for &c in &a.completeness {
        RandomSpec::new(1, c, 0)?;
    }
    let grid = BenchGrid {
        sizes: a.sizes.clone(),
        completeness: a.completeness.clone(),
        seeds: a.seeds,
        criteria: if a.criteria.is_empty() {
            Criterion::ALL.to_vec()
        } else {
            a.criteria.clone()
        },
        timeout: Duration::from_millis(a.timeout_ms),
        parallel: a.parallel,
    };
    let rows = bench::run_grid(&grid);
    let mut buf = Vec::new();
    bench::write_csv(&rows, &mut buf)?;
    emit(a.out.as_deref(), std::str::from_utf8(&buf)?)?;
    if let Some(path) = &a.summary {
        let mut buf = Vec::new();
        bench::write_summary_csv(&bench::summarize(&rows), &mut buf)?;
        fs::write(path, buf).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Check(a) => check(a),
        Command::Reduce(a) => reduce(a),
        Command::ExportLp(a) => export_lp(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

