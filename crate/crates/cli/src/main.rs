//! `isingbell`: exact Bell-type analysis of small Ising lattices.
//!
//! Exit codes: 0 success, 2 input error, 3 degenerate model, 4 a check or
//! reproduction failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use isingbell_core::builtin;
use isingbell_core::chsh::{self, ConditionalTable};
use isingbell_core::freewill::freewill_report;
use isingbell_core::independence::{decoupling_sweep, independence_report};
use isingbell_core::model::DEFAULT_MAX_NODES;
use isingbell_core::report::{write_json, write_records};
use isingbell_core::reproduce;
use isingbell_core::sampling::frequency_report;
use isingbell_core::search::{grid_scan, maximize_chsh, Objective, SearchConfig};
use isingbell_core::series::{self, chain_check, chain_md, chain_md_profile, series_check};
use isingbell_core::{
    BoltzmannModel, BuildOptions, Error, Format, HiddenSubset, LatticeSpec, PartialAssignment, Precision, SampleRun,
    SamplerKind, Spin,
};

/// Closed forms and the free-will comparison are checked to these deviations.
const SERIES_TOLERANCE: f64 = 1e-9;
const FREEWILL_TOLERANCE: f64 = 1e-12;

/// Largest chain length enumerated alongside the closed form in `chain --profile`.
const PROFILE_ENUMERATION_LIMIT: usize = 20;

const DEFAULT_SCALES: [f64; 8] = [1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.0];

#[derive(Parser)]
#[command(name = "isingbell", version, about = "Exact CHSH and independence analysis of small Ising lattices")]
struct Cli {
    /// Significant digits in the output, or `full` for round-trip precision.
    #[arg(long, global = true, default_value = "6")]
    precision: Precision,

    /// Output format: csv or json.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Largest lattice enumerated exactly.
    #[arg(long, global = true, env = "ISINGBELL_MAX_NODES", default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CHSH value, independence measures or the conditional table of one lattice.
    Eval {
        /// Lattice file, or `builtin:<name>`.
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum, default_value_t = ReportKind::Chsh)]
        report: ReportKind,
        /// Hidden nodes forming λ: `all` or a comma-separated id list.
        #[arg(long, default_value = "all")]
        lambda: String,
    },
    /// Recompute the published values and compare them with their tolerances.
    Reproduce {
        /// Case id, or `all`.
        #[arg(default_value = "all")]
        case: String,
    },
    /// Check the ladder and chain closed forms against enumeration.
    Series {
        /// Values of K = tanh(βJ); defaults to 0, 0.1, ..., 0.9.
        #[arg(long, value_delimiter = ',')]
        k: Vec<f64>,
        /// Chain lengths; defaults to 5..=14.
        #[arg(long = "chain-n", value_delimiter = ',')]
        chain_n: Vec<usize>,
    },
    /// Closed-form measurement dependence of an N-chain.
    Chain {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: f64,
        /// Also enumerate the chain and report the largest closed-form deviation.
        #[arg(long)]
        check: bool,
        /// Report every length from 5 to N, enumerating up to N = 20.
        #[arg(long, conflicts_with = "check")]
        profile: bool,
    },
    /// Compare postselected and clamped-analyzer ensembles.
    Freewill {
        /// Lattice file or `builtin:<name>`; every built-in lattice when omitted.
        #[arg(long)]
        spec: Option<String>,
    },
    /// Relative-frequency convergence of a conditional event under seeded sampling.
    Sample {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = SamplerArg::Exact)]
        sampler: SamplerArg,
        /// Metropolis burn-in flips; defaults to 10 * N * 1024.
        #[arg(long)]
        burn_in: Option<usize>,
        /// Metropolis flips between samples; defaults to N.
        #[arg(long)]
        thin: Option<usize>,
        #[arg(long, default_value = "1=+,2=+")]
        event: String,
        /// Conditioning event; empty for an unconditional frequency.
        #[arg(long, default_value = "a=+,b=+")]
        given: String,
    },
    /// Maximize the CHSH value over the parameters of a search config.
    Optimize {
        config: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        /// Scan a regular grid with this many points per free parameter instead.
        #[arg(long)]
        grid: Option<usize>,
        /// Also write the full search result as JSON here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Measurement dependence as the analyzer couplings are scaled to zero.
    Decouple {
        #[arg(long)]
        spec: String,
        #[arg(long, value_delimiter = ',')]
        scales: Vec<f64>,
        #[arg(long, default_value = "all")]
        lambda: String,
    },
    /// List the built-in lattices.
    Builtins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Chsh,
    Independence,
    Table,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Exact,
    Metropolis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    XBi,
    MaxAbsX,
}

enum Failure {
    Input(Error),
    /// A computed value missed its check; the report has been written.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(Error::Io(e))
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Context {
    precision: Precision,
    format: Format,
    out: Option<PathBuf>,
    options: BuildOptions,
}

impl Context {
    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn records<T: Serialize>(&self, items: &[T]) -> Outcome {
        let mut out = self.sink()?;
        write_records(&mut out, items, self.format, self.precision)?;
        out.flush()?;
        Ok(())
    }

    /// CSV rows, or `document` when JSON is requested.
    fn records_or<T: Serialize>(&self, rows: &[T], document: &impl Serialize) -> Outcome {
        match self.format {
            Format::Csv => self.records(rows),
            Format::Json => {
                let mut out = self.sink()?;
                write_json(&mut out, document, self.precision)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn model(&self, reference: &str) -> Result<BoltzmannModel, Error> {
        BoltzmannModel::build(load(reference)?, &self.options)
    }

    fn num(&self, x: f64) -> String {
        self.precision.format(x)
    }
}

fn load(reference: &str) -> Result<LatticeSpec, Error> {
    builtin::resolve(reference, Path::new("."))
}

fn to_map(item: &impl Serialize) -> Map<String, Value> {
    match serde_json::to_value(item) {
        Ok(Value::Object(map)) => map,
        _ => Map::new(),
    }
}

fn sign(s: Spin) -> i8 {
    s.sign() as i8
}

#[derive(Serialize)]
struct TableRow {
    s1: i8,
    s2: i8,
    sa: i8,
    sb: i8,
    p: f64,
}

fn table_rows(table: &ConditionalTable) -> Vec<TableRow> {
    table
        .cells()
        .map(|(s1, s2, sa, sb, p)| TableRow { s1: sign(s1), s2: sign(s2), sa: sign(sa), sb: sign(sb), p })
        .collect()
}

fn eval(ctx: &Context, spec: &str, report: ReportKind, lambda: &str) -> Outcome {
    let model = ctx.model(spec)?;
    let subset = || HiddenSubset::parse(&model, lambda);
    match report {
        ReportKind::Chsh => ctx.records(&[chsh::model_chsh(&model)?]),
        ReportKind::Independence => ctx.records(&[independence_report(&model, &subset()?)?]),
        ReportKind::Table => ctx.records(&table_rows(&chsh::conditional_table(&model)?)),
        ReportKind::All => {
            let chsh = chsh::model_chsh(&model)?;
            let independence = independence_report(&model, &subset()?)?;
            let table = table_rows(&chsh::conditional_table(&model)?);
            // One flat row: CHSH fields, independence fields, then the 16 table cells.
            let mut row = to_map(&chsh);
            row.extend(to_map(&independence));
            for c in &table {
                let key = format!("p({},{}|{},{})", c.s1, c.s2, c.sa, c.sb);
                row.insert(key, json!(c.p));
            }
            let document = json!({ "chsh": chsh, "independence": independence, "table": table });
            ctx.records_or(&[Value::Object(row)], &document)
        }
    }
}

fn reproduce_cmd(ctx: &Context, case: &str) -> Outcome {
    let results = reproduce::run(case)?;
    let rows: Vec<_> = results.iter().flat_map(|c| c.rows.iter().cloned()).collect();
    ctx.records_or(&rows, &results)?;
    let mut stderr = io::stderr().lock();
    for case in &results {
        for note in &case.notes {
            writeln!(stderr, "{}: {note}", case.id)?;
        }
    }
    let failed: Vec<&str> = results.iter().filter(|c| c.failed()).map(|c| c.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("reproduction failed for {}", failed.join(", "))))
    }
}

fn series_cmd(ctx: &Context, k: Vec<f64>, chain_n: Vec<usize>) -> Outcome {
    let ks = if k.is_empty() { series::default_k_grid() } else { k };
    let ns = if chain_n.is_empty() { (series::CHAIN_MIN_N..=14).collect() } else { chain_n };
    let check = series_check(&ks, &ns)?;
    ctx.records_or(&check.rows, &check)?;
    eprintln!("max relative deviation: {}", ctx.num(check.max_rel_dev));
    within(check.max_rel_dev, SERIES_TOLERANCE, "series")
}

/// Fails when `deviation` exceeds `tolerance` or is NaN.
fn within(deviation: f64, tolerance: f64, what: &str) -> Outcome {
    if deviation <= tolerance {
        Ok(())
    } else {
        Err(Failure::Check(format!("{what} deviation {deviation:e} exceeds {tolerance:e}")))
    }
}

#[derive(Serialize)]
struct ChainRow {
    n: usize,
    k: f64,
    md_summed: f64,
    md_cell: f64,
    /// Largest closed-form vs enumeration relative deviation, with `--check`.
    max_rel_dev: Option<f64>,
}

fn chain_cmd(ctx: &Context, n: usize, k: f64, check: bool, profile: bool) -> Outcome {
    if profile {
        let ns: Vec<usize> = (series::CHAIN_MIN_N..=n).collect();
        return ctx.records(&chain_md_profile(&ns, k, PROFILE_ENUMERATION_LIMIT.min(ctx.options.max_nodes))?);
    }
    let md = chain_md(n, k)?;
    let max_rel_dev = if check {
        let rows = chain_check(n, k)?;
        Some(rows.iter().map(|r| r.max_rel_dev).fold(0.0, |a: f64, b| if b.is_nan() { b } else { a.max(b) }))
    } else {
        None
    };
    ctx.records(&[ChainRow { n, k, md_summed: md.md_summed, md_cell: md.md_cell, max_rel_dev }])?;
    match max_rel_dev {
        Some(d) => {
            eprintln!("max deviation: {}", ctx.num(d));
            within(d, SERIES_TOLERANCE, "chain")
        }
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct FreewillRow {
    lattice: String,
    max_discrepancy: f64,
    partition_defect: f64,
    derived_discrepancy: Option<f64>,
}

fn freewill_cmd(ctx: &Context, spec: Option<String>) -> Outcome {
    let references: Vec<String> = match spec {
        Some(s) => vec![s],
        None => builtin::BUILTIN_NAMES.iter().map(|name| format!("builtin:{}", name.replace("<n>", "8"))).collect(),
    };
    let mut rows = Vec::new();
    let mut documents = Vec::new();
    for reference in references {
        let report = freewill_report(&ctx.model(&reference)?)?;
        rows.push(FreewillRow {
            lattice: reference.clone(),
            max_discrepancy: report.max_discrepancy,
            partition_defect: report.partition_defect,
            derived_discrepancy: report.derived_discrepancy,
        });
        documents.push(json!({ "lattice": reference, "report": report }));
    }
    ctx.records_or(&rows, &documents)?;
    let worst = rows
        .iter()
        .flat_map(|r| [Some(r.max_discrepancy), r.derived_discrepancy])
        .flatten()
        .fold(0.0, |a: f64, b| if b.is_nan() { b } else { a.max(b) });
    within(worst, FREEWILL_TOLERANCE, "free-will")
}

struct SampleArgs {
    spec: String,
    seed: u64,
    n: usize,
    sampler: SamplerArg,
    burn_in: Option<usize>,
    thin: Option<usize>,
    event: String,
    given: String,
}

fn sample_cmd(ctx: &Context, args: SampleArgs) -> Outcome {
    let model = ctx.model(&args.spec)?;
    let kind = match args.sampler {
        SamplerArg::Exact => SamplerKind::ExactCategorical,
        SamplerArg::Metropolis => {
            let SamplerKind::Metropolis { burn_in, thin } = SamplerKind::metropolis_default(model.len()) else {
                unreachable!()
            };
            SamplerKind::Metropolis { burn_in: args.burn_in.unwrap_or(burn_in), thin: args.thin.unwrap_or(thin) }
        }
    };
    let event = PartialAssignment::parse(model.spec(), &args.event)?;
    let given = PartialAssignment::parse(model.spec(), &args.given)?;
    let run = SampleRun { seed: args.seed, n: args.n, kind };
    let report = frequency_report(&model, &run, &event, &given)?;
    ctx.records_or(&report.trace, &report)?;
    if let Some(warning) = &report.warning {
        eprintln!("warning: {warning}");
    }
    Ok(())
}

struct OptimizeArgs {
    config: PathBuf,
    budget: Option<usize>,
    seed: Option<u64>,
    restarts: Option<usize>,
    objective: Option<ObjectiveArg>,
    grid: Option<usize>,
    summary: Option<PathBuf>,
}

fn optimize_cmd(ctx: &Context, args: OptimizeArgs) -> Outcome {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = SearchConfig::from_toml_str(&text)?;
    config.budget = args.budget.unwrap_or(config.budget);
    config.seed = args.seed.unwrap_or(config.seed);
    config.restarts = args.restarts.unwrap_or(config.restarts);
    if let Some(objective) = args.objective {
        config.objective = match objective {
            ObjectiveArg::XBi => Objective::XBi,
            ObjectiveArg::MaxAbsX => Objective::MaxAbsX,
        };
    }
    let base_dir = args.config.parent().unwrap_or(Path::new("."));
    let space = config.space(base_dir)?;
    let names: Vec<&str> = space.params().iter().map(|p| p.name.as_str()).collect();
    let named = |point: &[f64]| -> Map<String, Value> {
        names.iter().zip(point).map(|(name, x)| (name.to_string(), json!(x))).collect()
    };

    if let Some(resolution) = args.grid {
        let grid = grid_scan(&space, resolution)?;
        let rows: Vec<Value> = grid
            .iter()
            .map(|g| {
                let mut row = named(&g.point);
                row.extend(to_map(&json!({ "x_bi": g.x_bi, "md": g.md, "od": g.od, "pd": g.pd, "error": g.error })));
                Value::Object(row)
            })
            .collect();
        return ctx.records(&rows);
    }

    let result = maximize_chsh(&space, config.budget, config.seed, config.restarts)?;
    let rows: Vec<Value> = result
        .trajectory
        .iter()
        .map(|inc| {
            let mut row = Map::new();
            row.insert("evaluation".into(), json!(inc.evaluation));
            row.insert("value".into(), json!(inc.value));
            row.extend(named(&inc.point));
            Value::Object(row)
        })
        .collect();
    ctx.records_or(&rows, &result)?;
    if let Some(path) = &args.summary {
        let mut out = BufWriter::new(File::create(path)?);
        write_json(&mut out, &result, ctx.precision)?;
        out.flush()?;
    }
    eprintln!(
        "best objective {} after {} evaluations (seed {}, {} restarts)",
        ctx.num(result.best_value),
        result.evaluations,
        result.seed,
        result.restarts.len()
    );
    Ok(())
}

fn decouple_cmd(ctx: &Context, spec: &str, scales: Vec<f64>, lambda: &str) -> Outcome {
    let template = load(spec)?;
    let scales = if scales.is_empty() { DEFAULT_SCALES.to_vec() } else { scales };
    let ids: Vec<&str> = if lambda.trim().eq_ignore_ascii_case("all") {
        Vec::new()
    } else {
        lambda.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    };
    ctx.records(&decoupling_sweep(&template, &scales, &ids, &ctx.options)?)
}

#[derive(Serialize)]
struct BuiltinRow {
    name: &'static str,
    nodes: Option<usize>,
    edges: Option<usize>,
    beta: Option<f64>,
}

fn builtins_cmd(ctx: &Context) -> Outcome {
    let rows: Vec<BuiltinRow> = builtin::BUILTIN_NAMES
        .iter()
        .map(|&name| match builtin::by_name(name) {
            Ok(spec) => {
                BuiltinRow { name, nodes: Some(spec.len()), edges: Some(spec.edges.len()), beta: Some(spec.beta) }
            }
            // Parametrized families such as `chain-<n>`.
            Err(_) => BuiltinRow { name, nodes: None, edges: None, beta: None },
        })
        .collect();
    ctx.records(&rows)
}

fn run(cli: Cli) -> Outcome {
    let ctx = Context {
        precision: cli.precision,
        format: cli.format,
        out: cli.out,
        options: BuildOptions { max_nodes: cli.max_nodes },
    };
    match cli.command {
        Command::Eval { spec, report, lambda } => eval(&ctx, &spec, report, &lambda),
        Command::Reproduce { case } => reproduce_cmd(&ctx, &case),
        Command::Series { k, chain_n } => series_cmd(&ctx, k, chain_n),
        Command::Chain { n, k, check, profile } => chain_cmd(&ctx, n, k, check, profile),
        Command::Freewill { spec } => freewill_cmd(&ctx, spec),
        Command::Sample { spec, seed, n, sampler, burn_in, thin, event, given } => {
            sample_cmd(&ctx, SampleArgs { spec, seed, n, sampler, burn_in, thin, event, given })
        }
        Command::Optimize { config, budget, seed, restarts, objective, grid, summary } => {
            optimize_cmd(&ctx, OptimizeArgs { config, budget, seed, restarts, objective, grid, summary })
        }
        Command::Decouple { spec, scales, lambda } => decouple_cmd(&ctx, &spec, scales, &lambda),
        Command::Builtins => builtins_cmd(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(message)) => {
            eprintln!("check failed: {message}");
            ExitCode::from(4)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            if e.is_degenerate() || matches!(e, Error::NumericRange(_)) {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
