//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::anova::AnovaReport;
use crate::embedding::{
    chi, default_r, is_optimal, is_solution, reduce, FirstCandidate, ReductionTrace,
};
use crate::error::{Error, Result};
use crate::genotype::{phenotype_partition, PhenotypeClassifier};
use crate::io;
use crate::pipeline::{self, a1_with, PipelineConfig, RPolicy, DEFAULT_TOLERANCE};
use crate::synth::{self, Effect, PlantSpec};

#[derive(Parser, Debug)]
#[command(
    name = "parcaus",
    version,
    about = "Partition-based causal association search"
)]
pub struct Cli {
    /// Write the run report here instead of stderr.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the embedding problem (A, B) and reduce the seed solution.
    Solve(SolveArgs),
    /// One-way ANOVA of a phenotype file over a partition.
    Anova(AnovaArgs),
    /// Search for a combinatorial association.
    Gwas(GwasArgs),
    /// Generate a synthetic cohort with a planted effect.
    Simulate(SimulateArgs),
    /// Check the association conditions for a given (e, τ).
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    a: PathBuf,
    b: PathBuf,
    /// Rank contractions by between-group change of these values.
    #[arg(long)]
    phenotypes: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct AnovaArgs {
    partition: PathBuf,
    phenotypes: PathBuf,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct CohortArgs {
    #[arg(long)]
    genotypes: PathBuf,
    #[arg(long)]
    phenotypes: PathBuf,
    /// Treat allele pairs as ordered.
    #[arg(long)]
    phased: bool,
    /// Quantile bins for the phenotype partition (default: one class per value).
    #[arg(long)]
    bins: Option<usize>,
    /// Comma-separated class thresholds for the phenotype partition.
    #[arg(long, conflicts_with = "bins", value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    window: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RPolicyArg {
    MinElement,
    Majority,
}

#[derive(Args, Debug)]
struct GwasArgs {
    #[command(flatten)]
    cohort: CohortArgs,
    #[arg(long, default_value_t = 2)]
    iterations: usize,
    #[arg(long, env = "PARCAUS_WORKERS")]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "min-element")]
    r_policy: RPolicyArg,
    /// Report a runtime of zero so outputs are byte-comparable.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EffectArg {
    Additive,
    Xor,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// JSON plant spec; overrides the other generation flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    individuals: usize,
    #[arg(long, default_value_t = 50)]
    positions: usize,
    /// Planted positions, 1-based.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    plant: Vec<usize>,
    #[arg(long, value_enum, default_value = "additive")]
    effect: EffectArg,
    #[arg(long, default_value_t = 1.0)]
    gap: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0.3)]
    maf: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    cohort: CohortArgs,
    /// Partition file for the external factors.
    #[arg(long)]
    e: PathBuf,
    /// Segment literal (`0,1,1`, `support: 2,3`) or segment file.
    #[arg(long)]
    tau: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Serialize, Debug, Default)]
struct RunReport {
    command: String,
    config: Value,
    timings_ms: BTreeMap<String, u128>,
    outputs: Vec<String>,
    warnings: Vec<String>,
    error: Option<String>,
}

impl RunReport {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.timings_ms
            .insert(phase.to_string(), start.elapsed().as_millis());
        out
    }
}

fn emit(out: &str, value: &impl Serialize, report: &mut RunReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    if out == "-" {
        std::io::stdout().write_all(text.as_bytes())?;
        report.outputs.push("stdout".into());
    } else {
        fs::write(out, text).map_err(|e| Error::Io(format!("{out}: {e}")))?;
        report.outputs.push(out.to_string());
    }
    Ok(())
}

fn write_file(path: &Path, text: &str, report: &mut RunReport) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    report.outputs.push(path.display().to_string());
    Ok(())
}

struct Cohort {
    table: crate::genotype::GenotypeTable,
    phenotypes: io::Phenotypes,
    b: crate::partition::Partition,
}

impl CohortArgs {
    fn classifier(&self) -> PhenotypeClassifier {
        match (&self.bins, &self.thresholds) {
            (Some(k), _) => PhenotypeClassifier::QuantileBins(*k),
            (None, Some(ts)) => PhenotypeClassifier::Thresholds(ts.clone()),
            (None, None) => PhenotypeClassifier::ExactValue,
        }
    }

    fn load(&self, report: &mut RunReport) -> Result<Cohort> {
        let table = report.time("load_genotypes", || {
            io::read_genotypes(&self.genotypes, self.phased)
        })?;
        let phenotypes = report.time("load_phenotypes", || {
            io::read_phenotypes(&self.phenotypes, &table)
        })?;
        let classifier = if phenotypes.is_categorical() {
            report.warnings.push(
                "categorical encoding: phenotype tokens mapped to integer codes by first appearance"
                    .into(),
            );
            PhenotypeClassifier::ExactValue
        } else {
            self.classifier()
        };
        let b = phenotype_partition(&phenotypes.measurement, &classifier)?;
        Ok(Cohort {
            table,
            phenotypes,
            b,
        })
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    a: &'a crate::partition::Partition,
    b: &'a crate::partition::Partition,
    r: &'a [usize],
    chi: &'a crate::partition::Partition,
    reduced: &'a crate::partition::Partition,
    trace: &'a ReductionTrace,
    is_solution: bool,
    is_optimal: bool,
}

fn solve(args: SolveArgs, report: &mut RunReport) -> Result<()> {
    let a = io::read_partition(&args.a, None)?;
    let b = io::read_partition(&args.b, Some(a.len()))?;
    report.config = json!({ "phenotypes": args.phenotypes });
    let (r, seed, trace) = match &args.phenotypes {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let (_, ph) = io::parse_phenotypes_standalone(&text)?;
            let run = report.time("a1", || {
                a1_with(
                    &a,
                    &b,
                    &ph.measurement,
                    RPolicy::MinElement,
                    DEFAULT_TOLERANCE,
                )
            })?;
            (run.r, run.chi, run.trace)
        }
        None => report.time("reduce", || {
            let r = default_r(&a, &b)?;
            let seed = chi(&r, &a, &b)?;
            let trace = reduce(&a, &seed, &mut FirstCandidate)?;
            Ok((r, seed, trace))
        })?,
    };
    let reduced = &trace.reduced;
    let solved = is_solution(&a, reduced, &b)?;
    let optimal = solved && is_optimal(&a, &b, reduced)?;
    emit(
        &args.out,
        &SolveOutput {
            a: &a,
            b: &b,
            r: r.as_slice(),
            chi: &seed,
            reduced,
            trace: &trace,
            is_solution: solved,
            is_optimal: optimal,
        },
        report,
    )
}

fn anova(args: AnovaArgs, report: &mut RunReport) -> Result<()> {
    let p = io::read_partition(&args.partition, None)?;
    let text = fs::read_to_string(&args.phenotypes)
        .map_err(|e| Error::Io(format!("{}: {e}", args.phenotypes.display())))?;
    let (_, ph) = io::parse_phenotypes_standalone(&text)?;
    if ph.is_categorical() {
        report.warnings.push("categorical encoding".into());
    }
    if ph.measurement.is_constant() {
        report
            .warnings
            .push("degenerate phenotype: F-ratio undefined".into());
    }
    let out = report.time("anova", || AnovaReport::new(&ph.measurement, &p))?;
    emit(&args.out, &out, report)
}

fn gwas(args: GwasArgs, report: &mut RunReport) -> Result<()> {
    let cohort = args.cohort.load(report)?;
    let cfg = PipelineConfig {
        window: args.cohort.window,
        iterations: args.iterations,
        workers: args.workers,
        tolerance: DEFAULT_TOLERANCE,
        r_policy: match args.r_policy {
            RPolicyArg::MinElement => RPolicy::MinElement,
            RPolicyArg::Majority => RPolicy::Majority,
        },
        phased: args.cohort.phased,
        classifier: args.cohort.classifier(),
    };
    report.config = serde_json::to_value(&cfg).unwrap_or(Value::Null);
    if cohort.phenotypes.measurement.is_constant() {
        report.warnings.push("degenerate phenotype".into());
    }
    let mut out = report.time("search", || {
        pipeline::run_gwas(
            &cohort.table,
            &cohort.phenotypes.measurement,
            &cohort.b,
            &cfg,
        )
    })?;
    if args.deterministic {
        out.runtime_ms = 0;
    }
    emit(&args.out, &out, report)
}

fn simulate(args: SimulateArgs, report: &mut RunReport) -> Result<()> {
    let spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?
        }
        None => PlantSpec::uniform(
            args.seed,
            args.individuals,
            args.positions,
            args.plant.clone(),
            match args.effect {
                EffectArg::Additive => Effect::Additive { gap: args.gap },
                EffectArg::Xor => Effect::Xor { gap: args.gap },
            },
            args.noise_sd,
            args.maf,
        ),
    };
    report.config = serde_json::to_value(&spec).unwrap_or(Value::Null);
    let cohort = report.time("generate", || synth::generate(&spec))?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", args.out_dir.display())))?;
    write_file(
        &args.out_dir.join("genotypes.tsv"),
        &io::write_genotypes(&cohort.genotypes),
        report,
    )?;
    write_file(
        &args.out_dir.join("phenotypes.tsv"),
        &io::write_phenotypes(cohort.genotypes.ids(), &cohort.phenotype),
        report,
    )?;
    let truth =
        serde_json::to_string_pretty(&cohort.truth).map_err(|e| Error::Io(e.to_string()))?;
    write_file(&args.out_dir.join("truth.json"), &(truth + "\n"), report)
}

fn verify(args: VerifyArgs, report: &mut RunReport) -> Result<()> {
    let cohort = args.cohort.load(report)?;
    let e = io::read_partition(&args.e, Some(cohort.table.individuals()))?;
    let tau = io::parse_segment(&args.tau, cohort.table.positions())?;
    let cfg = PipelineConfig {
        window: args.cohort.window,
        ..PipelineConfig::default()
    };
    let check = report.time("verify", || {
        pipeline::verify_association(&cohort.b, &cohort.table, &e, &tau, &cfg)
    })?;
    emit(&args.out, &check, report)
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut report = RunReport::default();
    let result = match cli.command {
        Command::Solve(a) => {
            report.command = "solve".into();
            solve(a, &mut report)
        }
        Command::Anova(a) => {
            report.command = "anova".into();
            anova(a, &mut report)
        }
        Command::Gwas(a) => {
            report.command = "gwas".into();
            gwas(a, &mut report)
        }
        Command::Simulate(a) => {
            report.command = "simulate".into();
            simulate(a, &mut report)
        }
        Command::Verify(a) => {
            report.command = "verify".into();
            verify(a, &mut report)
        }
    };
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            report.error = Some(e.to_string());
            1
        }
    };
    let text = serde_json::to_string(&report).unwrap_or_default();
    match &cli.report {
        Some(path) => {
            if let Err(e) = fs::write(path, text + "\n") {
                eprintln!("error: {}: {e}", path.display());
            }
        }
        None => eprintln!("{text}"),
    }
    code
}
