//! The `weat` command line.
//!
//! Every option is an explicit flag; the environment is never consulted.
//! Commands return the process exit status: 0 when no error-severity event
//! occurred, 1 otherwise.

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use weat_core::runner::RunnerConfig;
use weat_core::stats::{EqualSizePolicy, StatsConfig};
use weat_core::templating::{build_sentence_test, make_uncased_variant};
use weat_core::testspec::collect_texts;

use crate::report::{self, HeatmapValue};
use crate::results::{read_records, write_records};
use crate::runner::run_suite_parallel;
use crate::store::load_store;
use crate::suite::load_suite;
use crate::templates::parse_templates;
use crate::testfile::{parse_test, serialize_test};

#[derive(Debug, Parser)]
#[command(name = "weat", version, about = "Embedding association tests (WEAT/SEAT) over precomputed embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate every test in a suite directory.
    Validate {
        suite_dir: PathBuf,
    },
    /// Write every unique text of a suite, one per line, for embedding.
    CollectTexts {
        suite_dir: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a suite against one or more embedding files.
    Run(RunArgs),
    /// Render a results file.
    Report {
        results: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Cell value for heatmaps.
        #[arg(long, value_enum, default_value_t = Value::P)]
        value: Value,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive a sentence-level or uncased test from a test document.
    Derive {
        test_file: PathBuf,
        /// Templates for the target sets (requires --attribute-templates).
        #[arg(long, requires = "attribute_templates")]
        target_templates: Option<PathBuf>,
        /// Templates for the attribute sets (requires --target-templates).
        #[arg(long, requires = "target_templates")]
        attribute_templates: Option<PathBuf>,
        /// Lowercase every item with Turkish casing rules (applied last).
        #[arg(long)]
        uncased: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub suite_dir: PathBuf,
    /// Embedding interchange files, one per model.
    #[arg(long, required = true, num_args = 1..)]
    pub embeddings: Vec<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: u64,
    #[arg(long, default_value_t = 100_000)]
    pub exact_threshold: u64,
    #[arg(long, value_enum, default_value_t = Policy::Error)]
    pub equal_size_policy: Policy,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Abort on the first failed test instead of recording the failure.
    #[arg(long)]
    pub fail_fast: bool,
    /// Results file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
    Heatmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Value {
    /// p-values
    P,
    /// effect sizes
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Error,
    Subsample,
}

impl From<Policy> for EqualSizePolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Error => EqualSizePolicy::Error,
            Policy::Subsample => EqualSizePolicy::Subsample,
        }
    }
}

pub fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { suite_dir } => cmd_validate(&suite_dir),
        Command::CollectTexts { suite_dir, out } => cmd_collect_texts(&suite_dir, out.as_deref()),
        Command::Run(args) => cmd_run(&args),
        Command::Report {
            results,
            format,
            value,
            out,
        } => cmd_report(&results, format, value, out.as_deref()),
        Command::Derive {
            test_file,
            target_templates,
            attribute_templates,
            uncased,
            out,
        } => cmd_derive(
            &test_file,
            target_templates.as_deref().zip(attribute_templates.as_deref()),
            uncased,
            out.as_deref(),
        ),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn check_output_path(out: Option<&Path>) -> Result<()> {
    if let Some(parent) = out.and_then(Path::parent).filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            bail!("output directory {} does not exist", parent.display());
        }
    }
    Ok(())
}

pub fn cmd_validate(suite_dir: &Path) -> Result<u8> {
    let loaded = load_suite(suite_dir)?;
    let diagnostics = loaded.diagnostics();
    for d in &diagnostics {
        eprintln!("{d}");
    }
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();
    eprintln!(
        "{} test(s), {errors} error(s), {} warning(s)",
        loaded.files.len(),
        diagnostics.len() - errors
    );
    Ok(u8::from(errors > 0))
}

pub fn cmd_collect_texts(suite_dir: &Path, out: Option<&Path>) -> Result<u8> {
    check_output_path(out)?;
    let suite = load_suite(suite_dir)?.into_suite()?;
    let mut text = String::new();
    for t in collect_texts(&suite) {
        if t.contains(['\n', '\r']) {
            bail!("text {t:?} contains a line break and cannot be written one per line");
        }
        text.push_str(&t);
        text.push('\n');
    }
    emit(out, text.as_bytes())?;
    Ok(0)
}

pub fn cmd_run(args: &RunArgs) -> Result<u8> {
    if !args.suite_dir.is_dir() {
        bail!("suite directory {} does not exist", args.suite_dir.display());
    }
    for path in &args.embeddings {
        if !path.is_file() {
            bail!("embedding file {} does not exist", path.display());
        }
    }
    check_output_path(args.out.as_deref())?;
    let config = RunnerConfig {
        stats: StatsConfig {
            exact_threshold: args.exact_threshold,
            mc_samples: args.mc_samples,
            equal_size_policy: args.equal_size_policy.into(),
            seed: args.seed,
        },
        fail_fast: args.fail_fast,
    };
    config.stats.validate()?;

    let loaded = load_suite(&args.suite_dir)?;
    for d in loaded.diagnostics().iter().filter(|d| !d.is_error()) {
        eprintln!("{d}");
    }
    let suite = loaded.into_suite()?;
    if suite.is_empty() {
        bail!("no tests found in {}", args.suite_dir.display());
    }
    let stores = args
        .embeddings
        .iter()
        .map(|p| load_store(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;

    let records = run_suite_parallel(&suite, &stores, &config, args.workers)?;
    let mut buf = Vec::new();
    write_records(&records, &mut buf)?;
    emit(args.out.as_deref(), &buf)?;

    let failures: Vec<_> = records.iter().filter(|r| r.is_failure()).collect();
    for r in &failures {
        eprintln!(
            "error: {} on {}: {}",
            r.test_id,
            r.model_id,
            r.result.as_ref().err().map(String::as_str).unwrap_or("")
        );
    }
    for r in &records {
        for w in &r.warnings {
            eprintln!("warning: {} on {}: {w}", r.test_id, r.model_id);
        }
    }
    eprintln!(
        "tests: {}, models: {}, records: {}, failures: {}",
        suite.len(),
        stores.len(),
        records.len(),
        failures.len()
    );
    Ok(u8::from(!failures.is_empty()))
}

pub fn cmd_report(results: &Path, format: Format, value: Value, out: Option<&Path>) -> Result<u8> {
    check_output_path(out)?;
    let file = File::open(results).with_context(|| format!("cannot open {}", results.display()))?;
    let records = read_records(BufReader::new(file))?;
    let text = match format {
        Format::Csv => report::to_csv(&records),
        Format::Markdown => report::to_markdown(&records),
        Format::Heatmap => report::heatmap_matrix(
            &records,
            match value {
                Value::P => HeatmapValue::PValue,
                Value::D => HeatmapValue::EffectSize,
            },
        )?,
    };
    emit(out, text.as_bytes())?;
    Ok(0)
}

pub fn cmd_derive(
    test_file: &Path,
    templates: Option<(&Path, &Path)>,
    uncased: bool,
    out: Option<&Path>,
) -> Result<u8> {
    check_output_path(out)?;
    if templates.is_none() && !uncased {
        bail!("nothing to derive: pass --target-templates/--attribute-templates and/or --uncased");
    }
    let bytes = fs::read(test_file).with_context(|| format!("cannot read {}", test_file.display()))?;
    let stem = test_file.file_stem().and_then(|s| s.to_str());
    let mut test = parse_test(&bytes, stem).with_context(|| format!("parsing {}", test_file.display()))?;
    if let Some((targets, attributes)) = templates {
        let read = |p: &Path| -> Result<_> {
            let bytes = fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
            parse_templates(&bytes).with_context(|| format!("parsing {}", p.display()))
        };
        test = build_sentence_test(&test, &read(targets)?, &read(attributes)?)?;
    }
    if uncased {
        test = make_uncased_variant(&test)?;
    }
    emit(out, serialize_test(&test).as_bytes())?;
    Ok(0)
}
