//! The `abt-edit` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::abt::{check_well_formed, parse_tree, WellFormedTree};
use crate::engine::{parse_editor_expr, run, Config, RunOutcome, DEFAULT_FUEL};
use crate::harness::{render_report, run_suite, SuiteOptions, SuiteSummary};
use crate::language::{LanguageSpec, LETLANG};
use crate::logic::{parse_condition, satisfies};
use crate::service::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_STUCK: i32 = 2;
pub const EXIT_FUEL: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "abt-edit", version, about = "Structure editing over abstract binding trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an editor script on a tree.
    Run(RunArgs),
    /// Evaluate a condition at the cursor.
    Query(QueryArgs),
    /// Compare the direct semantics with the lambda encoding on random cases.
    CheckSoundness(SoundnessArgs),
    /// Serve editing sessions over HTTP.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
pub struct TreeSource {
    /// Language spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Start from `(cursor (hole SORT))`.
    #[arg(long, conflicts_with = "tree", required_unless_present = "tree")]
    pub init_sort: Option<String>,
    /// Start from the tree in this file.
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Tree,
    Trace,
    Json,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: TreeSource,
    /// Inline script.
    #[arg(short = 'e', long = "expr", conflicts_with = "script", required_unless_present = "script")]
    pub expr: Option<String>,
    /// Script file.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    pub fuel: usize,
    #[arg(long, value_enum, default_value_t = OutputMode::Tree)]
    pub output: OutputMode,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[command(flatten)]
    pub source: TreeSource,
    /// The condition, e.g. `<>plus & !@hole_e`.
    pub phi: String,
}

#[derive(Args, Debug)]
pub struct SoundnessArgs {
    /// Language spec file; the let language when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000)]
    pub fuel: usize,
    /// Write one line per case and a JSON summary here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub mutate_encoding: bool,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load(source: &TreeSource) -> Result<(LanguageSpec, WellFormedTree), Failure> {
    let spec = LanguageSpec::load(&read(&source.spec)?)?.editor_extend()?;
    let tree = match (&source.init_sort, &source.tree) {
        (Some(sort), _) => WellFormedTree::initial(&spec, spec.sort(sort)?)?,
        (None, Some(path)) => check_well_formed(&parse_tree(&read(path)?, &spec)?, &spec)?,
        (None, None) => return Err(Failure("give --init-sort or --tree".into())),
    };
    Ok((spec, tree))
}

/// Parses `args` and runs the command. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Query(a) => {
            let (spec, tree) = load(&a.source)?;
            let phi = parse_condition(&a.phi)?;
            writeln!(out, "{}", satisfies(tree.focus(), &phi, &spec)?)?;
            Ok(EXIT_OK)
        }
        Command::CheckSoundness(a) => cmd_check_soundness(a, out),
        Command::Serve(a) => {
            let rt = tokio::runtime::Runtime::new()?;
            writeln!(err, "listening on {}", a.addr)?;
            rt.block_on(crate::service::serve(&a.addr))?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (spec, tree) = load(&a.source)?;
    let text = match (&a.expr, &a.script) {
        (Some(e), _) => e.clone(),
        (None, Some(p)) => read(p)?,
        (None, None) => return Err(Failure("give -e or --script".into())),
    };
    let expr = parse_editor_expr(&text)?;
    let result = run(Config::new(expr, tree.clone())?, &spec, a.fuel);
    match a.output {
        OutputMode::Json => {
            let report = RunReport::new(&result, &spec);
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        OutputMode::Trace => {
            writeln!(out, "   init  {tree}")?;
            for (i, e) in result.trace.iter().enumerate() {
                writeln!(out, "{:>4}  {:<6} {}", i + 1, e.label.to_string(), e.tree)?;
            }
            writeln!(out, "{}", result.last.tree())?;
        }
        OutputMode::Tree => writeln!(out, "{}", result.last.tree())?,
    }
    Ok(match &result.outcome {
        RunOutcome::Terminal => EXIT_OK,
        RunOutcome::Stuck(s) => {
            writeln!(err, "stuck: {}: {}", s.reason.code(), s.detail)?;
            EXIT_STUCK
        }
        RunOutcome::FuelExhausted => {
            writeln!(err, "fuel exhausted after {} steps", result.steps())?;
            EXIT_FUEL
        }
    })
}

fn cmd_check_soundness(a: SoundnessArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let document = match &a.spec {
        Some(p) => read(p)?,
        None => LETLANG.to_owned(),
    };
    let spec = LanguageSpec::load(&document)?.editor_extend()?;
    let opts = SuiteOptions {
        cases: a.cases,
        seed: a.seed,
        fuel: a.fuel,
        mutate: a.mutate_encoding,
        ..SuiteOptions::default()
    };
    let reports = run_suite(&spec, &opts);
    if let Some(path) = &a.report {
        std::fs::write(path, render_report(&reports)).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    let summary = SuiteSummary::from_reports(&reports);
    writeln!(out, "{summary}")?;
    Ok(if summary.mismatch > 0 { EXIT_MISMATCH } else { EXIT_OK })
}
