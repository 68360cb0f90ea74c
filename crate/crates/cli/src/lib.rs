//! `levy-exit` command line.
//!
//! Exit codes: 0 success, 1 a cross-check contradiction, 2 bad input or
//! configuration.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use levy_exit::catalog::{builtin_scenarios, witnesses};
use levy_exit::classifier::{
    confinable, exit_support_full, exit_support_unbounded, exits_proper, monotonicity, zero_in_exit_support,
};
use levy_exit::estimator::{cross_check_with, estimate_with, CheckStatus};
use levy_exit::report::{estimates_json, estimates_table, report_csv, report_json, report_table};
use levy_exit::rng::derive_seed;
use levy_exit::scenario::{parse_model, parse_scenarios, Scenario};
use levy_exit::{decide, defaults, plan, CheckCase, Execution, ExitQuery, LevyModel, PredicateVector, Scheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRADICTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "levy-exit", version, about = "Classify and simulate two-sided exits of Lévy processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Base seed for path streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Paths per query.
    #[arg(long, global = true)]
    paths: Option<u64>,
    /// Simulation horizon; defaults to M, or 16·max(m, 1) for M = ∞.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Force a scheme: exact, grid or truncated.
    #[arg(long, global = true)]
    scheme: Option<Scheme>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Worker threads for simulation campaigns.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the exit predicates of a model.
    Classify { model: PathBuf },
    /// Decide positivity of both exit laws on a window.
    Decide {
        model: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        m: f64,
        /// Window end; `inf` for unbounded.
        #[arg(long = "M", default_value = "inf")]
        upper: f64,
    },
    /// Estimate window exit probabilities for every query of a scenario file.
    Estimate { scenario: PathBuf },
    /// Cross-check verdicts against simulation.
    Verify {
        #[arg(required_unless_present = "builtin")]
        scenario: Option<PathBuf>,
        /// Use the built-in scenario set.
        #[arg(long, conflicts_with = "scenario")]
        builtin: bool,
    },
    /// List the built-in witness models.
    Catalog,
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Runs a campaign on `--workers` threads when given, else on the global pool.
#[cfg(feature = "parallel")]
fn on_workers<R: Send>(cli: &Cli, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    match cli.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| usage(format!("--workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn on_workers<R: Send>(_cli: &Cli, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    Ok(f())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Classify { model } => cmd_classify(cli, &load_model(model)?, out),
        Command::Decide { model, a, b, m, upper } => {
            let query = ExitQuery::new(*a, *b, *m, *upper).map_err(usage)?;
            cmd_decide(cli, &load_model(model)?, &query, out)
        }
        Command::Estimate { scenario } => cmd_estimate(cli, &load_scenarios(scenario)?, out),
        Command::Verify { scenario, builtin } => {
            let scenarios = if *builtin {
                builtin_scenarios()
            } else {
                load_scenarios(scenario.as_ref().expect("clap requires a scenario"))?
            };
            cmd_verify(cli, &scenarios, out)
        }
        Command::Catalog => cmd_catalog(cli, out),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<LevyModel, Failure> {
    parse_model(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_scenarios(path: &Path) -> Result<Vec<Scenario>, Failure> {
    parse_scenarios(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn io(e: std::io::Error) -> Failure {
    usage(format!("write failed: {e}"))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("values serialize to JSON")
}

fn cmd_classify(cli: &Cli, model: &LevyModel, out: &mut dyn Write) -> CmdResult {
    let mono = monotonicity(model);
    let vector = PredicateVector::of(model);
    match cli.format {
        Format::Table => {
            writeln!(out, "monotonicity={mono} [prop1.monotone]").map_err(io)?;
            writeln!(out, "{vector}").map_err(io)?;
            let lines = [
                ("exits_proper", exits_proper(model), "prop1"),
                ("zero_in_exit_support", zero_in_exit_support(model), "prop2"),
                ("exit_support_unbounded", exit_support_unbounded(model), "prop5"),
                ("exit_support_full", exit_support_full(model), "corollary"),
                ("confinable", confinable(model), "prop4"),
            ];
            for (name, value, tag) in lines {
                writeln!(out, "{name}={value} [{tag}]").map_err(io)?;
            }
        }
        Format::Structured => {
            let doc = serde_json::json!({
                "monotonicity": mono,
                "exits_proper": { "value": vector.proper, "rule": "prop1" },
                "zero_in_exit_support": { "value": vector.before, "rule": "prop2" },
                "exit_support_unbounded": { "value": vector.after, "rule": "prop5" },
                "exit_support_full": { "value": vector.full, "rule": "corollary" },
                "confinable": { "value": vector.confinable, "rule": "prop4" },
            });
            writeln!(out, "{}", json_line(&doc)).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_decide(cli: &Cli, model: &LevyModel, query: &ExitQuery, out: &mut dyn Write) -> CmdResult {
    let verdict = decide(model, query).map_err(usage)?;
    match cli.format {
        Format::Table => writeln!(out, "verdict={} reason={}", verdict.value, verdict.reason).map_err(io)?,
        Format::Structured => writeln!(out, "{}", json_line(&verdict)).map_err(io)?,
    }
    Ok(EXIT_OK)
}

fn apply_overrides(cli: &Cli, case: &mut CheckCase) {
    if cli.scheme.is_some() {
        case.hints.scheme = cli.scheme;
    }
    if cli.horizon.is_some() {
        case.hints.horizon = cli.horizon;
    }
}

fn cmd_estimate(cli: &Cli, scenarios: &[Scenario], out: &mut dyn Write) -> CmdResult {
    let mut rows = Vec::new();
    for scenario in scenarios {
        let c = &scenario.campaign;
        let paths = cli.paths.or(c.paths).unwrap_or(defaults::PATHS);
        let seed = cli.seed.or(c.seed).unwrap_or(defaults::SEED);
        let alpha = c.alpha.unwrap_or(defaults::ALPHA);
        for (index, mut case) in scenario.cases().into_iter().enumerate() {
            apply_overrides(cli, &mut case);
            let mut hints = case.hints;
            hints.horizon = Some(hints.horizon.unwrap_or_else(|| defaults::horizon_for(&case.query)));
            if hints.horizon.is_some_and(|h| h < case.query.m) {
                return Err(usage(format!("{}: horizon is below the window start", case.id)));
            }
            let p = plan(&case.model, case.query.a, case.query.b, &hints).map_err(|e| usage(format!("{}: {e}", case.id)))?;
            let row_seed = derive_seed(seed, index as u64);
            let e = on_workers(cli, || estimate_with(&case.model, &case.query, paths, &p, row_seed, alpha, Execution::Parallel))?
                .map_err(|e| usage(format!("{}: {e}", case.id)))?;
            rows.push((case.id, e));
        }
    }
    let text = match cli.format {
        Format::Table => estimates_table(&rows),
        Format::Structured => estimates_json(&rows),
    };
    write!(out, "{text}").map_err(io)?;
    if let Some(dir) = &cli.out {
        write_file(dir, "estimates.json", &estimates_json(&rows))?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, scenarios: &[Scenario], out: &mut dyn Write) -> CmdResult {
    let mut cases: Vec<CheckCase> = scenarios.iter().flat_map(Scenario::cases).collect();
    for case in &mut cases {
        apply_overrides(cli, case);
    }
    let paths = cli.paths.unwrap_or(defaults::PATHS);
    let seed = cli.seed.unwrap_or(defaults::SEED);
    let report = on_workers(cli, || cross_check_with(&cases, paths, defaults::ALPHA, seed, Execution::Parallel))?.map_err(usage)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    write_file(&dir, "report.csv", &report_csv(&report))?;
    write_file(&dir, "report.json", &report_json(&report))?;
    match cli.format {
        Format::Table => write!(out, "{}", report_table(&report)).map_err(io)?,
        Format::Structured => write!(out, "{}", report_json(&report)).map_err(io)?,
    }
    let bad: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.status == CheckStatus::Contradiction)
        .map(|r| r.id.as_str())
        .collect();
    if bad.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(Failure {
            code: EXIT_CONTRADICTION,
            message: format!("contradiction in {}", bad.join(", ")),
        })
    }
}

const CONDITIONS: [&str; 4] = ["proper", "before", "after", "full"];

fn cmd_catalog(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let ws = witnesses();
    match cli.format {
        Format::Table => {
            for w in &ws {
                writeln!(out, "{:<20} {}", w.name, w.predicates()).map_err(io)?;
                writeln!(out, "{:<20} {}", "", w.description).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
            for i in 0..4 {
                for j in 0..4 {
                    if i == j {
                        continue;
                    }
                    let sep: Vec<_> = ws
                        .iter()
                        .filter(|w| {
                            let v = w.predicates().exit_conditions();
                            v[i] && !v[j]
                        })
                        .map(|w| w.name)
                        .collect();
                    let shown = if sep.is_empty() { "none (implied)".to_string() } else { sep.join(", ") };
                    writeln!(out, "{} without {}: {shown}", CONDITIONS[i], CONDITIONS[j]).map_err(io)?;
                }
            }
        }
        Format::Structured => {
            let doc: Vec<_> = ws
                .iter()
                .map(|w| {
                    let v = w.predicates();
                    serde_json::json!({
                        "name": w.name,
                        "description": w.description,
                        "model": w.model,
                        "proper": v.proper,
                        "before": v.before,
                        "after": v.after,
                        "full": v.full,
                        "confinable": v.confinable,
                    })
                })
                .collect();
            writeln!(out, "{}", json_line(&doc)).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}
