use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::aggregate::{aggregate, write_summary};
use super::config::{parse_config, EnvConfig, RunConfig};
use super::presets::{env_preset, run_preset, ENV_PRESETS, RUN_PRESETS};
use super::report::{bounds_report, write_bounds_report, BOUNDS_FILE};
use super::suite::{describe_oracle, run_suite, CONFIG_FILE, METRICS_FILE};
use crate::error::{Error, Result};
use crate::optim::Algorithm;

pub const LOG_ENV: &str = "ALTQ_LOG_LEVEL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "altq",
    version,
    about = "Alternating Q-learning experiments with oracle ground truth"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (algorithm, seed) pair of a suite and write CSVs.
    Run {
        /// Config file or preset name.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Comma-separated algorithm list.
        #[arg(long, value_delimiter = ',', value_parser = parse_algo)]
        algo: Option<Vec<Algorithm>>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Print the DARE or value-iteration solution of a config's environment.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the bound checks on the full traces of a finished run.
    Bounds {
        /// Directory written by `run`.
        #[arg(long)]
        out: PathBuf,
        /// Config of the run; defaults to the copy saved in the output directory.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Mean and std across seeds of one or more metrics files.
    Aggregate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Summary CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List shipped presets, or print one as TOML.
    Presets { name: Option<String> },
}

fn parse_algo(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| e.to_string())
}

/// Exit code for an error: 1 for bad input, 2 for failures while running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Schema(_) | Error::InvalidArgument(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

fn init_logging() -> Result<()> {
    let level = match std::env::var(LOG_ENV) {
        Err(_) => log::LevelFilter::Info,
        Ok(v) => match v.to_ascii_lowercase().as_str() {
            "error" => log::LevelFilter::Error,
            "info" => log::LevelFilter::Info,
            "debug" => log::LevelFilter::Debug,
            _ => {
                return Err(Error::Validation(vec![format!(
                    "{LOG_ENV} must be one of error, info, debug; got {v:?}"
                )]))
            }
        },
    };
    // a second init in the same process (tests) is harmless
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_target(false)
        .try_init();
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match init_logging().and_then(|()| dispatch(cli.command, stdout)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(config: &Path) -> Result<RunConfig> {
    let cfg = parse_config(config)?;
    log::debug!("loaded config {}", config.display());
    Ok(cfg)
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            out,
            seeds,
            algo,
            steps,
        } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            if let Some(a) = algo {
                cfg.algorithms = a;
            }
            if let Some(n) = steps {
                cfg.steps = n;
            }
            let out = out.or_else(|| cfg.out.clone()).ok_or_else(|| {
                Error::Validation(vec!["no output directory: pass --out or set `out`".into()])
            })?;
            cfg.validate()?;
            let res = run_suite(&cfg, Some(&out))?;
            for &a in &cfg.algorithms {
                let runs: Vec<_> = res.runs.iter().filter(|r| r.algorithm == a).collect();
                let stops = runs.iter().filter(|r| r.stopped_at.is_some()).count();
                let fails = runs.iter().filter(|r| r.failure.is_some()).count();
                writeln!(
                    stdout,
                    "{a}: {} runs, {stops} reached the stop criterion, {fails} failed",
                    runs.len()
                )?;
            }
            writeln!(stdout, "wrote {}", out.join(METRICS_FILE).display())?;
        }
        Command::Oracle { config } => describe_oracle(&load(&config)?, stdout)?,
        Command::Bounds { out, config } => {
            let cfg = load(&config.unwrap_or_else(|| out.join(CONFIG_FILE)))?;
            let rows = bounds_report(&cfg, &out)?;
            let path = out.join(BOUNDS_FILE);
            write_bounds_report(&path, &rows)?;
            let fails = |f: &dyn Fn(&super::report::BoundReportRow) -> bool| {
                rows.iter().filter(|r| !f(r)).count()
            };
            writeln!(
                stdout,
                "{} rows: lemma 1 violations {}, lemma 2 failures {}, lemma 3 failures {}, theorem failures {}",
                rows.len(),
                rows.iter().map(|r| r.row.lemma1_violations).max().unwrap_or(0),
                fails(&|r| r.lemma2_holds()),
                fails(&|r| r.lemma3_holds()),
                fails(&|r| r.theorem_holds() != Some(false)),
            )?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
        Command::Aggregate { inputs, out } => {
            let missing: Vec<String> = inputs
                .iter()
                .filter(|p| !p.is_file())
                .map(|p| format!("{}: no such file", p.display()))
                .collect();
            if !missing.is_empty() {
                return Err(Error::Validation(missing));
            }
            let rows = aggregate(&inputs)?;
            match out {
                Some(p) => write_summary(std::fs::File::create(&p)?, &rows)?,
                None => write_summary(&mut *stdout, &rows)?,
            }
        }
        Command::Presets { name: None } => {
            writeln!(stdout, "suites (use with --config):")?;
            for (n, d) in RUN_PRESETS {
                writeln!(stdout, "  {n:<16} {d}")?;
            }
            writeln!(stdout, "environments (use as env.preset):")?;
            for (n, d) in ENV_PRESETS {
                writeln!(stdout, "  {n:<16} {d}")?;
            }
        }
        Command::Presets { name: Some(n) } => {
            if let Some(cfg) = run_preset(&n) {
                write!(stdout, "{}", cfg.to_toml_string()?)?;
            } else if let Some(env) = env_preset(&n) {
                #[derive(serde::Serialize)]
                struct Wrap {
                    env: EnvConfig,
                }
                let text = toml::to_string(&Wrap { env })
                    .map_err(|e| Error::InvalidArgument(format!("cannot serialize preset: {e}")))?;
                write!(stdout, "{text}")?;
            } else {
                return Err(Error::Validation(vec![format!("unknown preset {n:?}")]));
            }
        }
    }
    Ok(())
}
