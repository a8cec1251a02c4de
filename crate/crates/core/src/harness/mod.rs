//! Experiment plumbing: TOML configs and shipped presets, seeded parallel
//! suites with CSV output, cross-seed aggregation, bound reports and the CLI.
//!
//! A suite writes into one directory:
//!
//! - `metrics.csv`: one [`MetricRow`] per run and checkpoint
//! - `traces/<algorithm>_seed<n>.csv`: per-run trace
//! - `config.toml`: the resolved config
//! - `timings.csv`: wall-clock per run (the only non-reproducible file)

pub mod aggregate;
pub mod cli;
pub mod config;
pub mod presets;
pub mod report;
pub mod suite;

pub use aggregate::{aggregate, mean_std, summarize, write_summary, Stat, SummaryRow};
pub use cli::{exit_code, run_cli};
pub use config::{parse_config, EnvConfig, LqrConfig, ResolvedEnv, RunConfig, TraceMode};
pub use presets::{env_preset, run_preset};
pub use report::{bounds_report, write_bounds_report, BoundContext, BoundReportRow};
pub use suite::{
    read_metrics, run_suite, write_metrics, GroundTruth, MetricRow, RunSummary, SuiteResult,
    METRICS_FILE,
};
