//! Runs a shipped suite into a directory, then aggregates its metrics
//! across seeds.
//!
//! `cargo run --example suite -- [preset] [out_dir]`

use std::path::PathBuf;

use altq::harness::aggregate::write_summary;
use altq::harness::suite::METRICS_FILE;
use altq::harness::{aggregate, run_preset, run_suite};

fn main() -> altq::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "tabular_amsgrad".into());
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("altq_{preset}")));

    let mut cfg = run_preset(&preset)
        .ok_or_else(|| altq::Error::Validation(vec![format!("unknown preset {preset:?}")]))?;
    cfg.steps = cfg.steps.min(5000);
    let res = run_suite(&cfg, Some(&out))?;
    for r in &res.runs {
        println!("{:<20} {:>6} steps  {:.2} s", r.run_id, r.steps, r.seconds);
    }

    let summary = aggregate(&[out.join(METRICS_FILE)])?;
    let last: Vec<_> = summary
        .iter()
        .filter(|r| r.t == cfg.steps)
        .cloned()
        .collect();
    write_summary(std::io::stdout(), &last)?;
    println!("outputs in {}", out.display());
    Ok(())
}
