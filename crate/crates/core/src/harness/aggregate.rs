use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::suite::{fmt17, read_metrics, MetricRow};
use crate::error::Result;
use crate::optim::Algorithm;

pub const SUMMARY_METRICS: [&str; 5] = [
    "policy_err",
    "param_err",
    "avg_param_err",
    "grad_norm",
    "loss",
];

/// Mean and sample standard deviation of one metric over the runs that report it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

/// Seed-aggregated metrics of one algorithm at one `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub t: usize,
    /// One entry per [`SUMMARY_METRICS`] column; `None` when no run reports it.
    pub stats: [Option<Stat>; 5],
}

/// Mean and sample std (`n - 1` denominator; 0 for a single value).
///
/// Values are sorted before summation so the result does not depend on
/// input order.
pub fn mean_std(values: &[f64]) -> Option<Stat> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        dev.sort_by(f64::total_cmp);
        (dev.iter().sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Some(Stat { n, mean, std })
}

fn metric(r: &MetricRow, i: usize) -> Option<f64> {
    [
        r.policy_err,
        r.param_err,
        r.avg_param_err,
        r.grad_norm,
        r.loss,
    ][i]
}

/// Groups rows by `(algorithm, t)`; failure rows carry no values and are skipped.
pub fn summarize(rows: &[MetricRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Algorithm, usize), Vec<&MetricRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.algorithm, r.t)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, t), rs)| {
            let stats = std::array::from_fn(|i| {
                let vals: Vec<f64> = rs.iter().filter_map(|r| metric(r, i)).collect();
                mean_std(&vals)
            });
            SummaryRow {
                algorithm,
                t,
                stats,
            }
        })
        .collect()
}

/// Reads and summarizes metric files.
pub fn aggregate(paths: &[PathBuf]) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(read_metrics(p)?);
    }
    Ok(summarize(&rows))
}

pub fn summary_header() -> Vec<String> {
    let mut h = vec!["algorithm".to_string(), "t".to_string()];
    for m in SUMMARY_METRICS {
        h.extend([format!("{m}_n"), format!("{m}_mean"), format!("{m}_std")]);
    }
    h
}

pub fn write_summary<W: std::io::Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(summary_header())?;
    for r in rows {
        let mut rec = vec![r.algorithm.to_string(), r.t.to_string()];
        for s in &r.stats {
            match s {
                Some(s) => rec.extend([s.n.to_string(), fmt17(s.mean), fmt17(s.std)]),
                None => rec.extend(["0".to_string(), String::new(), String::new()]),
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_file(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_summary(std::fs::File::create(path)?, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(algo: Algorithm, seed: u64, t: usize, v: f64) -> MetricRow {
        MetricRow {
            run_id: format!("{algo}_seed{seed}"),
            algorithm: algo,
            seed,
            t,
            policy_err: None,
            param_err: Some(v),
            avg_param_err: Some(v),
            grad_norm: Some(v),
            loss: Some(v),
            failure: None,
        }
    }

    #[test]
    fn hand_statistics() {
        let s = mean_std(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
        let one = mean_std(&[5.0]).unwrap();
        assert_eq!((one.mean, one.std), (5.0, 0.0));
        assert!(mean_std(&[]).is_none());
    }

    #[test]
    fn groups_by_algorithm_and_t() {
        let rows = vec![
            row(Algorithm::Adam, 0, 100, 1.0),
            row(Algorithm::Adam, 1, 100, 3.0),
            row(Algorithm::AdamR, 0, 100, 7.0),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        let adam = s[0].stats[1].unwrap();
        assert_eq!((adam.n, adam.mean), (2, 2.0));
        assert!(s[0].stats[0].is_none());
        assert_eq!(s[1].stats[1].unwrap().std, 0.0);
    }

    #[test]
    fn order_does_not_matter() {
        let vals = [0.1, 0.7, 1e-9, 3.3, 2.2e3, 0.3];
        let mut rows: Vec<MetricRow> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| row(Algorithm::Sgd, i as u64, 100, *v))
            .collect();
        let a = summarize(&rows);
        rows.reverse();
        rows.swap(1, 4);
        assert_eq!(summarize(&rows), a);
    }
}
