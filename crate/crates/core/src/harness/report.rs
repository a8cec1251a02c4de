use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::config::{ResolvedEnv, RunConfig};
use super::suite::{
    check_header, fmt17, lqr_ground_truth, parse_run_id, tabular_c, tabular_ground_truth, TRACE_DIR,
};
use crate::bounds::{g_infty, BoundRow, BoundTracker, TrackerSetup};
use crate::env::LqrModel;
use crate::error::{Error, Result};

pub const BOUNDS_FILE: &str = "bounds_report.csv";

pub const BOUND_COLUMNS: [&str; 16] = [
    "run_id",
    "t",
    "lemma1_grad_max",
    "lemma1_m_max",
    "lemma1_vhat_max",
    "g_inf",
    "lemma1_violations",
    "lemma2_lhs",
    "lemma2_rhs",
    "lemma2_holds",
    "lemma3_lhs",
    "lemma3_rhs",
    "lemma3_holds",
    "theorem_lhs",
    "theorem_rhs",
    "theorem_holds",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReportRow {
    pub run_id: String,
    pub row: BoundRow,
}

impl BoundReportRow {
    pub fn lemma2_holds(&self) -> bool {
        self.row.lemma2_lhs <= self.row.lemma2_rhs
    }

    pub fn lemma3_holds(&self) -> bool {
        self.row.lemma3_lhs <= self.row.lemma3_rhs
    }

    pub fn theorem_holds(&self) -> Option<bool> {
        Some(self.row.theorem_lhs? <= self.row.theorem_rhs?)
    }
}

/// Upper bound on the stage cost over the clipped box `|z_i| <= z_max`.
pub fn lqr_cost_bound(model: &LqrModel, z_max: f64) -> f64 {
    let (n, m) = (model.state_dim(), model.action_dim());
    let mut big = DMatrix::zeros(n + m, n + m);
    big.view_mut((0, 0), (n, n)).copy_from(&model.q);
    big.view_mut((0, n), (n, m)).copy_from(&model.n);
    big.view_mut((n, 0), (m, n)).copy_from(&model.n.transpose());
    big.view_mut((n, n), (m, m)).copy_from(&model.r);
    let lmax = big.symmetric_eigenvalues().max().max(0.0);
    lmax * (n + m) as f64 * z_max * z_max
}

/// Constants of the bound checks for one suite, independent of the algorithm.
#[derive(Debug, Clone)]
pub struct BoundContext {
    pub g_inf: f64,
    pub d_inf: f64,
    /// Already multiplied by `τ̃²`.
    pub c: Option<f64>,
    pub theta_star: Vec<f64>,
    pub dim: usize,
}

impl BoundContext {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let s2 = cfg.scale * cfg.scale;
        let d_inf = 2.0 * cfg.radius;
        let (r_bar, gamma, ground, c) = match cfg.env.resolve()? {
            ResolvedEnv::Tabular(mdp) => {
                let g = tabular_ground_truth(&mdp)?;
                let c = match cfg.c {
                    Some(c) => c,
                    None => tabular_c(&mdp, &g.theta_star, cfg.radius)?,
                };
                (mdp.r_max, mdp.gamma, g, Some(c))
            }
            ResolvedEnv::Lqr(env) => {
                let g = lqr_ground_truth(&env)?;
                (
                    lqr_cost_bound(&env.model, env.map.z_max),
                    env.model.gamma,
                    g,
                    cfg.c,
                )
            }
        };
        let c = match c {
            Some(c) if c > 0.0 => Some(c * s2),
            Some(c) => {
                log::warn!(
                    "monotonicity constant c = {c:.3e} is not positive; convergence bounds skipped"
                );
                None
            }
            None => None,
        };
        Ok(Self {
            g_inf: s2 * g_infty(r_bar, gamma, d_inf),
            d_inf,
            c,
            dim: ground.theta_star.dim(),
            theta_star: ground.theta_star.into_inner(),
        })
    }
}

fn trace_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let tdir = dir.join(TRACE_DIR);
    if !tdir.is_dir() {
        return Err(Error::Validation(vec![format!(
            "{}: no trace directory",
            tdir.display()
        )]));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&tdir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .expect("header checked")
}

/// Replays one full trace through a [`BoundTracker`].
pub fn bounds_for_trace(
    cfg: &RunConfig,
    ctx: &BoundContext,
    path: &Path,
) -> Result<Vec<BoundReportRow>> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let (algo, _) = parse_run_id(&stem).ok_or_else(|| {
        Error::Schema(format!(
            "{}: file name is not <algorithm>_seed<n>.csv",
            path.display()
        ))
    })?;
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let d = ctx.dim;
    let mut want: Vec<String> = vec!["t".into(), "alpha_t".into()];
    for p in ["theta", "g", "m", "v_hat"] {
        want.extend((0..d).map(|i| format!("{p}_{i}")));
    }
    let missing: Vec<&str> = want
        .iter()
        .filter(|w| !header.contains(w))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "{}: missing columns [{}] (bounds need a run with trace = \"full\")",
            path.display(),
            missing.join(", ")
        )));
    }
    let it = column(&header, "t");
    let ia = column(&header, "alpha_t");
    let block = |p: &str| column(&header, &format!("{p}_0"));
    let (ith, ig, im, iv) = (block("theta"), block("g"), block("m"), block("v_hat"));

    let setup = TrackerSetup {
        sched: cfg.schedule_for(algo),
        g_inf: ctx.g_inf,
        d_inf: ctx.d_inf,
        c: ctx.c,
        theta_star: Some(ctx.theta_star.clone()),
    };
    let mut tracker = BoundTracker::new(setup, d);
    let mut sum = vec![0.0; d];
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    let parse = |rec: &csv::StringRecord, i: usize| -> Result<f64> {
        rec[i].parse::<f64>().map_err(|_| {
            Error::Schema(format!(
                "{}: cannot parse {:?} in column {}",
                path.display(),
                &rec[i],
                header[i]
            ))
        })
    };
    let vec_at = |rec: &csv::StringRecord, start: usize| -> Result<Vec<f64>> {
        (start..start + d).map(|i| parse(rec, i)).collect()
    };
    for rec in rd.records() {
        let rec = rec?;
        let t: usize = rec[it].parse().map_err(|_| {
            Error::Schema(format!("{}: bad step index {:?}", path.display(), &rec[it]))
        })?;
        if t != last.map_or(1, |l| l + 1) {
            return Err(Error::Schema(format!(
                "{}: steps must run 1, 2, 3, ... without gaps; found t = {t}",
                path.display()
            )));
        }
        let theta = vec_at(&rec, ith)?;
        tracker.observe_parts(
            t,
            parse(&rec, ia)?,
            &theta,
            &vec_at(&rec, ig)?,
            &vec_at(&rec, im)?,
            &vec_at(&rec, iv)?,
        );
        for (s, x) in sum.iter_mut().zip(&theta) {
            *s += x;
        }
        if t % cfg.cadence == 0 {
            let avg: Vec<f64> = sum.iter().map(|s| s / t as f64).collect();
            out.push(BoundReportRow {
                run_id: stem.clone(),
                row: tracker.row(t, &avg)?,
            });
        }
        last = Some(t);
    }
    if let Some(t) = last.filter(|t| t % cfg.cadence != 0) {
        let avg: Vec<f64> = sum.iter().map(|s| s / t as f64).collect();
        out.push(BoundReportRow {
            run_id: stem,
            row: tracker.row(t, &avg)?,
        });
    }
    Ok(out)
}

/// Evaluates every bound on every trace under `dir/traces`.
pub fn bounds_report(cfg: &RunConfig, dir: &Path) -> Result<Vec<BoundReportRow>> {
    let ctx = BoundContext::new(cfg)?;
    let mut rows = Vec::new();
    for f in trace_files(dir)? {
        rows.extend(bounds_for_trace(cfg, &ctx, &f)?);
    }
    Ok(rows)
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

pub fn write_bounds_report(path: &Path, rows: &[BoundReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(BOUND_COLUMNS)?;
    for r in rows {
        let b = &r.row;
        w.write_record([
            r.run_id.clone(),
            b.t.to_string(),
            fmt17(b.lemma1_grad_max),
            fmt17(b.lemma1_m_max),
            fmt17(b.lemma1_vhat_max),
            fmt17(b.g_inf),
            b.lemma1_violations.to_string(),
            fmt17(b.lemma2_lhs),
            fmt17(b.lemma2_rhs),
            flag(r.lemma2_holds()),
            fmt17(b.lemma3_lhs),
            fmt17(b.lemma3_rhs),
            flag(r.lemma3_holds()),
            b.theorem_lhs.map(fmt17).unwrap_or_default(),
            b.theorem_rhs.map(fmt17).unwrap_or_default(),
            r.theorem_holds().map(flag).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Header check for an existing report.
pub fn check_bounds_header(path: &Path) -> Result<()> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    check_header(path, &header, &BOUND_COLUMNS)
}
