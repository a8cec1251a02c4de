use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ResolvedEnv, RunConfig, TraceMode};
use crate::env::{LqrEnv, TabularMdp};
use crate::error::{Error, Result};
use crate::optim::{Algorithm, Domain};
use crate::oracle::{
    estimate_c, lqr_h_star, solve_dare, spectral_norm, theta_star_tabular, value_iteration,
    DareSolution, OptimalQ, C_PROBES, DARE_MAX_ITER, DARE_TOL,
};
use crate::param::ParamVector;
use crate::qlinear::{run_with_observer, Environment, Flow, RunOptions, RunSpec, StepView};

pub const METRICS_FILE: &str = "metrics.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const CONFIG_FILE: &str = "config.toml";
pub const TRACE_DIR: &str = "traces";

/// Value-iteration tolerance for tabular ground truth.
pub const VI_TOL: f64 = 1e-12;

pub const METRIC_COLUMNS: [&str; 10] = [
    "run_id",
    "algorithm",
    "seed",
    "t",
    "policy_err",
    "param_err",
    "avg_param_err",
    "grad_norm",
    "loss",
    "failure",
];

/// One checkpoint of one run. Empty cells deserialize to `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub run_id: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub t: usize,
    /// `‖K_t - K*‖₂` (LQR only).
    pub policy_err: Option<f64>,
    /// `‖θ_t - θ*‖`.
    pub param_err: Option<f64>,
    /// `‖θ̄_t - θ*‖` with `θ̄_t` the mean of `θ_1..θ_t`.
    pub avg_param_err: Option<f64>,
    pub grad_norm: Option<f64>,
    pub loss: Option<f64>,
    pub failure: Option<String>,
}

/// Round-trip exact text for a double: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

impl MetricRow {
    fn record(&self) -> [String; 10] {
        [
            self.run_id.clone(),
            self.algorithm.to_string(),
            self.seed.to_string(),
            self.t.to_string(),
            opt17(self.policy_err),
            opt17(self.param_err),
            opt17(self.avg_param_err),
            opt17(self.grad_norm),
            opt17(self.loss),
            self.failure.clone().unwrap_or_default(),
        ]
    }
}

pub fn run_id(algo: Algorithm, seed: u64) -> String {
    format!("{algo}_seed{seed}")
}

/// Inverse of [`run_id`].
pub fn parse_run_id(id: &str) -> Option<(Algorithm, u64)> {
    let (a, s) = id.rsplit_once("_seed")?;
    Some((a.parse().ok()?, s.parse().ok()?))
}

pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(METRIC_COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a metrics file, checking the header first.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    check_header(path, &header, &METRIC_COLUMNS)?;
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub(crate) fn check_header(path: &Path, got: &[String], want: &[&str]) -> Result<()> {
    let missing: Vec<&str> = want
        .iter()
        .copied()
        .filter(|c| !got.iter().any(|g| g == c))
        .collect();
    let extra: Vec<&str> = got
        .iter()
        .map(String::as_str)
        .filter(|g| !want.contains(g))
        .collect();
    if missing.is_empty() && extra.is_empty() && got.len() == want.len() {
        return Ok(());
    }
    Err(Error::Schema(format!(
        "{}: missing columns [{}], unexpected columns [{}]",
        path.display(),
        missing.join(", "),
        extra.join(", ")
    )))
}

/// Model-based reference values for a suite.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub theta_star: ParamVector,
    pub dare: Option<DareSolution>,
    pub optimal_q: Option<OptimalQ>,
}

pub fn lqr_ground_truth(env: &LqrEnv) -> Result<GroundTruth> {
    let dare = solve_dare(&env.model, DARE_TOL, DARE_MAX_ITER)?;
    let theta_star = env.theta_from_h(&lqr_h_star(&env.model, &dare.p))?;
    Ok(GroundTruth {
        theta_star,
        dare: Some(dare),
        optimal_q: None,
    })
}

pub fn tabular_ground_truth(mdp: &TabularMdp) -> Result<GroundTruth> {
    let opt = value_iteration(mdp, VI_TOL)?;
    Ok(GroundTruth {
        theta_star: theta_star_tabular(&opt),
        dare: None,
        optimal_q: Some(opt),
    })
}

/// Estimated monotonicity constant of a tabular instance (seeded, unscaled).
pub fn tabular_c(mdp: &TabularMdp, theta_star: &[f64], radius: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    estimate_c(mdp, theta_star, &Domain::new(radius)?, C_PROBES, &mut rng)
}

/// Result of one (algorithm, seed) run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_id: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Last completed step.
    pub steps: usize,
    /// Step at which the stop criterion fired.
    pub stopped_at: Option<usize>,
    pub failure: Option<String>,
    pub theta_final: Option<ParamVector>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub rows: Vec<MetricRow>,
    pub runs: Vec<RunSummary>,
    pub ground: GroundTruth,
    pub theta0: ParamVector,
}

impl SuiteResult {
    pub fn rows_for(&self, algo: Algorithm) -> impl Iterator<Item = &MetricRow> {
        self.rows.iter().filter(move |r| r.algorithm == algo)
    }
}

fn trace_header(d: usize, full: bool) -> Vec<String> {
    let mut h: Vec<String> = [
        "t",
        "alpha_t",
        "beta1_t",
        "restarted",
        "grad_norm",
        "loss",
        "target",
        "policy_err",
        "param_err",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut block = |p: &str| h.extend((0..d).map(|i| format!("{p}_{i}")));
    block("theta");
    if full {
        block("g");
        block("m");
        block("v_hat");
    }
    h
}

struct TraceWriter {
    w: csv::Writer<BufWriter<File>>,
    full: bool,
    buf: Vec<String>,
}

impl TraceWriter {
    fn create(path: &Path, d: usize, full: bool) -> Result<Self> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(trace_header(d, full))?;
        Ok(Self {
            w,
            full,
            buf: Vec::new(),
        })
    }

    fn write(
        &mut self,
        v: &StepView<'_>,
        policy_err: Option<f64>,
        param_err: Option<f64>,
    ) -> Result<()> {
        self.buf.clear();
        self.buf.extend([
            v.t.to_string(),
            fmt17(v.info.alpha_t),
            fmt17(v.info.beta1_t),
            u8::from(v.info.restarted).to_string(),
            fmt17(v.grad_norm),
            fmt17(v.loss),
            fmt17(v.target),
            opt17(policy_err),
            opt17(param_err),
        ]);
        self.buf.extend(v.theta.iter().map(|x| fmt17(*x)));
        if self.full {
            for block in [v.g, v.m, v.v_hat] {
                self.buf.extend(block.iter().map(|x| fmt17(*x)));
            }
        }
        self.w.write_record(&self.buf)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

struct RunJob<'a> {
    cfg: &'a RunConfig,
    algo: Algorithm,
    seed: u64,
    theta0: &'a ParamVector,
    theta_star: &'a [f64],
    trace_path: Option<PathBuf>,
}

fn execute<E, P>(env: &E, job: &RunJob<'_>, policy_err: P) -> (Vec<MetricRow>, RunSummary)
where
    E: Environment,
    P: Fn(&[f64]) -> Option<f64>,
{
    let cfg = job.cfg;
    let id = run_id(job.algo, job.seed);
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut last_t = 0;
    let mut stopped_at = None;
    let mut write_err: Option<Error> = None;
    let dist = |a: &[f64]| ParamVector(job.theta_star.to_vec()).distance(a);

    let result = (|| -> Result<ParamVector> {
        let spec = RunSpec {
            algorithm: job.algo,
            schedule: cfg.schedule_for(job.algo),
            domain: Domain::new(cfg.radius)?,
            steps: cfg.steps,
            seed: job.seed,
            options: RunOptions {
                double_q: cfg.double_q,
                scale: cfg.scale * cfg.scale,
                batch: cfg.batch,
                adam_epsilon: cfg.adam_epsilon,
                ..RunOptions::default()
            },
        };
        let mut trace = match &job.trace_path {
            Some(p) => Some(TraceWriter::create(
                p,
                job.theta0.dim(),
                cfg.trace == TraceMode::Full,
            )?),
            None => None,
        };
        let out = run_with_observer(env, &spec, job.theta0.clone(), |v| {
            last_t = v.t;
            let on_cadence = v.t % cfg.cadence == 0;
            let need_policy = on_cadence || cfg.stop_tol.is_some();
            let pe = if need_policy {
                policy_err(v.theta)
            } else {
                None
            };
            let hit = matches!((cfg.stop_tol, pe), (Some(tol), Some(e)) if e <= tol);
            let pa = dist(v.theta);
            if let Some(tw) = trace.as_mut() {
                if cfg.trace == TraceMode::Full || on_cadence || hit {
                    if let Err(e) = tw.write(v, pe, Some(pa)) {
                        write_err = Some(e);
                        return Flow::Stop;
                    }
                }
            }
            if on_cadence || hit {
                rows.push(MetricRow {
                    run_id: id.clone(),
                    algorithm: job.algo,
                    seed: job.seed,
                    t: v.t,
                    policy_err: pe,
                    param_err: Some(pa),
                    avg_param_err: Some(dist(v.theta_avg)),
                    grad_norm: Some(v.grad_norm),
                    loss: Some(v.loss),
                    failure: None,
                });
            }
            if hit {
                stopped_at = Some(v.t);
                Flow::Stop
            } else {
                Flow::Continue
            }
        })?;
        if let Some(tw) = trace {
            tw.finish()?;
        }
        Ok(out.theta_final)
    })();

    let result = match (result, write_err) {
        (_, Some(e)) => Err(e),
        (r, None) => r,
    };
    let (failure, theta_final) = match result {
        Ok(th) => (None, Some(th)),
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\r'], " ");
            log::warn!("{id}: {msg}");
            rows.push(MetricRow {
                run_id: id.clone(),
                algorithm: job.algo,
                seed: job.seed,
                t: last_t + 1,
                policy_err: None,
                param_err: None,
                avg_param_err: None,
                grad_norm: None,
                loss: None,
                failure: Some(msg.clone()),
            });
            (Some(msg), None)
        }
    };
    let summary = RunSummary {
        run_id: id,
        algorithm: job.algo,
        seed: job.seed,
        steps: last_t,
        stopped_at,
        failure,
        theta_final,
        seconds: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "{} finished after {} steps{}",
        summary.run_id,
        summary.steps,
        summary
            .stopped_at
            .map(|t| format!(" (stop criterion at t = {t})"))
            .unwrap_or_default()
    );
    (rows, summary)
}

fn initial_theta(env: &ResolvedEnv, cfg: &RunConfig) -> ParamVector {
    match env {
        ResolvedEnv::Lqr(e) => e.identity_theta(cfg.init_scale),
        ResolvedEnv::Tabular(m) => ParamVector::zeros(m.n_pairs()),
    }
}

/// Runs every (algorithm, seed) pair of `cfg` in parallel.
///
/// With `out` set, writes `metrics.csv`, `timings.csv`, the resolved
/// `config.toml` and one trace file per run under `traces/`. Everything
/// except `timings.csv` is a deterministic function of the config.
pub fn run_suite(cfg: &RunConfig, out: Option<&Path>) -> Result<SuiteResult> {
    cfg.validate()?;
    let env = cfg.env.resolve()?;
    let ground = match &env {
        ResolvedEnv::Lqr(e) => lqr_ground_truth(e)?,
        ResolvedEnv::Tabular(m) => tabular_ground_truth(m)?,
    };
    let theta0 = initial_theta(&env, cfg);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir.join(TRACE_DIR))?;
        std::fs::write(dir.join(CONFIG_FILE), cfg.to_toml_string()?)?;
    }

    let pairs: Vec<(Algorithm, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let k_star: Option<DMatrix<f64>> = ground.dare.as_ref().map(|d| d.k_star.clone());
    let results: Vec<(Vec<MetricRow>, RunSummary)> = pairs
        .par_iter()
        .map(|&(algo, seed)| {
            let job = RunJob {
                cfg,
                algo,
                seed,
                theta0: &theta0,
                theta_star: &ground.theta_star,
                trace_path: out.map(|d| {
                    d.join(TRACE_DIR)
                        .join(format!("{}.csv", run_id(algo, seed)))
                }),
            };
            match &env {
                ResolvedEnv::Lqr(e) => {
                    let ks = k_star.as_ref().expect("LQR ground truth carries K*");
                    execute(e, &job, |th| {
                        e.gain(th).ok().map(|k| spectral_norm(&(k - ks)))
                    })
                }
                ResolvedEnv::Tabular(m) => execute(m, &job, |_| None),
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (r, s) in results {
        rows.extend(r);
        runs.push(s);
    }
    if let Some(dir) = out {
        write_metrics(&dir.join(METRICS_FILE), &rows)?;
        let mut w = csv::Writer::from_path(dir.join(TIMINGS_FILE))?;
        w.write_record(["run_id", "algorithm", "seed", "steps", "wall_clock_s"])?;
        for s in &runs {
            w.write_record([
                s.run_id.clone(),
                s.algorithm.to_string(),
                s.seed.to_string(),
                s.steps.to_string(),
                format!("{:.6}", s.seconds),
            ])?;
        }
        w.flush()?;
    }
    Ok(SuiteResult {
        rows,
        runs,
        ground,
        theta0,
    })
}

/// Human-readable ground truth for a config.
pub fn describe_oracle(cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    let fmt_mat = |m: &DMatrix<f64>| -> String {
        m.row_iter()
            .map(|r| {
                format!(
                    "  {}",
                    r.iter()
                        .map(|x| format!("{x:.6}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    match cfg.env.resolve()? {
        ResolvedEnv::Lqr(env) => {
            let g = lqr_ground_truth(&env)?;
            let dare = g.dare.expect("LQR ground truth carries the DARE solution");
            let closed = &env.model.a - &env.model.b * &dare.k_star;
            writeln!(
                w,
                "DARE solution ({} iterations, residual {:.3e})",
                dare.iterations, dare.residual
            )?;
            writeln!(w, "P =\n{}", fmt_mat(&dare.p))?;
            writeln!(w, "K* =\n{}", fmt_mat(&dare.k_star))?;
            writeln!(
                w,
                "spectral radius of A - BK* = {:.6}",
                crate::oracle::spectral_radius(&closed)
            )?;
            writeln!(w, "feature normalizer c_phi = {:.6e}", env.map.c_phi)?;
            writeln!(w, "theta* = [{}]", join17(&g.theta_star))?;
        }
        ResolvedEnv::Tabular(mdp) => {
            let g = tabular_ground_truth(&mdp)?;
            let opt = g.optimal_q.expect("tabular ground truth carries Q*");
            writeln!(
                w,
                "value iteration ({} iterations, residual {:.3e})",
                opt.iterations, opt.residual
            )?;
            let q = DMatrix::from_row_slice(opt.n_states, opt.n_actions, &opt.q);
            writeln!(
                w,
                "Q* (rows = states, columns = actions) =\n{}",
                fmt_mat(&q)
            )?;
            writeln!(
                w,
                "J* = [{}]",
                opt.v
                    .iter()
                    .map(|x| format!("{x:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )?;
            writeln!(w, "greedy policy = {:?}", opt.policy)?;
            let c = tabular_c(&mdp, &g.theta_star, cfg.radius)?;
            writeln!(
                w,
                "estimated c = {c:.6} ({C_PROBES} probes, radius {})",
                cfg.radius
            )?;
        }
    }
    Ok(())
}

fn join17(v: &[f64]) -> String {
    v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(", ")
}
