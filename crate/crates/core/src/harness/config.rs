use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::presets;
use crate::env::{random_mdp, LqrBehavior, LqrEnv, LqrModel, TabularMdp};
use crate::error::{Error, Result};
use crate::optim::{Algorithm, Schedule, ADAM_EPSILON};

pub const DEFAULT_CADENCE: usize = 100;
pub const DEFAULT_BATCH: usize = 32;

/// What each per-run trace file contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// One row per metric checkpoint with the iterate.
    #[default]
    Cadence,
    /// One row per step with `θ_t`, `g_t`, `m_t` and `v̂_t`; needed by `bounds`.
    Full,
}

/// An experiment suite: one environment, a grid of algorithms and seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub steps: usize,
    pub batch: usize,
    pub double_q: bool,
    /// Loss scale `τ̃`; gradients are multiplied by `τ̃²`.
    pub scale: f64,
    pub radius: f64,
    pub cadence: usize,
    /// LQR only: `θ₀` encodes `H₀ = init_scale·I`.
    pub init_scale: f64,
    /// LQR only: stop once `‖K_t - K*‖₂` drops to this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
    pub adam_epsilon: f64,
    pub trace: TraceMode,
    /// Monotonicity constant used by the theorem bounds (unscaled).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub schedule: Schedule,
    pub env: EnvConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "RawEnv")]
pub enum EnvConfig {
    Preset(String),
    Lqr(LqrConfig),
    Tabular(TabularMdp),
    RandomTabular {
        seed: u64,
        n_states: usize,
        n_actions: usize,
        r_max: f64,
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqrConfig {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub n: Option<Vec<Vec<f64>>>,
    pub gamma: f64,
    pub z_max: f64,
    pub behavior: LqrBehavior,
}

/// An environment ready to run.
#[derive(Debug, Clone)]
pub enum ResolvedEnv {
    Lqr(LqrEnv),
    Tabular(TabularMdp),
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Validation(vec![format!(
            "env.{name} must be a non-empty rectangular matrix"
        )]));
    }
    Ok(DMatrix::from_row_iterator(
        nr,
        nc,
        rows.iter().flatten().copied(),
    ))
}

impl LqrConfig {
    pub fn model(&self) -> Result<LqrModel> {
        let a = matrix("a", &self.a)?;
        let b = matrix("b", &self.b)?;
        let n = match &self.n {
            Some(n) => matrix("n", n)?,
            None => DMatrix::zeros(a.nrows(), b.ncols()),
        };
        LqrModel::new(
            a,
            b,
            matrix("q", &self.q)?,
            matrix("r", &self.r)?,
            n,
            self.gamma,
        )
    }

    pub fn build(&self) -> Result<LqrEnv> {
        LqrEnv::new(self.model()?, self.z_max, self.behavior)
    }
}

impl EnvConfig {
    /// Follows a preset reference to its definition.
    pub fn definition(&self) -> Result<EnvConfig> {
        match self {
            EnvConfig::Preset(name) => presets::env_preset(name).ok_or_else(|| {
                Error::Validation(vec![format!("env.preset: unknown preset {name:?}")])
            }),
            other => Ok(other.clone()),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedEnv> {
        Ok(match self.definition()? {
            EnvConfig::Lqr(l) => ResolvedEnv::Lqr(l.build()?),
            EnvConfig::Tabular(mdp) => ResolvedEnv::Tabular(mdp),
            EnvConfig::RandomTabular {
                seed,
                n_states,
                n_actions,
                r_max,
                gamma,
            } => ResolvedEnv::Tabular(random_mdp(seed, n_states, n_actions, r_max, gamma)?),
            EnvConfig::Preset(_) => unreachable!("presets resolve to concrete definitions"),
        })
    }

    pub fn is_lqr(&self) -> Result<bool> {
        Ok(matches!(self.definition()?, EnvConfig::Lqr(_)))
    }
}

// ---------------------------------------------------------------------------
// raw (unvalidated) mirror of the file format

type Extra = BTreeMap<String, toml::Value>;

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawConfig {
    name: Option<String>,
    algorithms: Option<Vec<String>>,
    seeds: Option<Vec<i64>>,
    steps: Option<i64>,
    batch: Option<i64>,
    double_q: Option<bool>,
    scale: Option<f64>,
    radius: Option<f64>,
    cadence: Option<i64>,
    init_scale: Option<f64>,
    stop_tol: Option<f64>,
    adam_epsilon: Option<f64>,
    trace: Option<TraceMode>,
    c: Option<f64>,
    out: Option<PathBuf>,
    schedule: Option<RawSchedule>,
    env: Option<RawEnv>,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawSchedule {
    alpha: Option<f64>,
    beta1: Option<f64>,
    lambda: Option<f64>,
    beta2: Option<f64>,
    restart_period: Option<i64>,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default)]
pub(crate) struct RawEnv {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_states: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_actions: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transitions: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rewards: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    behavior: Option<toml::Value>,
    #[serde(flatten)]
    extra: Extra,
}

impl From<EnvConfig> for RawEnv {
    fn from(e: EnvConfig) -> Self {
        let mut raw = RawEnv::default();
        match e {
            EnvConfig::Preset(p) => raw.preset = Some(p),
            EnvConfig::Lqr(l) => {
                raw.kind = Some("lqr".into());
                raw.a = Some(l.a);
                raw.b = Some(l.b);
                raw.q = Some(l.q);
                raw.r = Some(l.r);
                raw.n = l.n;
                raw.gamma = Some(l.gamma);
                raw.z_max = Some(l.z_max);
                raw.behavior = toml::Value::try_from(l.behavior).ok();
            }
            EnvConfig::Tabular(m) => {
                raw.kind = Some("tabular".into());
                raw.n_states = Some(m.n_states as i64);
                raw.n_actions = Some(m.n_actions as i64);
                raw.transitions = Some(m.transitions);
                raw.rewards = Some(m.rewards);
                raw.r_max = Some(m.r_max);
                raw.gamma = Some(m.gamma);
            }
            EnvConfig::RandomTabular {
                seed,
                n_states,
                n_actions,
                r_max,
                gamma,
            } => {
                raw.kind = Some("random_tabular".into());
                raw.seed = Some(seed as i64);
                raw.n_states = Some(n_states as i64);
                raw.n_actions = Some(n_actions as i64);
                raw.r_max = Some(r_max);
                raw.gamma = Some(gamma);
            }
        }
        raw
    }
}

struct Issues(Vec<String>);

impl Issues {
    fn unknown(&mut self, prefix: &str, extra: &Extra) {
        for k in extra.keys() {
            self.0.push(format!("{prefix}{k}: unknown key"));
        }
    }

    fn need<T>(&mut self, name: &str, v: Option<T>) -> Option<T> {
        if v.is_none() {
            self.0.push(format!("{name}: missing required field"));
        }
        v
    }

    fn count(&mut self, name: &str, v: Option<i64>, min: i64) -> Option<usize> {
        match v {
            Some(x) if x >= min => Some(x as usize),
            Some(x) => {
                self.0.push(format!("{name}: must be >= {min}, got {x}"));
                None
            }
            None => None,
        }
    }

    fn positive(&mut self, name: &str, v: Option<f64>) -> Option<f64> {
        match v {
            Some(x) if x > 0.0 && x.is_finite() => Some(x),
            Some(x) => {
                self.0
                    .push(format!("{name}: must be a positive finite real, got {x}"));
                None
            }
            None => None,
        }
    }
}

impl RunConfig {
    /// Parses and validates a TOML document, reporting every problem at once.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Validation(vec![e.message().to_string()]))?;
        from_raw(raw).map_err(Error::Validation)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::InvalidArgument(format!("cannot serialize config: {e}")))
    }

    /// Schedule for one algorithm: the restart period only applies to `*_r`.
    pub fn schedule_for(&self, algo: Algorithm) -> Schedule {
        let mut s = self.schedule;
        if !algo.restarts() {
            s.restart_period = None;
        }
        s
    }

    /// Re-runs the cross-field checks after CLI overrides.
    pub fn validate(&self) -> Result<()> {
        let raw = RawConfig {
            name: self.name.clone(),
            algorithms: Some(
                self.algorithms
                    .iter()
                    .map(|a| a.name().to_string())
                    .collect(),
            ),
            seeds: Some(self.seeds.iter().map(|&s| s as i64).collect()),
            steps: Some(self.steps as i64),
            batch: Some(self.batch as i64),
            double_q: Some(self.double_q),
            scale: Some(self.scale),
            radius: Some(self.radius),
            cadence: Some(self.cadence as i64),
            init_scale: Some(self.init_scale),
            stop_tol: self.stop_tol,
            adam_epsilon: Some(self.adam_epsilon),
            trace: Some(self.trace),
            c: self.c,
            out: self.out.clone(),
            schedule: Some(RawSchedule {
                alpha: Some(self.schedule.alpha),
                beta1: Some(self.schedule.beta1),
                lambda: Some(self.schedule.lambda),
                beta2: Some(self.schedule.beta2),
                restart_period: self.schedule.restart_period.map(|r| r as i64),
                extra: Extra::new(),
            }),
            env: Some(self.env.clone().into()),
            extra: Extra::new(),
        };
        from_raw(raw).map(|_| ()).map_err(Error::Validation)
    }
}

fn from_raw(raw: RawConfig) -> std::result::Result<RunConfig, Vec<String>> {
    let mut is = Issues(Vec::new());
    is.unknown("", &raw.extra);

    let algorithms = is.need("algorithms", raw.algorithms).map(|names| {
        let mut out = Vec::new();
        for n in names {
            match n.parse::<Algorithm>() {
                Ok(a) if out.contains(&a) => is.0.push(format!("algorithms: {n} listed twice")),
                Ok(a) => out.push(a),
                Err(_) => is.0.push(format!(
                    "algorithms: unknown algorithm {n:?} (expected one of sgd, adam, adam_r, amsgrad, amsgrad_r)"
                )),
            }
        }
        if out.is_empty() && is.0.is_empty() {
            is.0.push("algorithms: must name at least one algorithm".into());
        }
        out
    });

    let seeds = is.need("seeds", raw.seeds).map(|s| {
        if s.is_empty() {
            is.0.push("seeds: must be non-empty".into());
        }
        let mut out: Vec<u64> = Vec::new();
        for x in s {
            if x < 0 {
                is.0.push(format!("seeds: must be >= 0, got {x}"));
            } else if out.contains(&(x as u64)) {
                is.0.push(format!("seeds: {x} listed twice"));
            } else {
                out.push(x as u64);
            }
        }
        out
    });

    let steps = is.need("steps", raw.steps);
    let steps = is.count("steps", steps, 1);
    let batch = is.count("batch", Some(raw.batch.unwrap_or(DEFAULT_BATCH as i64)), 1);
    let cadence = is.count(
        "cadence",
        Some(raw.cadence.unwrap_or(DEFAULT_CADENCE as i64)),
        1,
    );
    let scale = is.need("scale", raw.scale);
    let scale = match scale {
        Some(x) if x > 0.0 && x <= 1.0 => Some(x),
        Some(x) => {
            is.0.push(format!("scale: must lie in (0, 1], got {x}"));
            None
        }
        None => None,
    };
    let radius = is.need("radius", raw.radius);
    let radius = is.positive("radius", radius);
    let init_scale = is.positive("init_scale", Some(raw.init_scale.unwrap_or(1.0)));
    let adam_epsilon = match raw.adam_epsilon.unwrap_or(ADAM_EPSILON) {
        x if x >= 0.0 && x.is_finite() => Some(x),
        x => {
            is.0.push(format!("adam_epsilon: must be finite and >= 0, got {x}"));
            None
        }
    };
    let stop_tol = raw.stop_tol.and_then(|x| is.positive("stop_tol", Some(x)));
    let c = raw.c.and_then(|x| is.positive("c", Some(x)));

    let schedule = is.need("schedule", raw.schedule).and_then(|s| {
        is.unknown("schedule.", &s.extra);
        let alpha = is.need("schedule.alpha", s.alpha);
        let beta1 = is.need("schedule.beta1", s.beta1);
        let lambda = is.need("schedule.lambda", s.lambda);
        let beta2 = is.need("schedule.beta2", s.beta2);
        let period = is.count("schedule.restart_period", s.restart_period, 1);
        let sched = Schedule {
            alpha: alpha?,
            beta1: beta1?,
            lambda: lambda?,
            beta2: beta2?,
            restart_period: period,
        };
        if let Err(errs) = sched.validate() {
            is.0.extend(errs.into_iter().map(|e| format!("schedule.{e}")));
            return None;
        }
        Some(sched)
    });
    if let (Some(algos), Some(sched)) = (&algorithms, &schedule) {
        if sched.restart_period.is_none() {
            for a in algos.iter().filter(|a| a.restarts()) {
                is.0.push(format!(
                    "schedule.restart_period: required by algorithm {a}"
                ));
            }
        }
    }

    let env = is
        .need("env", raw.env)
        .and_then(|e| env_from_raw(e, &mut is));
    if let Some(env) = &env {
        match env.is_lqr() {
            Ok(false) if stop_tol.is_some() => {
                is.0.push("stop_tol: only applies to LQR environments".into())
            }
            Ok(_) => {}
            Err(Error::Validation(errs)) => is.0.extend(errs),
            Err(e) => is.0.push(e.to_string()),
        }
    }

    if !is.0.is_empty() {
        return Err(is.0);
    }
    Ok(RunConfig {
        name: raw.name,
        algorithms: algorithms.unwrap_or_default(),
        seeds: seeds.unwrap_or_default(),
        steps: steps.unwrap_or_default(),
        batch: batch.unwrap_or_default(),
        double_q: raw.double_q.unwrap_or(false),
        scale: scale.unwrap_or_default(),
        radius: radius.unwrap_or_default(),
        cadence: cadence.unwrap_or_default(),
        init_scale: init_scale.unwrap_or_default(),
        stop_tol,
        adam_epsilon: adam_epsilon.unwrap_or_default(),
        trace: raw.trace.unwrap_or_default(),
        c,
        out: raw.out,
        schedule: schedule.expect("checked above"),
        env: env.expect("checked above"),
    })
}

const LQR_KEYS: &[&str] = &["a", "b", "q", "r", "n", "gamma", "z_max", "behavior"];
const TABULAR_KEYS: &[&str] = &[
    "n_states",
    "n_actions",
    "transitions",
    "rewards",
    "r_max",
    "gamma",
];
const RANDOM_KEYS: &[&str] = &["seed", "n_states", "n_actions", "r_max", "gamma"];

fn present_keys(e: &RawEnv) -> Vec<&'static str> {
    let flags = [
        ("a", e.a.is_some()),
        ("b", e.b.is_some()),
        ("q", e.q.is_some()),
        ("r", e.r.is_some()),
        ("n", e.n.is_some()),
        ("z_max", e.z_max.is_some()),
        ("seed", e.seed.is_some()),
        ("n_states", e.n_states.is_some()),
        ("n_actions", e.n_actions.is_some()),
        ("transitions", e.transitions.is_some()),
        ("rewards", e.rewards.is_some()),
        ("r_max", e.r_max.is_some()),
        ("gamma", e.gamma.is_some()),
        ("behavior", e.behavior.is_some()),
    ];
    flags.iter().filter(|(_, p)| *p).map(|(k, _)| *k).collect()
}

fn env_from_raw(e: RawEnv, is: &mut Issues) -> Option<EnvConfig> {
    is.unknown("env.", &e.extra);
    let present = present_keys(&e);
    if let Some(p) = e.preset {
        for k in present.iter().chain(e.kind.as_ref().map(|_| &"kind")) {
            is.0.push(format!("env.{k}: not allowed together with env.preset"));
        }
        if presets::env_preset(&p).is_none() {
            is.0.push(format!(
                "env.preset: unknown preset {p:?} (expected one of {})",
                presets::ENV_PRESETS
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            return None;
        }
        return Some(EnvConfig::Preset(p));
    }
    let kind = is.need("env.kind", e.kind)?;
    let allowed = match kind.as_str() {
        "lqr" => LQR_KEYS,
        "tabular" => TABULAR_KEYS,
        "random_tabular" => RANDOM_KEYS,
        other => {
            is.0.push(format!(
                "env.kind: unknown kind {other:?} (expected lqr, tabular or random_tabular)"
            ));
            return None;
        }
    };
    for k in present.iter().filter(|k| !allowed.contains(k)) {
        is.0.push(format!("env.{k}: not valid for kind = {kind:?}"));
    }
    let gamma = is.need("env.gamma", e.gamma);
    match kind.as_str() {
        "lqr" => {
            let behavior = match e.behavior {
                None => Some(LqrBehavior::default()),
                Some(v) => match v.try_into::<LqrBehavior>() {
                    Ok(b) => match b.validate() {
                        Ok(()) => Some(b),
                        Err(errs) => {
                            is.0.extend(errs.into_iter().map(|m| format!("env.{m}")));
                            None
                        }
                    },
                    Err(err) => {
                        is.0.push(format!("env.behavior: {}", err.message()));
                        None
                    }
                },
            };
            let z_max = is.need("env.z_max", e.z_max);
            let cfg = LqrConfig {
                a: is.need("env.a", e.a)?,
                b: is.need("env.b", e.b)?,
                q: is.need("env.q", e.q)?,
                r: is.need("env.r", e.r)?,
                n: e.n,
                gamma: gamma?,
                z_max: is.positive("env.z_max", z_max)?,
                behavior: behavior?,
            };
            match cfg.build() {
                Ok(_) => Some(EnvConfig::Lqr(cfg)),
                Err(Error::Validation(errs)) => {
                    is.0.extend(errs.into_iter().map(|m| format!("env: {m}")));
                    None
                }
                Err(err) => {
                    is.0.push(format!("env: {err}"));
                    None
                }
            }
        }
        "tabular" => {
            let ns = is.need("env.n_states", e.n_states);
            let na = is.need("env.n_actions", e.n_actions);
            let (ns, na) = (
                is.count("env.n_states", ns, 1),
                is.count("env.n_actions", na, 1),
            );
            let transitions = is.need("env.transitions", e.transitions);
            let rewards = is.need("env.rewards", e.rewards);
            let r_max = is.need("env.r_max", e.r_max);
            match TabularMdp::new(ns?, na?, transitions?, rewards?, r_max?, gamma?) {
                Ok(m) => Some(EnvConfig::Tabular(m)),
                Err(Error::Validation(errs)) => {
                    is.0.extend(errs.into_iter().map(|m| format!("env: {m}")));
                    None
                }
                Err(err) => {
                    is.0.push(format!("env: {err}"));
                    None
                }
            }
        }
        _ => {
            let seed = is.need("env.seed", e.seed);
            let seed = is.count("env.seed", seed, 0);
            let ns = is.need("env.n_states", e.n_states);
            let na = is.need("env.n_actions", e.n_actions);
            let (ns, na) = (
                is.count("env.n_states", ns, 1),
                is.count("env.n_actions", na, 1),
            );
            let r_max = is.need("env.r_max", e.r_max);
            let r_max = match r_max {
                Some(x) if x >= 0.0 && x.is_finite() => Some(x),
                Some(x) => {
                    is.0.push(format!("env.r_max: must be finite and >= 0, got {x}"));
                    None
                }
                None => None,
            };
            let gamma = match gamma {
                Some(g) if g > 0.0 && g < 1.0 => Some(g),
                Some(g) => {
                    is.0.push(format!("env.gamma: must lie in (0, 1), got {g}"));
                    None
                }
                None => None,
            };
            Some(EnvConfig::RandomTabular {
                seed: seed? as u64,
                n_states: ns?,
                n_actions: na?,
                r_max: r_max?,
                gamma: gamma?,
            })
        }
    }
}

/// Loads a config file, or a shipped preset when `spec` names one and no such file exists.
pub fn parse_config(spec: &Path) -> Result<RunConfig> {
    if spec.is_file() {
        let text = std::fs::read_to_string(spec)?;
        return RunConfig::from_toml_str(&text);
    }
    if let Some(cfg) = spec.to_str().and_then(presets::run_preset) {
        return Ok(cfg);
    }
    Err(Error::Validation(vec![format!(
        "config {}: no such file and no preset by that name",
        spec.display()
    )]))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
algorithms = ["amsgrad", "amsgrad_r"]
seeds = [0, 1]
steps = 200
scale = 1.0
radius = 5.0

[schedule]
alpha = 0.5
beta1 = 0.9
lambda = 0.99
beta2 = 0.999
restart_period = 50

[env]
kind = "random_tabular"
seed = 3
n_states = 4
n_actions = 2
r_max = 1.0
gamma = 0.5
"#;

    fn errors(text: &str) -> Vec<String> {
        match RunConfig::from_toml_str(text) {
            Err(Error::Validation(v)) => v,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_parses_with_defaults() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.algorithms, vec![Algorithm::Amsgrad, Algorithm::AmsgradR]);
        assert_eq!(c.batch, DEFAULT_BATCH);
        assert_eq!(c.cadence, DEFAULT_CADENCE);
        assert_eq!(c.adam_epsilon, ADAM_EPSILON);
        assert_eq!(c.schedule_for(Algorithm::Amsgrad).restart_period, None);
        assert_eq!(c.schedule_for(Algorithm::AmsgradR).restart_period, Some(50));
    }

    #[test]
    fn lambda_out_of_range_names_field() {
        let errs = errors(&MINIMAL.replace("lambda = 0.99", "lambda = 1.5"));
        assert_eq!(errs.len(), 1, "{errs:?}");
        assert!(errs[0].starts_with("schedule.lambda"), "{errs:?}");
    }

    #[test]
    fn errors_are_aggregated() {
        let text = MINIMAL
            .replace("steps = 200", "steps = 0\nbogus = 1")
            .replace("radius = 5.0", "")
            .replace("restart_period = 50", "")
            .replace("seed = 3", "seed = 3\nz_max = 1.0");
        let errs = errors(&text);
        let has = |p: &str| errs.iter().any(|e| e.starts_with(p));
        assert!(has("steps"), "{errs:?}");
        assert!(has("bogus: unknown key"), "{errs:?}");
        assert!(has("radius: missing"), "{errs:?}");
        assert!(
            has("schedule.restart_period: required by algorithm amsgrad_r"),
            "{errs:?}"
        );
        assert!(has("env.z_max: not valid"), "{errs:?}");
    }

    #[test]
    fn unknown_algorithm_and_empty_seeds() {
        let errs = errors(
            &MINIMAL
                .replace("\"amsgrad\", ", "\"rmsprop\", ")
                .replace("[0, 1]", "[]"),
        );
        assert!(errs.iter().any(|e| e.contains("rmsprop")));
        assert!(errs
            .iter()
            .any(|e| e.starts_with("seeds: must be non-empty")));
    }

    #[test]
    fn round_trip_is_identity() {
        for name in presets::RUN_PRESETS.iter().map(|(n, _)| *n) {
            let c = presets::run_preset(name).unwrap();
            let text = c.to_toml_string().unwrap();
            let back =
                RunConfig::from_toml_str(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
            assert_eq!(back, c, "{name}");
        }
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(
            RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap(),
            c
        );
    }

    #[test]
    fn inline_lqr_and_tabular_envs() {
        let lqr = MINIMAL.replace(
            "kind = \"random_tabular\"\nseed = 3\nn_states = 4\nn_actions = 2\nr_max = 1.0\ngamma = 0.5",
            "kind = \"lqr\"\na = [[1.0]]\nb = [[1.0]]\nq = [[1.0]]\nr = [[1.0]]\ngamma = 1.0\nz_max = 0.1\n[env.behavior]\nepsilon = 0.2",
        );
        let c = RunConfig::from_toml_str(&lqr).unwrap();
        match &c.env {
            EnvConfig::Lqr(l) => assert_eq!(l.behavior.epsilon, 0.2),
            other => panic!("{other:?}"),
        }
        assert!(c.env.is_lqr().unwrap());
        let bad = lqr.replace("epsilon = 0.2", "epsilon = 2.0\nwobble = 1");
        let errs = errors(&bad);
        assert!(
            errs.iter().any(|e| e.starts_with("env.behavior")),
            "{errs:?}"
        );

        let tab = MINIMAL.replace(
            "kind = \"random_tabular\"\nseed = 3\nn_states = 4\nn_actions = 2\nr_max = 1.0\ngamma = 0.5",
            "kind = \"tabular\"\nn_states = 1\nn_actions = 1\ntransitions = [1.0]\nrewards = [0.5]\nr_max = 1.0\ngamma = 0.5",
        );
        assert!(matches!(
            RunConfig::from_toml_str(&tab).unwrap().env,
            EnvConfig::Tabular(_)
        ));
        let errs = errors(&tab.replace("transitions = [1.0]", "transitions = [0.7]"));
        assert!(errs.iter().any(|e| e.contains("sums to")), "{errs:?}");
    }

    #[test]
    fn preset_env_excludes_inline_keys() {
        let text = MINIMAL.replace("kind = \"random_tabular\"", "preset = \"lqr2\"");
        let errs = errors(&text);
        assert!(
            errs.iter()
                .any(|e| e == "env.seed: not allowed together with env.preset"),
            "{errs:?}"
        );
    }

    #[test]
    fn stop_tol_is_lqr_only() {
        let errs = errors(&MINIMAL.replace("radius = 5.0", "radius = 5.0\nstop_tol = 1e-4"));
        assert!(errs.iter().any(|e| e.starts_with("stop_tol")), "{errs:?}");
    }

    #[test]
    fn parse_config_falls_back_to_presets() {
        assert!(parse_config(Path::new("lqr_table1")).is_ok());
        assert!(matches!(
            parse_config(Path::new("missing.file")),
            Err(Error::Validation(_))
        ));
    }
}
