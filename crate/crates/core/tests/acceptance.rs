//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use altq::bounds::{
    g_infty, lemma1_check, lemma2_check, lemma2_rhs, lemma3_sweep, weighted_momentum_term,
    BoundTracker, TrackerSetup,
};
use altq::env::{random_mdp, LqrEnv, LqrModel, TabularMdp};
use altq::harness::config::ResolvedEnv;
use altq::harness::{run_preset, run_suite, RunConfig};
use altq::optim::{
    amsgrad_step, project_weighted_ball, Algorithm, Domain, MomentState, Schedule, Updater,
};
use altq::oracle::{
    dare_map, estimate_c, solve_dare, spectral_radius, theta_star_tabular, value_iteration,
    C_PROBES, DARE_MAX_ITER, DARE_TOL,
};
use altq::qlinear::{run_q_learning, run_with_observer, Flow, RunOptions, RunSpec, RunTrace};
use altq::ParamVector;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sched(alpha: f64, beta1: f64, lambda: f64, beta2: f64) -> Schedule {
    Schedule::new(alpha, beta1, lambda, beta2).unwrap()
}

// ---------------------------------------------------------------------------
// 1. gradient / moment bounds along tabular Q-AMSGrad runs

const C1_MDPS: usize = 20;
const C1_STEPS: usize = 1000;
const C1_RADIUS: f64 = 5.0;
const C1_GAMMA: f64 = 0.9;

struct TabularRun {
    trace: RunTrace,
    sched: Schedule,
}

fn c1_runs() -> Vec<TabularRun> {
    (0..C1_MDPS)
        .map(|i| {
            let ns = 1 + i % 8;
            let na = 1 + (3 * i) % 4;
            let mdp = random_mdp(100 + i as u64, ns, na, 1.0, C1_GAMMA).unwrap();
            let s = sched(0.5, 0.9, 0.99, 0.999);
            let spec = RunSpec {
                algorithm: Algorithm::Amsgrad,
                schedule: s,
                domain: Domain::new(C1_RADIUS).unwrap(),
                steps: C1_STEPS,
                seed: i as u64,
                options: RunOptions::default(),
            };
            let trace = run_q_learning(&mdp, &spec, ParamVector::zeros(mdp.n_pairs())).unwrap();
            TabularRun { trace, sched: s }
        })
        .collect()
}

fn criterion1(runs: &[TabularRun], secs: f64) -> Outcome {
    let g = g_infty(1.0, C1_GAMMA, 2.0 * C1_RADIUS);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for r in runs {
        let rep = lemma1_check(&r.trace, g);
        violations += rep.violations();
        worst = worst
            .max(rep.max_grad / g)
            .max(rep.max_m / g)
            .max(rep.max_v_hat / (g * g));
    }
    outcome(
        violations == 0 && secs < 10.0,
        format!(
            "{C1_MDPS} MDPs x {C1_STEPS} steps: {violations} violations of ‖g‖, ‖m‖ <= G and ‖v̂‖ <= G² \
             (G = {g:.1}, largest ratio {worst:.3}), {secs:.2} s"
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. momentum-sum and schedule-sum inequalities

fn criterion2(runs: &[TabularRun]) -> Outcome {
    let trace_fail = runs
        .iter()
        .filter(|r| !lemma2_check(&r.trace, &r.sched).holds)
        .count();

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut stream_fail = 0;
    let mut tightest: f64 = 0.0;
    for k in 0..20 {
        let s = sched(
            rng.random_range(0.01..1.0),
            rng.random_range(0.1..0.95),
            rng.random_range(0.5..0.999),
            0.999,
        );
        let d = 1 + k % 6;
        let scale = 10f64.powf(rng.random_range(-3.0..2.0));
        let mut upd = Updater::new(Algorithm::Amsgrad, s, Domain::new(1e6).unwrap(), d).unwrap();
        let mut theta = ParamVector::zeros(d);
        let mut lhs = 0.0;
        let mut cols = vec![0.0; d];
        for _ in 0..1000 {
            let g: Vec<f64> = (0..d)
                .map(|_| scale * rng.random_range(-1.0..1.0))
                .collect();
            let info = upd.step(&mut theta, &g).unwrap();
            lhs += weighted_momentum_term(info.alpha_t, &upd.state().m, &upd.state().v_hat);
            for (c, x) in cols.iter_mut().zip(&g) {
                *c += x * x;
            }
        }
        let rhs = lemma2_rhs(&s, 1000, cols.iter().map(|c| c.sqrt()).sum());
        stream_fail += usize::from(lhs > rhs);
        tightest = tightest.max(lhs / rhs);
    }

    let mut sweep_fail = 0;
    for (b1, lam) in [(0.9, 0.5), (0.9, 0.99), (0.5, 0.999), (0.99, 0.9999)] {
        let s = sched(0.1, b1, lam, 0.999);
        sweep_fail += lemma3_sweep(&s, 1_000_000).0;
    }
    outcome(
        trace_fail == 0 && stream_fail == 0 && sweep_fail == 0,
        format!(
            "momentum sum: {trace_fail}/{} run traces and {stream_fail}/20 random streams fail (largest lhs/rhs \
             {tightest:.2e}); schedule sum: {sweep_fail} violations over T <= 10^6 for 4 schedules",
            runs.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. optimizer unit oracle

fn hand_rolled(
    state: &MomentState,
    theta: &[f64],
    g: &[f64],
    s: &Schedule,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t = (state.t + 1) as f64;
    let a = s.alpha / t.sqrt();
    let b = s.beta1 * s.lambda.powf(t);
    let m: Vec<f64> = state
        .m
        .iter()
        .zip(g)
        .map(|(m, g)| (1.0 - b) * m + b * g)
        .collect();
    let v: Vec<f64> = state
        .v_hat
        .iter()
        .zip(g)
        .map(|(v, g)| (1.0 - s.beta2) * v + s.beta2 * g * g)
        .collect();
    let vh: Vec<f64> = state.v_hat.iter().zip(&v).map(|(a, b)| a.max(*b)).collect();
    let th = (0..theta.len())
        .map(|i| {
            if vh[i] > 0.0 {
                theta[i] - a * m[i] / vh[i].sqrt()
            } else {
                theta[i]
            }
        })
        .collect();
    (th, m, vh)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

fn criterion3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let big = Domain::new(1e9).unwrap();
    let mut worst_step: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=8);
        let s = sched(
            rng.random_range(1e-3..1.0),
            rng.random_range(0.0..0.99),
            rng.random_range(0.1..0.999),
            rng.random_range(0.995..0.9999),
        );
        let state = MomentState {
            m: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            v_hat: (0..d).map(|_| rng.random_range(0.0..2.0)).collect(),
            t: rng.random_range(0..1000),
        };
        let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let g: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (next, st) = amsgrad_step(&state, &theta, &g, &s, &big).unwrap();
        let (th, m, vh) = hand_rolled(&state, &theta, &g, &s);
        worst_step = worst_step
            .max(rel_err(&next, &th))
            .max(rel_err(&st.m, &m))
            .max(rel_err(&st.v_hat, &vh));
    }

    let wobj = |w: &[f64], x: &[f64], y: &[f64]| -> f64 {
        w.iter()
            .zip(x.iter().zip(y))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum()
    };
    let mut dominated = 0;
    let mut worst_gap: f64 = 0.0;
    let mut worst_boundary: f64 = 0.0;
    for k in 0..50 {
        let d = 2 + k % 7;
        let radius = rng.random_range(0.5..5.0);
        let dom = Domain::new(radius).unwrap();
        let v_hat: Vec<f64> = (0..d)
            .map(|i| {
                if i == 0 && k % 5 == 0 {
                    0.0
                } else {
                    10f64.powf(rng.random_range(-4.0..2.0))
                }
            })
            .collect();
        let w: Vec<f64> = v_hat.iter().map(|v| v.sqrt()).collect();
        let dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let out = rng.random_range(1.5..6.0) * radius;
        let x: Vec<f64> = dir.iter().map(|v| v / n * out).collect();
        let p = project_weighted_ball(&x, &v_hat, &dom).unwrap();
        let pn = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst_boundary = worst_boundary.max((pn - radius).abs() / radius);
        let fp = wobj(&w, &p, &x);
        let mut ok = true;
        for _ in 0..10_000 {
            let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            let y: Vec<f64> = u.iter().map(|v| v / un * r).collect();
            let fy = wobj(&w, &y, &x);
            if fp > fy * (1.0 + 1e-12) + 1e-15 {
                ok = false;
                worst_gap = worst_gap.max(fp - fy);
            }
        }
        dominated += usize::from(ok);
    }
    outcome(
        worst_step <= 1e-14 && dominated == 50 && worst_boundary <= 1e-12,
        format!(
            "step vs hand-rolled update: max rel err {worst_step:.1e} over 100 inputs; projection dominates 10^4 \
             feasible points on {dominated}/50 instances (worst gap {worst_gap:.1e}), max boundary error {worst_boundary:.1e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. DARE oracle

fn criterion4() -> Outcome {
    let scalar = LqrModel::scalar(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let sol = solve_dare(&scalar, DARE_TOL, DARE_MAX_ITER).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let ep = (sol.p[(0, 0)] - phi).abs();
    let ek = (sol.k_star[(0, 0)] - phi / (1.0 + phi)).abs();

    let env = shipped_lqr();
    let sol2 = solve_dare(&env.model, DARE_TOL, DARE_MAX_ITER).unwrap();
    let (next, _) = dare_map(&env.model, &sol2.p).unwrap();
    let residual = (&next - &sol2.p).norm();
    let rho = spectral_radius(&(&env.model.a - &env.model.b * &sol2.k_star));
    outcome(
        ep <= 1e-10 && ek <= 1e-10 && residual <= 1e-10 && rho < 1.0,
        format!(
            "scalar |P - golden ratio| = {ep:.1e}, |K - P/(1+P)| = {ek:.1e}; shipped instance residual \
             {residual:.1e}, spectral radius of A - BK* = {rho:.4}"
        ),
    )
}

fn shipped_lqr() -> LqrEnv {
    match run_preset("lqr_table1").unwrap().env.resolve().unwrap() {
        ResolvedEnv::Lqr(e) => e,
        ResolvedEnv::Tabular(_) => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// 5. tabular convergence of the averaged iterate

const C5_RADIUS: f64 = 6.0;
const C5_EARLY: usize = 10_000;
const C5_LATE: usize = 40_000;
const C5_SEEDS: u64 = 5;
const C5_CADENCE: usize = 100;

fn screened_mdps() -> Vec<(u64, TabularMdp, ParamVector, f64)> {
    let dom = Domain::new(C5_RADIUS).unwrap();
    let mut out = Vec::new();
    for seed in 0.. {
        let mdp = random_mdp(seed, 4, 2, 1.0, 0.5).unwrap();
        let ts = theta_star_tabular(&value_iteration(&mdp, 1e-12).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = estimate_c(&mdp, &ts, &dom, C_PROBES, &mut rng).unwrap();
        if c > 0.0 && ts.norm() < C5_RADIUS {
            out.push((seed, mdp, ts, c));
        }
        if out.len() == 5 {
            break;
        }
    }
    out
}

fn criterion5() -> Outcome {
    let s = sched(0.5, 0.9, 0.99, 0.999);
    let dom = Domain::new(C5_RADIUS).unwrap();
    let mut ratios = Vec::new();
    let mut bound_fail = 0;
    let mut checks = 0;
    for (mdp_seed, mdp, ts, c) in screened_mdps() {
        let (mut early, mut late) = (0.0, 0.0);
        for seed in 0..C5_SEEDS {
            let spec = RunSpec {
                algorithm: Algorithm::Amsgrad,
                schedule: s,
                domain: dom,
                steps: C5_LATE,
                seed,
                options: RunOptions::default(),
            };
            let setup = TrackerSetup {
                sched: s,
                g_inf: g_infty(mdp.r_max, mdp.gamma, dom.diameter()),
                d_inf: dom.diameter(),
                c: Some(c),
                theta_star: Some(ts.to_vec()),
            };
            let mut tracker = BoundTracker::new(setup, mdp.n_pairs());
            run_with_observer(&mdp, &spec, ParamVector::zeros(mdp.n_pairs()), |v| {
                tracker.observe(v);
                if v.t % C5_CADENCE == 0 && v.t >= 2 {
                    let row = tracker.row(v.t, v.theta_avg).unwrap();
                    checks += 1;
                    bound_fail += usize::from(row.theorem_lhs.unwrap() > row.theorem_rhs.unwrap());
                }
                if v.t == C5_EARLY {
                    early += ts.distance(v.theta_avg) / C5_SEEDS as f64;
                }
                if v.t == C5_LATE {
                    late += ts.distance(v.theta_avg) / C5_SEEDS as f64;
                }
                Flow::Continue
            })
            .unwrap();
        }
        ratios.push((mdp_seed, c, late / early));
    }
    let worst = ratios.iter().map(|r| r.2).fold(0.0, f64::max);
    let listed: Vec<String> = ratios
        .iter()
        .map(|(s, c, r)| format!("mdp{s} (c = {c:.3}): {r:.3}"))
        .collect();
    outcome(
        worst <= 0.6 && bound_fail == 0,
        format!(
            "seed-mean ‖θ̄_40000 - θ*‖ / ‖θ̄_10000 - θ*‖ must be <= 0.6: [{}]; squared error above the bound at \
             {bound_fail}/{checks} checkpoints",
            listed.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. restart identity

fn restart_violations<E: altq::qlinear::Environment>(
    env: &E,
    spec: &RunSpec,
    theta0: ParamVector,
) -> (usize, usize) {
    let r = spec.schedule.restart_period.unwrap();
    let (mut bad, mut seen) = (0, 0);
    run_with_observer(env, spec, theta0, |v| {
        if v.t % r == 0 {
            seen += 1;
            let same = v
                .theta
                .iter()
                .zip(v.theta_next)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            bad += usize::from(!same || !v.info.restarted);
        } else {
            bad += usize::from(v.info.restarted);
        }
        Flow::Continue
    })
    .unwrap();
    (bad, seen)
}

fn criterion6() -> Outcome {
    let (mut bad, mut seen, mut runs) = (0, 0, 0);
    for i in 0..5u64 {
        let mdp = random_mdp(600 + i, 3 + i as usize, 2, 1.0, 0.8).unwrap();
        // adam has no projection, so it gets a smaller step
        for (algo, dq, alpha) in [
            (Algorithm::AmsgradR, false, 0.3),
            (Algorithm::AdamR, false, 0.01),
            (Algorithm::AmsgradR, true, 0.3),
        ] {
            let spec = RunSpec {
                algorithm: algo,
                schedule: sched(alpha, 0.9, 0.99, 0.999)
                    .with_restart(7 + i as usize)
                    .unwrap(),
                domain: Domain::new(5.0).unwrap(),
                steps: 2000,
                seed: i,
                options: RunOptions {
                    double_q: dq,
                    batch: 4,
                    ..RunOptions::default()
                },
            };
            let (b, s) = restart_violations(&mdp, &spec, ParamVector::zeros(mdp.n_pairs()));
            bad += b;
            seen += s;
            runs += 1;
        }
    }
    let cfg = run_preset("lqr_table1").unwrap();
    let env = shipped_lqr();
    for seed in 0..3 {
        let spec = RunSpec {
            algorithm: Algorithm::AdamR,
            schedule: cfg.schedule_for(Algorithm::AdamR),
            domain: Domain::new(cfg.radius).unwrap(),
            steps: 3000,
            seed,
            options: RunOptions {
                double_q: true,
                batch: cfg.batch,
                scale: cfg.scale * cfg.scale,
                adam_epsilon: cfg.adam_epsilon,
                ..RunOptions::default()
            },
        };
        let (b, s) = restart_violations(&env, &spec, env.identity_theta(cfg.init_scale));
        bad += b;
        seen += s;
        runs += 1;
    }
    outcome(
        bad == 0,
        format!("{runs} restarting runs (tabular, LQR, single and double estimator): {bad} mismatches over {seen} restart steps"),
    )
}

// ---------------------------------------------------------------------------
// 7. LQR comparison

fn sample_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn criterion7() -> (Outcome, Outcome) {
    let cfg: RunConfig = run_preset("lqr_table1").unwrap();
    let start = Instant::now();
    let res = run_suite(&cfg, None).unwrap();
    let secs = start.elapsed().as_secs_f64();

    let hits = res
        .runs
        .iter()
        .filter(|r| r.algorithm == Algorithm::AdamR && r.stopped_at.is_some())
        .count();
    let stops: Vec<String> = res
        .runs
        .iter()
        .filter(|r| r.algorithm == Algorithm::AdamR)
        .map(|r| r.stopped_at.map_or("-".into(), |t| t.to_string()))
        .collect();
    let a = outcome(
        hits >= 8 && secs <= 300.0,
        format!(
            "adam_r reaches ‖K_t - K*‖₂ <= 1e-4 within {} steps on {hits}/10 seeds (stop steps [{}]); suite took {secs:.1} s",
            cfg.steps,
            stops.join(", ")
        ),
    );

    // checkpoints on the cadence grid reported by every run of every algorithm
    let order = [Algorithm::AdamR, Algorithm::Adam, Algorithm::Sgd];
    let value = |algo: Algorithm, seed: u64, t: usize| -> Option<f64> {
        res.rows
            .iter()
            .find(|r| r.algorithm == algo && r.seed == seed && r.t == t)
            .and_then(|r| r.policy_err)
    };
    let common: Vec<usize> = (1..=cfg.steps / cfg.cadence)
        .map(|k| k * cfg.cadence)
        .filter(|&t| {
            order
                .iter()
                .all(|&al| cfg.seeds.iter().all(|&s| value(al, s, t).is_some()))
        })
        .collect();
    let mean_at = |algo, t| {
        cfg.seeds
            .iter()
            .map(|&s| value(algo, s, t).unwrap())
            .sum::<f64>()
            / cfg.seeds.len() as f64
    };
    let mut bad = Vec::new();
    for &t in &common {
        let (r, ad, sg) = (
            mean_at(Algorithm::AdamR, t),
            mean_at(Algorithm::Adam, t),
            mean_at(Algorithm::Sgd, t),
        );
        if !(r <= ad && ad <= sg) {
            bad.push((t, r / ad, ad / sg));
        }
    }
    let last = *common.last().unwrap();
    let stds: Vec<f64> = [Algorithm::AdamR, Algorithm::Adam]
        .iter()
        .map(|&al| {
            sample_std(
                &cfg.seeds
                    .iter()
                    .map(|&s| value(al, s, last).unwrap())
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let worst = bad.iter().map(|b| b.1).fold(1.0, f64::max);
    let shown: Vec<String> = bad
        .iter()
        .take(6)
        .map(|(t, x, _)| format!("t={t}: adam_r/adam {x:.4}"))
        .collect();
    let b = outcome(
        bad.is_empty() && stds[0] <= stds[1],
        format!(
            "seed-mean policy loss ordered adam_r <= adam <= sgd at {}/{} common checkpoints (last {last}); \
             violations e.g. [{}], worst adam_r/adam {worst:.4}; std at t={last}: adam_r {:.3e}, adam {:.3e}",
            common.len() - bad.len(),
            common.len(),
            shown.join(", "),
            stds[0],
            stds[1]
        ),
    );
    (a, b)
}

// ---------------------------------------------------------------------------
// 8. determinism

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timings.csv" {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn criterion8() -> Outcome {
    let mut suites = Vec::new();
    let mut tab = run_preset("tabular_amsgrad").unwrap();
    tab.steps = 3000;
    suites.push(tab);
    let mut lqr = run_preset("lqr_table1").unwrap();
    lqr.steps = 1500;
    lqr.seeds = vec![3, 4];
    suites.push(lqr);
    let mut chain = run_preset("chain").unwrap();
    chain.steps = 1000;
    suites.push(chain);

    let mut files = 0;
    let mut differing = Vec::new();
    for cfg in &suites {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_suite(cfg, Some(a.path())).unwrap();
        run_suite(cfg, Some(b.path())).unwrap();
        let (fa, fb) = (dir_bytes(a.path()), dir_bytes(b.path()));
        files += fa.len();
        if fa != fb {
            differing.push(cfg.name.clone().unwrap_or_default());
        }
    }
    outcome(
        differing.is_empty(),
        format!("3 suites run twice: {files} CSV/TOML files compared, suites with differing bytes: {differing:?}"),
    )
}

// ---------------------------------------------------------------------------
// 9. scope

fn criterion9() -> Outcome {
    let src = include_str!("acceptance.rs");
    let banned = [["At", "ari"].concat(), ["D", "QN"].concat()];
    let hits: Vec<&String> = banned.iter().filter(|b| src.contains(b.as_str())).collect();
    let preset_hits = altq::harness::presets::ENV_PRESETS
        .iter()
        .filter(|(n, d)| {
            banned
                .iter()
                .any(|b| n.contains(b.as_str()) || d.contains(b.as_str()))
        })
        .count();
    outcome(
        hits.is_empty() && preset_hits == 0,
        format!(
            "no criterion or shipped environment refers to arcade-game or deep-network results ({} matches)",
            hits.len() + preset_hits
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; only run on a plain invocation
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let t0 = Instant::now();
    let runs = c1_runs();
    let secs = t0.elapsed().as_secs_f64();
    results.push(("1  gradient and moment bounds", criterion1(&runs, secs)));
    results.push((
        "2  momentum-sum and schedule-sum inequalities",
        criterion2(&runs),
    ));
    results.push(("3  optimizer step and weighted projection", criterion3()));
    results.push(("4  Riccati oracle", criterion4()));
    results.push((
        "5  tabular convergence of the averaged iterate",
        criterion5(),
    ));
    results.push(("6  restart identity", criterion6()));
    let (a, b) = criterion7();
    results.push(("7a LQR stop criterion", a));
    results.push(("7b LQR ordering and spread", b));
    results.push(("8  determinism", criterion8()));
    results.push(("9  scope", criterion9()));

    println!();
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "\nacceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
