use altq::env::{random_mdp, single_state_mdp};
use altq::optim::{Algorithm, Domain, Schedule};
use altq::qlinear::{
    double_q_target, run_q_learning, run_with_observer, Environment, Experience, Extremum, Flow,
    Record, RunOptions, RunSpec,
};
use altq::{ParamVector, Result};
use rand_chacha::ChaCha8Rng;

/// One state, two actions, reward 0, no discount.
struct TwoArms;

impl Environment for TwoArms {
    type State = ();
    type Action = usize;
    type Greedy = ();
    type Sampler = ();

    fn feature_dim(&self) -> usize {
        2
    }
    fn gamma(&self) -> f64 {
        1.0
    }
    fn extremum(&self) -> Extremum {
        Extremum::Max
    }
    fn features(&self, _: &(), a: &usize) -> Result<Vec<f64>> {
        let mut f = vec![0.0; 2];
        f[*a] = 1.0;
        Ok(f)
    }
    fn greedy(&self, _: &[f64]) -> Result<()> {
        Ok(())
    }
    fn argext(&self, _: &(), theta: &[f64], _: &()) -> Result<usize> {
        Ok(altq::qlinear::argext_index(theta, Extremum::Max)?.0)
    }
    fn sampler(&self, _: &mut ChaCha8Rng) {}
    fn sample_batch(
        &self,
        _: &mut (),
        _: &[f64],
        batch: usize,
        _: &mut ChaCha8Rng,
    ) -> Result<Vec<Experience<(), usize>>> {
        Ok(vec![exp(); batch])
    }
}

fn exp() -> Experience<(), usize> {
    Experience {
        s: (),
        a: 0,
        r: 0.0,
        s_next: (),
    }
}

fn spec(algorithm: Algorithm, steps: usize, seed: u64) -> RunSpec {
    RunSpec {
        algorithm,
        schedule: Schedule::new(0.5, 0.9, 0.99, 0.999).unwrap(),
        domain: Domain::new(4.0).unwrap(),
        steps,
        seed,
        options: RunOptions::default(),
    }
}

#[test]
fn double_target_selects_with_one_estimator_and_evaluates_with_the_other() {
    let b = double_q_target(&TwoArms, &exp(), &[0.0, 10.0], &[1.0, 2.0]).unwrap();
    assert_eq!(b, 2.0);
    let same = double_q_target(&TwoArms, &exp(), &[1.0, 2.0], &[1.0, 2.0]).unwrap();
    assert_eq!(same, 2.0);
}

#[test]
fn single_state_iterate_reaches_geometric_value() {
    let mdp = single_state_mdp(1.0, 0.5).unwrap();
    let mut s = spec(Algorithm::Amsgrad, 100_000, 0);
    s.options.record = Record::Scalars;
    let trace = run_q_learning(&mdp, &s, ParamVector::zeros(1)).unwrap();
    let last = trace.theta_final[0];
    assert!((last - 2.0).abs() <= 0.05, "{last}");
}

#[test]
fn trace_length_and_repeatability() {
    let mdp = random_mdp(4, 3, 2, 1.0, 0.8).unwrap();
    let a = run_q_learning(
        &mdp,
        &spec(Algorithm::AmsgradR, 5, 1),
        ParamVector::zeros(6),
    );
    assert!(
        a.is_err(),
        "restart variant without a period must be rejected"
    );

    let a = run_q_learning(&mdp, &spec(Algorithm::Amsgrad, 5, 1), ParamVector::zeros(6)).unwrap();
    assert_eq!(a.records.len(), 5);
    let b = run_q_learning(&mdp, &spec(Algorithm::Amsgrad, 5, 1), ParamVector::zeros(6)).unwrap();
    assert_eq!(a, b);

    let mut dq = spec(Algorithm::Amsgrad, 300, 9);
    dq.options.double_q = true;
    let x = run_q_learning(&mdp, &dq, ParamVector::zeros(6)).unwrap();
    let y = run_q_learning(&mdp, &dq, ParamVector::zeros(6)).unwrap();
    assert_eq!(x, y);
    dq.seed = 10;
    assert_ne!(x, run_q_learning(&mdp, &dq, ParamVector::zeros(6)).unwrap());
}

#[test]
fn observer_can_stop_the_run() {
    let mdp = random_mdp(5, 2, 2, 1.0, 0.5).unwrap();
    let out = run_with_observer(
        &mdp,
        &spec(Algorithm::Adam, 1000, 0),
        ParamVector::zeros(4),
        |v| {
            if v.t == 17 {
                Flow::Stop
            } else {
                Flow::Continue
            }
        },
    )
    .unwrap();
    assert!(out.stopped_early);
    assert_eq!(out.steps, 17);
}

#[test]
fn projected_iterates_stay_in_the_ball() {
    let mdp = random_mdp(6, 4, 3, 5.0, 0.95).unwrap();
    let mut s = spec(Algorithm::Amsgrad, 2000, 3);
    s.domain = Domain::new(1.5).unwrap();
    let trace = run_q_learning(&mdp, &s, ParamVector::zeros(12)).unwrap();
    for r in &trace.records {
        let n = r.theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(n <= 1.5 * (1.0 + 1e-12), "t = {}: {n}", r.t);
    }
}
