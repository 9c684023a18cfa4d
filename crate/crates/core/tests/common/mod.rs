#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use voi_core::{DecisionProblem, Distribution};

pub fn problem(prior: &[f64], rows: &[&[f64]]) -> DecisionProblem {
    DecisionProblem::new(
        Distribution::new(prior.to_vec()).unwrap(),
        rows.iter().map(|r| r.to_vec()).collect(),
    )
    .unwrap()
}

/// Hand-picked small problems: identity payoffs, skewed priors, mixed-sign
/// payoffs, dominated and tied actions, and a single action.
pub fn battery() -> Vec<(&'static str, DecisionProblem)> {
    vec![
        ("ident2", DecisionProblem::identity_payoff(2).unwrap()),
        ("ident2_skewed", problem(&[0.3, 0.7], &[&[1.0, 0.0], &[0.0, 1.0]])),
        ("bet2", problem(&[0.6, 0.4], &[&[3.0, -1.0], &[0.0, 2.0]])),
        ("soft2", problem(&[0.5, 0.5], &[&[1.0, 0.5], &[0.2, 0.9]])),
        ("losses2", problem(&[0.25, 0.75], &[&[-2.0, 1.0], &[4.0, -3.0]])),
        ("dominant2", problem(&[0.4, 0.6], &[&[2.0, 0.0], &[1.0, -1.0]])),
        ("ident3", DecisionProblem::identity_payoff(3).unwrap()),
        (
            "mixed3",
            problem(&[0.2, 0.5, 0.3], &[&[4.0, -1.0, 0.5], &[-2.0, 3.0, 1.0], &[0.0, 1.0, 2.5]]),
        ),
        ("wide2x3", problem(&[0.45, 0.55], &[&[1.0, 0.0, 0.7], &[0.0, 1.0, 0.6]])),
        ("tall3x2", problem(&[0.1, 0.6, 0.3], &[&[5.0, -5.0], &[-1.0, 1.0], &[2.0, 0.5]])),
        ("tied3", problem(&[0.3, 0.3, 0.4], &[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0]])),
        ("single_action", problem(&[0.2, 0.8], &[&[1.5], &[-0.5]])),
    ]
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Distribution {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Distribution::new(raw.into_iter().map(|x| x / total).collect()).unwrap()
}

/// Random problem with strictly positive prior and payoffs in `[-10, 10]`.
pub fn random_problem(rng: &mut ChaCha8Rng, states: usize, actions: usize) -> DecisionProblem {
    let prior = random_distribution(rng, states);
    let rows = (0..states)
        .map(|_| (0..actions).map(|_| rng.random_range(-10.0..=10.0)).collect())
        .collect();
    DecisionProblem::new(prior, rows).unwrap()
}
