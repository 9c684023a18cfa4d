//! Decision problems, lotteries and the expected-utility ordering.

use serde::Serialize;

use crate::error::{Result, VoiError};
use crate::prob::{check_dims, Channel, Distribution};

/// Two expected utilities closer than this are indifferent.
pub const INDIFFERENCE_TOL: f64 = 1e-9;

/// A fixed prior over states together with a utility matrix `u(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionProblem {
    prior: Distribution,
    n_actions: usize,
    utilities: Vec<f64>,
    state_labels: Vec<String>,
    action_labels: Vec<String>,
}

impl DecisionProblem {
    pub fn new(prior: Distribution, utilities: Vec<Vec<f64>>) -> Result<Self> {
        check_dims(prior.dim(), utilities.len())?;
        let n_actions = utilities[0].len();
        if n_actions == 0 {
            return Err(VoiError::InvalidProblem("utility matrix has no actions".into()));
        }
        let mut flat = Vec::with_capacity(prior.dim() * n_actions);
        for (a, row) in utilities.iter().enumerate() {
            if row.len() != n_actions {
                return Err(VoiError::InvalidProblem(format!(
                    "utility row {a} has {} entries, expected {n_actions}",
                    row.len()
                )));
            }
            if let Some(b) = row.iter().position(|u| !u.is_finite()) {
                return Err(VoiError::InvalidProblem(format!("utility ({a},{b}) is not finite")));
            }
            flat.extend_from_slice(row);
        }
        let state_labels = (0..prior.dim()).map(|a| format!("a{a}")).collect();
        let action_labels = (0..n_actions).map(|b| format!("b{b}")).collect();
        Ok(DecisionProblem {
            prior,
            n_actions,
            utilities: flat,
            state_labels,
            action_labels,
        })
    }

    pub fn with_labels(mut self, states: Vec<String>, actions: Vec<String>) -> Result<Self> {
        check_dims(self.n_states(), states.len())?;
        check_dims(self.n_actions, actions.len())?;
        self.state_labels = states;
        self.action_labels = actions;
        Ok(self)
    }

    /// Uniform prior over `n` states with `u(a, b) = [a == b]`.
    pub fn identity_payoff(n: usize) -> Result<Self> {
        let rows = (0..n)
            .map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
            .collect();
        DecisionProblem::new(Distribution::uniform(n)?, rows)
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn n_states(&self) -> usize {
        self.prior.dim()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn utility(&self, a: usize, b: usize) -> f64 {
        self.utilities[a * self.n_actions + b]
    }

    pub fn utility_row(&self, a: usize) -> &[f64] {
        &self.utilities[a * self.n_actions..(a + 1) * self.n_actions]
    }

    pub fn utility_rows(&self) -> Vec<Vec<f64>> {
        self.utilities
            .chunks_exact(self.n_actions)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn action_labels(&self) -> &[String] {
        &self.action_labels
    }

    /// The same problem with every payoff negated; turns gains into losses.
    pub fn negated(&self) -> DecisionProblem {
        DecisionProblem {
            utilities: self.utilities.iter().map(|u| -u).collect(),
            ..self.clone()
        }
    }

    /// `E_Q[u(·, b)]` for every action `b`.
    pub fn action_values(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.n_actions];
        for (a, &q) in self.prior.probs().iter().enumerate() {
            for (v, u) in values.iter_mut().zip(self.utility_row(a)) {
                *v += q * u;
            }
        }
        values
    }

    /// Best constant action (lowest index on ties) and its value.
    pub fn best_constant_action(&self) -> (usize, f64) {
        let values = self.action_values();
        let mut best = 0;
        for (b, &v) in values.iter().enumerate().skip(1) {
            if v > values[best] {
                best = b;
            }
        }
        (best, values[best])
    }

    /// `E_Q[max_b u(a, b)]`, the value under complete information.
    pub fn full_information_value(&self) -> f64 {
        self.prior
            .probs()
            .iter()
            .enumerate()
            .map(|(a, &q)| q * max_of(self.utility_row(a)))
            .sum()
    }

    /// Spread `max u - min u` of the payoffs; zero for a flat matrix.
    pub fn utility_scale(&self) -> f64 {
        let max = self.utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.utilities.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

pub(crate) fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `Σ_a Σ_b Q(a) P(b|a) u(a, b)`.
pub fn joint_expected_utility(prob: &DecisionProblem, ch: &Channel) -> Result<f64> {
    check_dims(prob.n_states(), ch.n_states())?;
    check_dims(prob.n_actions(), ch.n_actions())?;
    let mut total = 0.0;
    for (a, &q) in prob.prior().probs().iter().enumerate() {
        let row_value: f64 = ch
            .row(a)
            .iter()
            .zip(prob.utility_row(a))
            .map(|(p, u)| p * u)
            .sum();
        total += q * row_value;
    }
    Ok(total)
}

/// A distribution over outcomes paired with a payoff per outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lottery {
    dist: Distribution,
    payoffs: Vec<f64>,
}

impl Lottery {
    pub fn new(dist: Distribution, payoffs: Vec<f64>) -> Result<Self> {
        check_dims(dist.dim(), payoffs.len())?;
        if payoffs.iter().any(|u| !u.is_finite()) {
            return Err(VoiError::InvalidArgument("lottery payoffs must be finite".into()));
        }
        Ok(Lottery { dist, payoffs })
    }

    /// `(probability, payoff)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let dist = Distribution::new(pairs.iter().map(|p| p.0).collect())?;
        Lottery::new(dist, pairs.iter().map(|p| p.1).collect())
    }

    pub fn certain(payoff: f64) -> Result<Self> {
        Lottery::new(Distribution::point_mass(1, 0)?, vec![payoff])
    }

    pub fn dist(&self) -> &Distribution {
        &self.dist
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    pub fn negated(&self) -> Lottery {
        self.map_payoffs(|u| -u)
    }

    pub fn map_payoffs(&self, f: impl Fn(f64) -> f64) -> Lottery {
        Lottery {
            dist: self.dist.clone(),
            payoffs: self.payoffs.iter().map(|&u| f(u)).collect(),
        }
    }

    /// Probability mixture of two lotteries over the same payoff vector.
    pub fn mixture(alpha: f64, p: &Lottery, q: &Lottery) -> Result<Lottery> {
        check_dims(p.payoffs.len(), q.payoffs.len())?;
        if p.payoffs != q.payoffs {
            return Err(VoiError::InvalidArgument(
                "mixture needs lotteries on a common outcome set".into(),
            ));
        }
        Lottery::new(Distribution::mixture(alpha, &p.dist, &q.dist)?, p.payoffs.clone())
    }
}

pub fn expected_utility(lot: &Lottery) -> f64 {
    lot.dist
        .probs()
        .iter()
        .zip(&lot.payoffs)
        .map(|(p, u)| p * u)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Less,
    Indifferent,
    Greater,
}

impl Preference {
    pub fn as_str(self) -> &'static str {
        match self {
            Preference::Less => "less",
            Preference::Indifferent => "indifferent",
            Preference::Greater => "greater",
        }
    }
}

/// Orders two lotteries by expected utility, indifferent within
/// [`INDIFFERENCE_TOL`].
pub fn eu_compare(p: &Lottery, q: &Lottery) -> Preference {
    let diff = expected_utility(p) - expected_utility(q);
    if diff.abs() <= INDIFFERENCE_TOL {
        Preference::Indifferent
    } else if diff > 0.0 {
        Preference::Greater
    } else {
        Preference::Less
    }
}
