//! Value of information over deterministic channels `f: A → B`, under an
//! entropy constraint `H(f(A)) ≤ λ` (Boltzmann type) or a cardinality
//! constraint `ln |f(A)| ≤ λ` (Hartley type). Both are solved exactly by
//! enumeration, so they are only usable at desk scale.
//!
//! Ties between equally good functions go to the lexicographically
//! smallest assignment vector.

use serde::Serialize;

use crate::decision::DecisionProblem;
use crate::error::{Result, VoiError};
use crate::exec::Execution;
use crate::prob::{neg_plogp, Channel};
use crate::shannon::ValuePoint;

pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Slack on the constraint that absorbs rounding in `ln k` and entropies.
pub const CONSTRAINT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumOptions {
    pub cap: u64,
    pub execution: Execution,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            cap: DEFAULT_ENUM_CAP,
            execution: Execution::default(),
        }
    }
}

/// A function from states to actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DeterministicChannel {
    assignment: Vec<usize>,
    n_actions: usize,
}

impl DeterministicChannel {
    pub fn new(assignment: Vec<usize>, n_actions: usize) -> Result<Self> {
        if let Some(a) = assignment.iter().position(|&b| b >= n_actions) {
            return Err(VoiError::InvalidChannel(format!(
                "state {a} maps to action {}, only {n_actions} actions",
                assignment[a]
            )));
        }
        Ok(DeterministicChannel {
            assignment,
            n_actions,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn to_channel(&self) -> Channel {
        Channel::deterministic(&self.assignment, self.n_actions).expect("validated on construction")
    }

    /// Number of distinct actions used.
    pub fn range_size(&self) -> usize {
        let mut used = vec![false; self.n_actions];
        self.assignment.iter().for_each(|&b| used[b] = true);
        used.into_iter().filter(|&u| u).count()
    }
}

/// A deterministic frontier point with the function that attains it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicPoint {
    pub point: ValuePoint,
    pub assignment: DeterministicChannel,
}

fn check_cap(base: usize, exp: usize, cap: u64) -> Result<u128> {
    let needed = (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(VoiError::EnumerationCap { needed, cap });
    }
    Ok(needed)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(VoiError::InvalidArgument(format!(
            "information bound must be non-negative, got {lambda}"
        )));
    }
    Ok(())
}

/// Entropy of the pushforward of the prior through `assignment`.
fn pushforward_entropy(prior: &[f64], assignment: &[usize], bins: &mut [f64]) -> f64 {
    bins.iter_mut().for_each(|x| *x = 0.0);
    for (&q, &b) in prior.iter().zip(assignment) {
        bins[b] += q;
    }
    bins.iter().map(|&p| neg_plogp(p)).sum::<f64>().max(0.0)
}

fn assignment_value(prob: &DecisionProblem, assignment: &[usize]) -> f64 {
    prob.prior()
        .probs()
        .iter()
        .zip(assignment)
        .enumerate()
        .map(|(a, (&q, &b))| q * prob.utility(a, b))
        .sum()
}

#[derive(Debug, Clone)]
struct Best {
    value: f64,
    information: f64,
    assignment: Vec<usize>,
    visited: u64,
}

impl Best {
    /// Keeps the larger value; equal values keep the smaller assignment.
    fn merge(self, other: Best) -> Best {
        let visited = self.visited + other.visited;
        let keep_self = self.value > other.value
            || (self.value == other.value && self.assignment <= other.assignment);
        let mut winner = if keep_self { self } else { other };
        winner.visited = visited;
        winner
    }
}

/// Advances `digits` as a little-odometer in lexicographic order (last
/// position fastest). Returns false once every combination has been seen.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Boltzmann-type value `max { EU(f) : H(f(A)) ≤ λ }`.
pub fn boltzmann_value(prob: &DecisionProblem, lambda: f64) -> Result<DeterministicPoint> {
    boltzmann_value_with(prob, lambda, &EnumOptions::default())
}

pub fn boltzmann_value_with(
    prob: &DecisionProblem,
    lambda: f64,
    opts: &EnumOptions,
) -> Result<DeterministicPoint> {
    check_lambda(lambda)?;
    let n_states = prob.n_states();
    let n_actions = prob.n_actions();
    check_cap(n_actions, n_states, opts.cap)?;
    let prior = prob.prior().probs();

    // Partition by the actions of the leading states so workers get
    // similar-sized blocks; every block is scanned in lexicographic order.
    let mut prefix_len = 0;
    while prefix_len < n_states && n_actions.pow(prefix_len as u32) < 256 {
        prefix_len += 1;
    }
    let blocks = n_actions.pow(prefix_len as u32);
    let bound = lambda + CONSTRAINT_SLACK;

    let scan = |block: usize| -> Option<Best> {
        let mut assignment = vec![0; n_states];
        let mut rest = block;
        for slot in assignment[..prefix_len].iter_mut().rev() {
            *slot = rest % n_actions;
            rest /= n_actions;
        }
        let mut bins = vec![0.0; n_actions];
        let mut best: Option<Best> = None;
        let mut visited = 0;
        loop {
            visited += 1;
            let h = pushforward_entropy(prior, &assignment, &mut bins);
            if h <= bound {
                let value = assignment_value(prob, &assignment);
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(Best {
                        value,
                        information: h,
                        assignment: assignment.clone(),
                        visited: 0,
                    });
                }
            }
            if !odometer(&mut assignment[prefix_len..], n_actions) {
                break;
            }
        }
        best.map(|mut b| {
            b.visited = visited;
            b
        })
    };

    let best = opts
        .execution
        .map_range(blocks, scan)
        .into_iter()
        .flatten()
        .reduce(Best::merge)
        .expect("constant functions are always feasible");
    finish(prob, lambda, best)
}

/// Hartley-type value `max { EU(f) : ln |f(A)| ≤ λ }`, computed over action
/// subsets of size at most `floor(exp(λ))`.
pub fn hartley_value(prob: &DecisionProblem, lambda: f64) -> Result<DeterministicPoint> {
    hartley_value_with(prob, lambda, &EnumOptions::default())
}

pub fn hartley_value_with(
    prob: &DecisionProblem,
    lambda: f64,
    opts: &EnumOptions,
) -> Result<DeterministicPoint> {
    check_lambda(lambda)?;
    let n_actions = prob.n_actions();
    check_cap(2, n_actions, opts.cap)?;
    let k = hartley_capacity(lambda, n_actions);
    let subsets: Vec<u64> = (1u64..(1u64 << n_actions))
        .filter(|s| s.count_ones() as usize <= k)
        .collect();

    let evaluate = |&subset: &u64| -> Best {
        let assignment: Vec<usize> = (0..prob.n_states())
            .map(|a| {
                let row = prob.utility_row(a);
                let mut best_b = None::<usize>;
                for b in (0..n_actions).filter(|b| subset >> b & 1 == 1) {
                    if best_b.is_none_or(|c| row[b] > row[c]) {
                        best_b = Some(b);
                    }
                }
                best_b.expect("subset is non-empty")
            })
            .collect();
        let channel = DeterministicChannel {
            assignment,
            n_actions,
        };
        Best {
            value: assignment_value(prob, &channel.assignment),
            information: (channel.range_size() as f64).ln(),
            assignment: channel.assignment,
            visited: 1,
        }
    };

    let best = opts
        .execution
        .map(&subsets, evaluate)
        .into_iter()
        .reduce(Best::merge)
        .expect("singleton subsets always exist");
    finish(prob, lambda, best)
}

/// Largest number of distinct actions allowed by `ln k ≤ λ`.
pub fn hartley_capacity(lambda: f64, n_actions: usize) -> usize {
    if lambda >= (n_actions as f64).ln() {
        return n_actions;
    }
    ((lambda + CONSTRAINT_SLACK).exp().floor() as usize).clamp(1, n_actions)
}

fn finish(prob: &DecisionProblem, lambda: f64, best: Best) -> Result<DeterministicPoint> {
    let assignment = DeterministicChannel::new(best.assignment, prob.n_actions())?;
    Ok(DeterministicPoint {
        point: ValuePoint {
            lambda,
            information: best.information,
            value: best.value,
            beta: f64::INFINITY,
            channel: assignment.to_channel(),
            iterations: best.visited as usize,
            converged: true,
            plateau: false,
        },
        assignment,
    })
}
