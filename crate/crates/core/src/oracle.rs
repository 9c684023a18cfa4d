//! Brute-force references for small instances. Nothing here calls the
//! solvers it is meant to check: information measures, divergences and
//! expected utilities are recomputed from their definitions.

use std::time::Instant;

use serde::Serialize;

use crate::bregman::{BregmanGenerator, ResourceProblem};
use crate::decision::DecisionProblem;
use crate::deterministic::DEFAULT_ENUM_CAP;
use crate::error::{Result, VoiError};
use crate::exec::Execution;
use crate::prob::Distribution;
use crate::shannon::Branch;

/// Grid points on the constraint boundary count as feasible.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Default per-axis resolution of [`simplex_grid_value`]. The scan's error
/// is about `(max u - min u) / resolution`, so this keeps unit-range payoffs
/// within 2e-3 of the exact optimum.
pub const SIMPLEX_GRID_RESOLUTION: usize = 1000;

/// One oracle-versus-solver comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub target: String,
    pub oracle_value: f64,
    pub solver_value: f64,
    pub abs_diff: f64,
    pub resolution: usize,
    /// Wall time of oracle and solver together, in seconds.
    pub elapsed: f64,
}

impl OracleReport {
    pub fn new(target: impl Into<String>, oracle_value: f64, solver_value: f64, resolution: usize, elapsed: f64) -> Self {
        OracleReport {
            target: target.into(),
            oracle_value,
            solver_value,
            abs_diff: (oracle_value - solver_value).abs(),
            resolution,
            elapsed,
        }
    }

    /// Runs both sides and times them.
    pub fn run(
        target: impl Into<String>,
        resolution: usize,
        oracle: impl FnOnce() -> Result<f64>,
        solver: impl FnOnce() -> Result<f64>,
    ) -> Result<Self> {
        let start = Instant::now();
        let oracle_value = oracle()?;
        let solver_value = solver()?;
        let elapsed = start.elapsed().as_secs_f64();
        Ok(OracleReport::new(target, oracle_value, solver_value, resolution, elapsed))
    }
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 { x * x.ln() } else { 0.0 }
}

fn binary_entropy(p: f64) -> f64 {
    -(xlogx(p) + xlogx(1.0 - p))
}

fn unsupported(what: &'static str, detail: String) -> VoiError {
    VoiError::UnsupportedDimension { what, detail }
}

/// Best expected utility of a 2×2 problem over a `resolution × resolution`
/// grid of channels `(P(b0|a0), P(b0|a1))` with `I(A;B) ≤ λ`.
pub fn grid_max_eu(prob: &DecisionProblem, lambda: f64, resolution: usize) -> Result<f64> {
    Ok(grid_max_eu_many(prob, &[lambda], resolution, Execution::default())?[0])
}

/// [`grid_max_eu`] for several bounds in one scan.
pub fn grid_max_eu_many(
    prob: &DecisionProblem,
    lambdas: &[f64],
    resolution: usize,
    execution: Execution,
) -> Result<Vec<f64>> {
    if prob.n_states() != 2 || prob.n_actions() != 2 {
        return Err(unsupported(
            "channel grid",
            format!("needs 2 states and 2 actions, got {}×{}", prob.n_states(), prob.n_actions()),
        ));
    }
    if resolution < 10 {
        return Err(VoiError::InvalidArgument(format!("resolution {resolution} is below 10")));
    }
    if lambdas.iter().any(|l| l.is_nan() || *l < 0.0) {
        return Err(VoiError::InvalidArgument("information bounds must be non-negative".into()));
    }
    let q0 = prob.prior().get(0);
    let q1 = prob.prior().get(1);
    let axis: Vec<f64> = (0..=resolution).map(|i| i as f64 / resolution as f64).collect();
    let cond: Vec<f64> = axis.iter().map(|&x| binary_entropy(x)).collect();
    let u = |a, b| prob.utility(a, b);

    let rows = execution.map_range(axis.len(), |i| {
        let x = axis[i];
        let mut best = vec![f64::NEG_INFINITY; lambdas.len()];
        for (j, &y) in axis.iter().enumerate() {
            // I(A;B) = H(B) - H(B|A)
            let info = binary_entropy(q0 * x + q1 * y) - q0 * cond[i] - q1 * cond[j];
            let eu = q0 * x * u(0, 0) + q1 * y * u(1, 0) + (q0 * (1.0 - x) * u(0, 1) + q1 * (1.0 - y) * u(1, 1));
            for (slot, &lambda) in best.iter_mut().zip(lambdas) {
                if info <= lambda + FEASIBILITY_SLACK && eu > *slot {
                    *slot = eu;
                }
            }
        }
        best
    });
    let mut best = vec![f64::NEG_INFINITY; lambdas.len()];
    for row in rows {
        for (b, r) in best.iter_mut().zip(row) {
            *b = b.max(r);
        }
    }
    Ok(best)
}

/// One function `f: A → B` with its constraint values and expected utility.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicRow {
    pub assignment: Vec<usize>,
    pub entropy: f64,
    pub ln_cardinality: f64,
    pub eu: f64,
}

pub fn exhaustive_deterministic(prob: &DecisionProblem) -> Result<Vec<DeterministicRow>> {
    exhaustive_deterministic_with(prob, DEFAULT_ENUM_CAP)
}

/// Every function from states to actions, in lexicographic order.
pub fn exhaustive_deterministic_with(prob: &DecisionProblem, cap: u64) -> Result<Vec<DeterministicRow>> {
    let n = prob.n_states();
    let m = prob.n_actions();
    let needed = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(VoiError::EnumerationCap { needed, cap });
    }
    let q = prob.prior().probs();
    let mut rows = Vec::with_capacity(needed as usize);
    for index in 0..needed as usize {
        let mut assignment = vec![0; n];
        let mut rest = index;
        for a in (0..n).rev() {
            assignment[a] = rest % m;
            rest /= m;
        }
        let mut mass = vec![0.0; m];
        let mut eu = 0.0;
        for a in 0..n {
            mass[assignment[a]] += q[a];
            eu += q[a] * prob.utility(a, assignment[a]);
        }
        let entropy = -mass.iter().map(|&p| xlogx(p)).sum::<f64>();
        let used = (0..m).filter(|b| assignment.contains(b)).count();
        rows.push(DeterministicRow {
            assignment,
            entropy: entropy.max(0.0),
            ln_cardinality: (used as f64).ln(),
            eu,
        });
    }
    Ok(rows)
}

fn table_max(rows: &[DeterministicRow], feasible: impl Fn(&DeterministicRow) -> bool) -> f64 {
    rows.iter()
        .filter(|r| feasible(r))
        .map(|r| r.eu)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best table entry with entropy at most `λ`.
pub fn table_boltzmann_max(rows: &[DeterministicRow], lambda: f64) -> f64 {
    table_max(rows, |r| r.entropy <= lambda + FEASIBILITY_SLACK)
}

/// Best table entry with log-cardinality at most `λ`.
pub fn table_hartley_max(rows: &[DeterministicRow], lambda: f64) -> f64 {
    table_max(rows, |r| r.ln_cardinality <= lambda + FEASIBILITY_SLACK)
}

fn direct_divergence(gen: &BregmanGenerator, y: &[f64], z: &[f64]) -> f64 {
    match gen {
        BregmanGenerator::NegativeEntropyRelative { .. } => y
            .iter()
            .zip(z)
            .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 })
            .sum(),
        BregmanGenerator::SquaredEuclidean { .. } => {
            0.5 * y.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        }
    }
}

/// Extremal `⟨u, y⟩` over a barycentric grid of the simplex (dimension at
/// most 3) subject to the divergence bound. The reference itself always
/// counts as feasible, on the grid or not.
pub fn simplex_grid_value(rp: &ResourceProblem, branch: Branch, resolution: usize) -> Result<f64> {
    let dim = rp.utility.len();
    if dim > 3 {
        return Err(unsupported("simplex grid", format!("dimension {dim} exceeds 3")));
    }
    if resolution == 0 {
        return Err(VoiError::InvalidArgument("resolution must be positive".into()));
    }
    let z = rp.reference.probs();
    let n = resolution;
    let f = n as f64;
    let points: Vec<Vec<f64>> = match dim {
        1 => vec![vec![1.0]],
        2 => (0..=n).map(|i| vec![i as f64 / f, (n - i) as f64 / f]).collect(),
        _ => (0..=n)
            .flat_map(|i| (0..=n - i).map(move |j| vec![i as f64 / f, j as f64 / f, (n - i - j) as f64 / f]))
            .collect(),
    };
    let sign = match branch {
        Branch::Upper => 1.0,
        Branch::Lower => -1.0,
    };
    let score = |y: &[f64]| sign * y.iter().zip(&rp.utility).map(|(a, b)| a * b).sum::<f64>();
    let best = points
        .iter()
        .filter(|y| direct_divergence(&rp.generator, y, z) <= rp.lambda + FEASIBILITY_SLACK)
        .map(|y| score(y))
        .fold(score(z), f64::max);
    Ok(sign * best)
}

/// Largest `I(A;B)` over a grid of joint distributions on two binary
/// variables whose `B`-marginal is `p`. Should equal `H(p)`.
pub fn variational_entropy_check(p: &Distribution, resolution: usize) -> Result<f64> {
    if p.dim() > 2 {
        return Err(unsupported("variational entropy", format!("dimension {} exceeds 2", p.dim())));
    }
    if resolution < 100 {
        return Err(VoiError::InvalidArgument(format!("resolution {resolution} is below 100")));
    }
    if p.dim() == 1 {
        return Ok(0.0);
    }
    let (w0, w1) = (p.get(0), p.get(1));
    let axis: Vec<f64> = (0..=resolution).map(|i| i as f64 / resolution as f64).collect();
    let mut best: f64 = 0.0;
    // s = P(a0|b0), t = P(a0|b1); I = H(A) - H(A|B).
    for &s in &axis {
        for &t in &axis {
            let info = binary_entropy(w0 * s + w1 * t) - w0 * binary_entropy(s) - w1 * binary_entropy(t);
            best = best.max(info);
        }
    }
    Ok(best)
}
