//! Value of Shannon information: the best (and worst) expected utility
//! reachable by a channel `P(b|a)` whose mutual information with the state
//! stays below `λ`.
//!
//! At a fixed inverse temperature `β` the Lagrangian `EU - I/β` is maximized
//! by alternating two updates from a uniform output marginal `r`:
//!
//! ```text
//! P(b|a) ∝ r(b) exp(β u(a,b))
//! r(b)   ← Σ_a Q(a) P(b|a)
//! ```
//!
//! The achieved information grows monotonically with `β`, so the frontier
//! point for a given `λ` is found by bisection on `β`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::decision::{joint_expected_utility, max_of, DecisionProblem};
use crate::error::{Result, VoiError};
use crate::exec::Execution;
use crate::grid::validate_grid;
use crate::prob::{mutual_information_with_marginal, output_marginal, Channel, LOG_ZERO};

/// Marginal entries below this are flushed to zero between updates.
const FLUSH: f64 = 1e-300;

/// Payoffs within this (relative to the utility scale) of a row maximum
/// count as tied under infinite inverse temperature.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        }
    }
}

/// One solved point of a value-of-information frontier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuePoint {
    /// Information bound the point was solved for.
    pub lambda: f64,
    /// Information actually carried by `channel`.
    pub information: f64,
    /// Expected utility of `channel`.
    pub value: f64,
    /// Inverse temperature; `+inf` at the full-information clamp.
    pub beta: f64,
    pub channel: Channel,
    pub iterations: usize,
    pub converged: bool,
    /// The bound fell inside a jump of `λ(β)` and was met by mixing the two
    /// bracketing channels.
    pub plateau: bool,
}

impl ValuePoint {
    fn reflected(mut self) -> ValuePoint {
        self.value = -self.value;
        self
    }
}

/// A frontier traced over an increasing grid of information bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueCurve {
    pub branch: Branch,
    /// Information at which the upper frontier saturates.
    pub lambda_max: f64,
    pub points: Vec<ValuePoint>,
}

impl ValueCurve {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.lambda, p.value)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShannonOptions {
    /// Cap on alternating updates per inverse temperature.
    pub max_iter: usize,
    /// Stop once the Lagrangian `EU - I/β` moves by less than this.
    pub lagrangian_tol: f64,
    /// Acceptable gap between achieved and requested information.
    pub lambda_tol: f64,
    pub execution: Execution,
}

impl Default for ShannonOptions {
    fn default() -> Self {
        ShannonOptions {
            max_iter: 10_000,
            lagrangian_tol: 1e-12,
            lambda_tol: 1e-11,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Tilt {
    Finite(f64),
    Infinite,
}

impl Tilt {
    fn beta(self) -> f64 {
        match self {
            Tilt::Finite(b) => b,
            Tilt::Infinite => f64::INFINITY,
        }
    }
}

/// Solves `max_P EU - I/β` at a fixed inverse temperature.
pub fn ba_fixed_beta(prob: &DecisionProblem, beta: f64) -> Result<ValuePoint> {
    ba_fixed_beta_with(prob, beta, &ShannonOptions::default())
}

pub fn ba_fixed_beta_with(
    prob: &DecisionProblem,
    beta: f64,
    opts: &ShannonOptions,
) -> Result<ValuePoint> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(VoiError::InvalidArgument(format!(
            "inverse temperature must be finite and non-negative, got {beta}"
        )));
    }
    if beta == 0.0 {
        return Ok(independent_point(prob));
    }
    Ok(alternate(prob, Tilt::Finite(beta), opts))
}

/// Zero tilt: only channels independent of the state are allowed, and the
/// best of those plays the best constant action.
fn independent_point(prob: &DecisionProblem) -> ValuePoint {
    let (best, value) = prob.best_constant_action();
    let assignment = vec![best; prob.n_states()];
    let channel = Channel::deterministic(&assignment, prob.n_actions())
        .expect("best action index is in range");
    ValuePoint {
        lambda: 0.0,
        information: 0.0,
        value,
        beta: 0.0,
        channel,
        iterations: 0,
        converged: true,
        plateau: false,
    }
}

/// Row weights `exp(β (u(a,b) - max_b u(a,b)))`, or row-argmax indicators
/// for the infinite tilt.
fn tilt_weights(prob: &DecisionProblem, tilt: Tilt) -> Vec<f64> {
    let n_actions = prob.n_actions();
    let tie = TIE_TOL * prob.utility_scale().max(1.0);
    let mut w = Vec::with_capacity(prob.n_states() * n_actions);
    for a in 0..prob.n_states() {
        let row = prob.utility_row(a);
        let m = max_of(row);
        match tilt {
            Tilt::Finite(beta) => w.extend(row.iter().map(|&u| (beta * (u - m)).exp())),
            Tilt::Infinite => w.extend(row.iter().map(|&u| if u >= m - tie { 1.0 } else { 0.0 })),
        }
    }
    w
}

/// Alternating updates run before the first Newton polish.
const WARMUP: usize = 100;

/// Newton steps allowed per polish.
const NEWTON_STEPS: usize = 100;

/// One alternating update `r ← r ⊙ g(r)` on the output marginal.
struct Update {
    next: Vec<f64>,
    /// `G(r) = Σ_a Q(a) ln Σ_b r(b) w(a,b)`, β times the Lagrangian up to a
    /// constant.
    objective: f64,
    /// `max_b g_b(r) - 1`, an upper bound on `max G - G(r)`.
    gap: f64,
}

struct Tilted<'a> {
    prior: &'a [f64],
    w: Vec<f64>,
    n_actions: usize,
}

impl Tilted<'_> {
    fn weights(&self, a: usize) -> &[f64] {
        &self.w[a * self.n_actions..(a + 1) * self.n_actions]
    }

    /// Per-state normalizers `z_a`, gradient `g` and objective `G` at `r`.
    fn evaluate(&self, r: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let mut z = vec![0.0; self.prior.len()];
        let mut g = vec![0.0; self.n_actions];
        let mut objective = 0.0;
        for (a, &q) in self.prior.iter().enumerate() {
            if q < LOG_ZERO {
                continue;
            }
            let wa = self.weights(a);
            let za: f64 = r.iter().zip(wa).map(|(x, y)| x * y).sum();
            z[a] = za;
            if za <= 0.0 {
                objective = f64::NEG_INFINITY;
                continue;
            }
            objective += q * za.ln();
            for (gb, wab) in g.iter_mut().zip(wa) {
                *gb += q * wab / za;
            }
        }
        (z, g, objective)
    }

    fn update(&self, r: &[f64]) -> Update {
        let (_, g, objective) = self.evaluate(r);
        let gap = g.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0;
        let mut next: Vec<f64> = r.iter().zip(&g).map(|(x, y)| x * y).collect();
        normalize_flushed(&mut next);
        Update {
            next,
            objective,
            gap,
        }
    }

    /// Active-set Newton ascent on `G` over the simplex, starting from `r`.
    /// Returns the number of steps taken and whether the gap bound fell
    /// below `tol`.
    fn polish(&self, r: &mut [f64], tol: f64) -> (usize, bool) {
        let n = self.n_actions;
        let mut active: Vec<bool> = r.iter().map(|&x| x > 0.0).collect();
        for step in 0..NEWTON_STEPS {
            let (z, g, objective) = self.evaluate(r);
            if !objective.is_finite() {
                return (step, false);
            }
            let gap = g.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0;
            if gap <= tol {
                return (step, true);
            }
            for b in 0..n {
                if !active[b] && g[b] > 1.0 {
                    active[b] = true;
                }
            }
            let Some(dir) = self.newton_direction(r, &z, &g, &mut active) else {
                return (step, false);
            };
            let t_max = r
                .iter()
                .zip(&dir)
                .filter(|(&x, &d)| d < 0.0 && x > 0.0)
                .map(|(&x, &d)| -x / d)
                .fold(1.0, f64::min);
            let mut t = t_max;
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<f64> = r
                    .iter()
                    .zip(&dir)
                    .map(|(&x, &d)| (x + t * d).max(0.0))
                    .collect();
                let (_, _, value) = self.evaluate(&trial);
                if value >= objective {
                    accepted = Some(trial);
                    break;
                }
                t *= 0.5;
            }
            let Some(mut next) = accepted else {
                return (step, false);
            };
            normalize_flushed(&mut next);
            for b in 0..n {
                if next[b] == 0.0 {
                    active[b] = false;
                }
            }
            r.copy_from_slice(&next);
        }
        let (_, g, _) = self.evaluate(r);
        let gap = g.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0;
        (NEWTON_STEPS, gap <= tol)
    }

    /// Solves the equality-constrained Newton system on the active actions.
    /// Actions sitting at zero that the step would push negative are dropped
    /// from the active set and the system is re-solved.
    fn newton_direction(
        &self,
        r: &[f64],
        z: &[f64],
        g: &[f64],
        active: &mut [bool],
    ) -> Option<Vec<f64>> {
        loop {
            let idx: Vec<usize> = (0..self.n_actions).filter(|&b| active[b]).collect();
            let m = idx.len();
            if m == 0 {
                return None;
            }
            let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut rhs = DVector::<f64>::zeros(m + 1);
            for (a, &q) in self.prior.iter().enumerate() {
                if q < LOG_ZERO || z[a] <= 0.0 {
                    continue;
                }
                let wa = self.weights(a);
                let scale = q / (z[a] * z[a]);
                for (i, &bi) in idx.iter().enumerate() {
                    for (j, &bj) in idx.iter().enumerate() {
                        kkt[(i, j)] -= scale * wa[bi] * wa[bj];
                    }
                }
            }
            let diag = (0..m).map(|i| kkt[(i, i)].abs()).fold(0.0, f64::max);
            let ridge = 1e-13 * diag.max(f64::MIN_POSITIVE);
            for (i, &b) in idx.iter().enumerate() {
                kkt[(i, i)] -= ridge;
                kkt[(i, m)] = 1.0;
                kkt[(m, i)] = 1.0;
                rhs[i] = -g[b];
            }
            let sol = kkt.lu().solve(&rhs)?;
            if sol.iter().any(|x| !x.is_finite()) {
                return None;
            }
            let mut dir = vec![0.0; self.n_actions];
            for (i, &b) in idx.iter().enumerate() {
                dir[b] = sol[i];
            }
            let blocked: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&b| r[b] == 0.0 && dir[b] < 0.0)
                .collect();
            if blocked.is_empty() {
                return Some(dir);
            }
            for b in blocked {
                active[b] = false;
            }
        }
    }
}

fn normalize_flushed(r: &mut [f64]) {
    let mut total = 0.0;
    for x in r.iter_mut() {
        if !(*x >= FLUSH) {
            *x = 0.0;
        }
        total += *x;
    }
    if total > 0.0 {
        r.iter_mut().for_each(|x| *x /= total);
    } else {
        let n = r.len() as f64;
        r.iter_mut().for_each(|x| *x = 1.0 / n);
    }
}

/// Maximizes the tilted Lagrangian: alternating updates from a uniform
/// marginal, finished by Newton polishing on the active support, until the
/// duality bound certifies the Lagrangian to within tolerance.
fn alternate(prob: &DecisionProblem, tilt: Tilt, opts: &ShannonOptions) -> ValuePoint {
    let n_actions = prob.n_actions();
    let tilted = Tilted {
        prior: prob.prior().probs(),
        w: tilt_weights(prob, tilt),
        n_actions,
    };
    // The gap bound is in units of β times the Lagrangian; below ~1e-14 it
    // is rounding noise.
    let tol = match tilt {
        Tilt::Finite(beta) => (opts.lagrangian_tol * beta).max(1e-14),
        Tilt::Infinite => opts.lagrangian_tol,
    };
    let mut r = vec![1.0 / n_actions as f64; n_actions];
    let mut iterations = 0;
    let mut converged = false;
    let mut next_polish = WARMUP.min(opts.max_iter);

    while iterations < opts.max_iter {
        let step = tilted.update(&r);
        if step.gap <= tol && step.objective.is_finite() {
            converged = true;
            break;
        }
        r = step.next;
        iterations += 1;
        if iterations == next_polish {
            let (steps, done) = tilted.polish(&mut r, tol);
            iterations += steps;
            if done {
                converged = true;
                break;
            }
            next_polish = (next_polish * 4).min(opts.max_iter);
        }
    }

    let channel = tilted_channel(prob, &tilted.w, &r, tilt);
    let marginal = output_marginal(prob.prior(), &channel).expect("shapes agree");
    let information = mutual_information_with_marginal(prob.prior(), &channel, marginal.probs());
    let value = joint_expected_utility(prob, &channel).expect("shapes agree");
    ValuePoint {
        lambda: information,
        information,
        value,
        beta: tilt.beta(),
        channel,
        iterations,
        converged,
        plateau: false,
    }
}

/// Rows `P(b|a) ∝ r(b) w(a,b)`. Rows whose weights vanish on the support of
/// `r` are rebuilt from the payoffs restricted to that support.
fn tilted_channel(prob: &DecisionProblem, w: &[f64], r: &[f64], tilt: Tilt) -> Channel {
    let n_actions = prob.n_actions();
    let mut rows = Vec::with_capacity(w.len());
    for a in 0..prob.n_states() {
        let wa = &w[a * n_actions..(a + 1) * n_actions];
        let mut row: Vec<f64> = r.iter().zip(wa).map(|(x, y)| x * y).collect();
        let mut total: f64 = row.iter().sum();
        if total <= 0.0 {
            row = support_tilt(prob.utility_row(a), r, tilt);
            total = row.iter().sum();
        }
        rows.extend(row.into_iter().map(|x| x / total));
    }
    Channel::from_flat_unchecked(prob.n_states(), n_actions, rows)
}

fn support_tilt(u: &[f64], r: &[f64], tilt: Tilt) -> Vec<f64> {
    let m = u
        .iter()
        .zip(r)
        .filter(|(_, &rb)| rb > 0.0)
        .map(|(&ub, _)| ub)
        .fold(f64::NEG_INFINITY, f64::max);
    u.iter()
        .zip(r)
        .map(|(&ub, &rb)| {
            if rb <= 0.0 {
                0.0
            } else {
                match tilt {
                    Tilt::Finite(beta) => rb * (beta * (ub - m)).exp(),
                    Tilt::Infinite => {
                        if ub >= m {
                            rb
                        } else {
                            0.0
                        }
                    }
                }
            }
        })
        .collect()
}

/// Precomputed endpoints of the upper frontier of one problem.
#[derive(Debug, Clone)]
pub struct ShannonFrontier<'a> {
    prob: &'a DecisionProblem,
    opts: ShannonOptions,
    independent: ValuePoint,
    full: ValuePoint,
}

impl<'a> ShannonFrontier<'a> {
    pub fn new(prob: &'a DecisionProblem, opts: ShannonOptions) -> Self {
        let independent = independent_point(prob);
        let full = alternate(prob, Tilt::Infinite, &opts);
        ShannonFrontier {
            prob,
            opts,
            independent,
            full,
        }
    }

    /// Smallest information at which complete information's value is reached.
    pub fn lambda_max(&self) -> f64 {
        self.full.information
    }

    pub fn value_at(&self, lambda: f64) -> Result<ValuePoint> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(VoiError::InvalidArgument(format!(
                "information bound must be finite and non-negative, got {lambda}"
            )));
        }
        let tol = self.opts.lambda_tol;
        if lambda >= self.lambda_max() - tol {
            return Ok(ValuePoint {
                lambda,
                ..self.full.clone()
            });
        }
        if lambda == 0.0 {
            return Ok(self.independent.clone());
        }
        let scale = self.prob.utility_scale();
        let beta_cap = 2f64.powi(60) / scale;

        let mut lo = self.independent.clone();
        let mut beta = 1.0 / scale;
        let mut hi = loop {
            let p = alternate(self.prob, Tilt::Finite(beta), &self.opts);
            if p.information >= lambda {
                break p;
            }
            lo = p;
            beta *= 2.0;
            if beta > beta_cap {
                return Ok(ValuePoint {
                    lambda,
                    ..self.full.clone()
                });
            }
        };

        loop {
            if (lo.information - lambda).abs() <= tol {
                return Ok(ValuePoint { lambda, ..lo });
            }
            if (hi.information - lambda).abs() <= tol {
                return Ok(ValuePoint { lambda, ..hi });
            }
            let mid = 0.5 * (lo.beta + hi.beta);
            if mid <= lo.beta || mid >= hi.beta || hi.beta - lo.beta <= 1e-15 * hi.beta {
                return Ok(self.mix_across_jump(lambda, &lo, &hi));
            }
            let p = alternate(self.prob, Tilt::Finite(mid), &self.opts);
            if p.information > lambda {
                hi = p;
            } else {
                lo = p;
            }
        }
    }

    /// `λ(β)` jumps over `lambda` between two (numerically) equal inverse
    /// temperatures. Both channels are optimal there, so their mixture is
    /// too; pick the mixture weight that meets the bound.
    fn mix_across_jump(&self, lambda: f64, lo: &ValuePoint, hi: &ValuePoint) -> ValuePoint {
        let prior = self.prob.prior();
        let eval = |theta: f64| {
            let ch = hi.channel.mix(theta, &lo.channel).expect("same shape");
            let m = output_marginal(prior, &ch).expect("same shape");
            let info = mutual_information_with_marginal(prior, &ch, m.probs());
            (ch, info)
        };
        let (mut a, mut b) = (0.0, 1.0);
        let (mut best_ch, mut best_info) = (lo.channel.clone(), lo.information);
        for _ in 0..200 {
            let t = 0.5 * (a + b);
            let (ch, info) = eval(t);
            if info <= lambda {
                a = t;
                best_ch = ch;
                best_info = info;
                if lambda - info <= self.opts.lambda_tol {
                    break;
                }
            } else {
                b = t;
            }
            if b - a <= f64::EPSILON {
                break;
            }
        }
        let value = joint_expected_utility(self.prob, &best_ch).expect("same shape");
        ValuePoint {
            lambda,
            information: best_info,
            value,
            beta: lo.beta,
            channel: best_ch,
            iterations: lo.iterations.max(hi.iterations),
            converged: lo.converged && hi.converged,
            plateau: true,
        }
    }
}

/// Upper frontier `sup { EU : I(A;B) ≤ λ }`.
pub fn upper_value(prob: &DecisionProblem, lambda: f64) -> Result<ValuePoint> {
    upper_value_with(prob, lambda, &ShannonOptions::default())
}

pub fn upper_value_with(
    prob: &DecisionProblem,
    lambda: f64,
    opts: &ShannonOptions,
) -> Result<ValuePoint> {
    ShannonFrontier::new(prob, *opts).value_at(lambda)
}

/// Lower frontier `inf { EU : I(A;B) ≤ λ }`, computed as the negated upper
/// frontier of the payoff-negated problem.
pub fn lower_value(prob: &DecisionProblem, lambda: f64) -> Result<ValuePoint> {
    lower_value_with(prob, lambda, &ShannonOptions::default())
}

pub fn lower_value_with(
    prob: &DecisionProblem,
    lambda: f64,
    opts: &ShannonOptions,
) -> Result<ValuePoint> {
    Ok(upper_value_with(&prob.negated(), lambda, opts)?.reflected())
}

pub fn trace_curve(prob: &DecisionProblem, branch: Branch, grid: &[f64]) -> Result<ValueCurve> {
    trace_curve_with(prob, branch, grid, &ShannonOptions::default())
}

pub fn trace_curve_with(
    prob: &DecisionProblem,
    branch: Branch,
    grid: &[f64],
    opts: &ShannonOptions,
) -> Result<ValueCurve> {
    validate_grid(grid)?;
    let negated;
    let target = match branch {
        Branch::Upper => prob,
        Branch::Lower => {
            negated = prob.negated();
            &negated
        }
    };
    let frontier = ShannonFrontier::new(target, *opts);
    let points = opts
        .execution
        .map(grid, |&lambda| frontier.value_at(lambda))
        .into_iter()
        .map(|p| {
            p.map(|p| match branch {
                Branch::Upper => p,
                Branch::Lower => p.reflected(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ValueCurve {
        branch,
        lambda_max: frontier.lambda_max(),
        points,
    })
}
