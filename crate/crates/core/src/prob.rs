//! Finite probability primitives: distributions, channels, entropy, KL
//! divergence and mutual information. All quantities are in nats.

use serde::Serialize;

use crate::error::{Result, VoiError};

/// Entries below this are treated as exact zeros inside logarithm terms.
pub const LOG_ZERO: f64 = 1e-15;

/// Largest deviation of a raw sum from 1 that construction will normalize away.
pub const NORMALIZE_SLACK: f64 = 1e-9;

/// A probability vector over a finite set of labeled outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(VoiError::InvalidDistribution("empty probability vector".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(VoiError::InvalidDistribution(format!("entry {i} is not finite")));
            }
            if p < 0.0 {
                return Err(VoiError::InvalidDistribution(format!("entry {i} is negative ({p})")));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZE_SLACK {
            return Err(VoiError::InvalidDistribution(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        let probs = if sum == 1.0 {
            probs
        } else {
            probs.into_iter().map(|p| p / sum).collect()
        };
        Ok(Distribution { probs, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(VoiError::DimensionMismatch {
                expected: self.probs.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(VoiError::InvalidDistribution("empty probability vector".into()));
        }
        Ok(Distribution {
            probs: vec![1.0 / n as f64; n],
            labels: None,
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(VoiError::InvalidArgument(format!(
                "point mass index {at} out of range for dimension {n}"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Distribution { probs, labels: None })
    }

    /// `alpha * p + (1 - alpha) * q`.
    pub fn mixture(alpha: f64, p: &Distribution, q: &Distribution) -> Result<Self> {
        check_dims(p.dim(), q.dim())?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(VoiError::InvalidArgument(format!("mixture weight {alpha} outside [0,1]")));
        }
        Distribution::new(
            p.probs
                .iter()
                .zip(&q.probs)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        )
    }

    /// Product measure `p ⊗ q`, indexed `i * q.dim() + j`.
    pub fn product(p: &Distribution, q: &Distribution) -> Distribution {
        let probs = p
            .probs
            .iter()
            .flat_map(|&a| q.probs.iter().map(move |&b| a * b))
            .collect();
        Distribution { probs, labels: None }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// A conditional distribution `P(b|a)`, one row per state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    n_states: usize,
    n_actions: usize,
    rows: Vec<f64>,
}

impl Channel {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = rows.len();
        if n_states == 0 {
            return Err(VoiError::InvalidChannel("no rows".into()));
        }
        let n_actions = rows[0].len();
        let mut flat = Vec::with_capacity(n_states * n_actions);
        for (a, row) in rows.into_iter().enumerate() {
            if row.len() != n_actions {
                return Err(VoiError::InvalidChannel(format!(
                    "row {a} has {} entries, expected {n_actions}",
                    row.len()
                )));
            }
            let row = Distribution::new(row)
                .map_err(|e| VoiError::InvalidChannel(format!("row {a}: {e}")))?;
            flat.extend_from_slice(row.probs());
        }
        Ok(Channel {
            n_states,
            n_actions,
            rows: flat,
        })
    }

    /// Every row equal to `row`.
    pub fn constant(n_states: usize, row: &Distribution) -> Self {
        Channel {
            n_states,
            n_actions: row.dim(),
            rows: row.probs().repeat(n_states),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        Channel {
            n_states: n,
            n_actions: n,
            rows,
        }
    }

    /// Deterministic channel whose row `a` is a point mass at `assignment[a]`.
    pub fn deterministic(assignment: &[usize], n_actions: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(VoiError::InvalidChannel("no rows".into()));
        }
        let mut rows = vec![0.0; assignment.len() * n_actions];
        for (a, &b) in assignment.iter().enumerate() {
            if b >= n_actions {
                return Err(VoiError::InvalidChannel(format!(
                    "state {a} maps to action {b}, only {n_actions} actions"
                )));
            }
            rows[a * n_actions + b] = 1.0;
        }
        Ok(Channel {
            n_states: assignment.len(),
            n_actions,
            rows,
        })
    }

    /// Builds a channel from rows already known to be normalized.
    pub(crate) fn from_flat_unchecked(n_states: usize, n_actions: usize, rows: Vec<f64>) -> Self {
        debug_assert_eq!(rows.len(), n_states * n_actions);
        Channel {
            n_states,
            n_actions,
            rows,
        }
    }

    /// Row-wise `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, alpha: f64, other: &Channel) -> Result<Channel> {
        check_dims(self.n_states, other.n_states)?;
        check_dims(self.n_actions, other.n_actions)?;
        Ok(Channel {
            n_states: self.n_states,
            n_actions: self.n_actions,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
                .collect(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.rows[a * self.n_actions..(a + 1) * self.n_actions]
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.rows[a * self.n_actions + b]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.n_actions)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(VoiError::DimensionMismatch { expected, found })
    }
}

/// `-p ln p` with `0 ln 0 = 0`.
#[inline]
pub(crate) fn neg_plogp(p: f64) -> f64 {
    if p < LOG_ZERO {
        0.0
    } else {
        -p * p.ln()
    }
}

/// Shannon entropy in nats.
pub fn entropy(p: &Distribution) -> f64 {
    p.probs.iter().map(|&x| neg_plogp(x)).sum::<f64>().max(0.0)
}

/// Kullback-Leibler divergence `D(p || q)`; `+inf` when `p` is not
/// absolutely continuous with respect to `q`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_dims(p.dim(), q.dim())?;
    let mut sum = 0.0;
    for (&pi, &qi) in p.probs.iter().zip(&q.probs) {
        if pi < LOG_ZERO {
            continue;
        }
        if qi < LOG_ZERO {
            return Ok(f64::INFINITY);
        }
        sum += pi * (pi / qi).ln();
    }
    Ok(sum.max(0.0))
}

/// `P(b) = Σ_a Q(a) P(b|a)`.
pub fn output_marginal(prior: &Distribution, ch: &Channel) -> Result<Distribution> {
    check_dims(ch.n_states(), prior.dim())?;
    let mut out = vec![0.0; ch.n_actions()];
    for (q, row) in prior.probs.iter().zip(ch.rows()) {
        for (o, p) in out.iter_mut().zip(row) {
            *o += q * p;
        }
    }
    Distribution::new(out)
}

/// Joint distribution `Q(a) P(b|a)`, indexed `a * n_actions + b`.
pub fn joint(prior: &Distribution, ch: &Channel) -> Result<Distribution> {
    check_dims(ch.n_states(), prior.dim())?;
    let probs = prior
        .probs
        .iter()
        .zip(ch.rows())
        .flat_map(|(&q, row)| row.iter().map(move |&p| q * p))
        .collect();
    Ok(Distribution { probs, labels: None })
}

/// Shannon mutual information between the state and the channel output.
pub fn mutual_information(prior: &Distribution, ch: &Channel) -> Result<f64> {
    let marginal = output_marginal(prior, ch)?;
    Ok(mutual_information_with_marginal(prior, ch, marginal.probs()))
}

pub(crate) fn mutual_information_with_marginal(
    prior: &Distribution,
    ch: &Channel,
    marginal: &[f64],
) -> f64 {
    let mut sum = 0.0;
    for (&q, row) in prior.probs.iter().zip(ch.rows()) {
        if q < LOG_ZERO {
            continue;
        }
        for (&p, &m) in row.iter().zip(marginal) {
            if p < LOG_ZERO {
                continue;
            }
            sum += q * p * (p / m).ln();
        }
    }
    sum.max(0.0)
}

/// Converts nats to bits for display.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
