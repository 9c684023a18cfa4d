//! The gain/loss value curve, curvature certification, and expected-utility
//! level sets on the 2-simplex.

use serde::Serialize;

use crate::decision::DecisionProblem;
use crate::error::{Result, VoiError};
use crate::shannon::{
    lower_value_with, trace_curve_with, upper_value_with, Branch, ShannonOptions, ValueCurve, ValuePoint,
};

/// Slack allowed in monotonicity and midpoint-chord tests.
pub const CURVATURE_TOL: f64 = 1e-7;

/// A frontier point placed on the signed information axis: gains at `+λ`,
/// losses at `-λ`. `point.lambda` keeps the true, non-negative bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedPoint {
    pub key: f64,
    pub point: ValuePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SCurve {
    pub gains: Vec<SignedPoint>,
    pub losses: Vec<SignedPoint>,
    /// Upper frontier at zero information.
    pub origin_upper: f64,
    /// Lower frontier at zero information. Differs from `origin_upper`
    /// unless the best and worst constant actions tie.
    pub origin_lower: f64,
    pub lambda_max: f64,
}

impl SCurve {
    /// `(key, value)` pairs from the most negative key to the most positive.
    pub fn signed_pairs(&self) -> Vec<(f64, f64)> {
        self.losses
            .iter()
            .rev()
            .chain(&self.gains)
            .map(|p| (p.key, p.point.value))
            .collect()
    }

    pub fn gains_pairs(&self) -> Vec<(f64, f64)> {
        self.gains.iter().map(|p| (p.point.lambda, p.point.value)).collect()
    }

    pub fn losses_pairs(&self) -> Vec<(f64, f64)> {
        self.losses.iter().map(|p| (p.point.lambda, p.point.value)).collect()
    }

    /// Curvature reports for the gains and losses branches.
    pub fn curvature_reports(&self) -> Result<(CurvatureReport, CurvatureReport)> {
        Ok((
            curvature_report(&self.gains_pairs(), Branch::Upper)?,
            curvature_report(&self.losses_pairs(), Branch::Lower)?,
        ))
    }
}

pub fn assemble_s_curve(prob: &DecisionProblem, grid: &[f64]) -> Result<SCurve> {
    assemble_s_curve_with(prob, grid, &ShannonOptions::default())
}

pub fn assemble_s_curve_with(
    prob: &DecisionProblem,
    grid: &[f64],
    opts: &ShannonOptions,
) -> Result<SCurve> {
    if grid.is_empty() {
        return Err(VoiError::TooFewPoints { needed: 2, found: 0 });
    }
    let upper = trace_curve_with(prob, Branch::Upper, grid, opts)?;
    let lower = trace_curve_with(prob, Branch::Lower, grid, opts)?;
    let sign = |curve: ValueCurve, s: f64| -> Vec<SignedPoint> {
        curve
            .points
            .into_iter()
            .map(|point| SignedPoint {
                key: s * point.lambda,
                point,
            })
            .collect()
    };
    Ok(SCurve {
        origin_upper: upper_value_with(prob, 0.0, opts)?.value,
        origin_lower: lower_value_with(prob, 0.0, opts)?.value,
        lambda_max: upper.lambda_max,
        gains: sign(upper, 1.0),
        losses: sign(lower, -1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub branch: Branch,
    pub monotone_ok: bool,
    pub curvature_ok: bool,
    /// Worst signed slack over all tests; positive means the shape is
    /// violated by that much.
    pub max_violation: f64,
}

/// Checks that `(λ, value)` pairs, in increasing `λ`, are non-decreasing
/// and concave (upper) or non-increasing and convex (lower).
pub fn curvature_report(points: &[(f64, f64)], branch: Branch) -> Result<CurvatureReport> {
    if points.len() < 3 {
        return Err(VoiError::TooFewPoints {
            needed: 3,
            found: points.len(),
        });
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(VoiError::InvalidArgument("curve λ values must be strictly increasing".into()));
    }
    // Mirror the lower branch so both are tested as increasing and concave.
    let s = match branch {
        Branch::Upper => 1.0,
        Branch::Lower => -1.0,
    };
    let monotone = points
        .windows(2)
        .map(|w| s * (w[0].1 - w[1].1))
        .fold(f64::NEG_INFINITY, f64::max);
    let chord = points
        .windows(3)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (x2, y2) = w[2];
            let on_chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
            s * (on_chord - y1)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CurvatureReport {
        branch,
        monotone_ok: monotone <= CURVATURE_TOL,
        curvature_ok: chord <= CURVATURE_TOL,
        max_violation: monotone.max(chord),
    })
}

/// Whether values strictly improve (rise on the upper branch, fall on the
/// lower) between consecutive points whose `λ` lies below `clamp`.
pub fn strictly_monotone_below(points: &[(f64, f64)], branch: Branch, clamp: f64) -> bool {
    let s = match branch {
        Branch::Upper => 1.0,
        Branch::Lower => -1.0,
    };
    points
        .windows(2)
        .filter(|w| w[1].0 < clamp)
        .all(|w| s * (w[1].1 - w[0].1) > 0.0)
}

/// A segment on the 2-simplex in barycentric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: [f64; 3],
    pub end: [f64; 3],
}

impl Segment {
    /// Unit direction with its first clearly non-zero coordinate positive;
    /// `None` for a single-point segment.
    pub fn direction(&self) -> Option<[f64; 3]> {
        let d = [0, 1, 2].map(|i| self.end[i] - self.start[i]);
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return None;
        }
        let lead = d.iter().copied().find(|x| x.abs() > 1e-14 * norm).unwrap_or(1.0);
        let s = lead.signum() / norm;
        Some(d.map(|x| x * s))
    }
}

/// Level sets `{p : Σ p_i w_i = v}` on the 2-simplex, where `w` is `u`
/// passed through `transform` when given. Each target gives `None` when it
/// lies outside the payoff range.
pub fn simplex_level_sets(
    u: [f64; 3],
    values: &[f64],
    transform: Option<&dyn Fn(f64) -> f64>,
) -> Result<Vec<Option<Segment>>> {
    let w = match transform {
        Some(f) => u.map(f),
        None => u,
    };
    if w.iter().any(|x| !x.is_finite()) {
        return Err(VoiError::InvalidArgument("payoffs must be finite".into()));
    }
    if w[0] == w[1] && w[1] == w[2] {
        return Err(VoiError::InvalidProblem("all payoffs are equal; level sets are degenerate".into()));
    }
    let vertex = |i: usize| {
        let mut p = [0.0; 3];
        p[i] = 1.0;
        p
    };
    Ok(values
        .iter()
        .map(|&v| {
            let mut hits: Vec<[f64; 3]> = Vec::new();
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                if w[i] == w[j] {
                    if w[i] == v {
                        hits.push(vertex(i));
                        hits.push(vertex(j));
                    }
                    continue;
                }
                // p = t e_i + (1 - t) e_j
                let t = (v - w[j]) / (w[i] - w[j]);
                if (0.0..=1.0).contains(&t) {
                    let mut p = [0.0; 3];
                    p[i] = t;
                    p[j] = 1.0 - t;
                    hits.push(p);
                }
            }
            hits.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
            let start = *hits.first()?;
            let end = *hits.last()?;
            Some(Segment { start, end })
        })
        .collect())
}

/// Largest coordinate gap between unit directions of the non-degenerate
/// segments; zero when all are parallel.
pub fn max_direction_deviation(segments: &[Option<Segment>]) -> f64 {
    let dirs: Vec<[f64; 3]> = segments.iter().flatten().filter_map(Segment::direction).collect();
    let Some(first) = dirs.first() else {
        return 0.0;
    };
    dirs.iter()
        .flat_map(|d| (0..3).map(move |i| (d[i] - first[i]).abs()))
        .fold(0.0, f64::max)
}
