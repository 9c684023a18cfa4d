//! Bregman information distances on the probability simplex and the value
//! functions `sup { ⟨u, y⟩ : D_F(y, z) ≤ λ }` they induce.
//!
//! Two generators are supported. Relative negative entropy
//! `F(y) = Σ y_i (ln(y_i / r_i) - 1)` gives the KL divergence and a Gibbs
//! tilt as optimizer; the squared Euclidean norm `F(y) = ½‖y‖²` gives
//! `½‖y - z‖²` and a simplex projection as optimizer.

use serde::Serialize;

use crate::error::{Result, VoiError};
use crate::prob::{check_dims, Distribution};
use crate::shannon::Branch;

/// Largest bisection step count on β; the interval collapses far sooner.
const BISECT_STEPS: usize = 400;

/// Achieved divergence must land within this of the requested bound.
pub const DIVERGENCE_TOL: f64 = 1e-8;

/// Budgets this close below the saturation divergence count as reaching it;
/// absorbs rounding in the divergence of the limit point.
pub const SATURATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BregmanGenerator {
    NegativeEntropyRelative { reference: Distribution },
    SquaredEuclidean { dim: usize },
}

impl BregmanGenerator {
    pub fn negative_entropy(reference: Distribution) -> Result<Self> {
        check_interior(&reference)?;
        Ok(BregmanGenerator::NegativeEntropyRelative { reference })
    }

    pub fn squared_euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(VoiError::InvalidArgument("generator dimension must be positive".into()));
        }
        Ok(BregmanGenerator::SquaredEuclidean { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            BregmanGenerator::NegativeEntropyRelative { reference } => reference.dim(),
            BregmanGenerator::SquaredEuclidean { dim } => *dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BregmanGenerator::NegativeEntropyRelative { .. } => "negative_entropy",
            BregmanGenerator::SquaredEuclidean { .. } => "squared_euclidean",
        }
    }

    pub fn value(&self, y: &Distribution) -> Result<f64> {
        check_dims(self.dim(), y.dim())?;
        Ok(match self {
            BregmanGenerator::NegativeEntropyRelative { reference } => y
                .probs()
                .iter()
                .zip(reference.probs())
                .map(|(&p, &r)| if p > 0.0 { p * ((p / r).ln() - 1.0) } else { 0.0 })
                .sum(),
            BregmanGenerator::SquaredEuclidean { .. } => {
                0.5 * y.probs().iter().map(|p| p * p).sum::<f64>()
            }
        })
    }

    /// `∇F(z)`; undefined on the boundary of the simplex for the entropy kind.
    pub fn gradient(&self, z: &Distribution) -> Result<Vec<f64>> {
        check_dims(self.dim(), z.dim())?;
        match self {
            BregmanGenerator::NegativeEntropyRelative { reference } => {
                check_interior(z)?;
                Ok(z.probs()
                    .iter()
                    .zip(reference.probs())
                    .map(|(&p, &r)| (p / r).ln())
                    .collect())
            }
            BregmanGenerator::SquaredEuclidean { .. } => Ok(z.probs().to_vec()),
        }
    }

    /// Point of the simplex whose gradient is `x` up to a constant shift:
    /// the Gibbs tilt of the reference for the entropy kind, the Euclidean
    /// projection of `x` for the quadratic kind.
    pub fn dual_map(&self, x: &[f64]) -> Result<Distribution> {
        check_dims(self.dim(), x.len())?;
        match self {
            BregmanGenerator::NegativeEntropyRelative { reference } => {
                gibbs_solution(x, reference, 1.0)
            }
            BregmanGenerator::SquaredEuclidean { .. } => {
                Distribution::new(simplex_projection(x)?)
            }
        }
    }
}

fn check_interior(z: &Distribution) -> Result<()> {
    match z.probs().iter().position(|&p| p <= 0.0) {
        Some(i) => Err(VoiError::BoundaryReference(i)),
        None => Ok(()),
    }
}

/// `F(y) - F(z) - ⟨∇F(z), y - z⟩`.
pub fn bregman_divergence(gen: &BregmanGenerator, y: &Distribution, z: &Distribution) -> Result<f64> {
    check_dims(gen.dim(), y.dim())?;
    let grad = gen.gradient(z)?;
    if y.probs() == z.probs() {
        return Ok(0.0);
    }
    let linear: f64 = grad
        .iter()
        .zip(y.probs().iter().zip(z.probs()))
        .map(|(g, (a, b))| g * (a - b))
        .sum();
    Ok((gen.value(y)? - gen.value(z)? - linear).max(0.0))
}

/// `y_i ∝ r_i exp(β u_i)`. An infinite β keeps the reference on the
/// maximizers of `u`.
pub fn gibbs_solution(u: &[f64], reference: &Distribution, beta: f64) -> Result<Distribution> {
    check_dims(reference.dim(), u.len())?;
    check_interior(reference)?;
    check_utility(u)?;
    if beta.is_nan() || beta < 0.0 {
        return Err(VoiError::InvalidArgument(format!("β must be non-negative, got {beta}")));
    }
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = u
        .iter()
        .zip(reference.probs())
        .map(|(&ui, &r)| {
            if beta.is_infinite() {
                if ui == top { r } else { 0.0 }
            } else {
                r * (beta * (ui - top)).exp()
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    Distribution::new(weights.into_iter().map(|w| w / total).collect())
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn simplex_projection(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(VoiError::InvalidArgument("projection needs a finite, non-empty vector".into()));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    let mut y: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let total: f64 = y.iter().sum();
    y.iter_mut().for_each(|x| *x /= total);
    Ok(y)
}

fn check_utility(u: &[f64]) -> Result<()> {
    if u.is_empty() || u.iter().any(|x| !x.is_finite()) {
        return Err(VoiError::InvalidProblem("utility vector must be finite and non-empty".into()));
    }
    Ok(())
}

/// Payoffs over the simplex vertices, a divergence, its anchor and a budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceProblem {
    pub utility: Vec<f64>,
    pub generator: BregmanGenerator,
    pub reference: Distribution,
    pub lambda: f64,
}

impl ResourceProblem {
    pub fn new(
        utility: Vec<f64>,
        generator: BregmanGenerator,
        reference: Distribution,
        lambda: f64,
    ) -> Result<Self> {
        check_utility(&utility)?;
        check_dims(generator.dim(), utility.len())?;
        check_dims(generator.dim(), reference.dim())?;
        if matches!(generator, BregmanGenerator::NegativeEntropyRelative { .. }) {
            check_interior(&reference)?;
        }
        if lambda.is_nan() || lambda < 0.0 {
            return Err(VoiError::InvalidArgument(format!(
                "information bound must be non-negative, got {lambda}"
            )));
        }
        Ok(ResourceProblem {
            utility,
            generator,
            reference,
            lambda,
        })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        ResourceProblem::new(self.utility.clone(), self.generator.clone(), self.reference.clone(), lambda)
    }

    /// Optimizer of `⟨u, y⟩ - D(y, z) / β`, i.e. the candidate point at β.
    pub fn tilt(&self, beta: f64) -> Result<Distribution> {
        tilt(&self.generator, &self.utility, &self.reference, beta)
    }

    /// Limit of [`ResourceProblem::tilt`] as β grows: all mass on the
    /// maximizers of `u`.
    pub fn saturation_point(&self) -> Result<Distribution> {
        saturation(&self.generator, &self.utility, &self.reference)
    }
}

fn argmax_set(u: &[f64]) -> Vec<bool> {
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    u.iter().map(|&x| x == top).collect()
}

fn tilt(gen: &BregmanGenerator, u: &[f64], z: &Distribution, beta: f64) -> Result<Distribution> {
    match gen {
        BregmanGenerator::NegativeEntropyRelative { .. } => gibbs_solution(u, z, beta),
        BregmanGenerator::SquaredEuclidean { .. } => {
            if beta.is_infinite() {
                return saturation(gen, u, z);
            }
            // The projection ignores constant shifts; shifting by max u keeps
            // the argmax coordinates exact at large β.
            let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let shifted: Vec<f64> = z
                .probs()
                .iter()
                .zip(u)
                .map(|(&zi, &ui)| zi + beta * (ui - top))
                .collect();
            Distribution::new(simplex_projection(&shifted)?)
        }
    }
}

fn saturation(gen: &BregmanGenerator, u: &[f64], z: &Distribution) -> Result<Distribution> {
    let on = argmax_set(u);
    match gen {
        BregmanGenerator::NegativeEntropyRelative { .. } => gibbs_solution(u, z, f64::INFINITY),
        BregmanGenerator::SquaredEuclidean { .. } => {
            let count = on.iter().filter(|&&s| s).count() as f64;
            let inside: f64 = z.probs().iter().zip(&on).filter(|(_, &s)| s).map(|(p, _)| p).sum();
            let shift = (1.0 - inside) / count;
            let y = z
                .probs()
                .iter()
                .zip(&on)
                .map(|(&p, &s)| if s { p + shift } else { 0.0 })
                .collect();
            Distribution::new(y)
        }
    }
}

/// A solved resource problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourcePoint {
    pub lambda: f64,
    /// Divergence of the returned point from the anchor.
    pub divergence: f64,
    pub value: f64,
    pub beta: f64,
    pub point: Distribution,
    /// The budget reaches past the best vertex set; the point is the limit.
    pub saturated: bool,
}

fn inner(u: &[f64], y: &Distribution) -> f64 {
    u.iter().zip(y.probs()).map(|(a, b)| a * b).sum()
}

/// Extremal `⟨u, y⟩` over the simplex subject to `D_F(y, z) ≤ λ`. The lower
/// branch is the negated upper branch of `-u`.
pub fn constrained_value(rp: &ResourceProblem, branch: Branch) -> Result<ResourcePoint> {
    match branch {
        Branch::Upper => upper(rp),
        Branch::Lower => {
            let flipped = ResourceProblem {
                utility: rp.utility.iter().map(|u| -u).collect(),
                ..rp.clone()
            };
            let mut point = upper(&flipped)?;
            point.value = -point.value;
            Ok(point)
        }
    }
}

fn upper(rp: &ResourceProblem) -> Result<ResourcePoint> {
    let z = &rp.reference;
    let gen = &rp.generator;
    let lambda = rp.lambda;
    let divergence = |y: &Distribution| bregman_divergence(gen, y, z);
    let make = |beta: f64, y: Distribution, saturated: bool| -> Result<ResourcePoint> {
        Ok(ResourcePoint {
            lambda,
            divergence: divergence(&y)?,
            value: inner(&rp.utility, &y),
            beta,
            point: y,
            saturated,
        })
    };

    let sat = rp.saturation_point()?;
    if divergence(&sat)? <= lambda + SATURATION_SLACK {
        return make(f64::INFINITY, sat, true);
    }
    if lambda == 0.0 {
        return make(0.0, z.clone(), false);
    }

    let top = rp.utility.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bottom = rp.utility.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = top - bottom;
    let mut lo = 0.0;
    let mut hi = 1.0 / scale;
    let cap = 2f64.powi(60) / scale;
    loop {
        let d = divergence(&rp.tilt(hi)?)?;
        if d > lambda {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            // Numerically indistinguishable from the limit.
            return make(f64::INFINITY, sat, true);
        }
    }
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if divergence(&rp.tilt(mid)?)? <= lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let point = make(lo, rp.tilt(lo)?, false)?;
    if lambda - point.divergence > DIVERGENCE_TOL {
        // Only reachable if the divergence jumps in β, which neither
        // generator does; report instead of returning a slack point.
        return Err(VoiError::NoConvergence(format!(
            "divergence bisection stalled at {} for bound {lambda}",
            point.divergence
        )));
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::kl_divergence;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, LN_2};

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    fn entropy_gen(n: usize) -> BregmanGenerator {
        BregmanGenerator::negative_entropy(Distribution::uniform(n).unwrap()).unwrap()
    }

    #[test]
    fn divergence_examples() {
        let half = d(&[0.5, 0.5]);
        let vertex = d(&[1.0, 0.0]);
        let ent = entropy_gen(2);
        let quad = BregmanGenerator::squared_euclidean(2).unwrap();
        assert_eq!(bregman_divergence(&ent, &half, &half).unwrap(), 0.0);
        assert_abs_diff_eq!(bregman_divergence(&ent, &vertex, &half).unwrap(), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            bregman_divergence(&ent, &vertex, &half).unwrap(),
            kl_divergence(&vertex, &half).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(bregman_divergence(&quad, &vertex, &half).unwrap(), 0.25, epsilon = 1e-15);
        assert!(matches!(
            bregman_divergence(&ent, &half, &vertex),
            Err(VoiError::BoundaryReference(1))
        ));
    }

    #[test]
    fn divergence_ignores_generator_reference() {
        let y = d(&[0.2, 0.3, 0.5]);
        let z = d(&[0.4, 0.4, 0.2]);
        let a = bregman_divergence(&entropy_gen(3), &y, &z).unwrap();
        let skewed = BregmanGenerator::negative_entropy(d(&[0.7, 0.2, 0.1])).unwrap();
        let b = bregman_divergence(&skewed, &y, &z).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }

    #[test]
    fn gibbs_examples() {
        let half = d(&[0.5, 0.5]);
        assert_eq!(gibbs_solution(&[1.0, 0.0], &half, 0.0).unwrap(), half);
        let y = gibbs_solution(&[1.0, 0.0], &half, 1.0).unwrap();
        assert_abs_diff_eq!(y.get(0), E / (E + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(y.get(1), 1.0 / (E + 1.0), epsilon = 1e-15);
        let y = gibbs_solution(&[1.0, 0.0, 0.5], &d(&[0.2, 0.3, 0.5]), 1e4).unwrap();
        assert_eq!(y.probs(), &[1.0, 0.0, 0.0]);
        let y = gibbs_solution(&[1.0, 0.0, 1.0], &d(&[0.2, 0.3, 0.5]), f64::INFINITY).unwrap();
        assert_abs_diff_eq!(y.get(0), 0.2 / 0.7, epsilon = 1e-15);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(simplex_projection(&[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(simplex_projection(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let y = simplex_projection(&[0.6, 0.6, -1.0]).unwrap();
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-15);
        assert_eq!(y[2], 0.0);
        let y = simplex_projection(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(y.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn constrained_value_endpoints() {
        for gen in [entropy_gen(3), BregmanGenerator::squared_euclidean(3).unwrap()] {
            let z = d(&[0.2, 0.3, 0.5]);
            let u = vec![1.0, -2.0, 0.5];
            let rp = ResourceProblem::new(u.clone(), gen.clone(), z.clone(), 0.0).unwrap();
            let at_zero = constrained_value(&rp, Branch::Upper).unwrap();
            assert_eq!(at_zero.value, inner(&u, &z));
            let far = constrained_value(&rp.with_lambda(50.0).unwrap(), Branch::Upper).unwrap();
            assert!(far.saturated);
            assert_eq!(far.value, 1.0);
            let far = constrained_value(&rp.with_lambda(50.0).unwrap(), Branch::Lower).unwrap();
            assert_eq!(far.value, -2.0);
            let flat = ResourceProblem::new(vec![3.0; 3], gen, z, 0.4).unwrap();
            assert_abs_diff_eq!(constrained_value(&flat, Branch::Upper).unwrap().value, 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn constraint_is_active_below_saturation() {
        for gen in [entropy_gen(3), BregmanGenerator::squared_euclidean(3).unwrap()] {
            let rp = ResourceProblem::new(vec![1.0, -2.0, 0.5], gen, d(&[0.2, 0.3, 0.5]), 0.0).unwrap();
            let mut last = f64::NEG_INFINITY;
            for lambda in [0.01, 0.05, 0.1, 0.2] {
                let p = constrained_value(&rp.with_lambda(lambda).unwrap(), Branch::Upper).unwrap();
                assert!(!p.saturated);
                assert!((p.divergence - lambda).abs() <= DIVERGENCE_TOL, "{p:?}");
                assert!(p.value > last);
                last = p.value;
            }
        }
    }

    #[test]
    fn matched_beta_recovers_gibbs_point() {
        let u = [0.3, 1.0, -0.4];
        let z = d(&[0.5, 0.25, 0.25]);
        for beta in [0.1, 0.7, 2.0, 6.0] {
            let y = gibbs_solution(&u, &z, beta).unwrap();
            let lambda = kl_divergence(&y, &z).unwrap();
            let rp = ResourceProblem::new(u.to_vec(), entropy_gen(3), z.clone(), lambda).unwrap();
            let p = constrained_value(&rp, Branch::Upper).unwrap();
            assert_abs_diff_eq!(p.beta, beta, epsilon = 1e-6 * beta);
            for (a, b) in p.point.probs().iter().zip(y.probs()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_problems() {
        let z = d(&[0.5, 0.5]);
        assert!(ResourceProblem::new(vec![1.0], entropy_gen(2), z.clone(), 0.1).is_err());
        assert!(ResourceProblem::new(vec![1.0, 0.0], entropy_gen(2), z.clone(), -0.1).is_err());
        assert!(ResourceProblem::new(vec![1.0, 0.0], entropy_gen(2), d(&[1.0, 0.0]), 0.1).is_err());
        assert!(BregmanGenerator::negative_entropy(d(&[1.0, 0.0])).is_err());
        assert!(BregmanGenerator::squared_euclidean(0).is_err());
    }
}
