mod common;

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voi_core::bregman::{constrained_value, gibbs_solution, BregmanGenerator, ResourceProblem};
use voi_core::deterministic::{boltzmann_value, hartley_value};
use voi_core::oracle::{
    exhaustive_deterministic, grid_max_eu, simplex_grid_value, table_boltzmann_max, table_hartley_max,
    FEASIBILITY_SLACK, SIMPLEX_GRID_RESOLUTION,
};
use voi_core::shannon::{ba_fixed_beta, upper_value};
use voi_core::{kl_divergence, output_marginal, Branch, DecisionProblem, Distribution};

use common::{battery, random_distribution, random_problem};

fn lambda_grid() -> Vec<f64> {
    (0..=30).map(|i| i as f64 * 0.04).chain([LN_2, 3f64.ln(), 1e-13]).collect()
}

fn small_problems() -> Vec<DecisionProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut all: Vec<DecisionProblem> = battery().into_iter().map(|(_, p)| p).collect();
    for _ in 0..20 {
        let (n, m) = (rng.random_range(1..=4), rng.random_range(1..=3));
        all.push(random_problem(&mut rng, n, m));
    }
    all
}

#[test]
fn deterministic_solvers_match_exhaustive_tables_exactly() {
    for prob in small_problems() {
        let table = exhaustive_deterministic(&prob).unwrap();
        assert_eq!(table.len(), prob.n_actions().pow(prob.n_states() as u32));
        for l in lambda_grid() {
            let b = boltzmann_value(&prob, l).unwrap();
            assert_eq!(b.point.value, table_boltzmann_max(&table, l), "λ={l}");
            let winner = table
                .iter()
                .filter(|r| r.entropy <= l + FEASIBILITY_SLACK && r.eu == b.point.value)
                .map(|r| r.assignment.clone())
                .min()
                .unwrap();
            assert_eq!(b.assignment.assignment(), winner.as_slice());
            // Subset enumeration against the function table.
            let h = hartley_value(&prob, l).unwrap();
            assert_eq!(h.point.value, table_hartley_max(&table, l), "λ={l}");
        }
    }
}

#[test]
fn deterministic_values_are_monotone_steps() {
    let fine: Vec<f64> = (0..=400).map(|i| i as f64 * 0.005).collect();
    for prob in small_problems() {
        let b: Vec<f64> = fine.iter().map(|&l| boltzmann_value(&prob, l).unwrap().point.value).collect();
        let h: Vec<f64> = fine.iter().map(|&l| hartley_value(&prob, l).unwrap().point.value).collect();
        assert!(b.windows(2).all(|w| w[1] >= w[0]));
        assert!(h.windows(2).all(|w| w[1] >= w[0]));
        for (i, w) in h.windows(2).enumerate() {
            if w[1] != w[0] {
                // A step between fine[i] and fine[i+1] must straddle some ln k.
                let k = fine[i + 1].exp().floor();
                assert!(k.ln() > fine[i] && k.ln() <= fine[i + 1] + 1e-12);
            }
        }
    }
}

#[test]
fn shannon_dominates_deterministic_on_random_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..25 {
        let (n, m) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let prob = random_problem(&mut rng, n, m);
        for l in lambda_grid() {
            let s = upper_value(&prob, l).unwrap().value;
            let b = boltzmann_value(&prob, l).unwrap().point.value;
            let h = hartley_value(&prob, l).unwrap().point.value;
            assert!(s >= b - 1e-9 && b >= h - 1e-9, "λ={l}: {s} {b} {h}");
        }
    }
}

#[test]
fn channel_grid_refines_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut problems: Vec<DecisionProblem> = battery()
        .into_iter()
        .map(|(_, p)| p)
        .filter(|p| p.n_states() == 2 && p.n_actions() == 2)
        .collect();
    problems.extend((0..4).map(|_| random_problem(&mut rng, 2, 2)));
    for prob in problems {
        for l in [0.05, 0.2, 0.4] {
            let solver = upper_value(&prob, l).unwrap().value;
            let coarse = (grid_max_eu(&prob, l, 250).unwrap() - solver).abs();
            let fine = (grid_max_eu(&prob, l, 500).unwrap() - solver).abs();
            assert!(fine <= coarse + 1e-12, "λ={l}: {coarse} -> {fine}");
            assert!(fine <= 2e-2 * prob.utility_scale().max(1.0));
        }
    }
}

#[test]
fn simplex_grid_matches_constrained_value() {
    let ent2 = BregmanGenerator::negative_entropy(Distribution::uniform(2).unwrap()).unwrap();
    let rp = ResourceProblem::new(vec![1.0, 0.0], ent2, Distribution::uniform(2).unwrap(), 0.1).unwrap();
    let solver = constrained_value(&rp, Branch::Upper).unwrap().value;
    // Grid error is bounded by the payoff range over the resolution.
    let coarse = (simplex_grid_value(&rp, Branch::Upper, 200).unwrap() - solver).abs();
    assert!(coarse <= 1.0 / 200.0);
    let fine = (simplex_grid_value(&rp, Branch::Upper, SIMPLEX_GRID_RESOLUTION).unwrap() - solver).abs();
    assert!(fine <= 2e-3 && fine <= coarse);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..24 {
        let n = 2 + case % 2;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let z = random_distribution(&mut rng, n);
        let gen = if case % 4 < 2 {
            BregmanGenerator::negative_entropy(Distribution::uniform(n).unwrap()).unwrap()
        } else {
            BregmanGenerator::squared_euclidean(n).unwrap()
        };
        for lambda in [0.0, 0.02, 0.1, 0.3, 2.0] {
            let rp = ResourceProblem::new(u.clone(), gen.clone(), z.clone(), lambda).unwrap();
            for branch in [Branch::Upper, Branch::Lower] {
                let solver = constrained_value(&rp, branch).unwrap();
                let oracle = simplex_grid_value(&rp, branch, SIMPLEX_GRID_RESOLUTION).unwrap();
                assert!((solver.value - oracle).abs() <= 2e-3, "case {case} λ={lambda}: {solver:?} vs {oracle}");
                // The grid never beats the true optimum by more than the slack lets it.
                let sign = if branch == Branch::Upper { 1.0 } else { -1.0 };
                assert!(sign * (oracle - solver.value) <= 1e-6);
            }
        }
    }
}

#[test]
fn entropy_kind_saturates_at_best_vertex() {
    let z = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
    let u = vec![2.0, -1.0, 0.5];
    let gen = BregmanGenerator::negative_entropy(Distribution::uniform(3).unwrap()).unwrap();
    let bound = -(0.2f64).ln();
    let below = ResourceProblem::new(u.clone(), gen.clone(), z.clone(), bound - 1e-3).unwrap();
    let at = ResourceProblem::new(u.clone(), gen, z, bound).unwrap();
    let p_below = constrained_value(&below, Branch::Upper).unwrap();
    let p_at = constrained_value(&at, Branch::Upper).unwrap();
    assert!(!p_below.saturated && p_below.value < 2.0);
    assert!(p_at.saturated);
    assert!((p_at.value - 2.0).abs() < 1e-12);
    assert!((simplex_grid_value(&at, Branch::Upper, 300).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn shannon_rows_are_gibbs_tilts_of_their_marginal() {
    let probs = [
        DecisionProblem::identity_payoff(2).unwrap(),
        DecisionProblem::identity_payoff(3).unwrap(),
        common::problem(&[0.3, 0.7], &[&[2.0, 0.0, 1.2], &[0.0, 1.5, 1.0]]),
    ];
    for prob in probs {
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let point = ba_fixed_beta(&prob, beta).unwrap();
            let r = output_marginal(prob.prior(), &point.channel).unwrap();
            if r.probs().iter().any(|&x| x < 1e-9) {
                continue;
            }
            let gen = BregmanGenerator::negative_entropy(r.clone()).unwrap();
            for a in 0..prob.n_states() {
                let u = prob.utility_row(a).to_vec();
                let tilt = gibbs_solution(&u, &r, beta).unwrap();
                let row = point.channel.row(a);
                for (x, y) in tilt.probs().iter().zip(row) {
                    assert!((x - y).abs() <= 1e-10, "β={beta} row {a}: {x} vs {y}");
                }
                let lambda = kl_divergence(&tilt, &r).unwrap();
                let rp = ResourceProblem::new(u, gen.clone(), r.clone(), lambda).unwrap();
                let solved = constrained_value(&rp, Branch::Upper).unwrap();
                for (x, y) in solved.point.probs().iter().zip(tilt.probs()) {
                    assert!((x - y).abs() <= 1e-8);
                }
            }
        }
    }
}
