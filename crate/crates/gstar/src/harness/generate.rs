//! Reproducible synthetic instance generators: the two experiment
//! families (fourth-power regression and logistic classification), the
//! lower-bound adversary, sampled stochastic families, and drifting
//! quadratics for the dynamic-regret audits.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::hindsight::{solve_hindsight, ComparatorPath};
use crate::loss::LossFn;
use crate::rng::run_rng;
use crate::set::ConstraintSet;
use crate::stochastic::StochasticProblem;
use crate::vector::Vector;

/// Fourth-power regression: a_t and the latent point drawn from
/// N(0, I/10), targets b_t = <a_t, xbar> + sigma eps_t. Returns the
/// losses and the latent point for diagnostics.
pub fn generate_lp_instance(
    t: usize,
    dim: usize,
    sigma: f64,
    seed: u64,
) -> (Vec<LossFn>, Vector) {
    let mut rng = run_rng(seed);
    let scale = (0.1f64).sqrt();
    let x_bar = Vector::new(
        (0..dim)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
    .expect("finite latent point");
    let losses = (0..t)
        .map(|_| {
            let a = Vector::new(
                (0..dim)
                    .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
            .expect("finite data vector");
            let b = a.dot(&x_bar) + sigma * rng.sample::<f64, _>(StandardNormal);
            LossFn::lp_regression(a, b, 4.0).expect("valid generated loss")
        })
        .collect();
    (losses, x_bar)
}

/// Logistic classification: a_t uniform on [0, 1]^n and sign labels
/// with bias delta, matching the classification losses
/// log(1 + exp(y <a, x>)), y = +1 with probability delta.
pub fn generate_ce_instance(t: usize, dim: usize, delta: f64, seed: u64) -> Vec<LossFn> {
    let mut rng = run_rng(seed);
    (0..t)
        .map(|_| {
            let a = Vector::new((0..dim).map(|_| rng.gen::<f64>()).collect())
                .expect("finite data vector");
            // log(1 + exp(y u)) equals the cross-entropy loss with the
            // flipped label -y.
            let label = if rng.gen::<f64>() < delta { -1.0 } else { 1.0 };
            LossFn::cross_entropy(a, label).expect("valid label")
        })
        .collect()
}

/// A pool of Gaussian data vectors plus a feasible minimizer for the
/// sampled stochastic families.
pub fn stochastic_pool(dim: usize, seed: u64, set: &ConstraintSet) -> (Vec<Vector>, Vector) {
    let mut rng = run_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let pool = (0..8)
        .map(|_| {
            Vector::new(
                (0..dim)
                    .map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
            .expect("finite data vector")
        })
        .collect();
    // A point safely inside the set.
    let raw = Vector::new(
        (0..dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
    .expect("finite point");
    let center = set.center();
    let radius_like = set.diameter() / 2.0;
    let x_star = center.add_scaled(0.4 * radius_like / raw.norm().max(1e-12), &raw);
    (pool, set.project(&x_star))
}

/// Materializes `t` i.i.d. draws from a stochastic problem as a loss
/// sequence for the online harness.
pub fn sample_losses(problem: &StochasticProblem, t: usize, seed: u64) -> Vec<LossFn> {
    let mut rng = run_rng(seed);
    (0..t).map(|_| problem.sample(&mut rng)).collect()
}

/// Isotropic quadratics with piecewise-drifting centers: `segments`
/// blocks of rounds whose loss centers jitter around a per-segment
/// anchor inside the set. The natural comparator is piecewise constant.
pub fn generate_drifting_quadratics(
    t: usize,
    dim: usize,
    segments: usize,
    jitter: f64,
    seed: u64,
    set: &ConstraintSet,
) -> Vec<LossFn> {
    assert!(segments >= 1 && t >= segments);
    let mut rng = run_rng(seed);
    let radius_like = set.diameter() / 2.0;
    let center = set.center();
    let anchors: Vec<Vector> = (0..segments)
        .map(|_| {
            let raw = Vector::new(
                (0..dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
            .expect("finite anchor");
            let norm = raw.norm().max(1e-12);
            center.add_scaled(0.6 * radius_like / norm, &raw)
        })
        .collect();
    (0..t)
        .map(|round| {
            let seg = (round * segments / t).min(segments - 1);
            let c = Vector::new(
                anchors[seg]
                    .as_slice()
                    .iter()
                    .map(|ci| ci + jitter * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
            .expect("finite center");
            LossFn::squared_distance(c)
        })
        .collect()
}

/// Best piecewise-constant comparator with `segments` blocks: each
/// block's point is the hindsight minimizer of its own losses.
pub fn piecewise_comparator(
    losses: &[LossFn],
    set: &ConstraintSet,
    segments: usize,
) -> ComparatorPath {
    assert!(segments >= 1 && losses.len() >= segments);
    let t = losses.len();
    let mut points = Vec::with_capacity(t);
    for seg in 0..segments {
        let start = seg * t / segments;
        let end = ((seg + 1) * t / segments).min(t);
        let report = solve_hindsight(&losses[start..end], set, 1e-10)
            .expect("segment solve on validated losses");
        for _ in start..end {
            points.push(report.x_star.clone());
        }
    }
    ComparatorPath::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hindsight::cumulative_loss;

    #[test]
    fn lp_generator_is_reproducible_and_interpolates_at_zero_noise() {
        let (a1, xbar1) = generate_lp_instance(50, 2, 0.0, 9);
        let (a2, xbar2) = generate_lp_instance(50, 2, 0.0, 9);
        assert_eq!(xbar1, xbar2);
        for (l1, l2) in a1.iter().zip(&a2) {
            assert_eq!(l1, l2);
        }
        // sigma = 0: every loss vanishes at the latent point.
        assert!(cumulative_loss(&a1, &xbar1).abs() < 1e-24);
        let (b, _) = generate_lp_instance(50, 2, 0.0, 10);
        assert_ne!(a1[0], b[0]);
    }

    #[test]
    fn ce_generator_bias_and_bounds() {
        let losses = generate_ce_instance(200, 2, 1.0, 3);
        let set = ConstraintSet::centered_ball(2, 1.0).unwrap();
        for l in &losses {
            match l {
                LossFn::CrossEntropy { a, y } => {
                    // delta = 1 maps every label to -1.
                    assert_eq!(*y, -1.0);
                    assert!(a.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
                    // L = ||a||^2 / 4 <= n / 4 on the uniform support.
                    assert!(l.smoothness(&set) <= 2.0 / 4.0 + 1e-12);
                }
                other => panic!("unexpected loss {other:?}"),
            }
        }
    }

    #[test]
    fn drifting_quadratics_and_comparator_shapes() {
        let set = ConstraintSet::centered_ball(2, 1.0).unwrap();
        let losses = generate_drifting_quadratics(100, 2, 5, 0.05, 7, &set);
        assert_eq!(losses.len(), 100);
        let path = piecewise_comparator(&losses, &set, 5);
        assert_eq!(path.len(), 100);
        // Exactly 4 jumps for 5 segments.
        let jumps = path
            .points()
            .windows(2)
            .filter(|w| w[1].dist(&w[0]) > 1e-12)
            .count();
        assert_eq!(jumps, 4);
        assert!(path.path_length() > 0.0);
        for p in path.points() {
            assert!(set.contains(p, 1e-9));
        }
    }
}
