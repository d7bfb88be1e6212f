//! Linear-loss adversary realizing the regret lower bound: losses
//! <g_t, x> with g_t = M eps_t e for i.i.d. Rademacher signs eps_t along
//! a fixed unit direction, so the cumulative squared gradient norm is
//! M^2 T at every point.

use rand::Rng;

use crate::loss::LossFn;
use crate::rng::run_rng;
use crate::vector::Vector;

pub fn lower_bound_adversary(t: usize, m: f64, dim: usize, seed: u64) -> Vec<LossFn> {
    assert!(m > 0.0 && m.is_finite(), "gradient scale must be positive");
    assert!(dim >= 1);
    let mut rng = run_rng(seed);
    (0..t)
        .map(|_| {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let mut g = vec![0.0; dim];
            g[0] = m * sign;
            LossFn::linear(Vector::new(g).expect("finite adversary gradient"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hindsight::cumulative_grad_norm_sq;

    #[test]
    fn cumulative_grad_norm_is_constant_in_x() {
        let t = 50;
        let m = 2.0;
        let losses = lower_bound_adversary(t, m, 3, 11);
        for x in [
            Vector::zeros(3),
            Vector::new(vec![1.0, -2.0, 0.5]).unwrap(),
        ] {
            let g = cumulative_grad_norm_sq(&losses, &x);
            assert!((g - m * m * t as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn single_round_norm() {
        let losses = lower_bound_adversary(1, 3.5, 2, 0);
        match &losses[0] {
            LossFn::Linear { g } => assert!((g.norm() - 3.5).abs() < 1e-15),
            other => panic!("expected linear loss, got {other:?}"),
        }
    }

    #[test]
    fn signs_average_out_over_seeds() {
        // CLT check: mean of the summed signs over many seeds is within
        // 3 / sqrt(#seeds) * sqrt(T) of zero.
        let t = 64;
        let seeds = 10_000u64;
        let mut total = 0.0;
        for seed in 0..seeds {
            let losses = lower_bound_adversary(t, 1.0, 1, seed);
            let sum: f64 = losses
                .iter()
                .map(|l| match l {
                    LossFn::Linear { g } => g[0],
                    _ => unreachable!(),
                })
                .sum();
            total += sum;
        }
        let mean = total / seeds as f64;
        let tol = 3.0 / (seeds as f64).sqrt() * (t as f64).sqrt();
        assert!(mean.abs() <= tol, "mean {mean} exceeds {tol}");
    }
}
