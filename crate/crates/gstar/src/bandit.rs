//! Two-point (zeroth-order) feedback: sphere sampling, the gradient
//! estimator g = (n / 2 mu) [l(x + mu s) - l(x - mu s)] s, Monte Carlo
//! utilities for the sphere-smoothed surrogate, and bandit gradient
//! descent with constant or norm-adaptive learning rates.
//!
//! Query points x +- mu s may leave the feasible set; the losses are
//! globally evaluable so this is allowed, and only the decision x^t is
//! required to stay feasible.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::hindsight::RegretLedger;
use crate::loss::{max_smoothness, LossFn};
use crate::rng::round_rng;
use crate::set::ConstraintSet;
use crate::vector::Vector;

#[derive(Debug, Error)]
pub enum BanditError {
    #[error("two-point runs need dimension >= 8, got {0}")]
    DimensionTooSmall(usize),
    #[error("smoothing radius must be positive, got {0}")]
    InvalidMu(f64),
    #[error("constant learning rate {eta} outside (0, 1/(4 n L)) = (0, {cap})")]
    EtaOutOfRange { eta: f64, cap: f64 },
    #[error("alpha must be positive, got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BanditLearning {
    Constant { eta: f64 },
    AdaNorm { alpha: f64 },
}

#[derive(Debug, Clone)]
pub struct BanditConfig {
    /// Smoothing radius mu.
    pub mu: f64,
    pub learning: BanditLearning,
    pub seed: u64,
}

/// One estimator draw: the direction, both query points and the
/// resulting gradient estimate.
#[derive(Debug, Clone)]
pub struct TwoPointSample {
    pub s: Vector,
    pub y_plus: Vector,
    pub y_minus: Vector,
    pub g_hat: Vector,
}

/// Uniform draw from the unit sphere by Gaussian normalization.
pub fn sample_sphere<R: Rng>(dim: usize, rng: &mut R) -> Vector {
    assert!(dim >= 1);
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Vector::new(g.iter().map(|v| v / norm).collect())
                .expect("normalized Gaussian is finite");
        }
    }
}

/// Draws a direction and forms the two-point gradient estimate at `x`.
pub fn two_point_estimate<R: Rng>(
    loss: &LossFn,
    x: &Vector,
    mu: f64,
    rng: &mut R,
) -> TwoPointSample {
    assert!(mu > 0.0, "smoothing radius must be positive");
    let n = x.dim();
    let s = sample_sphere(n, rng);
    let y_plus = x.add_scaled(mu, &s);
    let y_minus = x.add_scaled(-mu, &s);
    let scale = n as f64 / (2.0 * mu) * (loss.value(&y_plus) - loss.value(&y_minus));
    let g_hat = s.scale(scale);
    TwoPointSample {
        s,
        y_plus,
        y_minus,
        g_hat,
    }
}

/// Monte Carlo estimate of the sphere-smoothed value
/// E[l(x + mu s)], with its standard error.
pub fn smoothed_value<R: Rng>(
    loss: &LossFn,
    x: &Vector,
    mu: f64,
    samples: usize,
    rng: &mut R,
) -> (f64, f64) {
    assert!(samples >= 1);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let s = sample_sphere(x.dim(), rng);
        let v = loss.value(&x.add_scaled(mu, &s));
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Runs bandit gradient descent from the set center. The ledger records
/// the decision points x^t: their losses and true squared gradient
/// norms, which is what the regret bounds are stated in.
pub fn bgd_run(
    losses: &[LossFn],
    set: &ConstraintSet,
    cfg: &BanditConfig,
) -> Result<RegretLedger, BanditError> {
    let n = set.dim();
    if n < 8 {
        return Err(BanditError::DimensionTooSmall(n));
    }
    if !(cfg.mu > 0.0 && cfg.mu.is_finite()) {
        return Err(BanditError::InvalidMu(cfg.mu));
    }
    match cfg.learning {
        BanditLearning::Constant { eta } => {
            // The constant-rate guarantee needs eta < 1/(4 n L), with L
            // taken over the mu-inflated set the query points live in.
            let l_smooth = max_smoothness(losses, &set.inflate(cfg.mu));
            let cap = if l_smooth > 0.0 {
                1.0 / (4.0 * n as f64 * l_smooth)
            } else {
                f64::INFINITY
            };
            if !(eta > 0.0 && eta < cap) {
                return Err(BanditError::EtaOutOfRange { eta, cap });
            }
        }
        BanditLearning::AdaNorm { alpha } => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(BanditError::InvalidAlpha(alpha));
            }
        }
    }

    let mut ledger = RegretLedger::with_capacity(losses.len());
    let mut x = set.center();
    let mut sum_sq = 0.0;
    for (t, loss) in losses.iter().enumerate() {
        ledger.record_round(loss, x.clone());
        let mut rng = round_rng(cfg.seed, t as u64);
        let sample = two_point_estimate(loss, &x, cfg.mu, &mut rng);
        match cfg.learning {
            BanditLearning::Constant { eta } => {
                x = set.project(&x.add_scaled(-eta, &sample.g_hat));
            }
            BanditLearning::AdaNorm { alpha } => {
                let gns = sample.g_hat.norm_sq();
                if gns > 0.0 {
                    sum_sq += gns;
                    let eta = alpha / sum_sq.sqrt();
                    x = set.project(&x.add_scaled(-eta, &sample.g_hat));
                }
            }
        }
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::run_rng;

    #[test]
    fn sphere_samples_are_unit_norm() {
        let mut rng = run_rng(3);
        for _ in 0..1000 {
            let s = sample_sphere(8, &mut rng);
            assert!((s.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_mean_and_second_moment_are_isotropic() {
        let n = 8;
        let draws = 100_000;
        let mut rng = run_rng(17);
        let mut mean = vec![0.0; n];
        let mut second = vec![vec![0.0; n]; n];
        for _ in 0..draws {
            let s = sample_sphere(n, &mut rng);
            for i in 0..n {
                mean[i] += s[i];
                for j in 0..n {
                    second[i][j] += s[i] * s[j];
                }
            }
        }
        let tol_mean = 4.0 / (draws as f64).sqrt();
        for m in &mean {
            assert!((m / draws as f64).abs() <= tol_mean);
        }
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 / n as f64 } else { 0.0 };
                let got = second[i][j] / draws as f64;
                assert!(
                    (got - expect).abs() <= 5e-3,
                    "E[s_i s_j] at ({i},{j}): {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn linear_loss_estimate_is_exact_per_draw_and_unbiased() {
        let n = 8;
        let g = Vector::new((0..n).map(|i| 0.2 * i as f64 - 0.5).collect()).unwrap();
        let loss = LossFn::linear(g.clone());
        let x = Vector::zeros(n);
        let mu = 0.05;
        let mut rng = run_rng(5);
        let draws = 100_000;
        let mut mean = vec![0.0; n];
        let mut var_accum = vec![0.0; n];
        for _ in 0..draws {
            let sample = two_point_estimate(&loss, &x, mu, &mut rng);
            // For linear losses the estimate is exactly n <g, s> s.
            let inner = g.dot(&sample.s);
            for i in 0..n {
                let expect = n as f64 * inner * sample.s[i];
                assert!((sample.g_hat[i] - expect).abs() < 1e-9);
                mean[i] += sample.g_hat[i];
                var_accum[i] += sample.g_hat[i] * sample.g_hat[i];
            }
            assert_eq!(sample.y_plus, x.add_scaled(mu, &sample.s));
            assert_eq!(sample.y_minus, x.add_scaled(-mu, &sample.s));
        }
        for i in 0..n {
            let m = mean[i] / draws as f64;
            let var = var_accum[i] / draws as f64 - m * m;
            let se = (var / draws as f64).sqrt();
            assert!(
                (m - g[i]).abs() <= 3.0 * se + 1e-12,
                "coordinate {i}: {m} vs {} (se {se})",
                g[i]
            );
        }
    }

    #[test]
    fn constant_loss_estimates_zero() {
        let loss = LossFn::linear(Vector::zeros(4));
        let x = Vector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut rng = run_rng(9);
        for _ in 0..100 {
            let sample = two_point_estimate(&loss, &x, 0.1, &mut rng);
            assert_eq!(sample.g_hat.norm(), 0.0);
        }
    }

    #[test]
    fn quadratic_estimator_recovers_the_gradient() {
        // l(x) = ||x||^2 / 2 has smoothed gradient equal to the true
        // gradient by symmetry.
        let n = 8;
        let loss = LossFn::squared_distance(Vector::zeros(n));
        let x = Vector::new((0..n).map(|i| 0.1 * (i as f64 + 1.0)).collect()).unwrap();
        let mu = 0.1;
        let mut rng = run_rng(23);
        let draws = 100_000;
        let mut sums = vec![0.0; n];
        let mut sq = vec![0.0; n];
        for _ in 0..draws {
            let sample = two_point_estimate(&loss, &x, mu, &mut rng);
            for i in 0..n {
                sums[i] += sample.g_hat[i];
                sq[i] += sample.g_hat[i] * sample.g_hat[i];
            }
        }
        for i in 0..n {
            let m = sums[i] / draws as f64;
            let var = sq[i] / draws as f64 - m * m;
            let se = (var / draws as f64).sqrt();
            assert!((m - x[i]).abs() <= 3.0 * se + 1e-12);
        }
    }

    #[test]
    fn smoothed_quadratic_has_closed_form() {
        let n = 8;
        let loss = LossFn::squared_distance(Vector::zeros(n));
        let x = Vector::new(vec![0.5; n]).unwrap();
        let mu = 0.2;
        let mut rng = run_rng(31);
        let (mean, se) = smoothed_value(&loss, &x, mu, 50_000, &mut rng);
        let expect = 0.5 * x.norm_sq() + mu * mu / 2.0;
        assert!((mean - expect).abs() <= 3.0 * se);
    }

    #[test]
    fn smoothed_linear_equals_linear() {
        let g = Vector::new(vec![1.0, -2.0, 0.5, 0.25]).unwrap();
        let loss = LossFn::linear(g);
        let x = Vector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut rng = run_rng(37);
        let (mean, se) = smoothed_value(&loss, &x, 0.3, 50_000, &mut rng);
        assert!((mean - loss.value(&x)).abs() <= 3.0 * se + 1e-12);
    }

    #[test]
    fn smoothed_value_sandwich() {
        // l(x) <= smoothed(x) <= l(x) + L mu^2 / 2, audited with the
        // Monte Carlo standard-error margin.
        let set = ConstraintSet::centered_ball(8, 1.0).unwrap();
        let mu = 0.1;
        let inflated = set.inflate(mu);
        let a = Vector::new(vec![0.4, -0.2, 0.1, 0.3, -0.1, 0.2, 0.0, 0.5]).unwrap();
        let losses = [
            LossFn::lp_regression(a.clone(), 0.2, 4.0).unwrap(),
            LossFn::cross_entropy(a.clone(), 1.0).unwrap(),
            LossFn::exponential(a),
            LossFn::squared_distance(Vector::zeros(8)),
        ];
        let mut rng = run_rng(41);
        let x = Vector::new(vec![0.2; 8]).unwrap();
        for loss in &losses {
            let l_smooth = loss.smoothness(&inflated);
            let (mean, se) = smoothed_value(loss, &x, mu, 20_000, &mut rng);
            let v = loss.value(&x);
            assert!(mean + 3.0 * se >= v, "lower sandwich failed for {loss:?}");
            assert!(
                mean - 3.0 * se <= v + l_smooth * mu * mu / 2.0,
                "upper sandwich failed for {loss:?}"
            );
        }
    }

    #[test]
    fn zero_losses_leave_the_iterate_fixed() {
        let set = ConstraintSet::centered_ball(8, 1.0).unwrap();
        let losses = vec![LossFn::linear(Vector::zeros(8)); 20];
        let cfg = BanditConfig {
            mu: 0.05,
            learning: BanditLearning::AdaNorm { alpha: 1.0 },
            seed: 1,
        };
        let ledger = bgd_run(&losses, &set, &cfg).unwrap();
        for r in ledger.rounds() {
            assert_eq!(r.x.as_slice(), set.center().as_slice());
            assert_eq!(r.loss, 0.0);
        }
        assert_eq!(ledger.regret(&losses, &Vector::zeros(8)), 0.0);
    }

    #[test]
    fn identical_seeds_reproduce_the_trace() {
        let set = ConstraintSet::centered_ball(8, 1.0).unwrap();
        let center = Vector::new(vec![0.3; 8]).unwrap();
        let losses = vec![LossFn::squared_distance(center); 50];
        let cfg = BanditConfig {
            mu: 0.05,
            learning: BanditLearning::Constant { eta: 0.001 },
            seed: 77,
        };
        let a = bgd_run(&losses, &set, &cfg).unwrap();
        let b = bgd_run(&losses, &set, &cfg).unwrap();
        for (ra, rb) in a.rounds().iter().zip(b.rounds()) {
            assert_eq!(ra.x.as_slice(), rb.x.as_slice());
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        let set = ConstraintSet::centered_ball(8, 1.0).unwrap();
        let losses = vec![LossFn::squared_distance(Vector::zeros(8))];
        let too_big = BanditConfig {
            mu: 0.05,
            learning: BanditLearning::Constant { eta: 1.0 },
            seed: 0,
        };
        assert!(matches!(
            bgd_run(&losses, &set, &too_big),
            Err(BanditError::EtaOutOfRange { .. })
        ));
        let small_dim = ConstraintSet::centered_ball(4, 1.0).unwrap();
        let losses4 = vec![LossFn::squared_distance(Vector::zeros(4))];
        let cfg = BanditConfig {
            mu: 0.05,
            learning: BanditLearning::AdaNorm { alpha: 1.0 },
            seed: 0,
        };
        assert!(matches!(
            bgd_run(&losses4, &small_dim, &cfg),
            Err(BanditError::DimensionTooSmall(4))
        ));
    }
}
