//! Stochastic smooth convex optimization through the online lens:
//! online-to-batch conversion of the full-information learners,
//! interpolation-regime problem generators with closed-form noise
//! statistics, and the refined norm-adaptive analysis under sure
//! interpolation.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::algorithms::{AdaFtrlState, AdaGradNormState, OgdState};
use crate::bounds;
use crate::hindsight::RegretLedger;
use crate::loss::LossFn;
use crate::rng::run_rng;
use crate::set::ConstraintSet;
use crate::vector::Vector;

#[derive(Debug, Error)]
pub enum StochasticError {
    #[error("known minimizer must lie in the feasible set")]
    MinimizerInfeasible,
    #[error("data pool must be non-empty with matching dimensions")]
    BadPool,
    #[error("generator must interpolate surely (zero noise) for this analysis")]
    NotInterpolating,
    #[error("adaptive FTRL needs an origin-centered ball: {0}")]
    Ftrl(#[from] crate::algorithms::AlgoError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Power {
    Square,
    Fourth,
}

/// A sampled regression family f(x, xi) = |<a_xi, x> - b_xi|^p / p with
/// data vectors from a finite pool, targets centered on a known
/// minimizer and optional Gaussian target noise. The finite pool keeps
/// the population objective and the noise statistics in closed form.
#[derive(Debug, Clone)]
pub struct StochasticProblem {
    pool: Vec<Vector>,
    pub x_star: Vector,
    pub set: ConstraintSet,
    sigma: f64,
    power: Power,
}

impl StochasticProblem {
    /// Consistent least squares: surely interpolating, both noise
    /// measures are exactly zero.
    pub fn consistent_least_squares(
        pool: Vec<Vector>,
        x_star: Vector,
        set: ConstraintSet,
    ) -> Result<Self, StochasticError> {
        Self::build(pool, x_star, set, 0.0, Power::Square)
    }

    /// Least squares with Gaussian target noise of scale `sigma`.
    pub fn noisy_linear_regression(
        pool: Vec<Vector>,
        x_star: Vector,
        sigma: f64,
        set: ConstraintSet,
    ) -> Result<Self, StochasticError> {
        Self::build(pool, x_star, set, sigma, Power::Square)
    }

    /// Fourth-power regression with (near-)consistent targets; the
    /// vanishing-curvature family of the interpolation comparison.
    pub fn lp4_regression(
        pool: Vec<Vector>,
        x_star: Vector,
        sigma: f64,
        set: ConstraintSet,
    ) -> Result<Self, StochasticError> {
        Self::build(pool, x_star, set, sigma, Power::Fourth)
    }

    fn build(
        pool: Vec<Vector>,
        x_star: Vector,
        set: ConstraintSet,
        sigma: f64,
        power: Power,
    ) -> Result<Self, StochasticError> {
        if pool.is_empty() || pool.iter().any(|a| a.dim() != set.dim()) {
            return Err(StochasticError::BadPool);
        }
        if x_star.dim() != set.dim() || !set.contains(&x_star, 1e-12) {
            return Err(StochasticError::MinimizerInfeasible);
        }
        Ok(Self {
            pool,
            x_star,
            set,
            sigma,
            power,
        })
    }

    fn p(&self) -> f64 {
        match self.power {
            Power::Square => 2.0,
            Power::Fourth => 4.0,
        }
    }

    /// Draws one component loss.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> LossFn {
        let a = self.pool[rng.gen_range(0..self.pool.len())].clone();
        let noise: f64 = if self.sigma > 0.0 {
            self.sigma * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        let b = a.dot(&self.x_star) + noise;
        LossFn::lp_regression(a, b, self.p()).expect("valid generated loss")
    }

    pub fn surely_interpolating(&self) -> bool {
        self.sigma == 0.0
    }

    /// Population objective, exact (pool average, analytic noise
    /// expectation).
    pub fn objective(&self, x: &Vector) -> f64 {
        let m = self.pool.len() as f64;
        let s2 = self.sigma * self.sigma;
        self.pool
            .iter()
            .map(|a| {
                let r = a.dot(x) - a.dot(&self.x_star);
                match self.power {
                    // E (r - sigma e)^2 / 2 = (r^2 + sigma^2) / 2
                    Power::Square => 0.5 * (r * r + s2),
                    // E (r - sigma e)^4 / 4 = (r^4 + 6 r^2 s^2 + 3 s^4) / 4
                    Power::Fourth => 0.25 * (r.powi(4) + 6.0 * r * r * s2 + 3.0 * s2 * s2),
                }
            })
            .sum::<f64>()
            / m
    }

    pub fn objective_gap(&self, x: &Vector) -> f64 {
        self.objective(x) - self.objective(&self.x_star)
    }

    fn mean_data_norm_sq(&self) -> f64 {
        self.pool.iter().map(Vector::norm_sq).sum::<f64>() / self.pool.len() as f64
    }

    /// Function-noise level inf_x E[f(x, xi) - inf f(., xi)], exact.
    pub fn sigma_f_closed(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        match self.power {
            Power::Square => 0.5 * s2,
            Power::Fourth => 0.75 * s2 * s2,
        }
    }

    /// Gradient-noise level sqrt(E ||grad f(x*, xi)||^2), exact.
    pub fn sigma_g_closed(&self) -> f64 {
        let m2 = self.mean_data_norm_sq();
        match self.power {
            Power::Square => self.sigma * m2.sqrt(),
            // grad at x* is a (-sigma e)^3, and E e^6 = 15.
            Power::Fourth => self.sigma.powi(3) * (15.0 * m2).sqrt(),
        }
    }

    /// Declared smoothness constant for the family over the feasible
    /// set. For fourth-power losses with noisy targets the residual
    /// range uses a four-sigma noise allowance.
    pub fn smoothness(&self) -> f64 {
        match self.power {
            Power::Square => self
                .pool
                .iter()
                .map(Vector::norm_sq)
                .fold(0.0, f64::max),
            Power::Fourth => self
                .pool
                .iter()
                .map(|a| {
                    let (lo, hi) = self.set.linear_range(a.as_slice());
                    let b0 = a.dot(&self.x_star);
                    let max_r = (lo - b0).abs().max((hi - b0).abs()) + 4.0 * self.sigma;
                    3.0 * a.norm_sq() * max_r * max_r
                })
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OnlineAlgorithm {
    Ogd { eta: f64 },
    AdaGradNorm { alpha: f64 },
    AdaFtrl { lambda: f64 },
}

/// Outcome of an online-to-batch run: average-iterate gap plus the
/// noise levels and bound values the audits compare against.
#[derive(Debug, Clone)]
pub struct InterpolationReport {
    pub sigma_f: f64,
    pub sigma_g: f64,
    pub avg_iterate_gap: f64,
    pub mean_iterate_objective_gap: f64,
    pub bound_values: BTreeMap<String, f64>,
    pub ledger: RegretLedger,
    pub losses: Vec<LossFn>,
}

/// Runs an online learner on `t` i.i.d. sampled losses and evaluates
/// the average iterate on the population objective.
pub fn online_to_batch(
    problem: &StochasticProblem,
    algorithm: OnlineAlgorithm,
    t: usize,
    seed: u64,
) -> Result<InterpolationReport, StochasticError> {
    assert!(t >= 1);
    let set = &problem.set;
    let mut rng = run_rng(seed);
    let losses: Vec<LossFn> = (0..t).map(|_| problem.sample(&mut rng)).collect();

    let mut ledger = RegretLedger::with_capacity(t);
    let mut sum = vec![0.0; set.dim()];
    let x1 = set.center();

    let mut mean_obj_gap = 0.0;
    let mut record = |x: &Vector, loss: &LossFn, ledger: &mut RegretLedger| {
        ledger.record_round(loss, x.clone());
        for (s, xi) in sum.iter_mut().zip(x.as_slice()) {
            *s += xi;
        }
        mean_obj_gap += problem.objective_gap(x);
    };

    match algorithm {
        OnlineAlgorithm::Ogd { eta } => {
            let mut state = OgdState::new(x1, eta, set);
            for loss in &losses {
                record(&state.x, loss, &mut ledger);
                let g = loss.grad(&state.x);
                state.step(&g, set);
            }
        }
        OnlineAlgorithm::AdaGradNorm { alpha } => {
            let mut state = AdaGradNormState::new(x1, alpha, set);
            for loss in &losses {
                record(&state.x, loss, &mut ledger);
                let g = loss.grad(&state.x);
                state.step(&g, set);
            }
        }
        OnlineAlgorithm::AdaFtrl { lambda } => {
            let mut state = AdaFtrlState::new(set, lambda)?;
            for loss in &losses {
                record(&state.x, loss, &mut ledger);
                let g = loss.grad(&state.x);
                state.step(&g);
            }
        }
    }

    let x_bar = Vector::new(sum.iter().map(|s| s / t as f64).collect())
        .expect("average iterate is finite");
    let avg_iterate_gap = problem.objective_gap(&x_bar);
    mean_obj_gap /= t as f64;

    let sigma_f = problem.sigma_f_closed();
    let sigma_g = problem.sigma_g_closed();
    let l_smooth = problem.smoothness();
    let d = set.diameter();
    let x1_dist_sq = set.center().dist(&problem.x_star).powi(2);

    let mut bound_values = BTreeMap::new();
    match algorithm {
        OnlineAlgorithm::Ogd { eta } => {
            bound_values.insert(
                "batch_ogd".to_string(),
                bounds::batch_ogd_bound(eta, l_smooth, x1_dist_sq, t, sigma_g),
            );
        }
        OnlineAlgorithm::AdaGradNorm { .. } => {
            bound_values.insert(
                "batch_adagrad_norm".to_string(),
                bounds::batch_adagrad_norm_bound(l_smooth, d, t, sigma_g),
            );
        }
        OnlineAlgorithm::AdaFtrl { lambda } => {
            let radius = d / 2.0;
            let r_const = lambda * radius * radius / 2.0 + 1.0;
            bound_values.insert(
                "batch_adaftrl".to_string(),
                bounds::batch_adaftrl_bound(r_const, l_smooth, d, t, sigma_g),
            );
        }
    }

    Ok(InterpolationReport {
        sigma_f,
        sigma_g,
        avg_iterate_gap,
        mean_iterate_objective_gap: mean_obj_gap,
        bound_values,
        ledger,
        losses,
    })
}

/// One unconstrained norm-adaptive run under sure interpolation, with
/// everything the refined analysis asserts: the iterate-distance bound,
/// the cumulative-regret bound and the average-iterate gap bound.
#[derive(Debug, Clone)]
pub struct InterpolationRun {
    pub gap: f64,
    pub gap_bound: f64,
    pub regret: f64,
    pub regret_bound: f64,
    pub dhat: f64,
    pub max_iterate_dist_sq: f64,
    pub iterate_bound_ok: bool,
}

pub fn adanorm_unconstrained_run(
    problem: &StochasticProblem,
    alpha: f64,
    t: usize,
    seed: u64,
    x1: Vector,
) -> Result<InterpolationRun, StochasticError> {
    if !problem.surely_interpolating() {
        return Err(StochasticError::NotInterpolating);
    }
    assert!(alpha > 0.0 && t >= 1);
    let mut rng = run_rng(seed);
    let losses: Vec<LossFn> = (0..t).map(|_| problem.sample(&mut rng)).collect();

    let l_smooth = problem.smoothness();
    let x1_dist_sq = x1.dist(&problem.x_star).powi(2);
    let g1_norm = losses[0].grad(&x1).norm();

    let mut state = AdaGradNormState {
        x: x1.clone(),
        alpha,
        sum_sq: 0.0,
    };
    let mut regret = 0.0;
    let mut sum = vec![0.0; x1.dim()];
    let mut max_dist_sq: f64 = 0.0;
    for loss in &losses {
        regret += loss.value(&state.x) - loss.value(&problem.x_star);
        max_dist_sq = max_dist_sq.max(state.x.dist(&problem.x_star).powi(2));
        for (s, xi) in sum.iter_mut().zip(state.x.as_slice()) {
            *s += xi;
        }
        let g = loss.grad(&state.x);
        state.step_unconstrained(&g);
    }
    let x_bar = Vector::new(sum.iter().map(|s| s / t as f64).collect())
        .expect("average iterate is finite");
    let gap = problem.objective_gap(&x_bar);

    let (dhat, regret_bound, gap_bound) = if g1_norm == 0.0 {
        // Started at a stationary point of the first sample; the bounds
        // degenerate and hold trivially.
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    } else {
        let dhat = bounds::interpolation_dhat(x1_dist_sq, alpha, l_smooth, g1_norm);
        (
            dhat,
            bounds::interpolation_regret_bound(alpha, l_smooth, dhat),
            bounds::interpolation_gap_bound(alpha, l_smooth, t, x1_dist_sq, g1_norm),
        )
    };

    Ok(InterpolationRun {
        gap,
        gap_bound,
        regret,
        regret_bound,
        dhat,
        max_iterate_dist_sq: max_dist_sq,
        iterate_bound_ok: max_dist_sq <= dhat * (1.0 + 1e-12) + 1e-12,
    })
}

/// Monte Carlo estimates of the noise levels at the known minimizer,
/// with standard errors (reported on the squared scale for the
/// gradient noise).
#[derive(Debug, Clone, Copy)]
pub struct SigmaEstimate {
    pub sigma_f: f64,
    pub sigma_g: f64,
    pub se_f: f64,
    pub se_g_sq: f64,
}

pub fn estimate_sigmas(problem: &StochasticProblem, samples: usize, seed: u64) -> SigmaEstimate {
    assert!(samples >= 2);
    let mut rng = run_rng(seed);
    let mut f_sum = 0.0;
    let mut f_sq = 0.0;
    let mut g_sum = 0.0;
    let mut g_sq = 0.0;
    for _ in 0..samples {
        let loss = problem.sample(&mut rng);
        let inf = loss.infimum().expect("generated losses are bounded below");
        let f_val = loss.value(&problem.x_star) - inf;
        let g_val = loss.grad_norm_sq(&problem.x_star);
        f_sum += f_val;
        f_sq += f_val * f_val;
        g_sum += g_val;
        g_sq += g_val * g_val;
    }
    let n = samples as f64;
    let f_mean = f_sum / n;
    let g_mean = g_sum / n;
    let f_var = (f_sq / n - f_mean * f_mean).max(0.0);
    let g_var = (g_sq / n - g_mean * g_mean).max(0.0);
    SigmaEstimate {
        sigma_f: f_mean,
        sigma_g: g_mean.sqrt(),
        se_f: (f_var / n).sqrt(),
        se_g_sq: (g_var / n).sqrt(),
    }
}
