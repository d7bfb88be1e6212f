//! Moreau envelope machinery: the constrained proximal operator, the
//! envelope value/gradient, and the constraint-aware loss and
//! stationarity measures it induces.
//!
//! The envelope of l with parameter gamma is
//! min_{y in X} { l(y) + (gamma/2) ||y - x||^2 }; it is gamma-smooth and
//! convex, shares constrained minimizers with l, and its gradient
//! gamma (x - prox(x)) measures stationarity relative to the set.

use thiserror::Error;

use crate::hindsight::solve_hindsight;
use crate::loss::LossFn;
use crate::set::ConstraintSet;
use crate::vector::Vector;

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("prox iteration cap {cap} exceeded (last step {last_step:e})")]
    ProxIterationCap { cap: usize, last_step: f64 },
    #[error(transparent)]
    Hindsight(#[from] crate::hindsight::HindsightError),
}

const PROX_ITER_CAP: usize = 100_000;

/// A loss paired with a feasible set and smoothing parameter.
#[derive(Debug, Clone)]
pub struct EnvelopeLoss {
    pub base: LossFn,
    pub set: ConstraintSet,
    pub gamma: f64,
    pub prox_tol: f64,
}

impl EnvelopeLoss {
    pub fn new(base: LossFn, set: ConstraintSet, gamma: f64) -> Result<Self, SurrogateError> {
        Self::with_tol(base, set, gamma, 1e-10)
    }

    pub fn with_tol(
        base: LossFn,
        set: ConstraintSet,
        gamma: f64,
        prox_tol: f64,
    ) -> Result<Self, SurrogateError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(SurrogateError::InvalidGamma(gamma));
        }
        assert_eq!(base.dim(), set.dim(), "loss/set dimension mismatch");
        Ok(Self {
            base,
            set,
            gamma,
            prox_tol: if prox_tol > 0.0 { prox_tol } else { 1e-10 },
        })
    }

    /// The constrained proximal point
    /// argmin_{y in X} l(y) + (gamma/2) ||y - x||^2, by projected
    /// gradient on the (L + gamma)-smooth, gamma-strongly-convex
    /// subproblem with step 1/(L + gamma), until successive iterates
    /// move less than `prox_tol`.
    pub fn prox(&self, x: &Vector) -> Result<Vector, SurrogateError> {
        let l_smooth = self.base.smoothness(&self.set);
        let step = 1.0 / (l_smooth + self.gamma);
        let dim = x.dim();
        let mut y = x.as_slice().to_vec();
        self.set.project_in_place(&mut y);
        let mut grad = vec![0.0; dim];
        let mut last_step = f64::INFINITY;
        for _ in 0..PROX_ITER_CAP {
            grad.fill(0.0);
            self.base.add_grad_scaled(&y, 1.0, &mut grad);
            let mut next: Vec<f64> = y
                .iter()
                .zip(&grad)
                .zip(x.as_slice())
                .map(|((yi, gi), xi)| yi - step * (gi + self.gamma * (yi - xi)))
                .collect();
            self.set.project_in_place(&mut next);
            last_step = next
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            y.copy_from_slice(&next);
            if last_step <= self.prox_tol {
                return Ok(Vector::new(y).expect("prox iterates stay finite"));
            }
        }
        Err(SurrogateError::ProxIterationCap {
            cap: PROX_ITER_CAP,
            last_step,
        })
    }

    /// Envelope value l(prox(x)) + (gamma/2) ||prox(x) - x||^2.
    pub fn value(&self, x: &Vector) -> Result<f64, SurrogateError> {
        let p = self.prox(x)?;
        Ok(self.base.value(&p) + 0.5 * self.gamma * p.dist(x).powi(2))
    }

    /// Envelope gradient gamma (x - prox(x)).
    pub fn grad(&self, x: &Vector) -> Result<Vector, SurrogateError> {
        let p = self.prox(x)?;
        Ok(x.sub(&p).scale(self.gamma))
    }
}

/// Constraint-aware cumulative measures at a feasible point:
/// L_X = sum_t [l_t(x) - min_{u in X} l_t(u)] and
/// G_X = sum_t ||grad of the envelope of l_t at x||^2.
#[derive(Debug, Clone, Copy)]
pub struct ConstrainedMeasures {
    pub l_x: f64,
    pub g_x: f64,
}

pub fn constrained_measures(
    losses: &[LossFn],
    set: &ConstraintSet,
    gamma: f64,
    x: &Vector,
) -> Result<ConstrainedMeasures, SurrogateError> {
    let mut l_x = 0.0;
    let mut g_x = 0.0;
    for loss in losses {
        // Per-round constrained minimum via the hindsight solver on a
        // one-loss sequence.
        let single = [loss.clone()];
        let report = solve_hindsight(&single, set, 1e-10)?;
        let round_min = loss.value(&report.x_star);
        l_x += loss.value(x) - round_min;
        let env = EnvelopeLoss::new(loss.clone(), set.clone(), gamma)?;
        g_x += env.grad(x)?.norm_sq();
    }
    Ok(ConstrainedMeasures { l_x, g_x })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(dim: usize, radius: f64) -> ConstraintSet {
        ConstraintSet::centered_ball(dim, radius).unwrap()
    }

    #[test]
    fn prox_of_isotropic_quadratic_is_shrinkage() {
        // base = ||y||^2 / 2 on a ball: interior prox is gamma x / (1 + gamma).
        let set = ball(2, 10.0);
        let env = EnvelopeLoss::new(LossFn::squared_distance(Vector::zeros(2)), set, 3.0).unwrap();
        let x = Vector::new(vec![2.0, -1.0]).unwrap();
        let p = env.prox(&x).unwrap();
        let expect = x.scale(3.0 / 4.0);
        assert!(p.dist(&expect) < 1e-8);
        let v = env.value(&x).unwrap();
        let closed = 3.0 * x.norm_sq() / (2.0 * 4.0);
        assert!((v - closed).abs() < 1e-8);
    }

    #[test]
    fn prox_fixes_the_base_minimizer() {
        let set = ball(2, 1.0);
        let c = Vector::new(vec![0.25, -0.5]).unwrap();
        let env = EnvelopeLoss::new(LossFn::squared_distance(c.clone()), set, 0.7).unwrap();
        let p = env.prox(&c).unwrap();
        assert!(p.dist(&c) < 1e-9);
        assert!(env.grad(&c).unwrap().norm() < 1e-9);
        // Value at the shared minimizer equals the base minimum.
        assert!(env.value(&c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn prox_of_linear_loss_is_projected_shift() {
        let set = ball(2, 1.0);
        let g = Vector::new(vec![2.0, 1.0]).unwrap();
        let gamma = 4.0;
        let env = EnvelopeLoss::new(LossFn::linear(g.clone()), set.clone(), gamma).unwrap();
        for x in [
            Vector::new(vec![0.1, 0.2]).unwrap(),
            Vector::new(vec![0.9, 0.0]).unwrap(),
        ] {
            let p = env.prox(&x).unwrap();
            let expect = set.project(&x.add_scaled(-1.0 / gamma, &g));
            assert!(p.dist(&expect) < 1e-8, "{p:?} vs {expect:?}");
        }
        // Deep interior with a small step: the envelope gradient equals
        // the base gradient.
        let big = ball(2, 100.0);
        let env = EnvelopeLoss::new(LossFn::linear(g.clone()), big, gamma).unwrap();
        let x = Vector::new(vec![0.5, 0.5]).unwrap();
        assert!(env.grad(&x).unwrap().dist(&g) < 1e-8);
    }

    #[test]
    fn large_gamma_approaches_the_base_value() {
        let set = ball(2, 1.0);
        let base = LossFn::lp_regression(Vector::new(vec![0.8, -0.3]).unwrap(), 0.4, 4.0).unwrap();
        let env = EnvelopeLoss::new(base.clone(), set, 1e6).unwrap();
        let x = Vector::new(vec![0.3, 0.4]).unwrap();
        let v = env.value(&x).unwrap();
        assert!((v - base.value(&x)).abs() < 1e-4);
    }

    #[test]
    fn envelope_gradient_matches_finite_differences() {
        let set = ball(2, 1.0);
        let bases = [
            LossFn::squared_distance(Vector::new(vec![1.5, 0.0]).unwrap()),
            LossFn::lp_regression(Vector::new(vec![1.0, 0.5]).unwrap(), 0.2, 4.0).unwrap(),
            LossFn::cross_entropy(Vector::new(vec![0.7, -0.4]).unwrap(), 1.0).unwrap(),
        ];
        let h = 1e-6;
        let mut state = 19u64;
        let mut rand = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        for base in &bases {
            let env = EnvelopeLoss::new(base.clone(), set.clone(), 2.0).unwrap();
            for _ in 0..20 {
                let x = Vector::new(vec![rand(), rand()]).unwrap();
                let g = env.grad(&x).unwrap();
                for i in 0..2 {
                    let mut plus = x.as_slice().to_vec();
                    let mut minus = plus.clone();
                    plus[i] += h;
                    minus[i] -= h;
                    let fd = (env.value(&Vector::new(plus).unwrap()).unwrap()
                        - env.value(&Vector::new(minus).unwrap()).unwrap())
                        / (2.0 * h);
                    let denom = fd.abs().max(1.0);
                    assert!(
                        (g[i] - fd).abs() / denom <= 1e-5,
                        "envelope gradient mismatch for {base:?}: {} vs {fd}",
                        g[i]
                    );
                }
            }
        }
    }

    #[test]
    fn measures_vanish_when_x_minimizes_every_loss() {
        let set = ball(2, 1.0);
        let x = Vector::new(vec![0.2, -0.1]).unwrap();
        let losses = vec![LossFn::squared_distance(x.clone()); 5];
        let m = constrained_measures(&losses, &set, 1.5, &x).unwrap();
        assert!(m.l_x.abs() < 1e-10);
        assert!(m.g_x.abs() < 1e-10);
    }

    #[test]
    fn constrained_vs_global_small_loss_on_boundary_family() {
        // l_t(x) = (x - 2)^2 / 2 on [-1, 1]: the constrained optimum sits
        // on the boundary, the constrained measure vanishes there while
        // the recentered global measure grows linearly in T.
        let set = ConstraintSet::interval(-1.0, 1.0).unwrap();
        let t = 100;
        let losses = vec![LossFn::quadratic_residual(1.0, 2.0).unwrap(); t];
        let x_star = Vector::new(vec![1.0]).unwrap();
        let m = constrained_measures(&losses, &set, 2.0, &x_star).unwrap();
        assert!(m.l_x.abs() < 1e-9);
        assert!(m.g_x.abs() < 1e-9);
        let l_star = crate::hindsight::recentered_cumulative_loss(&losses, &x_star).unwrap();
        assert!((l_star - t as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_gamma() {
        let set = ball(1, 1.0);
        assert!(EnvelopeLoss::new(LossFn::scaled_quadratic(1.0).unwrap(), set, 0.0).is_err());
    }
}
