//! Scale-free follow-the-regularized-leader on linearized losses.
//!
//! The regularizer is fixed to r(x) = lambda ||x||^2 / 2 restricted to an
//! origin-centered ball of radius B, so the conjugate h, its gradient,
//! the Bregman divergence V_h, the iterate update and the Delta -> 0
//! limit all have closed forms:
//!
//!   h(theta) = ||theta||^2 / (2 lambda)        if ||theta|| <= lambda B
//!            = B ||theta|| - lambda B^2 / 2    otherwise
//!
//! The regularizer weight follows the recursion
//!   Delta_t = Delta_{t-1} + Delta_{t-1} V_h(-L_t / Delta_{t-1},
//!                                           -L_{t-1} / Delta_{t-1}),
//! with the analytic a -> 0+ limit of a V_h(-L_t/a, -L_{t-1}/a) when
//! Delta_{t-1} = 0, and the play is
//!   x = argmin_{||x|| <= B} <L_t, x> + Delta_t lambda ||x||^2 / 2,
//! i.e. a scaled negative-gradient direction clipped to the ball.

use thiserror::Error;

use crate::set::ConstraintSet;
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgoError {
    #[error("regularizer needs an origin-centered ball")]
    BallNotCentered,
    #[error("lambda = {lambda} is below the required 1/(2 D^2) = {required}")]
    LambdaTooSmall { lambda: f64, required: f64 },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone)]
pub struct AdaFtrlState {
    /// Cumulative observed gradients.
    pub l_cum: Vector,
    /// Regularizer weight; nonnegative and nondecreasing.
    pub delta: f64,
    pub lambda: f64,
    radius: f64,
    pub x: Vector,
}

impl AdaFtrlState {
    /// Requires an origin-centered ball and lambda >= 1/(2 D^2) with
    /// D = 2B; smaller lambda violates the regret guarantee and is
    /// rejected here.
    pub fn new(ball: &ConstraintSet, lambda: f64) -> Result<Self, AlgoError> {
        let radius = match ball {
            ConstraintSet::Ball { center, radius } if center.norm_sq() == 0.0 => *radius,
            _ => return Err(AlgoError::BallNotCentered),
        };
        let diameter = 2.0 * radius;
        let required = 1.0 / (2.0 * diameter * diameter);
        if !(lambda >= required && lambda.is_finite()) {
            return Err(AlgoError::LambdaTooSmall { lambda, required });
        }
        let dim = ball.dim();
        Ok(Self {
            l_cum: Vector::zeros(dim),
            delta: 0.0,
            lambda,
            radius,
            x: Vector::zeros(dim),
        })
    }

    /// The constant R = max_x r(x) + 1 = lambda B^2 / 2 + 1 entering the
    /// regret bound.
    pub fn r_const(&self) -> f64 {
        self.lambda * self.radius * self.radius / 2.0 + 1.0
    }

    /// Conjugate of the ball-restricted quadratic regularizer.
    fn h(&self, theta: &Vector) -> f64 {
        let norm = theta.norm();
        if norm <= self.lambda * self.radius {
            norm * norm / (2.0 * self.lambda)
        } else {
            self.radius * norm - self.lambda * self.radius * self.radius / 2.0
        }
    }

    fn grad_h(&self, theta: &Vector) -> Vector {
        let norm = theta.norm();
        if norm <= self.lambda * self.radius {
            theta.scale(1.0 / self.lambda)
        } else {
            theta.scale(self.radius / norm)
        }
    }

    /// Bregman divergence of the conjugate.
    fn bregman(&self, a: &Vector, b: &Vector) -> f64 {
        self.h(a) - self.h(b) - self.grad_h(b).dot(&a.sub(b))
    }

    /// a * V_h(-l_new / a, -l_old / a) at finite a; used by the recursion
    /// when delta > 0 and by tests probing the a -> 0+ limit.
    pub fn scaled_bregman(&self, a: f64, l_new: &Vector, l_old: &Vector) -> f64 {
        debug_assert!(a > 0.0);
        a * self.bregman(&l_new.scale(-1.0 / a), &l_old.scale(-1.0 / a))
    }

    /// Closed-form limit of `scaled_bregman` as a -> 0+:
    /// B (||l_new|| - <l_old / ||l_old||, l_new>), with the second term
    /// dropped when l_old = 0.
    pub fn limit_bregman(&self, l_new: &Vector, l_old: &Vector) -> f64 {
        let old_norm = l_old.norm();
        if old_norm == 0.0 {
            self.radius * l_new.norm()
        } else {
            self.radius * (l_new.norm() - l_old.dot(l_new) / old_norm)
        }
    }

    /// Observes the gradient of the current round and advances.
    pub fn step(&mut self, grad: &Vector) {
        let l_new = self.l_cum.add_scaled(1.0, grad);
        let increment = if self.delta == 0.0 {
            self.limit_bregman(&l_new, &self.l_cum)
        } else {
            self.scaled_bregman(self.delta, &l_new, &self.l_cum)
        };
        // The Bregman increment is nonnegative by convexity; guard the
        // invariant against floating-point noise.
        self.delta += increment.max(0.0);
        self.l_cum = l_new;
        self.x = self.argmin();
    }

    /// argmin over the ball of <L, x> + Delta lambda ||x||^2 / 2.
    fn argmin(&self) -> Vector {
        let norm = self.l_cum.norm();
        if norm == 0.0 {
            return Vector::zeros(self.l_cum.dim());
        }
        let scale = if self.delta > 0.0 {
            (norm / (self.delta * self.lambda)).min(self.radius)
        } else {
            self.radius
        };
        self.l_cum.scale(-scale / norm)
    }
}
