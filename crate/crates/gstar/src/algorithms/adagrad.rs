//! Norm-adaptive projected gradient descent: the step size is
//! alpha / sqrt(sum of squared observed gradient norms), and rounds
//! with a zero gradient are skipped so the running sum only grows on
//! informative rounds.

use crate::set::ConstraintSet;
use crate::vector::Vector;

#[derive(Debug, Clone)]
pub struct AdaGradNormState {
    pub x: Vector,
    pub alpha: f64,
    /// Running sum of squared gradient norms; nondecreasing.
    pub sum_sq: f64,
}

impl AdaGradNormState {
    pub fn new(x1: Vector, alpha: f64, set: &ConstraintSet) -> Self {
        assert!(alpha > 0.0 && alpha.is_finite(), "alpha must be positive");
        Self {
            x: set.project(&x1),
            alpha,
            sum_sq: 0.0,
        }
    }

    /// Current learning rate, before observing the next gradient.
    /// Infinite until a nonzero gradient has been seen.
    pub fn eta(&self) -> f64 {
        self.alpha / self.sum_sq.sqrt()
    }

    /// Observes a gradient and advances. Zero gradients leave the state
    /// untouched.
    pub fn step(&mut self, grad: &Vector, set: &ConstraintSet) {
        let gns = grad.norm_sq();
        if gns == 0.0 {
            return;
        }
        self.sum_sq += gns;
        let eta = self.alpha / self.sum_sq.sqrt();
        let moved = self.x.add_scaled(-eta, grad);
        self.x = set.project(&moved);
    }

    /// Unconstrained variant used by the interpolation analysis.
    pub fn step_unconstrained(&mut self, grad: &Vector) {
        let gns = grad.norm_sq();
        if gns == 0.0 {
            return;
        }
        self.sum_sq += gns;
        let eta = self.alpha / self.sum_sq.sqrt();
        self.x = self.x.add_scaled(-eta, grad);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_skips() {
        let set = ConstraintSet::interval(-1.0, 1.0).unwrap();
        let mut s = AdaGradNormState::new(Vector::new(vec![0.5]).unwrap(), 1.0, &set);
        s.step(&Vector::zeros(1), &set);
        assert_eq!(s.sum_sq, 0.0);
        assert_eq!(s.x.as_slice(), &[0.5]);
    }

    #[test]
    fn first_step_hand_simulation() {
        // x = 0, grad = -1, alpha = sqrt(2): raw step to sqrt(2), clipped to 1.
        let set = ConstraintSet::interval(-1.0, 1.0).unwrap();
        let mut s = AdaGradNormState::new(Vector::zeros(1), 2f64.sqrt(), &set);
        s.step(&Vector::new(vec![-1.0]).unwrap(), &set);
        assert_eq!(s.sum_sq, 1.0);
        assert_eq!(s.x.as_slice(), &[1.0]);
    }

    #[test]
    fn step_sizes_decay_with_running_sum() {
        // Two unit gradients: eta_1 = alpha, eta_2 = alpha / sqrt(2).
        let set = ConstraintSet::centered_ball(1, 100.0).unwrap();
        let alpha = 0.3;
        let mut s = AdaGradNormState::new(Vector::zeros(1), alpha, &set);
        let g = Vector::new(vec![1.0]).unwrap();
        s.step(&g, &set);
        let after_one = s.x[0];
        assert!((after_one + alpha).abs() < 1e-15);
        s.step(&g, &set);
        assert!((s.x[0] - (after_one - alpha / 2f64.sqrt())).abs() < 1e-15);
    }
}
