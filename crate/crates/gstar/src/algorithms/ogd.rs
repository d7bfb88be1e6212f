//! Projected online gradient descent with a constant learning rate.

use crate::set::ConstraintSet;
use crate::vector::Vector;

#[derive(Debug, Clone)]
pub struct OgdState {
    pub x: Vector,
    pub eta: f64,
}

impl OgdState {
    /// Starts from `x1` (projected onto the set) with learning rate `eta > 0`.
    pub fn new(x1: Vector, eta: f64, set: &ConstraintSet) -> Self {
        assert!(eta > 0.0 && eta.is_finite(), "learning rate must be positive");
        Self {
            x: set.project(&x1),
            eta,
        }
    }

    /// x <- project(x - eta * grad).
    pub fn step(&mut self, grad: &Vector, set: &ConstraintSet) {
        let moved = self.x.add_scaled(-self.eta, grad);
        self.x = set.project(&moved);
    }
}
