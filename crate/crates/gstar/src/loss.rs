//! The concrete loss library: smooth convex losses with closed-form
//! gradients, per-set smoothness constants and (where defined) global
//! infima.
//!
//! Every loss is globally defined on R^n. Smoothness constants for the
//! l_p (p > 2) and exponential losses are unbounded over R^n, so
//! `smoothness` reports a constant valid on the given feasible set
//! (a Hessian bound over the set); the quadratic and cross-entropy
//! losses have global constants.

use serde::{Deserialize, Serialize};

use crate::set::ConstraintSet;
use crate::vector::{dot, norm_sq, Vector};
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossFn {
    /// l(x) = |<a, x> - b|^p / p with p >= 2.
    LpRegression { a: Vector, b: f64, p: f64 },
    /// l(x) = log(1 + exp(-y <a, x>)) with label y in {-1, +1}.
    CrossEntropy { a: Vector, y: f64 },
    /// l(x) = exp(-<a, x>).
    Exponential { a: Vector },
    /// l(x) = (a x)^2 / 2, one-dimensional.
    ScaledQuadratic { a: f64 },
    /// l(x) = (a x - b)^2 / 2, one-dimensional.
    QuadraticResidual { a: f64, b: f64 },
    /// l(x) = <g, x>.
    Linear { g: Vector },
    /// l(x) = ||x - center||^2 / 2.
    SquaredDistance { center: Vector },
}

impl LossFn {
    pub fn lp_regression(a: Vector, b: f64, p: f64) -> Result<Self, CoreError> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(CoreError::InvalidLoss(format!("lp exponent must be >= 2, got {p}")));
        }
        if !b.is_finite() {
            return Err(CoreError::InvalidLoss("lp target must be finite".into()));
        }
        Ok(Self::LpRegression { a, b, p })
    }

    pub fn cross_entropy(a: Vector, y: f64) -> Result<Self, CoreError> {
        if y != 1.0 && y != -1.0 {
            return Err(CoreError::InvalidLoss(format!("label must be +1 or -1, got {y}")));
        }
        Ok(Self::CrossEntropy { a, y })
    }

    pub fn exponential(a: Vector) -> Self {
        Self::Exponential { a }
    }

    pub fn scaled_quadratic(a: f64) -> Result<Self, CoreError> {
        if !a.is_finite() {
            return Err(CoreError::InvalidLoss("scale must be finite".into()));
        }
        Ok(Self::ScaledQuadratic { a })
    }

    pub fn quadratic_residual(a: f64, b: f64) -> Result<Self, CoreError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(CoreError::InvalidLoss("coefficients must be finite".into()));
        }
        Ok(Self::QuadraticResidual { a, b })
    }

    pub fn linear(g: Vector) -> Self {
        Self::Linear { g }
    }

    pub fn squared_distance(center: Vector) -> Self {
        Self::SquaredDistance { center }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::LpRegression { a, .. } | Self::CrossEntropy { a, .. } | Self::Exponential { a } => a.dim(),
            Self::ScaledQuadratic { .. } | Self::QuadraticResidual { .. } => 1,
            Self::Linear { g } => g.dim(),
            Self::SquaredDistance { center } => center.dim(),
        }
    }

    /// Loss value at `x`. Panics on dimension mismatch.
    pub fn value(&self, x: &Vector) -> f64 {
        self.value_at(x.as_slice())
    }

    pub(crate) fn value_at(&self, x: &[f64]) -> f64 {
        assert_eq!(self.dim(), x.len(), "dimension mismatch in loss value");
        match self {
            Self::LpRegression { a, b, p } => {
                let r = dot(a.as_slice(), x) - b;
                r.abs().powf(*p) / p
            }
            Self::CrossEntropy { a, y } => log1p_exp(-y * dot(a.as_slice(), x)),
            Self::Exponential { a } => (-dot(a.as_slice(), x)).exp(),
            Self::ScaledQuadratic { a } => {
                let u = a * x[0];
                0.5 * u * u
            }
            Self::QuadraticResidual { a, b } => {
                let r = a * x[0] - b;
                0.5 * r * r
            }
            Self::Linear { g } => dot(g.as_slice(), x),
            Self::SquaredDistance { center } => {
                0.5 * x
                    .iter()
                    .zip(center.as_slice())
                    .map(|(xi, ci)| (xi - ci) * (xi - ci))
                    .sum::<f64>()
            }
        }
    }

    /// Gradient at `x`. Panics on dimension mismatch.
    pub fn grad(&self, x: &Vector) -> Vector {
        let mut out = vec![0.0; self.dim()];
        self.add_grad_scaled(x.as_slice(), 1.0, &mut out);
        Vector::new(out).expect("gradient of finite loss is finite")
    }

    /// Squared gradient norm at `x`, without allocating.
    pub fn grad_norm_sq(&self, x: &Vector) -> f64 {
        match self {
            Self::SquaredDistance { center } => x
                .as_slice()
                .iter()
                .zip(center.as_slice())
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum(),
            _ => {
                let c = self.scalar_grad_coeff(x.as_slice());
                c * c * self.data_norm_sq()
            }
        }
    }

    /// Accumulates `scale * grad(x)` into `out`.
    pub(crate) fn add_grad_scaled(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        assert_eq!(self.dim(), x.len(), "dimension mismatch in loss gradient");
        assert_eq!(self.dim(), out.len(), "dimension mismatch in gradient output");
        match self {
            Self::SquaredDistance { center } => {
                for ((o, xi), ci) in out.iter_mut().zip(x).zip(center.as_slice()) {
                    *o += scale * (xi - ci);
                }
            }
            _ => {
                let c = scale * self.scalar_grad_coeff(x);
                let a = self.data_vector();
                for (o, ai) in out.iter_mut().zip(a) {
                    *o += c * ai;
                }
            }
        }
    }

    /// For losses of the form phi(<a, x>), the scalar phi'(<a, x>); the
    /// gradient is that scalar times the data vector.
    fn scalar_grad_coeff(&self, x: &[f64]) -> f64 {
        match self {
            Self::LpRegression { a, b, p } => {
                let r = dot(a.as_slice(), x) - b;
                // phi'(r) = |r|^(p-2) r; for p = 2 this is r itself.
                if *p == 2.0 {
                    r
                } else {
                    r.abs().powf(p - 2.0) * r
                }
            }
            Self::CrossEntropy { a, y } => -y * sigmoid(-y * dot(a.as_slice(), x)),
            Self::Exponential { a } => -(-dot(a.as_slice(), x)).exp(),
            Self::ScaledQuadratic { a } => a * (a * x[0]),
            Self::QuadraticResidual { a, b } => a * (a * x[0] - b),
            Self::Linear { .. } => 1.0,
            Self::SquaredDistance { .. } => unreachable!("not a rank-one loss"),
        }
    }

    fn data_vector(&self) -> &[f64] {
        match self {
            Self::LpRegression { a, .. } | Self::CrossEntropy { a, .. } | Self::Exponential { a } => a.as_slice(),
            Self::ScaledQuadratic { .. } | Self::QuadraticResidual { .. } => &[1.0],
            Self::Linear { g } => g.as_slice(),
            Self::SquaredDistance { .. } => unreachable!("not a rank-one loss"),
        }
    }

    fn data_norm_sq(&self) -> f64 {
        match self {
            Self::LpRegression { a, .. } | Self::CrossEntropy { a, .. } | Self::Exponential { a } => a.norm_sq(),
            Self::ScaledQuadratic { .. } | Self::QuadraticResidual { .. } => 1.0,
            Self::Linear { g } => g.norm_sq(),
            Self::SquaredDistance { .. } => unreachable!("not a rank-one loss"),
        }
    }

    /// A smoothness constant valid on `set` (a Hessian bound over the
    /// set; conservative for curvature attained off the set).
    pub fn smoothness(&self, set: &ConstraintSet) -> f64 {
        match self {
            Self::LpRegression { a, b, p } => {
                if *p == 2.0 {
                    return a.norm_sq();
                }
                let (lo, hi) = set.linear_range(a.as_slice());
                let max_abs_r = (lo - b).abs().max((hi - b).abs());
                (p - 1.0) * a.norm_sq() * max_abs_r.powf(p - 2.0)
            }
            Self::CrossEntropy { a, .. } => a.norm_sq() / 4.0,
            Self::Exponential { a } => {
                let (lo, _) = set.linear_range(a.as_slice());
                a.norm_sq() * (-lo).exp()
            }
            Self::ScaledQuadratic { a } => a * a,
            Self::QuadraticResidual { a, .. } => a * a,
            Self::Linear { .. } => 0.0,
            Self::SquaredDistance { .. } => 1.0,
        }
    }

    /// Global infimum over R^n, when the loss is bounded below with a
    /// known value. Linear losses have none, which is exactly the case
    /// where the small-loss measure is undefined.
    pub fn infimum(&self) -> Option<f64> {
        match self {
            Self::LpRegression { a, b, p } => Some(if a.norm_sq() > 0.0 {
                0.0
            } else {
                b.abs().powf(*p) / p
            }),
            Self::CrossEntropy { a, .. } => Some(if a.norm_sq() > 0.0 { 0.0 } else { 2f64.ln() }),
            Self::Exponential { a } => Some(if a.norm_sq() > 0.0 { 0.0 } else { 1.0 }),
            Self::ScaledQuadratic { .. } => Some(0.0),
            Self::QuadraticResidual { a, b } => {
                Some(if *a != 0.0 { 0.0 } else { 0.5 * b * b })
            }
            Self::Linear { .. } => None,
            Self::SquaredDistance { .. } => Some(0.0),
        }
    }
}

/// Largest smoothness constant over a loss sequence, on the given set.
pub fn max_smoothness(losses: &[LossFn], set: &ConstraintSet) -> f64 {
    losses
        .iter()
        .map(|l| l.smoothness(set))
        .fold(0.0, f64::max)
}

/// log(1 + exp(u)) without overflow.
fn log1p_exp(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// 1 / (1 + exp(-u)) without overflow.
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}
