//! Convex feasible sets with exact Euclidean projection.
//!
//! Two shapes cover everything the learners need: balls (the default
//! experiment domain) and axis-aligned boxes (the 1-D interval fixtures
//! X = [-1, 1] and x in [1, 2]). Projections are closed-form, idempotent
//! and non-expansive.

use serde::{Deserialize, Serialize};

use crate::vector::Vector;
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConstraintSet {
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
}

impl ConstraintSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self, CoreError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CoreError::InvalidSet(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    /// Origin-centered ball, the common case.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self, CoreError> {
        Self::ball(Vector::zeros(dim), radius)
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self, CoreError> {
        if lower.dim() != upper.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: lower.dim(),
                got: upper.dim(),
            });
        }
        if lower
            .as_slice()
            .iter()
            .zip(upper.as_slice())
            .any(|(l, u)| l > u)
        {
            return Err(CoreError::InvalidSet(
                "box lower bound exceeds upper bound".into(),
            ));
        }
        Ok(Self::Box { lower, upper })
    }

    /// The interval [lo, hi] as a 1-D box.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, CoreError> {
        Self::boxed(Vector::from_slice(&[lo])?, Vector::from_slice(&[hi])?)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.dim(),
            Self::Box { lower, .. } => lower.dim(),
        }
    }

    /// Euclidean diameter: 2r for balls, ||upper - lower|| for boxes.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => 2.0 * radius,
            Self::Box { lower, upper } => upper.dist(lower),
        }
    }

    /// A canonical interior point: the ball center or box midpoint.
    pub fn center(&self) -> Vector {
        match self {
            Self::Ball { center, .. } => center.clone(),
            Self::Box { lower, upper } => lower.add_scaled(1.0, upper).scale(0.5),
        }
    }

    /// Orthogonal projection onto the set.
    ///
    /// Panics on dimension mismatch.
    pub fn project(&self, x: &Vector) -> Vector {
        let mut out: Vec<f64> = x.as_slice().to_vec();
        self.project_in_place(&mut out);
        Vector::new(out).expect("projection of finite point is finite")
    }

    pub(crate) fn project_in_place(&self, x: &mut [f64]) {
        assert_eq!(self.dim(), x.len(), "dimension mismatch in project");
        match self {
            Self::Ball { center, radius } => {
                let c = center.as_slice();
                let mut dist_sq = 0.0;
                for (xi, ci) in x.iter().zip(c) {
                    dist_sq += (xi - ci) * (xi - ci);
                }
                let dist = dist_sq.sqrt();
                if dist > *radius {
                    let scale = radius / dist;
                    for (xi, ci) in x.iter_mut().zip(c) {
                        *xi = ci + (*xi - ci) * scale;
                    }
                }
            }
            Self::Box { lower, upper } => {
                for ((xi, lo), hi) in x.iter_mut().zip(lower.as_slice()).zip(upper.as_slice()) {
                    *xi = xi.max(*lo).min(*hi);
                }
            }
        }
    }

    /// Whether `x` lies in the set up to distance `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.project(x).dist(x) <= tol
    }

    /// The set grown by `margin` in every direction. Bandit query points
    /// x +- mu*s may leave the feasible set; smoothness constants for the
    /// second-moment bound are taken over this inflated set.
    pub fn inflate(&self, margin: f64) -> Self {
        assert!(margin >= 0.0);
        match self {
            Self::Ball { center, radius } => Self::Ball {
                center: center.clone(),
                radius: radius + margin,
            },
            Self::Box { lower, upper } => Self::Box {
                lower: lower.as_slice().iter().map(|l| l - margin).collect::<Vec<_>>().try_into().unwrap(),
                upper: upper.as_slice().iter().map(|u| u + margin).collect::<Vec<_>>().try_into().unwrap(),
            },
        }
    }

    /// Range of the linear functional <a, .> over the set, as (min, max).
    /// Used for smoothness constants of losses of the form phi(<a, x>).
    pub(crate) fn linear_range(&self, a: &[f64]) -> (f64, f64) {
        assert_eq!(self.dim(), a.len(), "dimension mismatch in linear_range");
        match self {
            Self::Ball { center, radius } => {
                let mid = crate::vector::dot(a, center.as_slice());
                let half = radius * crate::vector::norm_sq(a).sqrt();
                (mid - half, mid + half)
            }
            Self::Box { lower, upper } => {
                let mut lo = 0.0;
                let mut hi = 0.0;
                for ((ai, l), u) in a.iter().zip(lower.as_slice()).zip(upper.as_slice()) {
                    if *ai >= 0.0 {
                        lo += ai * l;
                        hi += ai * u;
                    } else {
                        lo += ai * u;
                        hi += ai * l;
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Farthest distance from `x` to a point of the set. Exact for balls;
    /// for boxes it is the distance to the farthest corner.
    pub(crate) fn max_dist(&self, x: &Vector) -> f64 {
        assert_eq!(self.dim(), x.dim(), "dimension mismatch in max_dist");
        match self {
            Self::Ball { center, radius } => x.dist(center) + radius,
            Self::Box { lower, upper } => {
                let mut sq = 0.0;
                for ((xi, l), u) in x.as_slice().iter().zip(lower.as_slice()).zip(upper.as_slice())
                {
                    let d = (xi - l).abs().max((xi - u).abs());
                    sq += d * d;
                }
                sq.sqrt()
            }
        }
    }
}
