//! Closed-form 1-D instance families used as exact oracles: the two
//! quadratic constructions with known comparator, small-loss and
//! gradient-norm values, and the vanishing-curvature regression family
//! with known scaling exponents.

use crate::loss::LossFn;
use crate::set::ConstraintSet;
use crate::vector::Vector;
use crate::CoreError;

/// A 1-D instance with closed-form hindsight quantities.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub losses: Vec<LossFn>,
    pub set: ConstraintSet,
    pub x_star: Vector,
    pub l_star: Option<f64>,
    pub g_star: Option<f64>,
}

/// Losses (a_t x - 1)^2 / 2 on [-1, 1] with a_t = 1/2 - (t-1)/T and odd
/// T = 2K + 1, K >= 3. Closed forms:
/// x* = 6T / (T^2 + 2), L* = T (T^2 - 1) / (2 (T^2 + 2)),
/// G* = (-32 + 60 T^2 - 33 T^4 + 5 T^6) / (60 T (2 + T^2)^2).
pub fn prop1_case3(t: usize) -> Result<Fixture, CoreError> {
    if t < 7 || t % 2 == 0 {
        return Err(CoreError::InvalidLoss(format!(
            "this construction needs odd T = 2K + 1 with K >= 3, got {t}"
        )));
    }
    let tf = t as f64;
    let losses = (1..=t)
        .map(|k| {
            let a = 0.5 - (k as f64 - 1.0) / tf;
            LossFn::quadratic_residual(a, 1.0).expect("finite coefficients")
        })
        .collect();
    let x_star = 6.0 * tf / (tf * tf + 2.0);
    let l_star = tf * (tf * tf - 1.0) / (2.0 * (tf * tf + 2.0));
    let g_star = (-32.0 + 60.0 * tf.powi(2) - 33.0 * tf.powi(4) + 5.0 * tf.powi(6))
        / (60.0 * tf * (2.0 + tf * tf).powi(2));
    Ok(Fixture {
        losses,
        set: ConstraintSet::centered_ball(1, 1.0).expect("valid interval"),
        x_star: Vector::new(vec![x_star]).expect("finite"),
        l_star: Some(l_star),
        g_star: Some(g_star),
    })
}

/// Losses (a_t x - b_t)^2 / 2 on [-1, 1] with (a_t, b_t) = (1, 1) for
/// even t and (1/2, 1/2) otherwise; x* = 1 minimizes every loss, so
/// both hindsight measures vanish while the gradient variation grows
/// linearly.
pub fn prop1_case4(t: usize) -> Fixture {
    let losses = (1..=t)
        .map(|k| {
            let (a, b) = if k % 2 == 0 { (1.0, 1.0) } else { (0.5, 0.5) };
            LossFn::quadratic_residual(a, b).expect("finite coefficients")
        })
        .collect();
    Fixture {
        losses,
        set: ConstraintSet::centered_ball(1, 1.0).expect("valid interval"),
        x_star: Vector::new(vec![1.0]).expect("finite"),
        l_star: Some(0.0),
        g_star: Some(0.0),
    }
}

/// Vanishing-curvature regression: losses (a_t x)^2 / 2 on [1, 2] with
/// a_t = t^(-p). The comparator is the boundary point 1, and the
/// hindsight measures scale as T^(1-2p) and T^(1-4p).
pub fn vanishing_curvature(t: usize, p: f64) -> Result<Fixture, CoreError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(CoreError::InvalidLoss(format!(
            "decay exponent must be positive, got {p}"
        )));
    }
    let losses: Vec<LossFn> = (1..=t)
        .map(|k| LossFn::scaled_quadratic((k as f64).powf(-p)).expect("finite scale"))
        .collect();
    let l_star: f64 = (1..=t).map(|k| 0.5 * (k as f64).powf(-2.0 * p)).sum();
    let g_star: f64 = (1..=t).map(|k| (k as f64).powf(-4.0 * p)).sum();
    Ok(Fixture {
        losses,
        set: ConstraintSet::interval(1.0, 2.0).expect("valid interval"),
        x_star: Vector::new(vec![1.0]).expect("finite"),
        l_star: Some(l_star),
        g_star: Some(g_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hindsight::{cumulative_grad_norm_sq, recentered_cumulative_loss};

    #[test]
    fn case3_rational_formula_matches_direct_sums() {
        for t in [7usize, 9, 31, 101] {
            let fx = prop1_case3(t).unwrap();
            let direct_g = cumulative_grad_norm_sq(&fx.losses, &fx.x_star);
            let direct_l = recentered_cumulative_loss(&fx.losses, &fx.x_star).unwrap();
            let g = fx.g_star.unwrap();
            let l = fx.l_star.unwrap();
            assert!((direct_g - g).abs() / g < 1e-12, "G* mismatch at T = {t}");
            assert!((direct_l - l).abs() / l < 1e-12, "L* mismatch at T = {t}");
        }
    }

    #[test]
    fn case3_rejects_even_or_short_horizons() {
        assert!(prop1_case3(6).is_err());
        assert!(prop1_case3(5).is_err());
        assert!(prop1_case3(7).is_ok());
    }

    #[test]
    fn case4_measures_vanish() {
        let fx = prop1_case4(20);
        assert_eq!(cumulative_grad_norm_sq(&fx.losses, &fx.x_star), 0.0);
        assert_eq!(
            recentered_cumulative_loss(&fx.losses, &fx.x_star).unwrap(),
            0.0
        );
    }

    #[test]
    fn vanishing_curvature_sums() {
        let fx = vanishing_curvature(3, 0.25).unwrap();
        let expect_l = 0.5 * (1.0 + 2f64.powf(-0.5) + 3f64.powf(-0.5));
        let expect_g = 1.0 + 0.5 + 1.0 / 3.0;
        assert!((fx.l_star.unwrap() - expect_l).abs() < 1e-12);
        assert!((fx.g_star.unwrap() - expect_g).abs() < 1e-12);
    }
}
