//! Offline hindsight oracle: the comparator x*, the problem-dependent
//! quantities (small-loss measure, cumulative squared gradient norm at
//! the comparator, path length), the per-round regret ledger and a 1-D
//! gradient-variation diagnostic.
//!
//! The solver is plain projected gradient on the average loss with a
//! fixed step; non-convergence is reported through `solver_residual`,
//! never silently. A grid-search oracle validates it in dimensions
//! one and two.

use thiserror::Error;

use crate::loss::LossFn;
use crate::set::ConstraintSet;
use crate::vector::Vector;

#[derive(Debug, Error)]
pub enum HindsightError {
    #[error("at least one loss is required")]
    EmptyLossSequence,
    #[error("loss dimension {got} does not match set dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("brute-force oracle supports dimensions 1 and 2, got {0}")]
    DimensionTooHigh(usize),
    #[error("gradient-variation diagnostic is 1-D only, got dimension {0}")]
    NotOneDimensional(usize),
}

/// Result of a hindsight solve: the comparator and the statistics the
/// regret bounds depend on.
#[derive(Debug, Clone)]
pub struct HindsightReport {
    pub x_star: Vector,
    /// Cumulative recentered loss at x*; absent when some loss has no
    /// global infimum (linear losses), in which case every small-loss
    /// audit is reported "not applicable" rather than fabricated.
    pub l_star: Option<f64>,
    /// Cumulative squared gradient norm at x*.
    pub g_star: f64,
    /// Final projected-gradient-mapping norm (solver) or grid cell size
    /// (brute force). Large values flag non-convergence.
    pub solver_residual: f64,
    pub iterations: usize,
}

const MAX_SOLVER_ITERS: usize = 1_000_000;

/// Minimizes the cumulative loss over the set by projected gradient
/// descent on the average loss, step 1/L, until the gradient-mapping
/// norm falls below `tol` (default 1e-10 if non-positive).
pub fn solve_hindsight(
    losses: &[LossFn],
    set: &ConstraintSet,
    tol: f64,
) -> Result<HindsightReport, HindsightError> {
    validate(losses, set)?;
    let tol = if tol > 0.0 { tol } else { 1e-10 };
    let t = losses.len() as f64;
    let dim = set.dim();
    let l_avg: f64 = losses.iter().map(|l| l.smoothness(set)).sum::<f64>() / t;

    let mut x = set.center().as_slice().to_vec();
    let mut grad = vec![0.0; dim];
    let mut next = vec![0.0; dim];

    let (residual, iterations) = if l_avg == 0.0 {
        // All losses linear (or constant): the average gradient is a
        // constant vector and the minimizer has a closed form.
        average_grad(losses, &x, &mut grad);
        x = argmin_linear(set, &grad).as_slice().to_vec();
        (0.0, 0)
    } else {
        let step = 1.0 / l_avg;
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < MAX_SOLVER_ITERS {
            average_grad(losses, &x, &mut grad);
            for i in 0..dim {
                next[i] = x[i] - step * grad[i];
            }
            set.project_in_place(&mut next);
            let mut gm_sq = 0.0;
            for i in 0..dim {
                let gm = (x[i] - next[i]) / step;
                gm_sq += gm * gm;
            }
            x.copy_from_slice(&next);
            iterations += 1;
            residual = gm_sq.sqrt();
            if residual <= tol {
                break;
            }
        }
        (residual, iterations)
    };

    let x_star = Vector::new(x).expect("solver iterates stay finite");
    Ok(report_at(losses, x_star, residual, iterations))
}

/// Exhaustive grid minimization of the cumulative loss, dimensions 1-2.
/// Independent of the projected-gradient path; used to validate it.
pub fn brute_force_hindsight(
    losses: &[LossFn],
    set: &ConstraintSet,
    grid_points: usize,
) -> Result<HindsightReport, HindsightError> {
    validate(losses, set)?;
    let dim = set.dim();
    if dim > 2 {
        return Err(HindsightError::DimensionTooHigh(dim));
    }
    let grid_points = grid_points.max(2);

    let cumulative = |x: &Vector| -> f64 { losses.iter().map(|l| l.value(x)).sum() };

    let mut best: Option<(f64, Vector)> = None;
    let mut consider = |x: Vector| {
        let v = cumulative(&x);
        if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
            best = Some((v, x));
        }
    };

    let cell;
    match (set, dim) {
        (ConstraintSet::Box { lower, upper }, 1) => {
            let (lo, hi) = (lower[0], upper[0]);
            cell = (hi - lo) / (grid_points - 1) as f64;
            for k in 0..grid_points {
                let x = lo + (hi - lo) * k as f64 / (grid_points - 1) as f64;
                consider(Vector::new(vec![x]).unwrap());
            }
        }
        (ConstraintSet::Ball { center, radius }, 1) => {
            let (lo, hi) = (center[0] - radius, center[0] + radius);
            cell = (hi - lo) / (grid_points - 1) as f64;
            for k in 0..grid_points {
                let x = lo + (hi - lo) * k as f64 / (grid_points - 1) as f64;
                consider(Vector::new(vec![x]).unwrap());
            }
        }
        (_, _) => {
            // 2-D: grid over the bounding box, keeping feasible points and
            // projecting the rest onto the set so boundary minima are seen.
            let side = (grid_points as f64).sqrt().ceil() as usize;
            let (b0, b1) = bounding_box_2d(set);
            cell = ((b1.0 - b0.0) / (side - 1) as f64).max((b1.1 - b0.1) / (side - 1) as f64);
            for i in 0..side {
                for j in 0..side {
                    let p = Vector::new(vec![
                        b0.0 + (b1.0 - b0.0) * i as f64 / (side - 1) as f64,
                        b0.1 + (b1.1 - b0.1) * j as f64 / (side - 1) as f64,
                    ])
                    .unwrap();
                    consider(set.project(&p));
                }
            }
        }
    }

    let (_, x_star) = best.expect("grid contains at least one point");
    Ok(report_at(losses, x_star, cell, grid_points))
}

fn bounding_box_2d(set: &ConstraintSet) -> ((f64, f64), (f64, f64)) {
    match set {
        ConstraintSet::Ball { center, radius } => (
            (center[0] - radius, center[1] - radius),
            (center[0] + radius, center[1] + radius),
        ),
        ConstraintSet::Box { lower, upper } => ((lower[0], lower[1]), (upper[0], upper[1])),
    }
}

fn validate(losses: &[LossFn], set: &ConstraintSet) -> Result<(), HindsightError> {
    if losses.is_empty() {
        return Err(HindsightError::EmptyLossSequence);
    }
    for l in losses {
        if l.dim() != set.dim() {
            return Err(HindsightError::DimensionMismatch {
                expected: set.dim(),
                got: l.dim(),
            });
        }
    }
    Ok(())
}

fn average_grad(losses: &[LossFn], x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    let scale = 1.0 / losses.len() as f64;
    for l in losses {
        l.add_grad_scaled(x, scale, out);
    }
}

/// argmin over the set of <g, x>, closed form per set shape.
fn argmin_linear(set: &ConstraintSet, g: &[f64]) -> Vector {
    match set {
        ConstraintSet::Ball { center, radius } => {
            let norm = crate::vector::norm_sq(g).sqrt();
            if norm == 0.0 {
                center.clone()
            } else {
                let entries = center
                    .as_slice()
                    .iter()
                    .zip(g)
                    .map(|(c, gi)| c - radius * gi / norm)
                    .collect();
                Vector::new(entries).unwrap()
            }
        }
        ConstraintSet::Box { lower, upper } => {
            let entries = g
                .iter()
                .zip(lower.as_slice())
                .zip(upper.as_slice())
                .map(|((gi, lo), hi)| if *gi >= 0.0 { *lo } else { *hi })
                .collect();
            Vector::new(entries).unwrap()
        }
    }
}

fn report_at(
    losses: &[LossFn],
    x_star: Vector,
    solver_residual: f64,
    iterations: usize,
) -> HindsightReport {
    let g_star = cumulative_grad_norm_sq(losses, &x_star);
    let l_star = recentered_cumulative_loss(losses, &x_star);
    HindsightReport {
        x_star,
        l_star,
        g_star,
        solver_residual,
        iterations,
    }
}

/// Sum over rounds of ||grad l_t(x)||^2.
pub fn cumulative_grad_norm_sq(losses: &[LossFn], x: &Vector) -> f64 {
    losses.iter().map(|l| l.grad_norm_sq(x)).sum()
}

/// Sum over rounds of l_t(x) - inf l_t; `None` when any loss lacks a
/// global infimum.
pub fn recentered_cumulative_loss(losses: &[LossFn], x: &Vector) -> Option<f64> {
    let mut total = 0.0;
    for l in losses {
        total += l.value(x) - l.infimum()?;
    }
    Some(total)
}

pub fn cumulative_loss(losses: &[LossFn], x: &Vector) -> f64 {
    losses.iter().map(|l| l.value(x)).sum()
}

/// Summed worst-case squared change of consecutive gradients over a 1-D
/// set, maximized on a grid per round. Diagnostic for the explicit 1-D
/// constructions only.
pub fn gradient_variation_1d(
    losses: &[LossFn],
    set: &ConstraintSet,
    grid_points: usize,
) -> Result<f64, HindsightError> {
    validate(losses, set)?;
    if set.dim() != 1 {
        return Err(HindsightError::NotOneDimensional(set.dim()));
    }
    let grid_points = grid_points.max(2);
    let (lo, hi) = match set {
        ConstraintSet::Box { lower, upper } => (lower[0], upper[0]),
        ConstraintSet::Ball { center, radius } => (center[0] - radius, center[0] + radius),
    };
    let mut total = 0.0;
    for w in losses.windows(2) {
        let mut worst: f64 = 0.0;
        for k in 0..grid_points {
            let x = Vector::new(vec![lo + (hi - lo) * k as f64 / (grid_points - 1) as f64]).unwrap();
            let d = w[1].grad(&x).sub(&w[0].grad(&x)).norm_sq();
            worst = worst.max(d);
        }
        total += worst;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Per-round trace
// ---------------------------------------------------------------------------

/// One played round: the decision, its loss and the squared gradient
/// norm at the decision.
#[derive(Debug, Clone)]
pub struct Round {
    pub x: Vector,
    pub loss: f64,
    pub grad_norm_sq: f64,
}

/// Trace of an online run, sufficient to recompute every cumulative
/// statistic the audits use.
#[derive(Debug, Clone, Default)]
pub struct RegretLedger {
    rounds: Vec<Round>,
}

impl RegretLedger {
    pub fn with_capacity(t: usize) -> Self {
        Self {
            rounds: Vec::with_capacity(t),
        }
    }

    pub fn record(&mut self, x: Vector, loss: f64, grad_norm_sq: f64) {
        self.rounds.push(Round {
            x,
            loss,
            grad_norm_sq,
        });
    }

    pub fn record_round(&mut self, loss_fn: &LossFn, x: Vector) {
        let loss = loss_fn.value(&x);
        let gns = loss_fn.grad_norm_sq(&x);
        self.record(x, loss, gns);
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn iterate(&self, t: usize) -> &Vector {
        &self.rounds[t].x
    }

    pub fn first_iterate(&self) -> &Vector {
        &self.rounds[0].x
    }

    /// Sum of realized per-round losses.
    pub fn player_loss(&self) -> f64 {
        self.rounds.iter().map(|r| r.loss).sum()
    }

    /// Sum over rounds of ||grad l_t(x^t)||^2 along the realized path.
    pub fn realized_grad_norm_sq(&self) -> f64 {
        self.rounds.iter().map(|r| r.grad_norm_sq).sum()
    }

    /// Static regret against a fixed comparator.
    pub fn regret(&self, losses: &[LossFn], comparator: &Vector) -> f64 {
        assert_eq!(losses.len(), self.rounds.len(), "trace/loss length mismatch");
        self.player_loss() - cumulative_loss(losses, comparator)
    }

    /// Dynamic regret against a comparator path.
    pub fn dynamic_regret(&self, losses: &[LossFn], path: &ComparatorPath) -> f64 {
        assert_eq!(losses.len(), self.rounds.len(), "trace/loss length mismatch");
        assert_eq!(path.len(), self.rounds.len(), "trace/path length mismatch");
        let comparator_loss: f64 = losses
            .iter()
            .zip(path.points())
            .map(|(l, x)| l.value(x))
            .sum();
        self.player_loss() - comparator_loss
    }

    /// Replays the stored iterates through the losses and returns the
    /// worst relative disagreement with the stored per-round values.
    pub fn replay_error(&self, losses: &[LossFn]) -> f64 {
        assert_eq!(losses.len(), self.rounds.len(), "trace/loss length mismatch");
        let mut worst: f64 = 0.0;
        for (l, r) in losses.iter().zip(&self.rounds) {
            let v = l.value(&r.x);
            let g = l.grad_norm_sq(&r.x);
            worst = worst.max(rel_err(v, r.loss)).max(rel_err(g, r.grad_norm_sq));
        }
        worst
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// A comparator sequence with its path length.
#[derive(Debug, Clone)]
pub struct ComparatorPath {
    points: Vec<Vector>,
}

impl ComparatorPath {
    pub fn new(points: Vec<Vector>) -> Self {
        assert!(!points.is_empty(), "comparator path must be non-empty");
        Self { points }
    }

    /// Constant comparator repeated for `t` rounds.
    pub fn constant(x: Vector, t: usize) -> Self {
        Self::new(vec![x; t])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    /// Total movement of the sequence.
    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].dist(&w[0]))
            .sum()
    }

    /// Cumulative squared gradient norm along the path.
    pub fn grad_norm_sq_along(&self, losses: &[LossFn]) -> f64 {
        assert_eq!(losses.len(), self.points.len(), "path/loss length mismatch");
        losses
            .iter()
            .zip(&self.points)
            .map(|(l, x)| l.grad_norm_sq(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures;

    #[test]
    fn case3_closed_forms_at_t7() {
        let fx = fixtures::prop1_case3(7).unwrap();
        let report = solve_hindsight(&fx.losses, &fx.set, 1e-12).unwrap();
        let expect_x = 14.0 / 17.0;
        let expect_l = 56.0 / 17.0;
        let expect_g = 948.0 / 2023.0;
        assert!((report.x_star[0] - expect_x).abs() / expect_x < 1e-8);
        assert!((report.l_star.unwrap() - expect_l).abs() / expect_l < 1e-8);
        assert!((report.g_star - expect_g).abs() / expect_g < 1e-8);
        assert!(report.solver_residual <= 1e-12);
        // Same numbers from the fixture's own closed forms.
        assert!((fx.x_star[0] - expect_x).abs() < 1e-15);
        assert!((fx.l_star.unwrap() - expect_l).abs() < 1e-12);
        assert!((fx.g_star.unwrap() - expect_g).abs() < 1e-12);
    }

    #[test]
    fn case4_interpolates_exactly() {
        let fx = fixtures::prop1_case4(12);
        let report = solve_hindsight(&fx.losses, &fx.set, 1e-12).unwrap();
        assert!((report.x_star[0] - 1.0).abs() < 1e-10);
        assert!(report.l_star.unwrap().abs() < 1e-10);
        assert!(report.g_star.abs() < 1e-10);
    }

    #[test]
    fn single_linear_loss_has_boundary_minimizer_and_no_l_star() {
        let losses = vec![LossFn::linear(Vector::new(vec![1.0]).unwrap())];
        let set = ConstraintSet::interval(-1.0, 1.0).unwrap();
        let report = solve_hindsight(&losses, &set, 1e-10).unwrap();
        assert_eq!(report.x_star.as_slice(), &[-1.0]);
        assert!(report.l_star.is_none());
        assert!((report.g_star - 1.0).abs() < 1e-15);
    }

    #[test]
    fn brute_force_agrees_with_solver_on_case3() {
        let fx = fixtures::prop1_case3(7).unwrap();
        let solved = solve_hindsight(&fx.losses, &fx.set, 1e-12).unwrap();
        let grid = brute_force_hindsight(&fx.losses, &fx.set, 100_000).unwrap();
        assert!((solved.x_star[0] - grid.x_star[0]).abs() <= 2.0 * grid.solver_residual);
        let l1 = solved.l_star.unwrap();
        let l2 = grid.l_star.unwrap();
        assert!((l1 - l2).abs() / l1 < 1e-4);
        assert!((solved.g_star - grid.g_star).abs() / solved.g_star < 1e-4);
    }

    #[test]
    fn brute_force_case4_hits_exact_minimizer() {
        let fx = fixtures::prop1_case4(8);
        // A grid over [-1, 1] with an odd point count contains x = 1.
        let grid = brute_force_hindsight(&fx.losses, &fx.set, 100_001).unwrap();
        assert_eq!(grid.x_star.as_slice(), &[1.0]);
        assert_eq!(grid.l_star.unwrap(), 0.0);
        assert_eq!(grid.g_star, 0.0);
    }

    #[test]
    fn brute_force_constant_losses_any_point_optimal() {
        // Zero data vector makes the loss constant; the grid minimum is
        // the constant with zero spread.
        let losses =
            vec![LossFn::lp_regression(Vector::new(vec![0.0]).unwrap(), 2.0, 2.0).unwrap(); 3];
        let set = ConstraintSet::interval(-1.0, 1.0).unwrap();
        let grid = brute_force_hindsight(&losses, &set, 101).unwrap();
        assert_eq!(grid.l_star.unwrap(), 0.0);
        assert_eq!(grid.g_star, 0.0);
        let spread = cumulative_loss(&losses, &Vector::new(vec![-1.0]).unwrap())
            - cumulative_loss(&losses, &grid.x_star);
        assert_eq!(spread, 0.0);
    }

    #[test]
    fn brute_force_rejects_high_dimension() {
        let losses = vec![LossFn::linear(Vector::zeros(3).add_scaled(1.0, &Vector::new(vec![1.0, 0.0, 0.0]).unwrap()))];
        let set = ConstraintSet::centered_ball(3, 1.0).unwrap();
        assert!(matches!(
            brute_force_hindsight(&losses, &set, 100),
            Err(HindsightError::DimensionTooHigh(3))
        ));
    }

    #[test]
    fn gradient_variation_case3_is_small() {
        for t in [7usize, 15, 49] {
            let fx = fixtures::prop1_case3(t).unwrap();
            let vt = gradient_variation_1d(&fx.losses, &fx.set, 10_000).unwrap();
            assert!(vt <= 4.0 / t as f64 + 1e-12, "V_T = {vt} at T = {t}");
        }
    }

    #[test]
    fn gradient_variation_case4_is_linear_in_t() {
        let t = 49;
        let fx = fixtures::prop1_case4(t);
        let vt = gradient_variation_1d(&fx.losses, &fx.set, 10_000).unwrap();
        // Exact value 9(T-1)/4, attained at x = -1 which the grid contains.
        let exact = 9.0 * (t as f64 - 1.0) / 4.0;
        assert!((vt - exact).abs() / exact < 1e-6);
        let ratio = vt / t as f64;
        assert!(ratio > 1.9 && ratio < 2.25, "V_T / T = {ratio}");
    }

    #[test]
    fn identical_consecutive_losses_have_zero_variation() {
        let l = LossFn::quadratic_residual(1.0, 0.5).unwrap();
        let losses = vec![l.clone(), l.clone(), l];
        let set = ConstraintSet::interval(-1.0, 1.0).unwrap();
        assert_eq!(gradient_variation_1d(&losses, &set, 1000).unwrap(), 0.0);
    }

    #[test]
    fn ledger_replay_is_consistent() {
        let fx = fixtures::prop1_case3(7).unwrap();
        let mut ledger = RegretLedger::with_capacity(7);
        for (i, l) in fx.losses.iter().enumerate() {
            let x = Vector::new(vec![-1.0 + 0.25 * i as f64]).unwrap();
            ledger.record_round(l, x);
        }
        assert!(ledger.replay_error(&fx.losses) <= 1e-9);
        let comparator = Vector::new(vec![14.0 / 17.0]).unwrap();
        let direct: f64 = ledger.player_loss() - cumulative_loss(&fx.losses, &comparator);
        assert!((ledger.regret(&fx.losses, &comparator) - direct).abs() < 1e-12);
    }

    #[test]
    fn path_length_telescopes() {
        let path = ComparatorPath::new(vec![
            Vector::new(vec![0.0]).unwrap(),
            Vector::new(vec![0.5]).unwrap(),
            Vector::new(vec![0.5]).unwrap(),
            Vector::new(vec![-0.5]).unwrap(),
        ]);
        assert!((path.path_length() - 1.5).abs() < 1e-15);
    }
}
