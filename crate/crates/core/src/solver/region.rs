//! Convex regions (box ∩ linear rows ∩ convex separable rows) and the
//! cutting-plane machinery used to optimize over them.
//!
//! Nonlinear rows are handled by outer approximation: gradient tangents of a
//! convex function underestimate it everywhere, so an LP over any set of
//! tangents is a relaxation and its value is a valid bound even before the
//! loop converges. Feasibility is decided the same way, by minimizing the
//! worst tangent violation.

use crate::mixed::Sense;
use crate::model::SeparableFunction;
use crate::solver::simplex::{solve_lp, LpProblem, LpRow, LpStatus};
use crate::{Error, Result};

/// Tangent-violation threshold at which outer approximation stops.
const OA_TOL: f64 = 1e-9;
/// Feasibility tolerance for membership tests and feasible-point searches.
const FEAS_TOL: f64 = 1e-7;
/// Cut budget per convex row; beyond it the loop reports non-convergence.
const CUTS_PER_ROW: usize = 400;
/// Hard cap on outer-approximation iterations.
const MAX_OA_ITER: usize = 5_000;

/// Outcome of optimizing over a region.
#[derive(Clone, Debug)]
pub enum RegionMin {
    /// The region is empty.
    Infeasible,
    /// A bound was obtained.
    Bounded {
        /// Valid lower bound on the true minimum (exact when `converged`).
        value: f64,
        /// The minimizing point of the final LP relaxation.
        x: Vec<f64>,
        /// Whether the outer approximation closed to within `1e-9`.
        converged: bool,
    },
}

impl RegionMin {
    /// The bound value, or `None` when infeasible.
    pub fn value(&self) -> Option<f64> {
        match self {
            RegionMin::Infeasible => None,
            RegionMin::Bounded { value, .. } => Some(*value),
        }
    }
}

/// A convex feasible set: a finite box, linear rows `a᷀x ≤ b`, and convex
/// separable rows `g(x) ≤ b`.
#[derive(Clone, Debug)]
pub struct ConvexRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
    linear: Vec<(Vec<(usize, f64)>, f64)>,
    convex: Vec<(SeparableFunction, f64)>,
}

impl ConvexRegion {
    /// A plain box region.
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "bound vectors must have equal length");
        ConvexRegion { lower, upper, linear: Vec::new(), convex: Vec::new() }
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.lower.len()
    }

    /// Box lower bounds.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Box upper bounds.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// The linear rows `(coeffs, rhs)` meaning `Σ coeffs·x ≤ rhs`.
    pub fn linear_rows(&self) -> &[(Vec<(usize, f64)>, f64)] {
        &self.linear
    }

    /// The convex nonlinear rows `(g, rhs)` meaning `g(x) ≤ rhs`.
    pub fn convex_rows(&self) -> &[(SeparableFunction, f64)] {
        &self.convex
    }

    /// Whether the region is described by linear rows and bounds alone.
    pub fn is_polyhedral(&self) -> bool {
        self.convex.is_empty()
    }

    /// Add `f(x) ≤ rhs`. Affine functions become linear rows (with the
    /// function constant folded into the right-hand side); anything with a
    /// quadratic term is kept as a convex row.
    pub fn add_constraint(&mut self, f: &SeparableFunction, rhs: f64) {
        if f.is_affine() {
            let coeffs: Vec<(usize, f64)> =
                f.terms.iter().map(|t| (t.var_index, t.lin_coeff)).collect();
            self.linear.push((coeffs, rhs - f.constant));
        } else {
            self.convex.push((f.clone(), rhs));
        }
    }

    /// Add a plain linear row `Σ coeffs·x ≤ rhs`.
    pub fn add_linear_row(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.linear.push((coeffs, rhs));
    }

    /// Membership test within tolerance `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        for j in 0..self.n() {
            if x[j] < self.lower[j] - tol || x[j] > self.upper[j] + tol {
                return false;
            }
        }
        for (coeffs, rhs) in &self.linear {
            let v: f64 = coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            if v > rhs + tol {
                return false;
            }
        }
        for (g, rhs) in &self.convex {
            if g.evaluate(x) > rhs + tol {
                return false;
            }
        }
        true
    }

    /// Gradient tangent of convex row `k` at `x̂`, as an LP row in the
    /// structural variables: `Σ g'ᵢ(x̂)·xᵢ ≤ rhs − g(x̂) + Σ g'ᵢ(x̂)·x̂ᵢ`.
    fn tangent_row(&self, k: usize, xhat: &[f64]) -> (Vec<(usize, f64)>, f64) {
        let (g, rhs) = &self.convex[k];
        let mut coeffs = Vec::with_capacity(g.terms.len());
        let mut shift = rhs - g.evaluate(xhat);
        for t in &g.terms {
            let slope = 2.0 * t.quad_coeff * (xhat[t.var_index] - t.center) + t.lin_coeff;
            coeffs.push((t.var_index, slope));
            shift += slope * xhat[t.var_index];
        }
        (coeffs, shift)
    }

    /// Tangent for violated row `k` expanded at the boundary point between
    /// the row's box minimizer (`anchor`, value `anchor_value`) and `x̂`.
    ///
    /// A supporting hyperplane at the boundary cuts far deeper than a tangent
    /// at the query point, which keeps the cutting-plane loops from tailing
    /// off into hundreds of near-parallel cuts. Falls back to the plain
    /// tangent when no strictly interior anchor exists.
    fn deepened_tangent(
        &self,
        k: usize,
        anchor: &[f64],
        anchor_value: f64,
        xhat: &[f64],
    ) -> (Vec<(usize, f64)>, f64) {
        let (g, rhs) = &self.convex[k];
        if anchor_value >= rhs - 1e-9 {
            return self.tangent_row(k, xhat);
        }
        let point = |s: f64| -> Vec<f64> {
            anchor.iter().zip(xhat).map(|(a, x)| a + s * (x - a)).collect()
        };
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if g.evaluate(&point(mid)) > *rhs {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.tangent_row(k, &point(hi))
    }

    /// Search for a point satisfying every row within `1e-7`.
    ///
    /// Returns `Ok(None)` when the region is proven empty. The search is a
    /// central cutting-plane method: maximize the common margin `σ` on all
    /// convex-row tangents (`tangent(x) + σ ≤ rhs`) over the hard linear
    /// rows. Maximizing the margin keeps each iterate centered away from the
    /// cut boundaries, which converges geometrically where a flat
    /// minimize-the-violation objective would wander; and because tangents
    /// underestimate the true rows, a negative optimal margin proves
    /// emptiness.
    pub fn find_feasible_point(&self) -> Result<Option<Vec<f64>>> {
        let n = self.n();
        // Exact separable minima over the box: a convex row whose box
        // minimum exceeds its right-hand side proves emptiness outright, and
        // the minimizers serve as interior anchors for deepened cuts.
        let mut anchors = Vec::with_capacity(self.convex.len());
        for (g, rhs) in &self.convex {
            let a = separable_argmin(g, &self.lower, &self.upper);
            let v = g.evaluate(&a);
            if v > rhs + FEAS_TOL {
                return Ok(None);
            }
            anchors.push((a, v));
        }
        // Variables: x (boxed), plus the margin variable σ (fixed to zero
        // when there are no convex rows — the LP is then a plain linear
        // feasibility check).
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        let mut objective = vec![0.0; n + 1];
        if self.convex.is_empty() {
            lower.push(0.0);
            upper.push(0.0);
        } else {
            lower.push(-1e12);
            upper.push(1e12);
            objective[n] = -1.0; // LP minimizes; −σ maximizes the margin
        }
        let mut rows: Vec<LpRow> = self
            .linear
            .iter()
            .map(|(coeffs, rhs)| LpRow { coeffs: coeffs.clone(), sense: Sense::Le, rhs: *rhs })
            .collect();
        // Seed one tangent per convex row at the box center.
        let center: Vec<f64> =
            (0..n).map(|j| 0.5 * (self.lower[j] + self.upper[j])).collect();
        for k in 0..self.convex.len() {
            let (mut coeffs, rhs) = self.tangent_row(k, &center);
            coeffs.push((n, 1.0)); // tangent(x) + σ ≤ rhs
            rows.push(LpRow { coeffs, sense: Sense::Le, rhs });
        }

        for _ in 0..MAX_OA_ITER {
            let sol = solve_lp(&LpProblem {
                lower: lower.clone(),
                upper: upper.clone(),
                rows: rows.clone(),
                objective: objective.clone(),
            })?;
            match sol.status {
                LpStatus::Infeasible => return Ok(None),
                LpStatus::Unbounded => {
                    return Err(Error::Numerical(
                        "feasibility subproblem reported unbounded".into(),
                    ))
                }
                LpStatus::Optimal => {}
            }
            let x = &sol.x[..n];
            let (worst, violation) = self.worst_convex_violation(x);
            if violation <= FEAS_TOL {
                return Ok(Some(x.to_vec()));
            }
            if sol.x[n] < -FEAS_TOL {
                // Even the overestimated margin is negative: every point
                // violates some row by more than the tolerance.
                return Ok(None);
            }
            let (anchor, aval) = &anchors[worst];
            let (mut coeffs, rhs) = self.deepened_tangent(worst, anchor, *aval, x);
            coeffs.push((n, 1.0));
            rows.push(LpRow { coeffs, sense: Sense::Le, rhs });
        }
        Err(Error::Numerical("feasibility search did not converge".into()))
    }

    /// Index and size of the most violated convex row at `x` (0, 0.0 when
    /// there are no convex rows).
    fn worst_convex_violation(&self, x: &[f64]) -> (usize, f64) {
        let mut worst = (0usize, f64::NEG_INFINITY);
        if self.convex.is_empty() {
            return (0, 0.0);
        }
        for (k, (g, rhs)) in self.convex.iter().enumerate() {
            let v = g.evaluate(x) - rhs;
            if v > worst.1 {
                worst = (k, v);
            }
        }
        worst
    }

    /// Minimize the linear objective `c᷀x` over the region by outer
    /// approximation. The returned value is always a valid lower bound on
    /// the true minimum; `converged` reports whether it is exact to `1e-9`.
    pub fn minimize_linear(&self, c: &[f64]) -> Result<RegionMin> {
        assert_eq!(c.len(), self.n(), "objective length must match variable count");
        self.oa_minimize(c.to_vec(), None)
    }

    /// Maximize the linear objective `c᷀x`; the value is a valid upper
    /// bound on the true maximum (exact when `converged`).
    pub fn maximize_linear(&self, c: &[f64]) -> Result<RegionMin> {
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        Ok(match self.oa_minimize(neg, None)? {
            RegionMin::Infeasible => RegionMin::Infeasible,
            RegionMin::Bounded { value, x, converged } => {
                RegionMin::Bounded { value: -value, x, converged }
            }
        })
    }

    /// Minimize a convex separable function over the region via its
    /// epigraph. Returns a valid lower bound on the minimum (exact when
    /// `converged`). Errors on non-convex input.
    pub fn minimize_separable(&self, f: &SeparableFunction) -> Result<RegionMin> {
        if f.terms.iter().any(|t| t.quad_coeff < 0.0) {
            return Err(Error::Unsupported(
                "minimize_separable requires a convex function (nonnegative quadratic coefficients)"
                    .into(),
            ));
        }
        if f.is_affine() {
            let mut c = vec![0.0; self.n()];
            for t in &f.terms {
                c[t.var_index] += t.lin_coeff;
            }
            return Ok(match self.oa_minimize(c, None)? {
                RegionMin::Infeasible => RegionMin::Infeasible,
                RegionMin::Bounded { value, x, converged } => {
                    RegionMin::Bounded { value: value + f.constant, x, converged }
                }
            });
        }
        self.oa_minimize(Vec::new(), Some(f))
    }

    /// Shared outer-approximation loop.
    ///
    /// With `epi = None`, minimizes the linear objective `c᷀x`. With
    /// `epi = Some(f)`, minimizes an epigraph variable `t ≥ tangent(f)`,
    /// which yields a valid lower bound on `min f` at every iteration.
    fn oa_minimize(&self, c: Vec<f64>, epi: Option<&SeparableFunction>) -> Result<RegionMin> {
        let n = self.n();
        // Interior anchors and an exact per-row emptiness check, as in
        // `find_feasible_point`.
        let mut anchors = Vec::with_capacity(self.convex.len());
        for (g, rhs) in &self.convex {
            let a = separable_argmin(g, &self.lower, &self.upper);
            let v = g.evaluate(&a);
            if v > rhs + FEAS_TOL {
                return Ok(RegionMin::Infeasible);
            }
            anchors.push((a, v));
        }
        let nvars = if epi.is_some() { n + 1 } else { n };
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        let mut objective = vec![0.0; nvars];
        if let Some(f) = epi {
            // Bound t by the range of f over the box so the first LP is
            // bounded; range_over_box is finite because the box is.
            let (tlo, tup) = range_over_box(f, &self.lower, &self.upper);
            lower.push(tlo);
            upper.push(tup);
            objective[n] = 1.0;
        } else {
            objective[..n].copy_from_slice(&c);
        }

        let mut rows: Vec<LpRow> = self
            .linear
            .iter()
            .map(|(coeffs, rhs)| LpRow { coeffs: coeffs.clone(), sense: Sense::Le, rhs: *rhs })
            .collect();
        let center: Vec<f64> =
            (0..n).map(|j| 0.5 * (self.lower[j] + self.upper[j])).collect();
        let mut cuts_used = vec![0usize; self.convex.len() + 1];
        for k in 0..self.convex.len() {
            let (coeffs, rhs) = self.tangent_row(k, &center);
            rows.push(LpRow { coeffs, sense: Sense::Le, rhs });
            cuts_used[k] += 1;
        }
        if let Some(f) = epi {
            let (coeffs, rhs) = epigraph_tangent(f, &center, n);
            rows.push(LpRow { coeffs, sense: Sense::Le, rhs });
        }

        let mut last: Option<(f64, Vec<f64>)> = None;
        for _ in 0..MAX_OA_ITER {
            let sol = solve_lp(&LpProblem {
                lower: lower.clone(),
                upper: upper.clone(),
                rows: rows.clone(),
                objective: objective.clone(),
            })?;
            match sol.status {
                LpStatus::Infeasible => return Ok(RegionMin::Infeasible),
                LpStatus::Unbounded => {
                    return Err(Error::Numerical("outer approximation LP unbounded".into()))
                }
                LpStatus::Optimal => {}
            }
            let x: Vec<f64> = sol.x[..n].to_vec();
            let bound = sol.objective;
            let (worst, violation) = self.worst_convex_violation(&x);
            // Epigraph gap counts as a violation of `f(x) − t ≤ 0`.
            let epi_gap = epi.map(|f| f.evaluate(&x) - sol.x[n]).unwrap_or(0.0);
            if violation <= OA_TOL && epi_gap <= OA_TOL * (1.0 + bound.abs()) {
                return Ok(RegionMin::Bounded { value: bound, x, converged: true });
            }
            let budget_left = if violation >= epi_gap {
                cuts_used[worst] < CUTS_PER_ROW
            } else {
                cuts_used[self.convex.len()] < CUTS_PER_ROW
            };
            if !budget_left {
                return Ok(RegionMin::Bounded { value: bound, x, converged: false });
            }
            if violation >= epi_gap {
                let (anchor, aval) = &anchors[worst];
                let (coeffs, rhs) = self.deepened_tangent(worst, anchor, *aval, &x);
                rows.push(LpRow { coeffs, sense: Sense::Le, rhs });
                cuts_used[worst] += 1;
            } else {
                let f = epi.expect("epigraph gap implies epigraph mode");
                let (coeffs, rhs) = epigraph_tangent(f, &x, n);
                rows.push(LpRow { coeffs, sense: Sense::Le, rhs });
                *cuts_used.last_mut().expect("cuts_used is nonempty") += 1;
            }
            last = Some((bound, x));
        }
        match last {
            Some((value, x)) => Ok(RegionMin::Bounded { value, x, converged: false }),
            None => Err(Error::Numerical("outer approximation made no progress".into())),
        }
    }
}

/// Componentwise minimizer of a separable function over a box (exact because
/// the terms are univariate). Coordinates the function does not touch rest at
/// the box center; infinite bounds are clamped to ±1e9 before use, so the
/// result is always finite — callers treat it as a candidate anchor and fall
/// back gracefully when its value is not strictly interior.
fn separable_argmin(f: &SeparableFunction, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let lo = |j: usize| lower[j].max(-1e9);
    let up = |j: usize| upper[j].min(1e9);
    let mut x: Vec<f64> = (0..lower.len()).map(|j| 0.5 * (lo(j) + up(j))).collect();
    let mut per: std::collections::BTreeMap<usize, (f64, f64)> = std::collections::BTreeMap::new();
    for t in &f.terms {
        // Accumulate each variable's share as A·x² + B·x (+ constant).
        let e = per.entry(t.var_index).or_insert((0.0, 0.0));
        e.0 += t.quad_coeff;
        e.1 += t.lin_coeff - 2.0 * t.quad_coeff * t.center;
    }
    for (j, (a2, b)) in per {
        x[j] = if a2 > 0.0 {
            (-b / (2.0 * a2)).clamp(lo(j), up(j))
        } else if b > 0.0 {
            lo(j)
        } else if b < 0.0 {
            up(j)
        } else {
            x[j]
        };
    }
    x
}

/// Tangent of `f(x) − t ≤ 0` at `x̂`, with `t` at variable index `tvar`.
fn epigraph_tangent(f: &SeparableFunction, xhat: &[f64], tvar: usize) -> (Vec<(usize, f64)>, f64) {
    let mut coeffs = Vec::with_capacity(f.terms.len() + 1);
    let mut shift = -f.evaluate(xhat);
    for t in &f.terms {
        let slope = 2.0 * t.quad_coeff * (xhat[t.var_index] - t.center) + t.lin_coeff;
        coeffs.push((t.var_index, slope));
        shift += slope * xhat[t.var_index];
    }
    coeffs.push((tvar, -1.0));
    (coeffs, shift)
}

/// Exact range of a separable function over a box (termwise interval
/// arithmetic; exact because the terms are univariate).
pub fn range_over_box(f: &SeparableFunction, lower: &[f64], upper: &[f64]) -> (f64, f64) {
    let mut lo = f.constant;
    let mut hi = f.constant;
    for t in &f.terms {
        let (tlo, thi) = crate::bounds::term_range(t, lower[t.var_index], upper[t.var_index]);
        lo += tlo;
        hi += thi;
    }
    (lo, hi)
}
