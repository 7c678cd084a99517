//! Dense bounded-variable two-phase primal simplex.
//!
//! Small and deterministic rather than fast: the dense tableau is exact
//! enough for desk-scale models (at most a few hundred rows/columns), every
//! loop runs in fixed index order, pricing is largest-violation with ties
//! broken by lowest index, and a Bland-rule fallback engages after a run of
//! degenerate pivots so cycling cannot occur. Identical inputs therefore
//! produce identical pivot sequences and bit-identical results.
//!
//! Phase 1 starts from slack bases and introduces one artificial variable per
//! out-of-range row; artificials are fixed to zero before phase 2.

use crate::mixed::Sense;
use crate::{Error, Result};

/// Reduced-cost tolerance: smaller reduced costs count as optimal.
const RC_TOL: f64 = 1e-9;
/// Primal feasibility tolerance (phase-1 objective threshold).
const FEAS_TOL: f64 = 1e-7;
/// Smallest tableau entry considered as a blocking coefficient.
const BLOCK_TOL: f64 = 1e-11;
/// Step sizes below this count as degenerate for the anti-cycling guard.
const DEGEN_TOL: f64 = 1e-10;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGEN_LIMIT: usize = 100;

/// A linear row `Σ coeffs·x {≤,≥,=} rhs`.
#[derive(Clone, Debug)]
pub struct LpRow {
    /// Sparse coefficients `(var, value)`.
    pub coeffs: Vec<(usize, f64)>,
    /// Row sense.
    pub sense: Sense,
    /// Right-hand side.
    pub rhs: f64,
}

/// A linear program `min c᷀x` over rows and variable bounds.
///
/// Bounds may be infinite; compiled models always supply finite ones.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    /// Per-variable lower bounds (`-inf` allowed).
    pub lower: Vec<f64>,
    /// Per-variable upper bounds (`+inf` allowed).
    pub upper: Vec<f64>,
    /// Constraint rows.
    pub rows: Vec<LpRow>,
    /// Dense objective, minimized.
    pub objective: Vec<f64>,
}

/// Termination status of an LP solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    /// Proven optimal within tolerances.
    Optimal,
    /// No feasible point exists.
    Infeasible,
    /// The objective is unbounded below over the feasible set.
    Unbounded,
}

/// Result of an LP solve.
#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Termination status.
    pub status: LpStatus,
    /// Variable values (meaningful when `status == Optimal`).
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub objective: f64,
    /// Simplex iterations used.
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free variable resting at 0.
    Free,
}

struct Tableau {
    ncols: usize,
    m: usize,
    /// `m × ncols`, row-major: the current `B⁻¹A`.
    tab: Vec<f64>,
    /// Current values of the basic variables, one per row.
    beta: Vec<f64>,
    /// Basic column per row.
    basics: Vec<usize>,
    state: Vec<VarState>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Reduced phase-1 costs.
    cost1: Vec<f64>,
    /// Reduced phase-2 costs.
    cost2: Vec<f64>,
    art_start: usize,
    iterations: usize,
    bland: bool,
    degen_run: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.tab[r * self.ncols + c]
    }

    /// Value of a nonbasic column in its current state.
    fn nb_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Free => 0.0,
            VarState::Basic(r) => self.beta[r],
        }
    }

    /// Pick an entering column, or `None` when the given cost row is optimal.
    fn price(&self, cost: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, score)
        for j in 0..self.ncols {
            if self.lower[j] == self.upper[j] {
                continue; // fixed
            }
            let (dir, score) = match self.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower => (1.0, -cost[j]),
                VarState::AtUpper => (-1.0, cost[j]),
                VarState::Free => {
                    if cost[j] < 0.0 {
                        (1.0, -cost[j])
                    } else {
                        (-1.0, cost[j])
                    }
                }
            };
            if score <= RC_TOL {
                continue;
            }
            if self.bland {
                return Some((j, dir));
            }
            match best {
                Some((_, _, s)) if s >= score => {}
                _ => best = Some((j, dir, score)),
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Ratio test for entering column `q` moving in `dir`; returns the step
    /// and the blocking row, or `None` when the entering variable's own
    /// opposite bound blocks first (bound flip), or `Err(())` on an unbounded
    /// ray.
    ///
    /// Two passes: the first finds the exact tightest step and a relaxed
    /// step that lets every basic overshoot its bound by at most a fixed
    /// slack; the second picks the largest pivot element among rows blocking
    /// within the relaxed step. Near-zero pivots — the dominant source of
    /// tableau corruption — are then taken only when no alternative blocker
    /// exists. Bland mode keeps the exact minimum and lowest basic index so
    /// the anti-cycling argument stays intact.
    #[allow(clippy::result_unit_err)]
    fn ratio_test(&self, q: usize, dir: f64) -> std::result::Result<(f64, Option<usize>), ()> {
        const HARRIS_SLACK: f64 = 1e-10;
        let own_limit = self.upper[q] - self.lower[q]; // inf for free/one-sided
        // Blocking step of row `r` and its pivot entry, if the row blocks.
        let step_of = |r: usize| -> Option<(f64, f64)> {
            let d = self.at(r, q);
            if d.abs() <= BLOCK_TOL {
                return None;
            }
            let b = self.basics[r];
            // Basic value moves by −dir·d per unit step of the entering var.
            let rate = dir * d;
            let slack = if rate > 0.0 {
                let bound = self.lower[b];
                if bound.is_infinite() {
                    return None;
                }
                self.beta[r] - bound
            } else {
                let bound = self.upper[b];
                if bound.is_infinite() {
                    return None;
                }
                bound - self.beta[r]
            };
            Some((slack.max(0.0) / rate.abs(), d))
        };
        let mut exact_min = f64::INFINITY;
        let mut relaxed = f64::INFINITY;
        for r in 0..self.m {
            if let Some((step, d)) = step_of(r) {
                exact_min = exact_min.min(step);
                relaxed = relaxed.min(step + HARRIS_SLACK / (dir * d).abs());
            }
        }
        if own_limit < exact_min {
            return Ok((own_limit, None));
        }
        if exact_min.is_infinite() {
            return Err(()); // unbounded ray
        }
        let mut best: Option<(usize, f64, f64)> = None; // (row, step, pivot)
        for r in 0..self.m {
            if let Some((step, d)) = step_of(r) {
                if step > relaxed || (self.bland && step > exact_min + 1e-12) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((br, _, bp)) => {
                        if self.bland {
                            self.basics[r] < self.basics[br]
                        } else {
                            d.abs() > bp.abs()
                                || (d.abs() == bp.abs() && self.basics[r] < self.basics[br])
                        }
                    }
                };
                if better {
                    best = Some((r, step, d));
                }
            }
        }
        let (row, step, _) = best.expect("a finite blocking step implies a blocking row");
        if own_limit < step {
            return Ok((own_limit, None));
        }
        Ok((step, Some(row)))
    }

    /// Apply a bound flip of the entering column by `step`.
    fn bound_flip(&mut self, q: usize, dir: f64, step: f64) {
        for r in 0..self.m {
            let d = self.at(r, q);
            if d != 0.0 {
                self.beta[r] -= step * dir * d;
            }
        }
        self.state[q] = match self.state[q] {
            VarState::AtLower => VarState::AtUpper,
            VarState::AtUpper => VarState::AtLower,
            s => s,
        };
    }

    /// Pivot `q` into the basis at row `r` with step `step`.
    fn pivot(&mut self, r: usize, q: usize, dir: f64, step: f64) {
        let entering_value = self.nb_value(q) + dir * step;
        for i in 0..self.m {
            if i != r {
                let d = self.at(i, q);
                if d != 0.0 {
                    self.beta[i] -= step * dir * d;
                }
            }
        }
        let leaving = self.basics[r];
        // The leaving variable hits the bound in the direction it moved.
        self.state[leaving] =
            if dir * self.at(r, q) > 0.0 { VarState::AtLower } else { VarState::AtUpper };
        self.state[q] = VarState::Basic(r);
        self.basics[r] = q;
        self.beta[r] = entering_value;

        // Gauss–Jordan elimination on the tableau and both cost rows.
        let p = self.at(r, q);
        let (start, end) = (r * self.ncols, (r + 1) * self.ncols);
        for k in start..end {
            self.tab[k] /= p;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, q);
            if f == 0.0 {
                continue;
            }
            let (istart, _) = (i * self.ncols, ());
            for k in 0..self.ncols {
                self.tab[istart + k] -= f * self.tab[start + k];
            }
        }
        let f1 = self.cost1[q];
        if f1 != 0.0 {
            for k in 0..self.ncols {
                self.cost1[k] -= f1 * self.tab[start + k];
            }
        }
        let f2 = self.cost2[q];
        if f2 != 0.0 {
            for k in 0..self.ncols {
                self.cost2[k] -= f2 * self.tab[start + k];
            }
        }
    }

    /// Total infeasibility carried by artificial variables.
    fn artificial_sum(&self) -> f64 {
        let mut s = 0.0;
        for r in 0..self.m {
            if self.basics[r] >= self.art_start {
                s += self.beta[r].abs();
            }
        }
        s
    }
}

/// Solve `min c᷀x` subject to the rows and bounds of `p`.
///
/// Deterministic: identical inputs produce identical iteration sequences and
/// results. Numerical trouble (iteration cap) is reported as an error rather
/// than a silently wrong answer.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    let n = p.lower.len();
    assert_eq!(p.upper.len(), n, "bound vectors must have equal length");
    assert_eq!(p.objective.len(), n, "objective length must match variable count");
    let m = p.rows.len();

    // Columns: structural, then one slack per row, then artificials.
    let mut lower = p.lower.clone();
    let mut upper = p.upper.clone();
    for row in &p.rows {
        let (lo, up) = match row.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lower.push(lo);
        upper.push(up);
    }

    let mut state: Vec<VarState> = (0..n)
        .map(|j| {
            if p.lower[j].is_finite() {
                VarState::AtLower
            } else if p.upper[j].is_finite() {
                VarState::AtUpper
            } else {
                VarState::Free
            }
        })
        .collect();

    // Row activities at the nonbasic starting point.
    let nb_val = |j: usize, st: &VarState| -> f64 {
        match st {
            VarState::AtLower => p.lower[j],
            VarState::AtUpper => p.upper[j],
            _ => 0.0,
        }
    };
    let mut activity = vec![0.0_f64; m];
    for (r, row) in p.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            activity[r] += a * nb_val(j, &state[j]);
        }
    }

    // Decide the starting basis per row: its slack when the implied slack
    // value fits the slack bounds, otherwise an artificial.
    let mut art_rows: Vec<(usize, f64)> = Vec::new(); // (row, coeff sign)
    let mut basics = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut slack_clamped = vec![None::<VarState>; m];
    for r in 0..m {
        let s_val = p.rows[r].rhs - activity[r];
        let (slo, sup) = (lower[n + r], upper[n + r]);
        if s_val >= slo && s_val <= sup {
            basics.push(n + r);
            beta.push(s_val);
        } else if s_val > sup {
            slack_clamped[r] = Some(VarState::AtUpper);
            art_rows.push((r, 1.0));
            basics.push(usize::MAX); // patched below
            beta.push(s_val - sup);
        } else {
            slack_clamped[r] = Some(VarState::AtLower);
            art_rows.push((r, -1.0));
            basics.push(usize::MAX);
            beta.push(slo - s_val);
        }
    }

    let art_start = n + m;
    let ncols = art_start + art_rows.len();
    for _ in &art_rows {
        lower.push(0.0);
        upper.push(f64::INFINITY);
    }

    // Slack states.
    for r in 0..m {
        match slack_clamped[r] {
            Some(st) => state.push(st),
            None => state.push(VarState::Basic(r)),
        }
    }
    // Artificial states and basis patch-up.
    for (k, &(r, _)) in art_rows.iter().enumerate() {
        basics[r] = art_start + k;
        state.push(VarState::Basic(r));
    }

    // Dense tableau; rows with a −1 artificial are negated so every basic
    // column is a unit column (this is exactly B⁻¹A for the starting basis).
    let mut tab = vec![0.0_f64; m * ncols];
    let mut row_sign = vec![1.0_f64; m];
    for &(r, sign) in &art_rows {
        row_sign[r] = sign; // dividing the row by `sign` makes the artificial +1
    }
    for (r, row) in p.rows.iter().enumerate() {
        let s = row_sign[r];
        for &(j, a) in &row.coeffs {
            tab[r * ncols + j] += a / s;
        }
        tab[r * ncols + n + r] = 1.0 / s;
    }
    for (k, &(r, _)) in art_rows.iter().enumerate() {
        tab[r * ncols + art_start + k] = 1.0;
    }

    // Phase-2 costs (minimize), reduced against the starting basis (all
    // starting basics have zero phase-2 cost, so no reduction is needed).
    let mut cost2 = vec![0.0_f64; ncols];
    cost2[..n].copy_from_slice(&p.objective);
    // Phase-1 costs: one per artificial, reduced against the basis.
    let mut cost1 = vec![0.0_f64; ncols];
    for k in 0..art_rows.len() {
        cost1[art_start + k] = 1.0;
    }
    for &(r, _) in &art_rows {
        for j in 0..ncols {
            cost1[j] -= tab[r * ncols + j];
        }
    }

    let mut t = Tableau {
        ncols,
        m,
        tab,
        beta,
        basics,
        state,
        lower,
        upper,
        cost1,
        cost2,
        art_start,
        iterations: 0,
        bland: false,
        degen_run: 0,
    };

    let max_iter = 20_000 + 50 * (m + ncols);
    let mut phase = if art_rows.is_empty() { 2 } else { 1 };
    let status = loop {
        if t.iterations > max_iter {
            return Err(Error::Numerical(format!(
                "simplex exceeded {max_iter} iterations on a {m}×{n} problem"
            )));
        }
        let cost = if phase == 1 { t.cost1.clone() } else { t.cost2.clone() };
        match t.price(&cost) {
            None => {
                if phase == 1 {
                    if t.artificial_sum() > FEAS_TOL {
                        break LpStatus::Infeasible;
                    }
                    // Freeze artificials at zero and move on.
                    for k in t.art_start..t.ncols {
                        t.lower[k] = 0.0;
                        t.upper[k] = 0.0;
                    }
                    phase = 2;
                    continue;
                }
                break LpStatus::Optimal;
            }
            Some((q, dir)) => {
                t.iterations += 1;
                match t.ratio_test(q, dir) {
                    Err(()) => {
                        if phase == 1 {
                            return Err(Error::Numerical(
                                "phase-1 subproblem reported an unbounded ray".into(),
                            ));
                        }
                        break LpStatus::Unbounded;
                    }
                    Ok((step, None)) => {
                        t.bound_flip(q, dir, step);
                        t.track_degeneracy(step);
                    }
                    Ok((step, Some(r))) => {
                        t.pivot(r, q, dir, step);
                        t.track_degeneracy(step);
                    }
                }
            }
        }
    };

    // Reconstruct the structural solution. An optimal basis is re-solved
    // from pristine input data so incremental tableau rounding never
    // reaches the reported point.
    let x = if status == LpStatus::Optimal {
        recover_primal(p, &t, &art_rows, n, m)?
    } else {
        let mut x = vec![0.0_f64; n];
        for (j, xv) in x.iter_mut().enumerate() {
            *xv = t.nb_value(j);
        }
        x
    };
    let objective = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { status, x, objective, iterations: t.iterations })
}

/// Recompute the basic solution of the final basis directly from the input:
/// assemble the basis matrix from original columns, solve it with a freshly
/// partial-pivoted elimination, and audit the result against every row and
/// bound. The incremental tableau only steers pivoting; whatever error it
/// accumulated is discarded here. A material violation at this point means
/// the final basis itself is numerically bad, which is reported as an error
/// rather than returned as a silently wrong answer.
fn recover_primal(
    p: &LpProblem,
    t: &Tableau,
    art_rows: &[(usize, f64)],
    n: usize,
    m: usize,
) -> Result<Vec<f64>> {
    let mut x = vec![0.0_f64; n];
    if m == 0 {
        for (j, xv) in x.iter_mut().enumerate() {
            *xv = t.nb_value(j);
        }
        return Ok(x);
    }
    // Original column `j`: structural coefficients, a slack unit, or the
    // artificial's row sign (artificials entered the sign-normalized row
    // with +1, hence `sign` in original units).
    let col = |j: usize| -> Vec<f64> {
        let mut v = vec![0.0_f64; m];
        if j < n {
            for (r, row) in p.rows.iter().enumerate() {
                for &(jj, c) in &row.coeffs {
                    if jj == j {
                        v[r] += c;
                    }
                }
            }
        } else if j < n + m {
            v[j - n] = 1.0;
        } else {
            let (r, sign) = art_rows[j - n - m];
            v[r] = sign;
        }
        v
    };
    // Right-hand side net of every nonbasic column at its bound.
    let mut rhs: Vec<f64> = p.rows.iter().map(|r| r.rhs).collect();
    for j in 0..t.ncols {
        if matches!(t.state[j], VarState::Basic(_)) {
            continue;
        }
        let xj = t.nb_value(j);
        if xj == 0.0 {
            continue;
        }
        for (r, a) in col(j).iter().enumerate() {
            if *a != 0.0 {
                rhs[r] -= a * xj;
            }
        }
    }
    // Solve B·β = rhs by Gaussian elimination with partial pivoting.
    let mut bmat = vec![0.0_f64; m * m];
    for (r, &bj) in t.basics.iter().enumerate() {
        for (i, a) in col(bj).iter().enumerate() {
            bmat[i * m + r] = *a;
        }
    }
    for c in 0..m {
        let mut piv = c;
        for r2 in c + 1..m {
            if bmat[r2 * m + c].abs() > bmat[piv * m + c].abs() {
                piv = r2;
            }
        }
        if bmat[piv * m + c].abs() < 1e-12 {
            return Err(Error::Numerical("final simplex basis is numerically singular".into()));
        }
        if piv != c {
            for k in c..m {
                bmat.swap(c * m + k, piv * m + k);
            }
            rhs.swap(c, piv);
        }
        let pv = bmat[c * m + c];
        for r2 in c + 1..m {
            let f = bmat[r2 * m + c] / pv;
            if f != 0.0 {
                bmat[r2 * m + c] = 0.0;
                for k in c + 1..m {
                    bmat[r2 * m + k] -= f * bmat[c * m + k];
                }
                rhs[r2] -= f * rhs[c];
            }
        }
    }
    let mut beta = vec![0.0_f64; m];
    for r2 in (0..m).rev() {
        let mut v = rhs[r2];
        for k in r2 + 1..m {
            v -= bmat[r2 * m + k] * beta[k];
        }
        beta[r2] = v / bmat[r2 * m + r2];
    }
    for (j, xv) in x.iter_mut().enumerate() {
        *xv = match t.state[j] {
            VarState::Basic(r) => beta[r],
            _ => t.nb_value(j),
        };
    }
    // Audit against the input.
    let mut worst = 0.0_f64;
    for row in &p.rows {
        let act: f64 = row.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
        let viol = match row.sense {
            Sense::Le => act - row.rhs,
            Sense::Ge => row.rhs - act,
            Sense::Eq => (act - row.rhs).abs(),
        };
        worst = worst.max(viol / (1.0 + row.rhs.abs()));
    }
    for j in 0..n {
        if p.lower[j].is_finite() {
            worst = worst.max((p.lower[j] - x[j]) / (1.0 + p.lower[j].abs()));
        }
        if p.upper[j].is_finite() {
            worst = worst.max((x[j] - p.upper[j]) / (1.0 + p.upper[j].abs()));
        }
    }
    if worst > 1e-6 {
        return Err(Error::Numerical(format!(
            "recovered basic solution violates the input by {worst:.2e}"
        )));
    }
    Ok(x)
}

impl Tableau {
    fn track_degeneracy(&mut self, step: f64) {
        if step <= DEGEN_TOL {
            self.degen_run += 1;
            if self.degen_run > DEGEN_LIMIT {
                self.bland = true;
            }
        } else {
            self.degen_run = 0;
            // Leave Bland mode once progress resumes; the guard re-engages
            // if degeneracy returns.
            self.bland = false;
        }
    }
}
