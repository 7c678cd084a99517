//! Embedded solvers: LP (simplex), convex relaxations via outer
//! approximation, and branch-and-bound over the binary indicator variables.
//!
//! The engine is deliberately bare — no cutting planes, presolve, or
//! heuristics — so node counts reflect the strength of the compiled
//! relaxation and nothing else. Every solve is deterministic: identical
//! inputs yield identical iteration sequences, node orders, and results.

pub mod region;
pub mod simplex;

pub use simplex::{solve_lp, LpProblem, LpRow, LpSolution, LpStatus};

use std::collections::BinaryHeap;
use std::time::Instant;

use crate::mixed::{MixedModel, Row, Sense, VarKind};
use crate::model::ObjSense;
use crate::{Error, Result};

/// Binaries within this distance of an integer count as integral.
const INT_TOL: f64 = 1e-6;
/// Hard cap on outer-approximation iterations within one relaxation solve.
const MAX_RELAX_ITER: usize = 10_000;
/// Refinement iterations a node runs before a fractional binary releases it
/// to branching (the bound is valid at every iteration).
const MIN_REFINE_ITERS: usize = 3;
/// Pooled supports kept per epigraph column; local refinement past the cap
/// stays in the node that produced it.
const POOL_CAP_PER_PIECE: usize = 12;

/// Options for the outer-approximation relaxation loop.
#[derive(Clone, Debug)]
pub struct RelaxOptions {
    /// Stop when the worst quadratic-row violation is below this.
    pub tol: f64,
    /// Tangent-cut budget per quadratic row.
    pub max_cuts_per_row: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions { tol: 1e-6, max_cuts_per_row: 200 }
    }
}

/// Result of a continuous-relaxation solve.
#[derive(Clone, Debug)]
pub struct RelaxResult {
    /// LP status of the final iteration.
    pub status: LpStatus,
    /// Values for all model variables.
    pub x: Vec<f64>,
    /// Objective value in the model's own sense.
    pub objective: f64,
    /// Tangent cuts added beyond the initial seeds.
    pub cuts_added: usize,
    /// Set when a row ran out of cut budget before reaching `tol`; the
    /// returned value is then still a valid relaxation bound, just not a
    /// converged one.
    pub cut_budget_exhausted: bool,
}

/// Options for branch-and-bound.
#[derive(Clone, Debug)]
pub struct BnbOptions {
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Maximum number of solved nodes.
    pub node_limit: Option<u64>,
    /// Relative incumbent/bound gap at which the search stops as optimal.
    pub rel_gap: f64,
    /// Relaxation settings used at every node.
    pub relax: RelaxOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            time_limit: None,
            node_limit: None,
            rel_gap: 1e-6,
            relax: RelaxOptions::default(),
        }
    }
}

/// Termination status of a branch-and-bound run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MipStatus {
    /// Incumbent proven optimal within the gap tolerance.
    Optimal,
    /// No integer-feasible point exists.
    Infeasible,
    /// Stopped at the node limit; gap reported.
    NodeLimit,
    /// Stopped at the time limit; gap reported.
    TimeLimit,
}

/// Result of a branch-and-bound run.
#[derive(Clone, Debug)]
pub struct MipResult {
    /// Termination status.
    pub status: MipStatus,
    /// Incumbent variable values (empty when none was found).
    pub x: Vec<f64>,
    /// Incumbent objective in the model's own sense (`±inf` when none).
    pub objective: f64,
    /// Best proven bound in the model's own sense.
    pub best_bound: f64,
    /// Nodes whose relaxation was solved (root included).
    pub nodes: u64,
    /// Wall time in seconds.
    pub time_s: f64,
    /// Relative incumbent/bound gap at termination.
    pub gap: f64,
}

/// Solve the continuous relaxation of `m`: binaries relaxed to `[0,1]`,
/// quadratic rows handled by accumulating supporting-hyperplane cuts.
///
/// The returned objective is a valid relaxation bound at every iteration,
/// converged or not.
pub fn solve_relaxation(m: &MixedModel, opts: &RelaxOptions) -> Result<RelaxResult> {
    let lower: Vec<f64> = m.vars.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = m.vars.iter().map(|v| v.upper).collect();
    let mut pool = Vec::new();
    relax_with_bounds(m, lower, upper, opts, &mut pool, &[])
}

/// One-variable convex piece `q·(x−c)² + a·x` of a quadratic row.
#[derive(Clone, Copy, Debug)]
struct UniPiece {
    var: usize,
    q: f64,
    c: f64,
    a: f64,
}

impl UniPiece {
    fn eval(&self, x: f64) -> f64 {
        self.q * (x - self.c) * (x - self.c) + self.a * x
    }

    fn slope_at(&self, x: f64) -> f64 {
        2.0 * self.q * (x - self.c) + self.a
    }

    /// Exact minimum over `[lo, hi]`; infinite ends clamp to ±1e9.
    fn min_over(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(-1e9), hi.min(1e9));
        let x = if self.q > 0.0 {
            (self.c - self.a / (2.0 * self.q)).clamp(lo, hi)
        } else if self.a > 0.0 {
            lo
        } else {
            hi
        };
        self.eval(x)
    }

    /// Exact maximum over `[lo, hi]` (at an endpoint, by convexity).
    fn max_over(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(-1e9), hi.min(1e9));
        self.eval(lo).max(self.eval(hi))
    }

    /// Epigraph support at `xhat`: `slope·x − w + σ ≤ slope·xhat − value`.
    /// Exact (the tangent of a one-variable convex function supports its
    /// epigraph), so it is valid for the model under any variable bounds.
    fn cut(&self, wcol: usize, sigma: usize, xhat: f64) -> LpRow {
        let s = self.slope_at(xhat);
        LpRow {
            coeffs: vec![(self.var, s), (wcol, -1.0), (sigma, 1.0)],
            sense: Sense::Le,
            rhs: s * xhat - self.eval(xhat),
        }
    }
}

/// A quadratic row split into one-variable convex pieces (each variable with
/// a quadratic term, its linear coefficient folded in) plus the purely
/// linear remainder.
struct SplitRow<'m> {
    row: &'m Row,
    pieces: Vec<UniPiece>,
    linear_rest: Vec<(usize, f64)>,
}

fn split_quad_row(row: &Row) -> SplitRow<'_> {
    let mut pieces: Vec<UniPiece> = row
        .quad
        .iter()
        .filter(|t| t.coeff != 0.0)
        .map(|t| UniPiece { var: t.var, q: t.coeff, c: t.center, a: 0.0 })
        .collect();
    let mut linear_rest = Vec::new();
    for &(j, a) in &row.lin {
        match pieces.iter_mut().find(|p| p.var == j) {
            Some(p) => p.a += a,
            None => linear_rest.push((j, a)),
        }
    }
    SplitRow { row, pieces, linear_rest }
}

/// True when an equivalent support (same epigraph column, same slope and
/// right-hand side within rounding) is already pooled.
fn duplicate_cut(pool: &[LpRow], cut: &LpRow) -> bool {
    // The threshold doubles as a conditioning guard: supports closer than
    // this improve the bound by less than it, while their near-parallel
    // rows degrade the simplex basis.
    let (s, w) = (cut.coeffs[0].1, cut.coeffs[1].0);
    pool.iter().any(|r| {
        r.coeffs.len() >= 2
            && r.coeffs[1].0 == w
            && (r.coeffs[0].1 - s).abs() <= 1e-6 * (1.0 + s.abs())
            && (r.rhs - cut.rhs).abs() <= 1e-6 * (1.0 + cut.rhs.abs())
    })
}

/// Worst normalized violation of the model's own linear rows at an LP
/// iterate. The LP enforces these rows directly, so anything materially
/// positive here means the factorization has drifted and the solve cannot
/// be trusted.
fn linear_drift(m: &MixedModel, x: &[f64]) -> f64 {
    m.rows
        .iter()
        .filter(|r| r.is_linear())
        .map(|r| r.violation(x) / (1.0 + r.rhs.abs()))
        .fold(0.0, f64::max)
}

/// Componentwise minimizer of a quadratic row's left-hand side over a box
/// (exact: the row is additively separable). Untouched coordinates rest at
/// the box center; infinite bounds are clamped to ±1e9.
fn row_argmin(row: &Row, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let lo = |j: usize| lower[j].max(-1e9);
    let up = |j: usize| upper[j].min(1e9);
    let mut x: Vec<f64> = (0..lower.len()).map(|j| 0.5 * (lo(j) + up(j))).collect();
    let mut per: std::collections::BTreeMap<usize, (f64, f64)> = std::collections::BTreeMap::new();
    for &(j, a) in &row.lin {
        per.entry(j).or_insert((0.0, 0.0)).1 += a;
    }
    for q in &row.quad {
        let e = per.entry(q.var).or_insert((0.0, 0.0));
        e.0 += q.coeff;
        e.1 += -2.0 * q.coeff * q.center;
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

/// Outer-approximation loop over explicit variable bounds (used directly by
/// branch-and-bound nodes, where binaries are fixed through their bounds).
///
/// Quadratic rows are additively separable, so each is lifted exactly into
/// per-variable epigraph columns (`w ≥ piece(x_j)`, hard row `Σ w + linear ≤
/// rhs`). Outer cuts are then one-dimensional tangents — true epigraph
/// supports at the query point — and every coordinate refines independently
/// at a geometric rate, free of the zigzag a multi-dimensional cutting plane
/// suffers near a smooth minimum. Supports stay valid under any variable
/// bounds, so related solves share them through `pool` (seeded on first use,
/// grown by every solve).
///
/// A model with an all-zero objective is a pure feasibility probe; its LP
/// has nothing anchoring the iterate, so the loop instead releases a shared
/// margin variable σ carried by every support (`tangent + σ ≤ w`) and
/// maximizes it — a central cutting plane whose iterates keep away from the
/// cut boundaries. Supports underestimate the true pieces, so a negative
/// maximized margin proves infeasibility.
fn relax_with_bounds(
    m: &MixedModel,
    mut lower: Vec<f64>,
    mut upper: Vec<f64>,
    opts: &RelaxOptions,
    pool: &mut Vec<LpRow>,
    branch_vars: &[usize],
) -> Result<RelaxResult> {
    let n = m.vars.len();
    let mut objective = vec![0.0; n];
    for &(j, c) in &m.objective {
        objective[j] += c;
    }
    // The LP always minimizes; flip a maximization here and flip back below.
    let flip = match m.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    if flip < 0.0 {
        for c in &mut objective {
            *c = -*c;
        }
    }

    let mut rows: Vec<LpRow> = Vec::with_capacity(m.rows.len());
    let mut quad_rows: Vec<&Row> = Vec::new();
    for row in &m.rows {
        if row.is_linear() {
            rows.push(LpRow { coeffs: row.lin.clone(), sense: row.sense, rhs: row.rhs });
        } else {
            quad_rows.push(row);
        }
    }
    // Exact row minima over the box: a quadratic row whose separable minimum
    // exceeds its right-hand side makes the whole relaxation infeasible.
    for row in &quad_rows {
        let anchor = row_argmin(row, &lower, &upper);
        if row.eval(&anchor) > row.rhs + 1e-9 {
            return Ok(RelaxResult {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
                cuts_added: 0,
                cut_budget_exhausted: false,
            });
        }
    }
    let has_quads = !quad_rows.is_empty();
    let flat = has_quads && objective.iter().all(|&c| c == 0.0);
    let splits: Vec<SplitRow> = quad_rows.iter().map(|r| split_quad_row(r)).collect();
    // Epigraph columns in (row, piece) order, then the margin column σ.
    let mut wcols: Vec<Vec<usize>> = Vec::with_capacity(splits.len());
    let mut next = n;
    for s in &splits {
        let mut cols = Vec::with_capacity(s.pieces.len());
        for p in &s.pieces {
            cols.push(next);
            next += 1;
            lower.push(p.min_over(lower[p.var], upper[p.var]));
            upper.push(p.max_over(lower[p.var], upper[p.var]));
        }
        wcols.push(cols);
    }
    let sigma = next;
    if has_quads {
        // Margin column: released only for feasibility probes.
        if flat {
            lower.push(-1e12);
            upper.push(1e12);
        } else {
            lower.push(0.0);
            upper.push(0.0);
        }
    }
    objective.resize(lower.len(), 0.0);
    let margin_obj = {
        let mut v = vec![0.0; lower.len()];
        if flat {
            v[sigma] = -1.0; // the LP minimizes; −σ maximizes the margin
        }
        v
    };
    // Hard replacement rows for the lifted quadratics.
    for (s, cols) in splits.iter().zip(&wcols) {
        let mut coeffs = s.linear_rest.clone();
        coeffs.extend(cols.iter().map(|&w| (w, 1.0)));
        rows.push(LpRow { coeffs, sense: Sense::Le, rhs: s.row.rhs });
    }
    // Seed one support per piece at the box center, once per pool lifetime.
    if pool.is_empty() {
        for (s, cols) in splits.iter().zip(&wcols) {
            for (p, &w) in s.pieces.iter().zip(cols) {
                let xj = if lower[p.var].is_finite() && upper[p.var].is_finite() {
                    0.5 * (lower[p.var] + upper[p.var])
                } else {
                    0.0
                };
                pool.push(p.cut(w, sigma, xj));
            }
        }
    }
    rows.extend(pool.iter().cloned());

    // Per-column pooled-support counts, so the shared pool stays compact.
    let mut pool_count: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for r in pool.iter() {
        *pool_count.entry(r.coeffs[1].0).or_insert(0) += 1;
    }
    let mut cuts_used = vec![0usize; quad_rows.len()];
    let mut cuts_added = 0usize;
    let mut session_cuts: Vec<LpRow> = Vec::new();
    for it in 0..MAX_RELAX_ITER {
        let sol = solve_lp(&LpProblem {
            lower: lower.clone(),
            upper: upper.clone(),
            rows: rows.clone(),
            objective: if flat { margin_obj.clone() } else { objective.clone() },
        })?;
        match sol.status {
            LpStatus::Infeasible => {
                let mut x = sol.x;
                x.truncate(n);
                return Ok(RelaxResult {
                    status: LpStatus::Infeasible,
                    x,
                    objective: f64::NAN,
                    cuts_added,
                    cut_budget_exhausted: false,
                });
            }
            LpStatus::Unbounded => {
                let mut x = sol.x;
                x.truncate(n);
                return Ok(RelaxResult {
                    status: LpStatus::Unbounded,
                    x,
                    objective: flip * f64::NEG_INFINITY,
                    cuts_added,
                    cut_budget_exhausted: false,
                });
            }
            LpStatus::Optimal => {}
        }
        let xhat = sol.x;
        let value = if flat { 0.0 } else { flip * sol.objective };
        let violated: Vec<usize> = quad_rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row.violation(&xhat) > opts.tol)
            .map(|(k, _)| k)
            .collect();
        if violated.is_empty() {
            let drift = linear_drift(m, &xhat);
            if drift > 1e-6 {
                return Err(Error::Numerical(format!(
                    "LP iterate violates linear rows by {drift:.2e}"
                )));
            }
            let mut x = xhat;
            x.truncate(n);
            return Ok(RelaxResult {
                status: LpStatus::Optimal,
                x,
                objective: value,
                cuts_added,
                cut_budget_exhausted: false,
            });
        }
        if flat && xhat[sigma] < -opts.tol {
            // Even the overestimated margin is negative: every point
            // violates some quadratic row beyond the tolerance.
            return Ok(RelaxResult {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
                cuts_added,
                cut_budget_exhausted: false,
            });
        }
        if !flat
            && it >= MIN_REFINE_ITERS
            && branch_vars.iter().any(|&b| (xhat[b] - xhat[b].round()).abs() > INT_TOL)
        {
            // The bound is valid as it stands and a binary is fractional:
            // branching refines faster than more cutting would.
            let drift = linear_drift(m, &xhat);
            if drift > 1e-6 {
                return Err(Error::Numerical(format!(
                    "LP iterate violates linear rows by {drift:.2e}"
                )));
            }
            let mut x = xhat;
            x.truncate(n);
            return Ok(RelaxResult {
                status: LpStatus::Optimal,
                x,
                objective: value,
                cuts_added,
                cut_budget_exhausted: false,
            });
        }
        let mut pushed = 0usize;
        for &k in &violated {
            if cuts_used[k] >= opts.max_cuts_per_row {
                continue;
            }
            for (p, &w) in splits[k].pieces.iter().zip(&wcols[k]) {
                if p.eval(xhat[p.var]) - xhat[w] > 1e-9 {
                    let cut = p.cut(w, sigma, xhat[p.var]);
                    if duplicate_cut(pool, &cut) || duplicate_cut(&session_cuts, &cut) {
                        continue;
                    }
                    rows.push(cut.clone());
                    session_cuts.push(cut.clone());
                    pushed += 1;
                    let count = pool_count.entry(w).or_insert(0);
                    if *count < POOL_CAP_PER_PIECE {
                        *count += 1;
                        pool.push(cut);
                    }
                }
            }
            cuts_used[k] += 1;
        }
        cuts_added += pushed;
        if pushed == 0 {
            // Budget spent on every violated row, or every candidate support
            // already pooled: accept the current (still valid) bound.
            let drift = linear_drift(m, &xhat);
            if drift > 1e-6 {
                return Err(Error::Numerical(format!(
                    "LP iterate violates linear rows by {drift:.2e}"
                )));
            }
            let mut x = xhat;
            x.truncate(n);
            return Ok(RelaxResult {
                status: LpStatus::Optimal,
                x,
                objective: value,
                cuts_added,
                cut_budget_exhausted: true,
            });
        }
    }
    Err(Error::Numerical("relaxation did not converge".into()))
}

struct Node {
    /// Inherited relaxation bound (internal minimize sense).
    bound: f64,
    /// Fixed binaries: `(var, value)`.
    fixings: Vec<(usize, bool)>,
    /// Insertion id for deterministic tie-breaking.
    id: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound.total_cmp(&other.bound).is_eq() && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // BinaryHeap is a max-heap; reverse so the smallest bound pops first,
        // with the insertion id as the deterministic tie-break.
        other.bound.total_cmp(&self.bound).then(other.id.cmp(&self.id))
    }
}

/// Best-bound branch-and-bound over the model's binary variables.
///
/// Branching picks the most fractional binary (ties to the lowest index).
/// Deterministic given fixed limits; when a limit stops the search early the
/// result carries the proven bound and the remaining gap.
pub fn solve_bnb(m: &MixedModel, opts: &BnbOptions) -> Result<MipResult> {
    let start = Instant::now();
    let binaries = m.binary_vars();
    for &b in &binaries {
        if m.vars[b].kind != VarKind::Binary {
            return Err(Error::InvalidArgument("binary list out of sync with model".into()));
        }
    }
    let flip = match m.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };

    // Internal values are always "minimize"; flip on the way out.
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes: u64 = 0;
    let mut next_id: u64 = 1;
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, fixings: Vec::new(), id: 0 });
    let mut best_open_bound = f64::NEG_INFINITY;
    let mut status = MipStatus::Optimal;
    // Epigraph supports are valid at every node; share them across the tree.
    let mut cut_pool: Vec<LpRow> = Vec::new();

    while let Some(node) = heap.pop() {
        best_open_bound = node.bound;
        if let Some((inc, _)) = &incumbent {
            if inc - node.bound <= opts.rel_gap * inc.abs().max(1.0) {
                // Best-bound order: every remaining node is at least as bad.
                best_open_bound = node.bound;
                status = MipStatus::Optimal;
                heap.clear();
                break;
            }
        }
        if let Some(limit) = opts.node_limit {
            if nodes >= limit {
                status = MipStatus::NodeLimit;
                break;
            }
        }
        if let Some(limit) = opts.time_limit {
            if start.elapsed().as_secs_f64() >= limit {
                status = MipStatus::TimeLimit;
                break;
            }
        }

        // Solve the node relaxation with its fixings applied via bounds.
        let mut lower: Vec<f64> = m.vars.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = m.vars.iter().map(|v| v.upper).collect();
        for &(j, v) in &node.fixings {
            let val = if v { 1.0 } else { 0.0 };
            lower[j] = val;
            upper[j] = val;
        }
        let mut relax =
            relax_with_bounds(m, lower.clone(), upper.clone(), &opts.relax, &mut cut_pool, &binaries)?;
        // An integral solution resting on an unconverged relaxation must not
        // become an incumbent at its bound value; re-solve once with a wider
        // budget (the result may turn fractional or infeasible, both of
        // which the normal handling below covers).
        if relax.cut_budget_exhausted && relax.status == LpStatus::Optimal {
            let integral =
                binaries.iter().all(|&b| (relax.x[b] - relax.x[b].round()).abs() <= INT_TOL);
            if integral {
                let wide = RelaxOptions {
                    tol: opts.relax.tol,
                    max_cuts_per_row: opts.relax.max_cuts_per_row.saturating_mul(4).max(800),
                };
                relax = relax_with_bounds(m, lower, upper, &wide, &mut cut_pool, &binaries)?;
                if relax.cut_budget_exhausted {
                    return Err(Error::Numerical(
                        "node relaxation did not converge within 4× the cut budget".into(),
                    ));
                }
            }
        }
        nodes += 1;
        match relax.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(Error::Numerical(
                    "node relaxation unbounded; compiled models must have finite bounds".into(),
                ))
            }
            LpStatus::Optimal => {}
        }
        let value = flip * relax.objective; // internal minimize value
        if let Some((inc, _)) = &incumbent {
            if inc - value <= opts.rel_gap * inc.abs().max(1.0) {
                continue; // bound no better than the incumbent
            }
        }

        // Most fractional binary.
        let mut branch: Option<(usize, f64)> = None;
        for &b in &binaries {
            let v = relax.x[b];
            let fr = (v - v.round()).abs();
            if fr > INT_TOL && branch.map(|(_, bf)| fr > bf).unwrap_or(true) {
                branch = Some((b, fr));
            }
        }
        match branch {
            None => {
                // Integral leaf: the relaxation value is this assignment's
                // optimum (OA-refined within the relaxation tolerance).
                let better = incumbent.as_ref().map(|(inc, _)| value < *inc).unwrap_or(true);
                if better {
                    incumbent = Some((value, relax.x.clone()));
                }
            }
            Some((b, _)) => {
                for fix in [false, true] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((b, fix));
                    heap.push(Node { bound: value, fixings, id: next_id });
                    next_id += 1;
                }
            }
        }
    }

    // Remaining open bound: the heap minimum if the search was cut short,
    // otherwise the incumbent value (search exhausted or gap closed).
    let open_bound = match status {
        MipStatus::Optimal => None,
        _ => Some(heap.iter().map(|n| n.bound).fold(best_open_bound, f64::min)),
    };
    let (objective_int, x, gap, bound_int) = match (&incumbent, open_bound) {
        (Some((inc, x)), Some(ob)) => {
            let gap = (inc - ob) / inc.abs().max(1.0);
            (*inc, x.clone(), gap, ob)
        }
        (Some((inc, x)), None) => (*inc, x.clone(), 0.0, *inc),
        (None, Some(ob)) => (f64::INFINITY, Vec::new(), f64::INFINITY, ob),
        (None, None) => {
            status = MipStatus::Infeasible;
            (f64::INFINITY, Vec::new(), f64::INFINITY, f64::INFINITY)
        }
    };
    Ok(MipResult {
        status,
        x,
        objective: flip * objective_int,
        best_bound: flip * bound_int,
        nodes,
        time_s: start.elapsed().as_secs_f64(),
        gap,
    })
}
