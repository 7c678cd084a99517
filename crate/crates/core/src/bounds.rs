//! Bounds on the lifted split-sum (α) variables: closed-form interval
//! bounds, optimization-based tightening (per-disjunct or union-valid),
//! independence checks for split pairs, and detection of split sums that can
//! share one α variable across disjuncts.
//!
//! A bound entry for key `(l, k, s)` brackets the value of disjunct `l`'s
//! constraint-`k` partial sum over split `s`. Interval entries are valid over
//! the whole box; union-tightened entries are valid over the union of the
//! disjunct regions; local entries are valid only while disjunct `l` is
//! active and must be applied with that restriction.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Disjunction, DisjunctiveProblem, SeparableFunction, UnivariateTerm};
use crate::partition::Partition;
use crate::solver::region::{range_over_box, ConvexRegion, RegionMin};
use crate::{Error, Result};

/// Tolerance for the independence comparison of split-sum optima.
const INDEP_TOL: f64 = 1e-8;
/// Relative tolerance for matching normalized term vectors when grouping
/// shareable split sums.
const SHARE_TOL: f64 = 1e-12;
/// Feasibility tolerance when checking candidate points.
const FEAS_TOL: f64 = 1e-7;
/// Cap on row-subset combinations in polytope vertex enumeration.
const VERTEX_COMBO_CAP: usize = 200_000;

/// How a bound entry was obtained, which also fixes where it may be used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Closed-form interval arithmetic over the box; valid everywhere.
    #[serde(rename = "interval")]
    Interval,
    /// Tightened over the union of all disjunct regions; valid everywhere.
    #[serde(rename = "obbt-union")]
    ObbtUnion,
    /// Tightened over disjunct `l`'s own region; valid only when that
    /// disjunct is active.
    #[serde(rename = "local")]
    Local,
    /// Supplied by the caller; treated as union-valid.
    #[serde(rename = "user")]
    User,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Interval => "interval",
            Provenance::ObbtUnion => "obbt-union",
            Provenance::Local => "local",
            Provenance::User => "user",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Provenance::Interval),
            "obbt-union" => Ok(Provenance::ObbtUnion),
            "local" => Ok(Provenance::Local),
            "user" => Ok(Provenance::User),
            other => Err(Error::Parse(format!("unknown provenance {other:?}"))),
        }
    }
}

/// One bound bracket for a split sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    /// Valid lower bound α̲.
    pub lower: f64,
    /// Valid upper bound ᾱ.
    pub upper: f64,
    /// Origin and validity scope of the bracket.
    pub provenance: Provenance,
}

/// Bounds for every `(disjunct, constraint, split)` key of one disjunction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    /// Map `(l, k, s) → entry`, ordered for deterministic iteration.
    pub entries: BTreeMap<(usize, usize, usize), BoundEntry>,
}

impl AlphaBounds {
    /// Empty bound set.
    pub fn new() -> Self {
        AlphaBounds::default()
    }

    /// Insert or replace the entry for `(l, k, s)`.
    pub fn insert(&mut self, l: usize, k: usize, s: usize, entry: BoundEntry) {
        debug_assert!(entry.lower <= entry.upper + 1e-12, "inverted bound bracket");
        self.entries.insert((l, k, s), entry);
    }

    /// Look up the entry for `(l, k, s)`.
    pub fn get(&self, l: usize, k: usize, s: usize) -> Option<&BoundEntry> {
        self.entries.get(&(l, k, s))
    }

    /// Look up an entry that must exist, with an error naming the key.
    pub fn require(&self, l: usize, k: usize, s: usize) -> Result<&BoundEntry> {
        self.get(l, k, s).ok_or_else(|| {
            Error::MissingBound(format!(
                "no bound entry for disjunct {l}, constraint {k}, split {s}"
            ))
        })
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the set is empty.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serialize as CSV with header `disjunct,constraint,split,lower,upper,provenance`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("disjunct,constraint,split,lower,upper,provenance\n");
        for (&(l, k, s), e) in &self.entries {
            out.push_str(&format!("{l},{k},{s},{},{},{}\n", e.lower, e.upper, e.provenance));
        }
        out
    }

    /// Parse the CSV format produced by [`AlphaBounds::to_csv_string`].
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut bounds = AlphaBounds::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("disjunct")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Parse(format!(
                    "bounds CSV line {}: expected 6 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse_usize = |f: &str, what: &str| {
                f.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("bounds CSV line {}: bad {what} {f:?}", lineno + 1))
                })
            };
            let parse_f64 = |f: &str, what: &str| {
                f.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("bounds CSV line {}: bad {what} {f:?}", lineno + 1))
                })
            };
            let l = parse_usize(fields[0], "disjunct index")?;
            let k = parse_usize(fields[1], "constraint index")?;
            let s = parse_usize(fields[2], "split index")?;
            let lower = parse_f64(fields[3], "lower bound")?;
            let upper = parse_f64(fields[4], "upper bound")?;
            let provenance: Provenance = fields[5].parse()?;
            if lower > upper {
                return Err(Error::Parse(format!(
                    "bounds CSV line {}: lower {lower} exceeds upper {upper}",
                    lineno + 1
                )));
            }
            bounds.insert(l, k, s, BoundEntry { lower, upper, provenance });
        }
        Ok(bounds)
    }

    /// Write the CSV form to a file.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    /// Read the CSV form from a file.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        AlphaBounds::from_csv_str(&text)
    }
}

/// Exact range of one univariate term `q(x−c)² + a·x` over `[l, u]`.
///
/// Candidates are the endpoints plus the interior stationary point when it
/// exists; the term is univariate, so taking min/max over candidates is
/// exact.
pub fn term_range(t: &UnivariateTerm, l: f64, u: f64) -> (f64, f64) {
    debug_assert!(l <= u, "term_range needs an ordered interval");
    let mut lo = t.eval(l).min(t.eval(u));
    let mut hi = t.eval(l).max(t.eval(u));
    if t.quad_coeff != 0.0 {
        let stationary = t.center - t.lin_coeff / (2.0 * t.quad_coeff);
        if stationary > l && stationary < u {
            let v = t.eval(stationary);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// The partial sum of `f` restricted to the variables in `class`
/// (no constant part: constants stay with the constraint right-hand side).
pub fn split_sum(f: &SeparableFunction, class: &[usize]) -> SeparableFunction {
    let terms: Vec<UnivariateTerm> =
        f.terms.iter().filter(|t| class.contains(&t.var_index)).cloned().collect();
    SeparableFunction::new(terms, 0.0)
}

/// Closed-form interval bounds for every split sum of a disjunction.
///
/// Entry `(l, k, s)` is the termwise range of disjunct `l`'s constraint-`k`
/// sum over split `s`, using only the box `[lower, upper]`. On a box these
/// are the exact per-split optima, so they are additive across splits.
pub fn alpha_bounds_interval(
    d: &Disjunction,
    p: &Partition,
    lower: &[f64],
    upper: &[f64],
) -> AlphaBounds {
    let mut bounds = AlphaBounds::new();
    for (l, disjunct) in d.disjuncts.iter().enumerate() {
        for (k, cons) in disjunct.constraints.iter().enumerate() {
            for (s, class) in p.classes.iter().enumerate() {
                let h = split_sum(&cons.lhs, class);
                let (lo, hi) = range_over_box(&h, lower, upper);
                bounds.insert(
                    l,
                    k,
                    s,
                    BoundEntry { lower: lo, upper: hi, provenance: Provenance::Interval },
                );
            }
        }
    }
    bounds
}

/// Scope of optimization-based bound tightening.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObbtMode {
    /// Bounds valid over the union of all disjunct regions: elementwise the
    /// loosest per-region optimum. Safe wherever interval bounds are.
    Union,
    /// Bounds over each disjunct's own region. Valid only while that
    /// disjunct is active; the compiler applies them to the active-disjunct
    /// slot and falls back to interval bounds elsewhere.
    Local,
}

/// Tightened bounds for disjunction `g` of `prob`.
///
/// For every key the split sum is optimized over each disjunct's region
/// (box ∩ global rows ∩ that disjunct's constraints). `Union` combines the
/// per-region optima; `Local` keeps only the own-region optimum. Results are
/// clamped against interval bounds, which are valid in both scopes.
pub fn alpha_bounds_obbt(
    prob: &DisjunctiveProblem,
    g: usize,
    p: &Partition,
    mode: ObbtMode,
) -> Result<AlphaBounds> {
    let d = prob
        .disjunctions
        .get(g)
        .ok_or_else(|| Error::InvalidArgument(format!("no disjunction {g}")))?;
    let mut regions = Vec::with_capacity(d.disjuncts.len());
    for l in 0..d.disjuncts.len() {
        let region = prob.disjunct_region(g, l)?;
        if region.find_feasible_point()?.is_none() {
            return Err(Error::Infeasible(format!(
                "disjunct {l} of disjunction {g} is infeasible; tighten or drop it"
            )));
        }
        regions.push(region);
    }

    let provenance = match mode {
        ObbtMode::Union => Provenance::ObbtUnion,
        ObbtMode::Local => Provenance::Local,
    };
    let mut bounds = AlphaBounds::new();
    for (l, disjunct) in d.disjuncts.iter().enumerate() {
        for (k, cons) in disjunct.constraints.iter().enumerate() {
            for (s, class) in p.classes.iter().enumerate() {
                let h = split_sum(&cons.lhs, class);
                let (ilo, ihi) = range_over_box(&h, &prob.lower, &prob.upper);
                let (lo, hi) = match mode {
                    ObbtMode::Local => {
                        let lo = minimize_over(&regions[l], &h)?;
                        let hi = maximize_over(&regions[l], &h)?;
                        (lo, hi)
                    }
                    ObbtMode::Union => {
                        let mut lo = f64::INFINITY;
                        let mut hi = f64::NEG_INFINITY;
                        for region in &regions {
                            lo = lo.min(minimize_over(region, &h)?);
                            hi = hi.max(maximize_over(region, &h)?);
                        }
                        (lo, hi)
                    }
                };
                // Interval bounds hold on the box, hence in either scope;
                // keep the tighter side. This also enforces the containment
                // invariant obbt ⊆ interval.
                let lower = lo.max(ilo);
                let upper = hi.min(ihi);
                bounds.insert(l, k, s, BoundEntry { lower, upper, provenance });
            }
        }
    }
    Ok(bounds)
}

/// Valid lower bound on `h` over a nonempty region (exact on the paths used
/// by the bundled examples; always valid).
fn minimize_over(region: &ConvexRegion, h: &SeparableFunction) -> Result<f64> {
    if h.terms.is_empty() {
        return Ok(h.constant);
    }
    if h.is_affine() {
        if let Some(v) = analytic_ball_extreme(region, h, false) {
            return Ok(v);
        }
        let mut c = vec![0.0; region.n()];
        for t in &h.terms {
            c[t.var_index] += t.lin_coeff;
        }
        return match region.minimize_linear(&c)? {
            RegionMin::Infeasible => Err(Error::Infeasible(
                "region became empty during bound tightening".into(),
            )),
            RegionMin::Bounded { value, .. } => Ok(value + h.constant),
        };
    }
    // Convex minimization via the epigraph; the bound is valid even when the
    // loop stops early.
    match region.minimize_separable(h)? {
        RegionMin::Infeasible => {
            Err(Error::Infeasible("region became empty during bound tightening".into()))
        }
        RegionMin::Bounded { value, .. } => Ok(value),
    }
}

/// Valid upper bound on `h` over a nonempty region.
///
/// Affine `h` goes through exact paths (closed-form ball extreme, LP, or
/// outer approximation, all of which over-estimate maxima). Convex quadratic
/// `h` is maximized exactly at a polytope vertex when the region is
/// polyhedral and small; otherwise a constraint-budget argument and the box
/// range give a valid (possibly loose) cap.
fn maximize_over(region: &ConvexRegion, h: &SeparableFunction) -> Result<f64> {
    if h.terms.is_empty() {
        return Ok(h.constant);
    }
    if h.is_affine() {
        if let Some(v) = analytic_ball_extreme(region, h, true) {
            return Ok(v);
        }
        let mut c = vec![0.0; region.n()];
        for t in &h.terms {
            c[t.var_index] += t.lin_coeff;
        }
        return match region.maximize_linear(&c)? {
            RegionMin::Infeasible => Err(Error::Infeasible(
                "region became empty during bound tightening".into(),
            )),
            RegionMin::Bounded { value, .. } => Ok(value + h.constant),
        };
    }
    let (_, box_hi) = range_over_box(h, region.lower(), region.upper());
    if region.is_polyhedral() {
        if let Some(vertices) = polytope_vertices(region) {
            // h is convex, so its maximum over a polytope sits at a vertex.
            let mut best = f64::NEG_INFINITY;
            for v in &vertices {
                best = best.max(h.evaluate(v));
            }
            if best.is_finite() {
                return Ok(best.min(box_hi));
            }
        }
        return Ok(box_hi);
    }
    // Budget argument: if h's terms are a subset of a convex row g ≤ rhs,
    // then h = g − const − rest ≤ rhs − const − min_box(rest).
    let mut cap = box_hi;
    for (g, rhs) in region.convex_rows() {
        if let Some(budget) = subset_budget(h, g, *rhs, region.lower(), region.upper()) {
            cap = cap.min(budget);
        }
    }
    Ok(cap)
}

/// If every term of `h` appears identically in `g`, bound `max h` by
/// `rhs − g.constant − min_box(g − h)`.
fn subset_budget(
    h: &SeparableFunction,
    g: &SeparableFunction,
    rhs: f64,
    lower: &[f64],
    upper: &[f64],
) -> Option<f64> {
    let mut rest_lo = 0.0;
    let mut matched = 0usize;
    for t in &g.terms {
        match h.terms.iter().find(|ht| ht.var_index == t.var_index) {
            Some(ht)
                if ht.quad_coeff == t.quad_coeff
                    && ht.center == t.center
                    && ht.lin_coeff == t.lin_coeff =>
            {
                matched += 1;
            }
            Some(_) => return None, // same variable, different term shape
            None => {
                let (lo, _) = term_range(t, lower[t.var_index], upper[t.var_index]);
                rest_lo += lo;
            }
        }
    }
    if matched == h.terms.len() {
        Some(rhs - g.constant - rest_lo + h.constant)
    } else {
        None
    }
}

/// Closed-form extreme of an affine `h` over a region whose only nonlinear
/// row is a pure ball `Σ qᵢ(xᵢ−cᵢ)² ≤ rhs`: the Lagrange point
/// `xᵢ = cᵢ ± vᵢ·√(R/Σv²/q)/qᵢ`. Returns `None` unless the candidate point
/// (with all other variables at ball centers or clamped to the box) is
/// feasible for the whole region, in which case the value is exact.
fn analytic_ball_extreme(
    region: &ConvexRegion,
    h: &SeparableFunction,
    maximize: bool,
) -> Option<f64> {
    if region.convex_rows().len() != 1 || !h.is_affine() {
        return None;
    }
    let (g, rhs) = &region.convex_rows()[0];
    if g.terms.iter().any(|t| t.quad_coeff <= 0.0 || t.lin_coeff != 0.0) {
        return None;
    }
    let radius2 = rhs - g.constant;
    if radius2 < 0.0 {
        return None;
    }
    // Every h variable must carry ball curvature, or the direction is flat
    // in the ball and the box decides (not this path).
    let mut weight = 0.0;
    for t in &h.terms {
        match g.terms.iter().find(|gt| gt.var_index == t.var_index) {
            Some(gt) => weight += t.lin_coeff * t.lin_coeff / gt.quad_coeff,
            None => return None,
        }
    }
    if weight <= 0.0 {
        return None;
    }
    let scale = (radius2 / weight).sqrt();
    let sign = if maximize { 1.0 } else { -1.0 };
    // Candidate point: Lagrange coordinates for h's variables, ball centers
    // for other ball variables, clamped zeros elsewhere.
    let mut x = vec![0.0; region.n()];
    for j in 0..region.n() {
        x[j] = 0.0f64.clamp(region.lower()[j], region.upper()[j]);
    }
    for gt in &g.terms {
        x[gt.var_index] = gt.center;
    }
    for t in &h.terms {
        let q = g
            .terms
            .iter()
            .find(|gt| gt.var_index == t.var_index)
            .expect("checked above")
            .quad_coeff;
        let center = g
            .terms
            .iter()
            .find(|gt| gt.var_index == t.var_index)
            .expect("checked above")
            .center;
        x[t.var_index] = center + sign * t.lin_coeff * scale / q;
    }
    if !region.contains(&x, 1e-9) {
        return None;
    }
    let value: f64 = h.evaluate(&x);
    Some(value)
}

/// Vertices of a small polyhedral region (box + linear rows), or `None`
/// when the region is too large for exact enumeration.
fn polytope_vertices(region: &ConvexRegion) -> Option<Vec<Vec<f64>>> {
    let n = region.n();
    if n == 0 || n > 8 || !region.is_polyhedral() {
        return None;
    }
    // All rows as a᷀x ≤ b, including the box sides.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (coeffs, rhs) in region.linear_rows() {
        let mut a = vec![0.0; n];
        for &(j, c) in coeffs {
            a[j] += c;
        }
        rows.push((a, *rhs));
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        rows.push((a.clone(), region.upper()[j]));
        a[j] = -1.0;
        rows.push((a, -region.lower()[j]));
    }
    let m = rows.len();
    if m < n || binomial(m, n)? > VERTEX_COMBO_CAP {
        return None;
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut combo: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_square(&combo, &rows, n) {
            let feasible = rows
                .iter()
                .all(|(a, b)| a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum::<f64>() <= b + FEAS_TOL);
            if feasible {
                vertices.push(x);
            }
        }
        // Advance the combination in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return Some(vertices);
            }
            i -= 1;
            if combo[i] + (n - i) < m {
                combo[i] += 1;
                for j in i + 1..n {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(m: usize, n: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..n.min(m.saturating_sub(n)) {
        acc = acc.checked_mul(m - i)?;
        acc /= i + 1;
        if acc > 10 * VERTEX_COMBO_CAP {
            return Some(acc);
        }
    }
    Some(acc)
}

/// Solve the n×n active-row system by Gauss–Jordan with partial pivoting.
fn solve_square(combo: &[usize], rows: &[(Vec<f64>, f64)], n: usize) -> Option<Vec<f64>> {
    let mut mat: Vec<Vec<f64>> = combo
        .iter()
        .map(|&i| {
            let mut v = rows[i].0.clone();
            v.push(rows[i].1);
            v
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| mat[a][col].abs().partial_cmp(&mat[b][col].abs())
            .expect("no NaNs in row data"))?;
        if mat[piv][col].abs() < 1e-9 {
            return None;
        }
        mat.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = mat[r][col] / mat[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        mat[r][c] -= f * mat[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| mat[i][n] / mat[i][i]).collect())
}

/// Outcome of one split-pair independence comparison (Definition 3 style:
/// do the separate per-split optima add up to the joint optimum over 𝒳?).
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceRecord {
    /// Disjunct index.
    pub disjunct: usize,
    /// Constraint index within the disjunct.
    pub constraint: usize,
    /// First split of the pair.
    pub split_a: usize,
    /// Second split of the pair.
    pub split_b: usize,
    /// Whether min and max both separate within `1e-8`.
    pub independent: bool,
}

/// Check bound independence for every (constraint, split-pair) of a
/// disjunction over 𝒳 = box ∩ global rows.
///
/// A pair is independent when the joint min/max of the combined sum equals
/// the sum of the per-split optima. On a pure box this always holds; global
/// rows can couple the splits.
pub fn independence_check(
    d: &Disjunction,
    p: &Partition,
    prob: &DisjunctiveProblem,
) -> Result<Vec<IndependenceRecord>> {
    let base = prob.base_region();
    if base.find_feasible_point()?.is_none() {
        return Err(Error::Infeasible("the base region 𝒳 is empty".into()));
    }
    let mut records = Vec::new();
    for (l, disjunct) in d.disjuncts.iter().enumerate() {
        for (k, cons) in disjunct.constraints.iter().enumerate() {
            // Per-split optima first.
            let mut split_min = Vec::with_capacity(p.len());
            let mut split_max = Vec::with_capacity(p.len());
            for class in &p.classes {
                let h = split_sum(&cons.lhs, class);
                split_min.push(minimize_over(&base, &h)?);
                split_max.push(maximize_over(&base, &h)?);
            }
            for sa in 0..p.len() {
                for sb in sa + 1..p.len() {
                    let mut class = p.classes[sa].clone();
                    class.extend_from_slice(&p.classes[sb]);
                    let h = split_sum(&cons.lhs, &class);
                    let joint_min = minimize_over(&base, &h)?;
                    let joint_max = maximize_over(&base, &h)?;
                    let scale = 1.0
                        + joint_min.abs().max(joint_max.abs())
                        + split_min[sa].abs().max(split_max[sa].abs());
                    let independent = (joint_min - (split_min[sa] + split_min[sb])).abs()
                        <= INDEP_TOL * scale
                        && (joint_max - (split_max[sa] + split_max[sb])).abs() <= INDEP_TOL * scale;
                    records.push(IndependenceRecord {
                        disjunct: l,
                        constraint: k,
                        split_a: sa,
                        split_b: sb,
                        independent,
                    });
                }
            }
        }
    }
    Ok(records)
}

/// A group of split sums equal up to a positive scalar, which can share one
/// α variable.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedGroup {
    /// Lowest `(l, k, s)` key of the group.
    pub representative: (usize, usize, usize),
    /// All member keys with their scale: `sum_member = scale · sum_rep`.
    /// The representative itself is the first member with scale 1.
    pub members: Vec<((usize, usize, usize), f64)>,
}

/// Expanded per-variable signature `(var → (x² coeff, x coeff))` plus the
/// constant, used for proportionality comparison of split sums.
fn expanded_signature(f: &SeparableFunction) -> (Vec<(usize, f64, f64)>, f64) {
    let mut per_var: Vec<(usize, f64, f64)> = Vec::with_capacity(f.terms.len());
    let mut constant = f.constant;
    for t in &f.terms {
        let quad = t.quad_coeff;
        let lin = -2.0 * t.quad_coeff * t.center + t.lin_coeff;
        constant += t.quad_coeff * t.center * t.center;
        per_var.push((t.var_index, quad, lin));
    }
    (per_var, constant)
}

/// Group split sums that are equal up to a positive scalar (and therefore
/// shareable as one lifted variable). Only groups with at least two members
/// are reported; the representative is the lowest key in `(l, k, s)` order.
pub fn detect_shared_alphas(d: &Disjunction, p: &Partition) -> Vec<SharedGroup> {
    // Collect signatures in deterministic key order.
    let mut keys: Vec<((usize, usize, usize), (Vec<(usize, f64, f64)>, f64), f64)> = Vec::new();
    for (l, disjunct) in d.disjuncts.iter().enumerate() {
        for (k, cons) in disjunct.constraints.iter().enumerate() {
            for (s, class) in p.classes.iter().enumerate() {
                let h = split_sum(&cons.lhs, class);
                if h.terms.is_empty() {
                    continue; // empty sums carry no information to share
                }
                let (sig, constant) = expanded_signature(&h);
                let scale = sig
                    .iter()
                    .flat_map(|&(_, q, a)| [q.abs(), a.abs()])
                    .chain(std::iter::once(constant.abs()))
                    .fold(0.0_f64, f64::max);
                keys.push(((l, k, s), (sig, constant), scale));
            }
        }
    }

    let matches = |a: &(Vec<(usize, f64, f64)>, f64),
                   sa: f64,
                   b: &(Vec<(usize, f64, f64)>, f64),
                   sb: f64|
     -> bool {
        if a.0.len() != b.0.len() || sa <= 0.0 || sb <= 0.0 {
            return false;
        }
        let close = |x: f64, y: f64| (x / sa - y / sb).abs() <= SHARE_TOL;
        if !close(a.1, b.1) {
            return false;
        }
        a.0.iter().zip(&b.0).all(|(&(va, qa, la), &(vb, qb, lb))| {
            va == vb && close(qa, qb) && close(la, lb)
        })
    };

    let mut grouped = vec![false; keys.len()];
    let mut groups = Vec::new();
    for i in 0..keys.len() {
        if grouped[i] {
            continue;
        }
        let (rep_key, ref rep_sig, rep_scale) = keys[i];
        let mut members = vec![(rep_key, 1.0)];
        for j in i + 1..keys.len() {
            if grouped[j] {
                continue;
            }
            let (key_j, ref sig_j, scale_j) = keys[j];
            if matches(rep_sig, rep_scale, sig_j, scale_j) {
                members.push((key_j, scale_j / rep_scale));
                grouped[j] = true;
            }
        }
        if members.len() >= 2 {
            grouped[i] = true;
            groups.push(SharedGroup { representative: rep_key, members });
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::make_ex1;
    use crate::model::{Disjunct, DisjunctConstraint, GlobalRow, RowSense};
    use crate::partition::partition_uniform;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn term_range_symmetric_square() {
        let t = UnivariateTerm::quadratic(0, 1.0, 0.0);
        assert_eq!(term_range(&t, -4.0, 4.0), (0.0, 16.0));
    }

    #[test]
    fn term_range_linear() {
        let t = UnivariateTerm::linear(0, -1.0);
        assert_eq!(term_range(&t, -4.0, 4.0), (-4.0, 4.0));
    }

    #[test]
    fn term_range_shifted_with_slope() {
        // q=1, c=1, a=2 on [0,5]: stationary at x = 1 − 1 = 0 (boundary),
        // candidates f(0)=1, f(5)=26 → (1, 26).
        let t = UnivariateTerm { var_index: 0, quad_coeff: 1.0, center: 1.0, lin_coeff: 2.0 };
        let (lo, hi) = term_range(&t, 0.0, 5.0);
        assert!((lo - 1.0).abs() < 1e-12, "lo {lo}");
        assert!((hi - 26.0).abs() < 1e-12, "hi {hi}");
    }

    #[test]
    fn term_range_matches_dense_grid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = UnivariateTerm {
                var_index: 0,
                quad_coeff: rng.random_range(0.0..3.0),
                center: rng.random_range(-2.0..2.0),
                lin_coeff: rng.random_range(-3.0..3.0),
            };
            let l = rng.random_range(-5.0..0.0);
            let u = l + rng.random_range(0.5..6.0);
            let (lo, hi) = term_range(&t, l, u);
            let steps = 100_000;
            let mut grid_lo = f64::INFINITY;
            let mut grid_hi = f64::NEG_INFINITY;
            for i in 0..=steps {
                let x = l + (u - l) * i as f64 / steps as f64;
                let v = t.eval(x);
                grid_lo = grid_lo.min(v);
                grid_hi = grid_hi.max(v);
            }
            assert!(lo <= grid_lo + 1e-9 && lo >= grid_lo - 1e-6, "lo {lo} vs grid {grid_lo}");
            assert!(hi >= grid_hi - 1e-9 && hi <= grid_hi + 1e-6, "hi {hi} vs grid {grid_hi}");
        }
    }

    #[test]
    fn interval_bounds_on_first_example() {
        let prob = make_ex1();
        let d = &prob.disjunctions[0];
        // 1-split: quadratic disjunct (0, 64), affine disjunct (−16, 16).
        let p1 = partition_uniform(4, 1).unwrap();
        let b1 = alpha_bounds_interval(d, &p1, &prob.lower, &prob.upper);
        let e = b1.get(0, 0, 0).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 64.0));
        let e = b1.get(1, 0, 0).unwrap();
        assert_eq!((e.lower, e.upper), (-16.0, 16.0));
        // 2-split: (0, 32) per split for the ball, (−8, 8) for the sum row.
        let p2 = partition_uniform(4, 2).unwrap();
        let b2 = alpha_bounds_interval(d, &p2, &prob.lower, &prob.upper);
        for s in 0..2 {
            let e = b2.get(0, 0, s).unwrap();
            assert_eq!((e.lower, e.upper), (0.0, 32.0));
            let e = b2.get(1, 0, s).unwrap();
            assert_eq!((e.lower, e.upper), (-8.0, 8.0));
        }
    }

    #[test]
    fn obbt_union_reproduces_tightened_values() {
        let prob = make_ex1();
        let d = 0;
        // 1-split: ball (0, 64); sum row upper 4·√(1/4) = 2, lower −16.
        let p1 = partition_uniform(4, 1).unwrap();
        let b1 = alpha_bounds_obbt(&prob, d, &p1, ObbtMode::Union).unwrap();
        let e = b1.get(0, 0, 0).unwrap();
        assert!((e.lower - 0.0).abs() <= 1e-9 && (e.upper - 64.0).abs() <= 1e-9);
        let e = b1.get(1, 0, 0).unwrap();
        assert!((e.upper - 2.0).abs() <= 1e-9, "upper {}", e.upper);
        assert!((e.lower + 16.0).abs() <= 1e-9, "lower {}", e.lower);
        // 2-split: ball (0, 32); sum row upper 2·√(1/2) = √2, lower −8.
        let p2 = partition_uniform(4, 2).unwrap();
        let b2 = alpha_bounds_obbt(&prob, d, &p2, ObbtMode::Union).unwrap();
        for s in 0..2 {
            let e = b2.get(0, 0, s).unwrap();
            assert!((e.lower - 0.0).abs() <= 1e-9 && (e.upper - 32.0).abs() <= 1e-9);
            let e = b2.get(1, 0, s).unwrap();
            assert!((e.upper - 2.0_f64.sqrt()).abs() <= 1e-9, "upper {}", e.upper);
            assert!((e.lower + 8.0).abs() <= 1e-9, "lower {}", e.lower);
        }
        // 4-split: ball (0, 16); sum row (−4, 1).
        let p4 = partition_uniform(4, 4).unwrap();
        let b4 = alpha_bounds_obbt(&prob, d, &p4, ObbtMode::Union).unwrap();
        for s in 0..4 {
            let e = b4.get(0, 0, s).unwrap();
            assert!((e.lower - 0.0).abs() <= 1e-9 && (e.upper - 16.0).abs() <= 1e-9);
            let e = b4.get(1, 0, s).unwrap();
            assert!((e.upper - 1.0).abs() <= 1e-9, "upper {}", e.upper);
            assert!((e.lower + 4.0).abs() <= 1e-9, "lower {}", e.lower);
        }
    }

    #[test]
    fn obbt_local_restricts_to_own_region() {
        // Over the unit ball itself, each 2-split ball sum stays within (0, 1).
        let prob = make_ex1();
        let p2 = partition_uniform(4, 2).unwrap();
        let b = alpha_bounds_obbt(&prob, 0, &p2, ObbtMode::Local).unwrap();
        for s in 0..2 {
            let e = b.get(0, 0, s).unwrap();
            assert!((e.lower - 0.0).abs() <= 1e-9);
            assert!((e.upper - 1.0).abs() <= 1e-9, "upper {}", e.upper);
            assert_eq!(e.provenance, Provenance::Local);
        }
    }

    #[test]
    fn obbt_errors_on_infeasible_disjunct() {
        let mut prob = make_ex1();
        // Make the affine disjunct unsatisfiable: Σ −x ≤ −17 needs Σx ≥ 17 > 16.
        prob.disjunctions[0].disjuncts[1].constraints[0].rhs = -17.0;
        let p = partition_uniform(4, 1).unwrap();
        let err = alpha_bounds_obbt(&prob, 0, &p, ObbtMode::Union).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("disjunct 1"), "error should name the disjunct: {msg}");
    }

    #[test]
    fn interval_bounds_bracket_random_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let prob = make_ex1();
        let d = &prob.disjunctions[0];
        for p_count in [1, 2, 4] {
            let p = partition_uniform(4, p_count).unwrap();
            let b = alpha_bounds_interval(d, &p, &prob.lower, &prob.upper);
            for _ in 0..2_500 {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-4.0..4.0)).collect();
                for (l, disjunct) in d.disjuncts.iter().enumerate() {
                    for (k, cons) in disjunct.constraints.iter().enumerate() {
                        for (s, class) in p.classes.iter().enumerate() {
                            let h = split_sum(&cons.lhs, class);
                            let v = h.evaluate(&x);
                            let e = b.get(l, k, s).unwrap();
                            assert!(
                                v >= e.lower - 1e-9 && v <= e.upper + 1e-9,
                                "sample {v} escapes [{}, {}]",
                                e.lower,
                                e.upper
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn refined_interval_bounds_are_additive() {
        let prob = make_ex1();
        let d = &prob.disjunctions[0];
        let chain = crate::partition::halving_chain(4);
        for w in chain.windows(2) {
            let (coarse, fine) = (&w[0], &w[1]);
            let bc = alpha_bounds_interval(d, coarse, &prob.lower, &prob.upper);
            let bf = alpha_bounds_interval(d, fine, &prob.lower, &prob.upper);
            for (l, disjunct) in d.disjuncts.iter().enumerate() {
                for (k, _) in disjunct.constraints.iter().enumerate() {
                    for (sc, class) in coarse.classes.iter().enumerate() {
                        // Fine classes contained in this coarse class.
                        let mut lo_sum = 0.0;
                        let mut hi_sum = 0.0;
                        for (sf, fclass) in fine.classes.iter().enumerate() {
                            if fclass.iter().all(|v| class.contains(v)) {
                                let e = bf.get(l, k, sf).unwrap();
                                lo_sum += e.lower;
                                hi_sum += e.upper;
                            }
                        }
                        let e = bc.get(l, k, sc).unwrap();
                        assert!((lo_sum - e.lower).abs() <= 1e-9);
                        assert!((hi_sum - e.upper).abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn independence_true_on_box() {
        let prob = make_ex1();
        let d = &prob.disjunctions[0];
        for pc in [2, 4] {
            let p = partition_uniform(4, pc).unwrap();
            let recs = independence_check(d, &p, &prob).unwrap();
            assert!(!recs.is_empty());
            assert!(recs.iter().all(|r| r.independent), "box optima must separate");
        }
    }

    #[test]
    fn independence_fails_with_coupling_row() {
        // 𝒳 = [0,1]² ∩ {x₁ + x₂ ≤ 1}, h = x₁ + x₂ split into {0},{1}:
        // joint max = 1 < 1 + 1 = separate maxima.
        let mut prob = DisjunctiveProblem::new_box(vec![0.0, 0.0], vec![1.0, 1.0]);
        prob.globals.push(GlobalRow {
            coeffs: vec![(0, 1.0), (1, 1.0)],
            sense: RowSense::Le,
            rhs: 1.0,
        });
        let cons = DisjunctConstraint {
            lhs: SeparableFunction::affine(&[1.0, 1.0], 0.0),
            rhs: 10.0,
        };
        let d = Disjunction {
            disjuncts: vec![Disjunct { constraints: vec![cons] }],
        };
        prob.disjunctions.push(d);
        let p = partition_uniform(2, 2).unwrap();
        let recs = independence_check(&prob.disjunctions[0], &p, &prob).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(!recs[0].independent, "coupled row must break independence");
    }

    #[test]
    fn shared_alpha_groups_identical_sums() {
        // Both disjuncts contain x₁ + x₂ (one scaled by 2): one group.
        let c1 = DisjunctConstraint { lhs: SeparableFunction::affine(&[1.0, 1.0], 0.0), rhs: 1.0 };
        let c2 = DisjunctConstraint { lhs: SeparableFunction::affine(&[2.0, 2.0], 0.0), rhs: 4.0 };
        let d = Disjunction {
            disjuncts: vec![
                Disjunct { constraints: vec![c1] },
                Disjunct { constraints: vec![c2] },
            ],
        };
        let p = partition_uniform(2, 1).unwrap();
        let groups = detect_shared_alphas(&d, &p);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].representative, (0, 0, 0));
        assert_eq!(groups[0].members.len(), 2);
        assert!((groups[0].members[1].1 - 2.0).abs() < 1e-12, "scale must be 2");
    }

    #[test]
    fn shared_alpha_rejects_negative_scaling() {
        let c1 = DisjunctConstraint { lhs: SeparableFunction::affine(&[1.0, 1.0], 0.0), rhs: 1.0 };
        let c2 =
            DisjunctConstraint { lhs: SeparableFunction::affine(&[-1.0, -1.0], 0.0), rhs: 1.0 };
        let d = Disjunction {
            disjuncts: vec![
                Disjunct { constraints: vec![c1] },
                Disjunct { constraints: vec![c2] },
            ],
        };
        let p = partition_uniform(2, 1).unwrap();
        assert!(detect_shared_alphas(&d, &p).is_empty(), "flipping signs must not share");
    }

    #[test]
    fn bounds_csv_round_trip() {
        let mut b = AlphaBounds::new();
        b.insert(0, 0, 0, BoundEntry { lower: 0.0, upper: 64.0, provenance: Provenance::Interval });
        b.insert(
            1,
            0,
            1,
            BoundEntry {
                lower: -8.0,
                upper: std::f64::consts::SQRT_2,
                provenance: Provenance::ObbtUnion,
            },
        );
        b.insert(1, 1, 0, BoundEntry { lower: -0.25, upper: 3.5, provenance: Provenance::User });
        let text = b.to_csv_string();
        let back = AlphaBounds::from_csv_str(&text).unwrap();
        assert_eq!(b, back, "CSV round trip must preserve every bit");
    }

    #[test]
    fn bounds_csv_rejects_bad_rows() {
        assert!(AlphaBounds::from_csv_str("0,0,0,1.0,2.0").is_err());
        assert!(AlphaBounds::from_csv_str("0,0,0,2.0,1.0,interval").is_err());
        assert!(AlphaBounds::from_csv_str("0,0,0,1.0,2.0,guesswork").is_err());
    }
}
