//! Core data model: disjunctive problems over a box domain, and the
//! evaluation/validation utilities the rest of the crate builds on.
//!
//! A problem holds `n` variables with finite box bounds, a linear objective,
//! optional global linear rows, and a list of disjunctions. Every disjunct
//! constraint has the form `g(x) ≤ b` where `g` is a sum of univariate
//! convex pieces `q·(x_i − c)² + a·x_i` plus a constant — rich enough for
//! affine rows and squared Euclidean distances, and closed-form enough that
//! every bound computation downstream is exact.

use serde::{Deserialize, Serialize};

use crate::solver::region::ConvexRegion;
use crate::{Error, Result};

/// Default feasibility tolerance used when evaluating constraints.
pub const FEAS_TOL: f64 = 1e-7;

/// One univariate piece `q·(x − c)² + a·x` of a separable function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivariateTerm {
    /// Index of the variable this term acts on.
    pub var_index: usize,
    /// Quadratic coefficient `q`; must be ≥ 0 for convexity.
    pub quad_coeff: f64,
    /// Center `c` of the quadratic piece (irrelevant when `q = 0`).
    pub center: f64,
    /// Linear coefficient `a`.
    pub lin_coeff: f64,
}

impl UnivariateTerm {
    /// Purely linear term `a·x`.
    pub fn linear(var_index: usize, a: f64) -> Self {
        UnivariateTerm { var_index, quad_coeff: 0.0, center: 0.0, lin_coeff: a }
    }

    /// Quadratic term `q·(x − c)²`.
    pub fn quadratic(var_index: usize, q: f64, c: f64) -> Self {
        UnivariateTerm { var_index, quad_coeff: q, center: c, lin_coeff: 0.0 }
    }

    /// Value of the term at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.quad_coeff * d * d + self.lin_coeff * x
    }

    /// True when the term has no quadratic part.
    pub fn is_affine(&self) -> bool {
        self.quad_coeff == 0.0
    }
}

/// A sum of univariate terms plus a constant, at most one term per variable.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SeparableFunction {
    /// Terms, sorted by `var_index`, no duplicates.
    pub terms: Vec<UnivariateTerm>,
    /// Additive constant.
    pub constant: f64,
}

impl SeparableFunction {
    /// Build a function from arbitrary terms, merging duplicates on the same
    /// variable. Merged quadratics are re-centered at 0 (the expanded
    /// polynomial is preserved exactly; surplus constants fold into
    /// `constant`).
    pub fn new(terms: Vec<UnivariateTerm>, constant: f64) -> Self {
        let mut sorted = terms;
        sorted.sort_by_key(|t| t.var_index);
        let mut out: Vec<UnivariateTerm> = Vec::with_capacity(sorted.len());
        let mut constant = constant;
        for t in sorted {
            match out.last_mut() {
                Some(last) if last.var_index == t.var_index => {
                    // Expand both to Q·x² + L·x + K and re-center at 0.
                    let q = last.quad_coeff + t.quad_coeff;
                    let l = last.lin_coeff + t.lin_coeff
                        - 2.0 * last.quad_coeff * last.center
                        - 2.0 * t.quad_coeff * t.center;
                    let k = last.quad_coeff * last.center * last.center
                        + t.quad_coeff * t.center * t.center;
                    constant += k;
                    *last = UnivariateTerm {
                        var_index: t.var_index,
                        quad_coeff: q,
                        center: 0.0,
                        lin_coeff: l,
                    };
                }
                _ => out.push(t),
            }
        }
        SeparableFunction { terms: out, constant }
    }

    /// Affine function `Σ coeffs_i · x_i + constant` from a dense slice.
    pub fn affine(coeffs: &[f64], constant: f64) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(i, &a)| UnivariateTerm::linear(i, a))
            .collect();
        SeparableFunction { terms, constant }
    }

    /// Value at `x`. `x` must cover every referenced variable index.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for t in &self.terms {
            v += t.eval(x[t.var_index]);
        }
        v
    }

    /// True when every term is affine.
    pub fn is_affine(&self) -> bool {
        self.terms.iter().all(|t| t.is_affine())
    }

    /// Largest referenced variable index, if any term exists.
    pub fn max_var_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.var_index).max()
    }
}

/// One constraint `lhs(x) ≤ rhs` of a disjunct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjunctConstraint {
    /// Left-hand side.
    pub lhs: SeparableFunction,
    /// Right-hand side `b`.
    pub rhs: f64,
}

impl DisjunctConstraint {
    /// Constraint satisfied at `x` within `tol`.
    pub fn satisfied_at(&self, x: &[f64], tol: f64) -> bool {
        self.lhs.evaluate(x) <= self.rhs + tol
    }
}

/// One alternative (bracket) of a disjunction: a conjunction of constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disjunct {
    /// Constraints that must all hold when this disjunct is selected.
    pub constraints: Vec<DisjunctConstraint>,
}

impl Disjunct {
    /// All constraints satisfied at `x` within `tol`.
    pub fn satisfied_at(&self, x: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| c.satisfied_at(x, tol))
    }
}

/// An OR over disjuncts: at least one must hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disjunction {
    /// The alternatives. Meaningful disjunctions have at least two; a
    /// single-disjunct instance is accepted (it degenerates to a plain
    /// constraint set) and flagged by [`DisjunctiveProblem::validate`].
    pub disjuncts: Vec<Disjunct>,
}

impl Disjunction {
    /// True iff some disjunct has all constraints satisfied within `tol`.
    pub fn satisfied_at(&self, x: &[f64], tol: f64) -> bool {
        self.disjuncts.iter().any(|d| d.satisfied_at(x, tol))
    }
}

/// Objective direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    /// Minimize the objective.
    #[default]
    #[serde(rename = "min")]
    Minimize,
    /// Maximize the objective.
    #[serde(rename = "max")]
    Maximize,
}

/// Row sense for global linear rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    /// `Σ a·x ≤ b`
    #[serde(rename = "le")]
    Le,
    /// `Σ a·x = b`
    #[serde(rename = "eq")]
    Eq,
}

/// A global linear constraint `Σ coeffs·x {≤,=} rhs`, valid for every
/// disjunct choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalRow {
    /// Sparse coefficients `(var_index, value)`.
    pub coeffs: Vec<(usize, f64)>,
    /// Row sense.
    pub sense: RowSense,
    /// Right-hand side.
    pub rhs: f64,
}

/// A linear constraint over disjunct indicators, e.g. an assignment row
/// `Σ λ ≤ 1` tying disjunct choices of different disjunctions together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    /// Sparse terms `(disjunction_index, disjunct_index, coefficient)`.
    pub terms: Vec<(usize, usize, f64)>,
    /// Row sense.
    pub sense: RowSense,
    /// Right-hand side.
    pub rhs: f64,
}

/// A complete disjunctive optimization problem over a box domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjunctiveProblem {
    /// Number of variables.
    pub n: usize,
    /// Per-variable finite lower bounds.
    pub lower: Vec<f64>,
    /// Per-variable finite upper bounds.
    pub upper: Vec<f64>,
    /// Dense linear objective coefficients (length `n`).
    pub objective: Vec<f64>,
    /// Objective direction.
    pub sense: ObjSense,
    /// Global linear rows holding for every disjunct choice.
    pub globals: Vec<GlobalRow>,
    /// The disjunctions.
    pub disjunctions: Vec<Disjunction>,
    /// Optional linear rows over disjunct indicators.
    pub indicator_rows: Vec<IndicatorRow>,
}

/// Outcome of [`DisjunctiveProblem::validate`]: structural errors abort
/// compilation, warnings do not.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Structural problems that make the model unusable.
    pub errors: Vec<String>,
    /// Suspicious but non-fatal observations.
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// True when no errors were found.
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl DisjunctiveProblem {
    /// A problem with `n` variables on the given box, zero objective, and no
    /// constraints yet.
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = lower.len();
        DisjunctiveProblem {
            n,
            lower,
            upper,
            objective: vec![0.0; n],
            sense: ObjSense::Minimize,
            globals: Vec::new(),
            disjunctions: Vec::new(),
            indicator_rows: Vec::new(),
        }
    }

    /// Check structural invariants and per-disjunct feasibility.
    ///
    /// Errors: non-finite box bounds, `lower > upper`, negative quadratic
    /// coefficients, out-of-range variable indices, empty disjuncts or
    /// disjunctions, and disjuncts that are infeasible over the box and
    /// global rows (each checked by one convex feasibility solve).
    /// Warnings: disjuncts whose constraint count reaches half the variable
    /// count (the formulations target disjuncts with few constraints), and
    /// single-disjunct disjunctions.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        if self.lower.len() != self.n || self.upper.len() != self.n {
            rep.errors.push(format!(
                "bound vectors have lengths {}/{}, expected {}",
                self.lower.len(),
                self.upper.len(),
                self.n
            ));
            return rep;
        }
        if self.objective.len() != self.n {
            rep.errors.push(format!(
                "objective has length {}, expected {}",
                self.objective.len(),
                self.n
            ));
        }
        for i in 0..self.n {
            if !self.lower[i].is_finite() || !self.upper[i].is_finite() {
                rep.errors.push(format!("unbounded variable x{i}: bounds must be finite"));
            } else if self.lower[i] > self.upper[i] {
                rep.errors
                    .push(format!("empty domain for x{i}: lower {} > upper {}", self.lower[i], self.upper[i]));
            }
        }
        for (g, row) in self.globals.iter().enumerate() {
            for &(i, _) in &row.coeffs {
                if i >= self.n {
                    rep.errors.push(format!("global row {g} references x{i} (n = {})", self.n));
                }
            }
        }
        for (gi, dj) in self.disjunctions.iter().enumerate() {
            if dj.disjuncts.is_empty() {
                rep.errors.push(format!("disjunction {gi} has no disjuncts"));
                continue;
            }
            if dj.disjuncts.len() < 2 {
                rep.warnings
                    .push(format!("disjunction {gi} has a single disjunct; it is an unconditional constraint set"));
            }
            for (li, d) in dj.disjuncts.iter().enumerate() {
                if d.constraints.is_empty() {
                    rep.errors.push(format!("disjunct {li} of disjunction {gi} has no constraints"));
                    continue;
                }
                if 2 * d.constraints.len() >= self.n.max(1) {
                    rep.warnings.push(format!(
                        "disjunct {li} of disjunction {gi} has {} constraints over {} variables; \
                         these formulations target disjuncts with far fewer constraints than variables",
                        d.constraints.len(),
                        self.n
                    ));
                }
                let mut structural_ok = true;
                for (ki, c) in d.constraints.iter().enumerate() {
                    for t in &c.lhs.terms {
                        if t.var_index >= self.n {
                            rep.errors.push(format!(
                                "constraint {ki} of disjunct {li} in disjunction {gi} references x{} (n = {})",
                                t.var_index, self.n
                            ));
                            structural_ok = false;
                        }
                        if !(t.quad_coeff >= 0.0) {
                            rep.errors.push(format!(
                                "constraint {ki} of disjunct {li} in disjunction {gi} has negative quadratic \
                                 coefficient {} on x{} (nonconvex)",
                                t.quad_coeff, t.var_index
                            ));
                            structural_ok = false;
                        }
                    }
                }
                if structural_ok && rep.errors.is_empty() {
                    match self.disjunct_region(gi, li).and_then(|r| r.find_feasible_point()) {
                        Ok(Some(_)) => {}
                        Ok(None) => rep.errors.push(format!(
                            "disjunct {li} of disjunction {gi} is infeasible over the box and global rows"
                        )),
                        Err(e) => rep
                            .errors
                            .push(format!("feasibility check failed for disjunct {li} of disjunction {gi}: {e}")),
                    }
                }
            }
        }
        for (ri, row) in self.indicator_rows.iter().enumerate() {
            for &(g, l, _) in &row.terms {
                if g >= self.disjunctions.len() || l >= self.disjunctions.get(g).map_or(0, |d| d.disjuncts.len()) {
                    rep.errors.push(format!("indicator row {ri} references disjunct ({g},{l}) which does not exist"));
                }
            }
        }
        rep
    }

    /// The convex region of one disjunct: box ∩ global rows ∩ the disjunct's
    /// constraints.
    pub fn disjunct_region(&self, disjunction: usize, disjunct: usize) -> Result<ConvexRegion> {
        let dj = self
            .disjunctions
            .get(disjunction)
            .ok_or_else(|| Error::InvalidArgument(format!("no disjunction {disjunction}")))?;
        let d = dj
            .disjuncts
            .get(disjunct)
            .ok_or_else(|| Error::InvalidArgument(format!("no disjunct {disjunct} in disjunction {disjunction}")))?;
        let mut region = self.base_region();
        for c in &d.constraints {
            region.add_constraint(&c.lhs, c.rhs);
        }
        Ok(region)
    }

    /// The convex region shared by all disjuncts: box ∩ global rows.
    pub fn base_region(&self) -> ConvexRegion {
        let mut region = ConvexRegion::new_box(self.lower.clone(), self.upper.clone());
        for row in &self.globals {
            let f = SeparableFunction {
                terms: row.coeffs.iter().map(|&(i, a)| UnivariateTerm::linear(i, a)).collect(),
                constant: 0.0,
            };
            match row.sense {
                RowSense::Le => region.add_constraint(&f, row.rhs),
                RowSense::Eq => {
                    region.add_constraint(&f, row.rhs);
                    let neg = SeparableFunction {
                        terms: row.coeffs.iter().map(|&(i, a)| UnivariateTerm::linear(i, -a)).collect(),
                        constant: 0.0,
                    };
                    region.add_constraint(&neg, -row.rhs);
                }
            }
        }
        region
    }

    /// Serialize to pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse from JSON produced by [`Self::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Write the JSON form to a file.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Load a problem from a JSON file.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}
