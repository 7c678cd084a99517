//! Compiled mixed-integer models: the common target of every formulation and
//! the input of the solver and file emitters.
//!
//! A model is a flat list of bounded variables (continuous or binary), linear
//! rows, and convex rows that carry separable quadratic pieces. Every row and
//! variable is named after its role in the formulation (`x3`, `a_0_1_0_2`,
//! `nu_0_1_0_2_0`, `lam_0_1`, `bigm_0_1_0`, …) so emitted files and debug
//! output stay traceable.

use crate::model::ObjSense;

/// Variable integrality class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Continuous within its bounds.
    Continuous,
    /// Binary; bounds are always `[0, 1]`.
    Binary,
}

/// A model variable.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelVar {
    /// Unique name.
    pub name: String,
    /// Lower bound (finite in compiled models).
    pub lower: f64,
    /// Upper bound (finite in compiled models).
    pub upper: f64,
    /// Integrality class.
    pub kind: VarKind,
}

/// Row sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// `lhs ≤ rhs`
    Le,
    /// `lhs ≥ rhs`
    Ge,
    /// `lhs = rhs`
    Eq,
}

/// One quadratic piece `coeff·(x − center)²` of a row, `coeff > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadTerm {
    /// Model variable index.
    pub var: usize,
    /// Quadratic coefficient.
    pub coeff: f64,
    /// Center of the piece.
    pub center: f64,
}

/// A model row `Σ lin + Σ quad {≤,≥,=} rhs`.
///
/// Rows with quadratic pieces must have sense `Le` (they are convex
/// constraints handled by outer approximation); `Ge`/`Eq` rows are linear.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    /// Row name, unique within the model.
    pub name: String,
    /// Sparse linear terms `(var, coeff)`, at most one per variable.
    pub lin: Vec<(usize, f64)>,
    /// Convex quadratic pieces, at most one per variable.
    pub quad: Vec<QuadTerm>,
    /// Sense.
    pub sense: Sense,
    /// Right-hand side.
    pub rhs: f64,
}

impl Row {
    /// Linear row.
    pub fn linear(name: impl Into<String>, lin: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Row { name: name.into(), lin, quad: Vec::new(), sense, rhs }
    }

    /// Left-hand-side value at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for &(i, a) in &self.lin {
            v += a * x[i];
        }
        for q in &self.quad {
            let d = x[q.var] - q.center;
            v += q.coeff * d * d;
        }
        v
    }

    /// Signed violation at `x` (positive means violated).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = self.eval(x);
        match self.sense {
            Sense::Le => v - self.rhs,
            Sense::Ge => self.rhs - v,
            Sense::Eq => (v - self.rhs).abs(),
        }
    }

    /// True when the row has no quadratic pieces.
    pub fn is_linear(&self) -> bool {
        self.quad.is_empty()
    }
}

/// A compiled mixed-integer model.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedModel {
    /// Variables; the first [`MixedModel::n_original`] are the problem's `x`.
    pub vars: Vec<ModelVar>,
    /// Constraint rows.
    pub rows: Vec<Row>,
    /// Sparse linear objective `(var, coeff)`.
    pub objective: Vec<(usize, f64)>,
    /// Objective direction.
    pub sense: ObjSense,
    /// Count of original problem variables (a prefix of `vars`).
    pub n_original: usize,
    /// Per disjunction, per disjunct: the index of its indicator variable.
    pub lambda: Vec<Vec<usize>>,
}

impl MixedModel {
    /// Empty model with the given objective direction.
    pub fn new(sense: ObjSense) -> Self {
        MixedModel { sense, ..Default::default() }
    }

    /// Add a variable and return its index. Names must be unique; this is
    /// only checked in debug builds since all callers generate names from
    /// unique index tuples.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind) -> usize {
        let name = name.into();
        debug_assert!(
            self.vars.iter().all(|v| v.name != name),
            "duplicate variable name {name}"
        );
        self.vars.push(ModelVar { name, lower, upper, kind });
        self.vars.len() - 1
    }

    /// Add a row.
    pub fn add_row(&mut self, row: Row) {
        debug_assert!(
            row.quad.is_empty() || row.sense == Sense::Le,
            "quadratic rows must have sense Le"
        );
        self.rows.push(row);
    }

    /// Indicator variable of `disjunct` in `disjunction`.
    pub fn lambda_var(&self, disjunction: usize, disjunct: usize) -> usize {
        self.lambda[disjunction][disjunct]
    }

    /// Indices of all binary variables.
    pub fn binary_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.vars[i].kind == VarKind::Binary).collect()
    }

    /// Number of continuous variables.
    pub fn num_continuous(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Continuous).count()
    }

    /// Number of binary variables.
    pub fn num_binary(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// True when every row is linear.
    pub fn is_linear(&self) -> bool {
        self.rows.iter().all(Row::is_linear)
    }

    /// Look up a variable index by name.
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Objective value at `x` (in the model's own sense).
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(i, c)| c * x[i]).sum()
    }

    /// Canonical numeric form for semantic comparison: every row expanded to
    /// `Σ lin·x + Σ q·x² ≤/=/≥ rhs` with centers eliminated, terms sorted by
    /// variable, and exact-zero coefficients dropped.
    pub fn canonical_form(&self) -> CanonicalModel {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut lin: Vec<(usize, f64)> = r.lin.clone();
                let mut quad: Vec<(usize, f64)> = Vec::new();
                let mut rhs = r.rhs;
                for q in &r.quad {
                    // q·(x−c)² = q·x² − 2qc·x + q·c²
                    quad.push((q.var, q.coeff));
                    if q.center != 0.0 {
                        lin.push((q.var, -2.0 * q.coeff * q.center));
                        rhs -= q.coeff * q.center * q.center;
                    }
                }
                lin.sort_by_key(|&(i, _)| i);
                let mut merged: Vec<(usize, f64)> = Vec::new();
                for (i, a) in lin {
                    match merged.last_mut() {
                        Some((j, b)) if *j == i => *b += a,
                        _ => merged.push((i, a)),
                    }
                }
                merged.retain(|&(_, a)| a != 0.0);
                quad.sort_by_key(|&(i, _)| i);
                quad.retain(|&(_, a)| a != 0.0);
                CanonicalRow { name: r.name.clone(), lin: merged, quad, sense: r.sense, rhs }
            })
            .collect();
        let mut objective = self.objective.clone();
        objective.sort_by_key(|&(i, _)| i);
        objective.retain(|&(_, c)| c != 0.0);
        CanonicalModel { vars: self.vars.clone(), rows, objective, sense: self.sense }
    }
}

/// A row in canonical expanded form (see [`MixedModel::canonical_form`]).
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalRow {
    /// Row name.
    pub name: String,
    /// Sorted, merged linear coefficients.
    pub lin: Vec<(usize, f64)>,
    /// Sorted `x²` coefficients.
    pub quad: Vec<(usize, f64)>,
    /// Sense.
    pub sense: Sense,
    /// Adjusted right-hand side.
    pub rhs: f64,
}

/// Canonical model form used for semantic equality checks.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalModel {
    /// Variables (unchanged).
    pub vars: Vec<ModelVar>,
    /// Canonical rows.
    pub rows: Vec<CanonicalRow>,
    /// Sorted objective.
    pub objective: Vec<(usize, f64)>,
    /// Objective direction.
    pub sense: ObjSense,
}
