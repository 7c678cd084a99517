//! Compile disjunctive problems into mixed binary models.
//!
//! Three formulation families share one variable convention:
//!
//! * big-M — indicator-relaxed rows `g(x) ≤ b + M(1−λ)` with the smallest
//!   valid constant `M = ᾱ − b`; quadratic constraints are routed through a
//!   lifted epigraph variable so the indicator enters linearly.
//! * split lifting — each constraint's partial sums over a variable
//!   partition get a lifted variable `α` with disaggregated copies `ν` per
//!   disjunct, budget rows on the active copy, and indicator-scaled bound
//!   rows. Interpolates between big-M (one split) and the extended hull
//!   (one split per variable, affine case).
//! * extended hull — per-disjunct variable copies for affine disjunctions.
//!
//! Also here: linking rows that couple the lifted copies of different
//! constraints within one disjunct, the exponential two-disjunct cut family,
//! and an exact Fourier–Motzkin projection used to verify equivalences.
//!
//! Variable naming is stable and deterministic: `x{i}`, `lam_{g}_{l}`,
//! `a_{g}_{l}_{k}_{s}`, `nu_{g}_{l}_{k}_{s}_{d}`, `xc_{g}_{l}_{i}` (hull
//! copies), with `g` the disjunction, `l` the disjunct, `k` the constraint,
//! `s` the split, `d` the copy.

use std::collections::BTreeMap;

use crate::bounds::{detect_shared_alphas, split_sum, AlphaBounds, Provenance};
use crate::mixed::{MixedModel, QuadTerm, Row, Sense, VarKind};
use crate::model::{Disjunct, DisjunctiveProblem, RowSense, SeparableFunction, UnivariateTerm};
use crate::partition::{validate_partition, Partition};
use crate::solver::simplex::{solve_lp, LpProblem, LpRow, LpStatus};
use crate::{Error, Result};

/// Options for the split-lifting compiler.
#[derive(Clone, Copy, Debug, Default)]
pub struct PsplitOptions {
    /// Add linking rows coupling lifted copies of different constraints.
    pub linking: bool,
    /// Merge split sums that are equal up to a positive scalar into one
    /// lifted variable.
    pub share_alpha: bool,
}

/// `f` scaled by `factor` (termwise; the factor may be negative).
fn scaled(f: &SeparableFunction, factor: f64) -> SeparableFunction {
    SeparableFunction::new(
        f.terms
            .iter()
            .map(|t| UnivariateTerm {
                var_index: t.var_index,
                quad_coeff: factor * t.quad_coeff,
                center: t.center,
                lin_coeff: factor * t.lin_coeff,
            })
            .collect(),
        factor * f.constant,
    )
}

/// Push `h(x)` into row form: linear coefficients plus quadratic terms.
fn push_function(row: &mut Row, h: &SeparableFunction) {
    for t in &h.terms {
        if t.quad_coeff != 0.0 {
            row.quad.push(QuadTerm { var: t.var_index, coeff: t.quad_coeff, center: t.center });
        }
        if t.lin_coeff != 0.0 {
            row.lin.push((t.var_index, t.lin_coeff));
        }
    }
}

/// Shared scaffolding: original variables, objective, global rows, one
/// indicator per disjunct with its choose-one row, and indicator coupling
/// rows.
fn base_model(prob: &DisjunctiveProblem) -> Result<MixedModel> {
    let report = prob.validate();
    if !report.errors.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "problem fails validation: {}",
            report.errors.join("; ")
        )));
    }
    let mut m = MixedModel::new(prob.sense);
    for j in 0..prob.n {
        m.add_var(format!("x{j}"), prob.lower[j], prob.upper[j], VarKind::Continuous);
    }
    m.n_original = prob.n;
    m.objective = prob
        .objective
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, c)| (j, *c))
        .collect();
    for (r, row) in prob.globals.iter().enumerate() {
        let sense = match row.sense {
            RowSense::Le => Sense::Le,
            RowSense::Eq => Sense::Eq,
        };
        m.add_row(Row::linear(format!("glob{r}"), row.coeffs.clone(), sense, row.rhs));
    }
    for (g, d) in prob.disjunctions.iter().enumerate() {
        let mut lams = Vec::with_capacity(d.disjuncts.len());
        for l in 0..d.disjuncts.len() {
            lams.push(m.add_var(format!("lam_{g}_{l}"), 0.0, 1.0, VarKind::Binary));
        }
        let row = Row::linear(
            format!("choose_{g}"),
            lams.iter().map(|&v| (v, 1.0)).collect(),
            Sense::Eq,
            1.0,
        );
        m.add_row(row);
        m.lambda.push(lams);
    }
    for (r, ind) in prob.indicator_rows.iter().enumerate() {
        let sense = match ind.sense {
            RowSense::Le => Sense::Le,
            RowSense::Eq => Sense::Eq,
        };
        let lin: Vec<(usize, f64)> =
            ind.terms.iter().map(|&(g, l, c)| (m.lambda_var(g, l), c)).collect();
        m.add_row(Row::linear(format!("ind{r}"), lin, sense, ind.rhs));
    }
    Ok(m)
}

/// Reject bound sets that are only valid while their own disjunct is active;
/// indicator-constant derivations need bounds that hold over the union.
fn reject_local(bounds: &[AlphaBounds], context: &str) -> Result<()> {
    for (g, b) in bounds.iter().enumerate() {
        if let Some(((l, k, s), _)) =
            b.entries.iter().find(|(_, e)| e.provenance == Provenance::Local)
        {
            return Err(Error::InvalidArgument(format!(
                "{context} needs union-valid bounds, but entry ({l},{k},{s}) of disjunction {g} \
                 is only locally valid"
            )));
        }
    }
    Ok(())
}

/// Indicator-constant (big-M) compilation.
///
/// Each disjunct constraint `g_k(x) ≤ b` becomes `g_k(x) ≤ b + M(1−λ)` with
/// the smallest valid constant `M = ᾱ − b` taken from the 1-split bound
/// entry. Quadratic constraints go through an epigraph variable
/// `a_{g}_{l}_{k}_0` so every indicator row stays linear.
pub fn compile_bigm(prob: &DisjunctiveProblem, bounds: &[AlphaBounds]) -> Result<MixedModel> {
    if bounds.len() != prob.disjunctions.len() {
        return Err(Error::InvalidArgument(format!(
            "need one bound set per disjunction: got {}, expected {}",
            bounds.len(),
            prob.disjunctions.len()
        )));
    }
    reject_local(bounds, "the indicator-constant formulation")?;
    let mut m = base_model(prob)?;
    for (g, d) in prob.disjunctions.iter().enumerate() {
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            let lam = m.lambda_var(g, l);
            for (k, cons) in disjunct.constraints.iter().enumerate() {
                let entry = bounds[g].require(l, k, 0)?;
                let b_eff = cons.rhs - cons.lhs.constant;
                let m_const = entry.upper - b_eff;
                if cons.lhs.is_affine() {
                    let mut row = Row::linear(
                        format!("bigm_{g}_{l}_{k}"),
                        Vec::new(),
                        Sense::Le,
                        b_eff + m_const,
                    );
                    push_function(&mut row, &cons.lhs);
                    row.lin.push((lam, m_const));
                    m.add_row(row);
                } else {
                    // Epigraph split: h(x) ≤ a, a + Mλ ≤ b + M.
                    let a = m.add_var(
                        format!("a_{g}_{l}_{k}_0"),
                        entry.lower,
                        entry.upper,
                        VarKind::Continuous,
                    );
                    let mut epi =
                        Row::linear(format!("epi_{g}_{l}_{k}"), vec![(a, -1.0)], Sense::Le, 0.0);
                    push_function(&mut epi, &cons.lhs);
                    m.add_row(epi);
                    m.add_row(Row::linear(
                        format!("bigm_{g}_{l}_{k}"),
                        vec![(a, 1.0), (lam, m_const)],
                        Sense::Le,
                        b_eff + m_const,
                    ));
                }
            }
        }
    }
    Ok(m)
}

/// Per-key resolved lifted variables: the α var, its per-copy ν vars, and
/// the scale tying this key's sum to the (possibly shared) representative.
struct AlphaRef {
    alpha: usize,
    nus: Vec<usize>,
    scale: f64,
}

/// Effective per-copy bounds for key `(l,k,s)` on copy `d`: locally valid
/// entries apply only to their own disjunct's copy, everything else falls
/// back to the box-interval bracket.
fn copy_bounds(
    entry_lower: f64,
    entry_upper: f64,
    provenance: Provenance,
    l: usize,
    d: usize,
    interval: (f64, f64),
) -> (f64, f64) {
    if provenance == Provenance::Local && d != l {
        interval
    } else {
        (entry_lower, entry_upper)
    }
}

/// Split-lifted compilation.
///
/// Per disjunction, every `(disjunct l, constraint k, split s)` gets a
/// lifted variable `α` with disaggregated copies `ν_d` (one per disjunct),
/// rows `α = Σ_d ν_d`, `α̲λ_d ≤ ν_d ≤ ᾱλ_d`, the partial-sum epigraph
/// `Σ_{i∈I_s} h_i(x) ≤ α` (an equality when the sum is affine), and per
/// `(l,k)` the active-copy budget `Σ_s ν_{s,l} ≤ b λ_l`. Options add linking
/// rows and merge shareable sums into one lifted variable.
pub fn compile_psplit(
    prob: &DisjunctiveProblem,
    p: &Partition,
    bounds: &[AlphaBounds],
    opts: PsplitOptions,
) -> Result<MixedModel> {
    if bounds.len() != prob.disjunctions.len() {
        return Err(Error::InvalidArgument(format!(
            "need one bound set per disjunction: got {}, expected {}",
            bounds.len(),
            prob.disjunctions.len()
        )));
    }
    validate_partition(p, prob.n)?;
    let mut m = base_model(prob)?;

    for (g, d) in prob.disjunctions.iter().enumerate() {
        let nd = d.disjuncts.len();
        // Sharing map: member key → (representative key, scale).
        let mut share: BTreeMap<(usize, usize, usize), ((usize, usize, usize), f64)> =
            BTreeMap::new();
        if opts.share_alpha {
            for group in detect_shared_alphas(d, p) {
                for &(key, scale) in &group.members {
                    if key != group.representative {
                        share.insert(key, (group.representative, scale));
                    }
                }
            }
        }
        // Interval fallback for locally-valid entries on foreign copies.
        let needs_interval =
            bounds[g].entries.values().any(|e| e.provenance == Provenance::Local);
        let interval = if needs_interval {
            Some(crate::bounds::alpha_bounds_interval(d, p, &prob.lower, &prob.upper))
        } else {
            None
        };
        let copy_bracket = |l: usize, k: usize, s: usize, dd: usize| -> Result<(f64, f64)> {
            let e = bounds[g].require(l, k, s)?;
            let iv = match &interval {
                Some(iv) => {
                    let entry = iv.get(l, k, s).expect("interval covers every key");
                    (entry.lower, entry.upper)
                }
                None => (e.lower, e.upper),
            };
            Ok(copy_bounds(e.lower, e.upper, e.provenance, l, dd, iv))
        };

        // Members of each representative (representative first).
        let mut group_members: BTreeMap<(usize, usize, usize), Vec<((usize, usize, usize), f64)>> =
            BTreeMap::new();
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            for (k, _) in disjunct.constraints.iter().enumerate() {
                for s in 0..p.len() {
                    let key = (l, k, s);
                    match share.get(&key) {
                        Some(&(rep, scale)) => {
                            group_members.entry(rep).or_default().push((key, scale))
                        }
                        None => group_members.entry(key).or_default().insert(0, (key, 1.0)),
                    }
                }
            }
        }

        let mut refs: BTreeMap<(usize, usize, usize), AlphaRef> = BTreeMap::new();
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            for (k, cons) in disjunct.constraints.iter().enumerate() {
                for (s, class) in p.classes.iter().enumerate() {
                    let key = (l, k, s);
                    if share.contains_key(&key) {
                        continue; // resolved through its representative below
                    }
                    let members = group_members.get(&key).expect("own representative");
                    // Intersect member bounds, rescaled to the representative.
                    let mut var_lo = f64::NEG_INFINITY;
                    let mut var_hi = f64::INFINITY;
                    let mut nu_lo = vec![f64::NEG_INFINITY; nd];
                    let mut nu_hi = vec![f64::INFINITY; nd];
                    for &((ml, mk, ms), gamma) in members {
                        let mut mlo = f64::INFINITY;
                        let mut mhi = f64::NEG_INFINITY;
                        for dd in 0..nd {
                            let (lo, hi) = copy_bracket(ml, mk, ms, dd)?;
                            nu_lo[dd] = nu_lo[dd].max(lo / gamma);
                            nu_hi[dd] = nu_hi[dd].min(hi / gamma);
                            mlo = mlo.min(lo);
                            mhi = mhi.max(hi);
                        }
                        var_lo = var_lo.max(mlo / gamma);
                        var_hi = var_hi.min(mhi / gamma);
                    }
                    if var_lo > var_hi + 1e-9 || (0..nd).any(|dd| nu_lo[dd] > nu_hi[dd] + 1e-9) {
                        return Err(Error::InvalidArgument(format!(
                            "shared bounds for key ({l},{k},{s}) of disjunction {g} are \
                             mutually inconsistent"
                        )));
                    }
                    let alpha = m.add_var(
                        format!("a_{g}_{l}_{k}_{s}"),
                        var_lo,
                        var_hi,
                        VarKind::Continuous,
                    );
                    let mut nus = Vec::with_capacity(nd);
                    for dd in 0..nd {
                        let nu = m.add_var(
                            format!("nu_{g}_{l}_{k}_{s}_{dd}"),
                            nu_lo[dd].min(0.0),
                            nu_hi[dd].max(0.0),
                            VarKind::Continuous,
                        );
                        nus.push(nu);
                    }
                    // α = Σ_d ν_d.
                    let mut agg = vec![(alpha, 1.0)];
                    agg.extend(nus.iter().map(|&nu| (nu, -1.0)));
                    m.add_row(Row::linear(format!("agg_{g}_{l}_{k}_{s}"), agg, Sense::Eq, 0.0));
                    // α̲λ_d ≤ ν_d ≤ ᾱλ_d.
                    for dd in 0..nd {
                        let lam = m.lambda_var(g, dd);
                        m.add_row(Row::linear(
                            format!("nub_{g}_{l}_{k}_{s}_{dd}"),
                            vec![(nus[dd], 1.0), (lam, -nu_hi[dd])],
                            Sense::Le,
                            0.0,
                        ));
                        m.add_row(Row::linear(
                            format!("nlb_{g}_{l}_{k}_{s}_{dd}"),
                            vec![(nus[dd], -1.0), (lam, nu_lo[dd])],
                            Sense::Le,
                            0.0,
                        ));
                    }
                    // Epigraph of the partial sum (equality when affine).
                    let h = split_sum(&cons.lhs, class);
                    let sense = if h.is_affine() { Sense::Eq } else { Sense::Le };
                    let mut epi = Row::linear(
                        format!("epi_{g}_{l}_{k}_{s}"),
                        vec![(alpha, -1.0)],
                        sense,
                        0.0,
                    );
                    push_function(&mut epi, &h);
                    m.add_row(epi);
                    refs.insert(key, AlphaRef { alpha, nus, scale: 1.0 });
                }
            }
        }
        // Epigraph rows and references for shared members.
        for (&key, &(rep, gamma)) in &share {
            let (l, k, s) = key;
            let rep_ref = &refs[&rep];
            let (alpha, nus) = (rep_ref.alpha, rep_ref.nus.clone());
            let h = split_sum(&d.disjuncts[l].constraints[k].lhs, &p.classes[s]);
            let sense = if h.is_affine() { Sense::Eq } else { Sense::Le };
            let mut epi = Row::linear(
                format!("epi_{g}_{l}_{k}_{s}"),
                vec![(alpha, -gamma)],
                sense,
                0.0,
            );
            push_function(&mut epi, &h);
            m.add_row(epi);
            refs.insert(key, AlphaRef { alpha, nus, scale: gamma });
        }

        // Active-copy budget per (disjunct, constraint): Σ_s ν_{s,l} ≤ b λ_l.
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            let lam = m.lambda_var(g, l);
            for (k, cons) in disjunct.constraints.iter().enumerate() {
                let b_eff = cons.rhs - cons.lhs.constant;
                let mut lin: Vec<(usize, f64)> = Vec::with_capacity(p.len() + 1);
                for s in 0..p.len() {
                    let r = &refs[&(l, k, s)];
                    lin.push((r.nus[l], r.scale));
                }
                lin.push((lam, -b_eff));
                m.add_row(Row::linear(format!("bud_{g}_{l}_{k}"), lin, Sense::Le, 0.0));
            }
        }

        // Linking rows coupling lifted copies within each disjunct.
        if opts.linking {
            for (l, disjunct) in d.disjuncts.iter().enumerate() {
                if disjunct.constraints.len() < 2 {
                    continue;
                }
                let links =
                    generate_linking(disjunct, l, p, &bounds[g], &prob.lower, &prob.upper);
                for (li, link) in links.iter().enumerate() {
                    let ra = &refs[&(l, link.constraint_a, link.split)];
                    let rb = &refs[&(l, link.constraint_b, link.split)];
                    for dd in 0..nd {
                        let lam = m.lambda_var(g, dd);
                        // ρ₁ν_a + ρ₂ν_b ≤ UB·λ_d
                        m.add_row(Row::linear(
                            format!("lnk_{g}_{l}_{li}_{dd}_ub"),
                            vec![
                                (ra.nus[dd], link.sign_a * ra.scale),
                                (rb.nus[dd], link.sign_b * rb.scale),
                                (lam, -link.upper),
                            ],
                            Sense::Le,
                            0.0,
                        ));
                        // ρ₁ν_a + ρ₂ν_b ≥ LB·λ_d
                        m.add_row(Row::linear(
                            format!("lnk_{g}_{l}_{li}_{dd}_lb"),
                            vec![
                                (ra.nus[dd], -link.sign_a * ra.scale),
                                (rb.nus[dd], -link.sign_b * rb.scale),
                                (lam, link.lower),
                            ],
                            Sense::Le,
                            0.0,
                        ));
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Extended-hull compilation for affine disjunctions: per-disjunct copies of
/// the variables each disjunction constrains, indicator-scaled boxes and
/// rows, and aggregation `x = Σ_l x^l`.
///
/// Quadratic disjunct constraints are refused — the lifted-copy construction
/// here is the classical linear one.
pub fn compile_hull_linear(prob: &DisjunctiveProblem) -> Result<MixedModel> {
    for (g, d) in prob.disjunctions.iter().enumerate() {
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            for (k, cons) in disjunct.constraints.iter().enumerate() {
                if !cons.lhs.is_affine() {
                    return Err(Error::Unsupported(format!(
                        "hull compilation needs affine constraints, but constraint {k} of \
                         disjunct {l} in disjunction {g} has a quadratic term"
                    )));
                }
            }
        }
    }
    let mut m = base_model(prob)?;
    for (g, d) in prob.disjunctions.iter().enumerate() {
        let nd = d.disjuncts.len();
        // Support: variables this disjunction actually constrains.
        let mut support: Vec<usize> = Vec::new();
        for disjunct in &d.disjuncts {
            for cons in &disjunct.constraints {
                for t in &cons.lhs.terms {
                    if !support.contains(&t.var_index) {
                        support.push(t.var_index);
                    }
                }
            }
        }
        support.sort_unstable();

        // Copies with indicator-scaled boxes.
        let mut copies: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for l in 0..nd {
            let lam = m.lambda_var(g, l);
            for &j in &support {
                let (lo, hi) = (prob.lower[j], prob.upper[j]);
                let xc = m.add_var(
                    format!("xc_{g}_{l}_{j}"),
                    lo.min(0.0),
                    hi.max(0.0),
                    VarKind::Continuous,
                );
                copies.insert((l, j), xc);
                m.add_row(Row::linear(
                    format!("cub_{g}_{l}_{j}"),
                    vec![(xc, 1.0), (lam, -hi)],
                    Sense::Le,
                    0.0,
                ));
                m.add_row(Row::linear(
                    format!("clb_{g}_{l}_{j}"),
                    vec![(xc, -1.0), (lam, lo)],
                    Sense::Le,
                    0.0,
                ));
            }
        }
        // Disjunct rows on the copies: Σ a·xc ≤ b λ_l.
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            let lam = m.lambda_var(g, l);
            for (k, cons) in disjunct.constraints.iter().enumerate() {
                let b_eff = cons.rhs - cons.lhs.constant;
                let mut lin: Vec<(usize, f64)> = cons
                    .lhs
                    .terms
                    .iter()
                    .map(|t| (copies[&(l, t.var_index)], t.lin_coeff))
                    .collect();
                lin.push((lam, -b_eff));
                m.add_row(Row::linear(format!("hrow_{g}_{l}_{k}"), lin, Sense::Le, 0.0));
            }
        }
        // Aggregation x_j = Σ_l copies.
        for &j in &support {
            let mut lin = vec![(j, -1.0)];
            for l in 0..nd {
                lin.push((copies[&(l, j)], 1.0));
            }
            m.add_row(Row::linear(format!("hagg_{g}_{j}"), lin, Sense::Eq, 0.0));
        }
    }
    Ok(m)
}

/// A candidate linking structure: within disjunct `l`, split `s`, the signed
/// combination `ρ₁·(sum of constraint a) + ρ₂·(sum of constraint b)` with its
/// range `[lower, upper]` over the box. Emitted in a model as the two rows
/// `ρ₁ν_a + ρ₂ν_b ≤ upper·λ_d` and `≥ lower·λ_d` for every copy `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkingConstraint {
    /// Disjunct index.
    pub disjunct: usize,
    /// Split index.
    pub split: usize,
    /// First constraint of the pair.
    pub constraint_a: usize,
    /// Second constraint of the pair.
    pub constraint_b: usize,
    /// Sign ρ₁ ∈ {+1, −1} (canonically +1).
    pub sign_a: f64,
    /// Sign ρ₂ ∈ {+1, −1}.
    pub sign_b: f64,
    /// Valid lower bound of the combined sum.
    pub lower: f64,
    /// Valid upper bound of the combined sum.
    pub upper: f64,
}

/// Range of a (possibly sign-flipped) split sum taken from the bound set
/// when available, otherwise from the box.
fn signed_range(
    bounds: &AlphaBounds,
    l: usize,
    k: usize,
    s: usize,
    h: &SeparableFunction,
    sign: f64,
    lower: &[f64],
    upper: &[f64],
) -> (f64, f64) {
    let (lo, hi) = match bounds.get(l, k, s) {
        Some(e) => (e.lower, e.upper),
        None => crate::solver::region::range_over_box(h, lower, upper),
    };
    if sign >= 0.0 {
        (lo, hi)
    } else {
        (-hi, -lo)
    }
}

/// Enumerate non-redundant linking structures for one disjunct.
///
/// Candidates are constraint pairs × splits × the canonical sign pairs
/// `(+,+)` and `(+,−)` (the other two are reflections with swapped bounds).
/// A candidate is dropped when the two sums have disjoint variable support,
/// when (affine case) no shared variable carries opposite signs under ρ, or
/// when both range equalities hold — in each case the combined rows are
/// implied by the individual bound rows.
pub fn generate_linking(
    disjunct: &Disjunct,
    disjunct_index: usize,
    p: &Partition,
    bounds: &AlphaBounds,
    lower: &[f64],
    upper: &[f64],
) -> Vec<LinkingConstraint> {
    let mut out = Vec::new();
    let nc = disjunct.constraints.len();
    for ka in 0..nc {
        for kb in ka + 1..nc {
            for (s, class) in p.classes.iter().enumerate() {
                let ha = split_sum(&disjunct.constraints[ka].lhs, class);
                let hb = split_sum(&disjunct.constraints[kb].lhs, class);
                // Rule 1: the supports must overlap.
                let shared: Vec<usize> = ha
                    .terms
                    .iter()
                    .map(|t| t.var_index)
                    .filter(|v| hb.terms.iter().any(|t| t.var_index == *v))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                for rho_b in [1.0, -1.0] {
                    // Rule 2 (affine sums): some shared variable must carry
                    // opposite signs, otherwise the per-variable optima
                    // coincide with the separate ones.
                    if ha.is_affine() && hb.is_affine() {
                        let opposes = shared.iter().any(|&v| {
                            let a = ha.terms.iter().find(|t| t.var_index == v).map(|t| t.lin_coeff);
                            let b = hb.terms.iter().find(|t| t.var_index == v).map(|t| t.lin_coeff);
                            match (a, b) {
                                (Some(a), Some(b)) => a * (rho_b * b) < 0.0,
                                _ => false,
                            }
                        });
                        if !opposes {
                            continue;
                        }
                    }
                    // Combined range over the box.
                    let mut terms = ha.terms.clone();
                    terms.extend(scaled(&hb, rho_b).terms);
                    let combined = SeparableFunction::new(terms, 0.0);
                    let (clo, chi) =
                        crate::solver::region::range_over_box(&combined, lower, upper);
                    // Separate ranges as the formulation's bound rows see them.
                    let (alo, ahi) =
                        signed_range(bounds, disjunct_index, ka, s, &ha, 1.0, lower, upper);
                    let (blo, bhi) =
                        signed_range(bounds, disjunct_index, kb, s, &hb, rho_b, lower, upper);
                    let scale = 1.0 + chi.abs().max(clo.abs());
                    let redundant = (chi - (ahi + bhi)).abs() <= 1e-9 * scale
                        && (clo - (alo + blo)).abs() <= 1e-9 * scale;
                    if redundant {
                        continue;
                    }
                    out.push(LinkingConstraint {
                        disjunct: disjunct_index,
                        split: s,
                        constraint_a: ka,
                        constraint_b: kb,
                        sign_a: 1.0,
                        sign_b: rho_b,
                        lower: clo,
                        upper: chi,
                    });
                }
            }
        }
    }
    out
}

/// Number of candidate linking rows for a whole disjunction: every kept
/// structure contributes its upper- and lower-bound side.
pub fn linking_candidate_count(
    d: &crate::model::Disjunction,
    p: &Partition,
    bounds: &AlphaBounds,
    lower: &[f64],
    upper: &[f64],
) -> usize {
    d.disjuncts
        .iter()
        .enumerate()
        .map(|(l, disjunct)| 2 * generate_linking(disjunct, l, p, bounds, lower, upper).len())
        .sum()
}

/// One cut of the two-disjunct family: for "self" disjunct `l` and a split
/// subset `S_p`,
/// `Σ_{s∈S_p} h_s(x) ≤ (b − Σ_{s∉S_p} α̲_s)·λ_self + (Σ_{s∈S_p} ᾱ_s)·λ_other`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoTermCut {
    /// The disjunct whose constraint the cut tightens.
    pub disjunct: usize,
    /// Splits included in the partial sum (sorted).
    pub subset: Vec<usize>,
    /// Coefficient of this disjunct's indicator.
    pub self_coeff: f64,
    /// Coefficient of the other disjunct's indicator.
    pub other_coeff: f64,
}

/// The full non-extended cut family for a two-disjunct, single-constraint
/// disjunction: one cut per disjunct per nonempty split subset (the full
/// subset included), `2·(2^P − 1)` cuts in total.
pub fn two_term_cuts(
    d: &crate::model::Disjunction,
    p: &Partition,
    bounds: &AlphaBounds,
) -> Result<Vec<TwoTermCut>> {
    if d.disjuncts.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "the two-term cut family needs exactly 2 disjuncts, got {}",
            d.disjuncts.len()
        )));
    }
    for (l, disjunct) in d.disjuncts.iter().enumerate() {
        if disjunct.constraints.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "the two-term cut family needs one constraint per disjunct, but disjunct {l} \
                 has {}",
                disjunct.constraints.len()
            )));
        }
    }
    if p.len() > 20 {
        return Err(Error::SizeGuard(format!(
            "2^{} split subsets is beyond the exponential family's practical range",
            p.len()
        )));
    }
    let mut cuts = Vec::new();
    for (l, disjunct) in d.disjuncts.iter().enumerate() {
        let cons = &disjunct.constraints[0];
        let b_eff = cons.rhs - cons.lhs.constant;
        for mask in 1u32..(1u32 << p.len()) {
            let subset: Vec<usize> = (0..p.len()).filter(|s| mask & (1 << s) != 0).collect();
            let mut self_coeff = b_eff;
            let mut other_coeff = 0.0;
            for s in 0..p.len() {
                let e = bounds.require(l, 0, s)?;
                if subset.contains(&s) {
                    other_coeff += e.upper;
                } else {
                    self_coeff -= e.lower;
                }
            }
            cuts.push(TwoTermCut { disjunct: l, subset, self_coeff, other_coeff });
        }
    }
    Ok(cuts)
}

/// Indicator-constant compilation augmented with the full two-disjunct cut
/// family. Quadratic partial sums are routed through lifted epigraph
/// variables `ca_{g}_{l}_{s}` so every cut row stays linear.
pub fn compile_two_term(
    prob: &DisjunctiveProblem,
    p: &Partition,
    bounds: &[AlphaBounds],
) -> Result<MixedModel> {
    // Big-M needs 1-split entries; synthesize them from the given splits by
    // additivity when absent.
    let mut one_split: Vec<AlphaBounds> = Vec::with_capacity(bounds.len());
    for (g, d) in prob.disjunctions.iter().enumerate() {
        let mut b1 = AlphaBounds::new();
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            for (k, _) in disjunct.constraints.iter().enumerate() {
                let mut lo = 0.0;
                let mut hi = 0.0;
                let mut provenance = Provenance::Interval;
                for s in 0..p.len() {
                    let e = bounds[g].require(l, k, s)?;
                    lo += e.lower;
                    hi += e.upper;
                    if e.provenance != Provenance::Interval {
                        provenance = e.provenance;
                    }
                }
                b1.insert(
                    l,
                    k,
                    0,
                    crate::bounds::BoundEntry { lower: lo, upper: hi, provenance },
                );
            }
        }
        one_split.push(b1);
    }
    reject_local(bounds, "the two-term cut family")?;
    let mut m = compile_bigm(prob, &one_split)?;

    for (g, d) in prob.disjunctions.iter().enumerate() {
        let cuts = two_term_cuts(d, p, &bounds[g])?;
        // Lifted epigraph variables for quadratic partial sums, per (l, s).
        let mut lifted: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (l, disjunct) in d.disjuncts.iter().enumerate() {
            let cons = &disjunct.constraints[0];
            for (s, class) in p.classes.iter().enumerate() {
                let h = split_sum(&cons.lhs, class);
                if h.is_affine() {
                    continue;
                }
                let e = bounds[g].require(l, 0, s)?;
                let a = m.add_var(
                    format!("ca_{g}_{l}_{s}"),
                    e.lower,
                    e.upper,
                    VarKind::Continuous,
                );
                let mut epi =
                    Row::linear(format!("cepi_{g}_{l}_{s}"), vec![(a, -1.0)], Sense::Le, 0.0);
                push_function(&mut epi, &h);
                m.add_row(epi);
                lifted.insert((l, s), a);
            }
        }
        for (ci, cut) in cuts.iter().enumerate() {
            let l = cut.disjunct;
            let other = 1 - l;
            let mut row = Row::linear(
                format!("cut_{g}_{l}_{ci}"),
                vec![
                    (m.lambda_var(g, l), -cut.self_coeff),
                    (m.lambda_var(g, other), -cut.other_coeff),
                ],
                Sense::Le,
                0.0,
            );
            let cons = &d.disjuncts[l].constraints[0];
            for &s in &cut.subset {
                match lifted.get(&(l, s)) {
                    Some(&a) => row.lin.push((a, 1.0)),
                    None => push_function(&mut row, &split_sum(&cons.lhs, &p.classes[s])),
                }
            }
            m.add_row(row);
        }
    }
    Ok(m)
}

/// A dense polyhedron `{ y : A y ≤ b }` over named coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    /// Coordinate names, fixing the column order.
    pub names: Vec<String>,
    /// Rows `(coefficients, rhs)`.
    pub rows: Vec<(Vec<f64>, f64)>,
}

impl Polyhedron {
    /// The LP-relaxation polyhedron of a linear mixed model: all rows plus
    /// the finite variable bounds, binaries relaxed to their boxes.
    pub fn from_mixed(m: &MixedModel) -> Result<Self> {
        if !m.is_linear() {
            return Err(Error::Unsupported(
                "polyhedron extraction needs a linear model; quadratic rows present".into(),
            ));
        }
        let n = m.vars.len();
        let names = m.vars.iter().map(|v| v.name.clone()).collect();
        let mut rows = Vec::new();
        let mut push = |lin: &[(usize, f64)], rhs: f64, flip: bool| {
            let mut a = vec![0.0; n];
            for &(j, c) in lin {
                a[j] += if flip { -c } else { c };
            }
            rows.push((a, if flip { -rhs } else { rhs }));
        };
        for row in &m.rows {
            match row.sense {
                Sense::Le => push(&row.lin, row.rhs, false),
                Sense::Ge => push(&row.lin, row.rhs, true),
                Sense::Eq => {
                    push(&row.lin, row.rhs, false);
                    push(&row.lin, row.rhs, true);
                }
            }
        }
        for (j, v) in m.vars.iter().enumerate() {
            if v.upper.is_finite() {
                push(&[(j, 1.0)], v.upper, false);
            }
            if v.lower.is_finite() {
                push(&[(j, 1.0)], v.lower, true);
            }
        }
        Ok(Polyhedron { names, rows })
    }

    /// Membership within tolerance.
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        self.rows.iter().all(|(a, b)| {
            a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>() <= b + tol
        })
    }
}

/// Normalize rows and drop syntactically redundant ones: zero rows with
/// nonnegative rhs, and duplicates up to positive scaling (keeping the
/// tightest rhs).
fn simplify_rows(rows: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows.len());
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for (a, b) in rows {
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale <= 1e-12 {
            if b < -1e-9 {
                // 0 ≤ negative: keep one contradiction witness.
                kept.push((vec![0.0; a.len()], -1.0));
            }
            continue;
        }
        let na: Vec<f64> = a.iter().map(|v| v / scale).collect();
        let nb = b / scale;
        // Key on the normalized coefficients at 1e-9 resolution.
        let key: Vec<i64> = na.iter().map(|v| (v * 1e9).round() as i64).collect();
        match index.get(&key) {
            Some(&i) => {
                if nb < kept[i].1 {
                    kept[i] = (na, nb);
                }
            }
            None => {
                index.insert(key, kept.len());
                kept.push((na, nb));
            }
        }
    }
    kept
}

/// Exact Fourier–Motzkin elimination of the listed coordinates.
///
/// Intended for proof-sized systems; refuses inputs beyond ~12 variables or
/// ~60 rows and aborts if an intermediate system explodes past 4000 rows.
pub fn fm_project(p: &Polyhedron, eliminate: &[usize]) -> Result<Polyhedron> {
    if p.names.len() > 12 || p.rows.len() > 60 {
        return Err(Error::SizeGuard(format!(
            "projection limited to 12 variables / 60 rows, got {} / {}",
            p.names.len(),
            p.rows.len()
        )));
    }
    let mut names = p.names.clone();
    let mut rows = simplify_rows(p.rows.clone());
    let mut elim: Vec<usize> = eliminate.to_vec();
    elim.sort_unstable();
    elim.dedup();
    if elim.iter().any(|&j| j >= names.len()) {
        return Err(Error::InvalidArgument("elimination index out of range".into()));
    }
    // Eliminate from the highest index down so earlier indices stay stable.
    for &j in elim.iter().rev() {
        let mut pos: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut neg: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut zero: Vec<(Vec<f64>, f64)> = Vec::new();
        for (a, b) in rows {
            let c = a[j];
            if c > 1e-12 {
                // Scale so the eliminated coefficient is exactly 1.
                let sa: Vec<f64> = a.iter().map(|v| v / c).collect();
                pos.push((sa, b / c));
            } else if c < -1e-12 {
                let sa: Vec<f64> = a.iter().map(|v| v / -c).collect();
                neg.push((sa, b / -c));
            } else {
                zero.push((a, b));
            }
        }
        let mut next = zero;
        for (pa, pb) in &pos {
            for (na, nb) in &neg {
                // (x_j + p᷀y ≤ pb) + (−x_j + n᷀y ≤ nb) → (p+n)᷀y ≤ pb+nb.
                let a: Vec<f64> = pa.iter().zip(na).map(|(x, y)| x + y).collect();
                next.push((a, pb + nb));
            }
        }
        let mut simplified = simplify_rows(next);
        for (a, _) in &mut simplified {
            a[j] = 0.0; // clear numerical dust on the eliminated column
        }
        rows = simplify_rows(simplified);
        if rows.len() > 4000 {
            return Err(Error::SizeGuard(format!(
                "projection blew up to {} rows while eliminating column {j}",
                rows.len()
            )));
        }
    }
    // Drop the eliminated columns.
    let keep: Vec<usize> = (0..names.len()).filter(|j| !elim.contains(j)).collect();
    names = keep.iter().map(|&j| names[j].clone()).collect();
    let rows = rows
        .into_iter()
        .map(|(a, b)| (keep.iter().map(|&j| a[j]).collect(), b))
        .collect();
    Ok(Polyhedron { names, rows })
}

/// Worst violation of `inner ⊆ outer`: the maximum, over `outer`'s rows, of
/// `max_{y ∈ inner} a᷀y − b`. Nonpositive (within tolerance) means
/// containment. Coordinates are matched by name; both polyhedra must be
/// bounded in the tested directions.
pub fn containment_violation(inner: &Polyhedron, outer: &Polyhedron) -> Result<f64> {
    let n = inner.names.len();
    let col_of: BTreeMap<&str, usize> =
        inner.names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let rows: Vec<LpRow> = inner
        .rows
        .iter()
        .map(|(a, b)| LpRow {
            coeffs: a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect(),
            sense: Sense::Le,
            rhs: *b,
        })
        .collect();
    let mut worst: f64 = f64::NEG_INFINITY;
    for (a, b) in &outer.rows {
        let mut objective = vec![0.0; n];
        for (name, v) in outer.names.iter().zip(a) {
            if *v != 0.0 {
                let j = *col_of.get(name.as_str()).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "coordinate {name} of the outer polyhedron is missing from the inner one"
                    ))
                })?;
                objective[j] = -v; // maximize a᷀y = minimize −a᷀y
            }
        }
        let sol = solve_lp(&LpProblem {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            rows: rows.clone(),
            objective,
        })?;
        match sol.status {
            LpStatus::Optimal => worst = worst.max(-sol.objective - b),
            LpStatus::Infeasible => return Ok(f64::NEG_INFINITY), // empty inner set
            LpStatus::Unbounded => return Ok(f64::INFINITY),
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::alpha_bounds_interval;
    use crate::instances::{make_ex1, make_ex2};
    use crate::model::{DisjunctConstraint, Disjunction, ObjSense};
    use crate::partition::partition_uniform;
    use crate::solver::{solve_relaxation, RelaxOptions};
    use rand::Rng;
    use rand::SeedableRng;

    fn interval_bounds_for(prob: &DisjunctiveProblem, p: &Partition) -> Vec<AlphaBounds> {
        prob.disjunctions
            .iter()
            .map(|d| alpha_bounds_interval(d, p, &prob.lower, &prob.upper))
            .collect()
    }

    fn tight_relax() -> RelaxOptions {
        RelaxOptions { tol: 1e-9, max_cuts_per_row: 400 }
    }

    /// A small affine 2-disjunct problem on [0,1]³ used by several tests.
    fn small_affine() -> DisjunctiveProblem {
        let mut prob = DisjunctiveProblem::new_box(vec![0.0; 3], vec![1.0; 3]);
        let d1 = Disjunct {
            constraints: vec![DisjunctConstraint {
                lhs: SeparableFunction::affine(&[1.0, 1.0, 1.0], 0.0),
                rhs: 1.0,
            }],
        };
        let d2 = Disjunct {
            constraints: vec![DisjunctConstraint {
                lhs: SeparableFunction::affine(&[-1.0, -1.0, -1.0], 0.0),
                rhs: -2.0,
            }],
        };
        prob.disjunctions.push(Disjunction { disjuncts: vec![d1, d2] });
        prob.objective = vec![1.0, 0.5, 0.25];
        prob
    }

    #[test]
    fn split_variable_counts_match_closed_form() {
        // P=3, |D|=2, one constraint each: 3·(2²+2) = 18 lifted continuous
        // variables on top of x, plus 2 binaries.
        let prob = small_affine();
        let p = partition_uniform(3, 3).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let m = compile_psplit(&prob, &p, &bounds, PsplitOptions::default()).unwrap();
        assert_eq!(m.num_binary(), 2);
        assert_eq!(m.num_continuous(), 3 + 18);
    }

    #[test]
    fn one_split_matches_bigm_relaxation() {
        let prob = make_ex1();
        let p1 = partition_uniform(4, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p1);
        let bigm = compile_bigm(&prob, &bounds).unwrap();
        let split = compile_psplit(&prob, &p1, &bounds, PsplitOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut a = bigm.clone();
            let mut b = split.clone();
            a.objective = c.iter().enumerate().map(|(j, v)| (j, *v)).collect();
            b.objective = a.objective.clone();
            let ra = solve_relaxation(&a, &tight_relax()).unwrap();
            let rb = solve_relaxation(&b, &tight_relax()).unwrap();
            assert!(
                (ra.objective - rb.objective).abs() <= 1e-6 * (1.0 + ra.objective.abs()),
                "big-M {} vs 1-split {}",
                ra.objective,
                rb.objective
            );
        }
    }

    #[test]
    fn bigm_rejects_locally_valid_bounds() {
        let prob = make_ex1();
        let p1 = partition_uniform(4, 1).unwrap();
        let mut bounds = interval_bounds_for(&prob, &p1);
        let entry = *bounds[0].get(0, 0, 0).unwrap();
        bounds[0].insert(
            0,
            0,
            0,
            crate::bounds::BoundEntry { provenance: Provenance::Local, ..entry },
        );
        assert!(compile_bigm(&prob, &bounds).is_err());
    }

    #[test]
    fn bigm_constant_on_first_example() {
        // Ball disjunct: M = 64 − 1 = 63 encoded as a + 63λ ≤ 64.
        let prob = make_ex1();
        let p1 = partition_uniform(4, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p1);
        let m = compile_bigm(&prob, &bounds).unwrap();
        let row = m.rows.iter().find(|r| r.name == "bigm_0_0_0").unwrap();
        let lam = m.var_index("lam_0_0").unwrap();
        let coeff = row.lin.iter().find(|(j, _)| *j == lam).unwrap().1;
        assert_eq!(coeff, 63.0);
        assert_eq!(row.rhs, 64.0);
    }

    #[test]
    fn hull_refuses_quadratic() {
        let err = compile_hull_linear(&make_ex1()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn hull_matches_full_split_on_affine() {
        let prob = small_affine();
        let p = partition_uniform(3, 3).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let hull = compile_hull_linear(&prob).unwrap();
        let split = compile_psplit(&prob, &p, &bounds, PsplitOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut a = hull.clone();
            let mut b = split.clone();
            a.objective = c.iter().enumerate().map(|(j, v)| (j, *v)).collect();
            b.objective = a.objective.clone();
            let ra = solve_relaxation(&a, &tight_relax()).unwrap();
            let rb = solve_relaxation(&b, &tight_relax()).unwrap();
            assert!(
                (ra.objective - rb.objective).abs() <= 1e-6 * (1.0 + ra.objective.abs()),
                "hull {} vs n-split {}",
                ra.objective,
                rb.objective
            );
        }
    }

    #[test]
    fn second_example_has_sixteen_linking_candidates() {
        let prob = make_ex2();
        let p = partition_uniform(4, 2).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let count = linking_candidate_count(
            &prob.disjunctions[0],
            &p,
            &bounds[0],
            &prob.lower,
            &prob.upper,
        );
        assert_eq!(count, 16);
    }

    #[test]
    fn linking_drops_disjoint_supports() {
        // Two constraints on disjoint variables: rule 1 removes everything.
        let disjunct = Disjunct {
            constraints: vec![
                DisjunctConstraint {
                    lhs: SeparableFunction::new(vec![UnivariateTerm::linear(0, 1.0)], 0.0),
                    rhs: 1.0,
                },
                DisjunctConstraint {
                    lhs: SeparableFunction::new(vec![UnivariateTerm::linear(1, 1.0)], 0.0),
                    rhs: 1.0,
                },
            ],
        };
        let p = partition_uniform(2, 1).unwrap();
        let links = generate_linking(
            &disjunct,
            0,
            &p,
            &AlphaBounds::new(),
            &[0.0, 0.0],
            &[5.0, 5.0],
        );
        assert!(links.is_empty());
    }

    #[test]
    fn linking_drops_aligned_signs() {
        // All coefficients positive on [0,5]²: (+,+) is redundant; only the
        // (+,−) structure survives.
        let disjunct = Disjunct {
            constraints: vec![
                DisjunctConstraint {
                    lhs: SeparableFunction::affine(&[1.0, 1.0], 0.0),
                    rhs: 1.0,
                },
                DisjunctConstraint {
                    lhs: SeparableFunction::affine(&[2.0, 1.0], 0.0),
                    rhs: 4.0,
                },
            ],
        };
        let p = partition_uniform(2, 1).unwrap();
        let links =
            generate_linking(&disjunct, 0, &p, &AlphaBounds::new(), &[0.0, 0.0], &[5.0, 5.0]);
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].sign_b, -1.0);
    }

    #[test]
    fn linking_bound_values_on_second_example() {
        // Disjunct 0, split {x₀,x₁}, ρ=(+,−): combined coefficients
        // (−0.5, 2.2) on [0,5]² → range (−2.5, 11).
        let prob = make_ex2();
        let p = partition_uniform(4, 2).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let links = generate_linking(
            &prob.disjunctions[0].disjuncts[0],
            0,
            &p,
            &bounds[0],
            &prob.lower,
            &prob.upper,
        );
        let link = links
            .iter()
            .find(|l| l.split == 0 && l.sign_b == -1.0)
            .expect("the (+,−) structure on split 0 must survive");
        assert!((link.upper - 11.0).abs() < 1e-12, "upper {}", link.upper);
        assert!((link.lower + 2.5).abs() < 1e-12, "lower {}", link.lower);
    }

    #[test]
    fn two_term_cut_counts() {
        let prob = make_ex1();
        let d = &prob.disjunctions[0];
        for (pc, expect) in [(1usize, 2usize), (2, 6)] {
            let p = partition_uniform(4, pc).unwrap();
            let bounds = alpha_bounds_interval(d, &p, &prob.lower, &prob.upper);
            let cuts = two_term_cuts(d, &p, &bounds).unwrap();
            assert_eq!(cuts.len(), expect, "P={pc}");
        }
    }

    #[test]
    fn one_split_cut_equals_bigm_row() {
        // P=1: the single-subset cut h ≤ b·λ_self + ᾱ·λ_other is the big-M
        // row after λ_self = 1 − λ_other.
        let prob = make_ex1();
        let d = &prob.disjunctions[0];
        let p = partition_uniform(4, 1).unwrap();
        let bounds = alpha_bounds_interval(d, &p, &prob.lower, &prob.upper);
        let cuts = two_term_cuts(d, &p, &bounds).unwrap();
        let ball = cuts.iter().find(|c| c.disjunct == 0).unwrap();
        assert_eq!(ball.self_coeff, 1.0); // b
        assert_eq!(ball.other_coeff, 64.0); // ᾱ = b + M with M = 63
        let sum = cuts.iter().find(|c| c.disjunct == 1).unwrap();
        assert_eq!(sum.self_coeff, -12.0);
        assert_eq!(sum.other_coeff, 16.0);
    }

    #[test]
    fn two_term_rejects_more_disjuncts() {
        let mut prob = small_affine();
        let extra = prob.disjunctions[0].disjuncts[0].clone();
        prob.disjunctions[0].disjuncts.push(extra);
        let p = partition_uniform(3, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        assert!(two_term_cuts(&prob.disjunctions[0], &p, &bounds[0]).is_err());
    }

    #[test]
    fn cut_augmented_relaxation_never_weaker() {
        let prob = make_ex1();
        let p = partition_uniform(4, 2).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let p1 = partition_uniform(4, 1).unwrap();
        let bounds1 = interval_bounds_for(&prob, &p1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut plain = compile_bigm(&prob, &bounds1).unwrap();
            let mut cut = compile_two_term(&prob, &p, &bounds).unwrap();
            plain.objective = c.iter().enumerate().map(|(j, v)| (j, *v)).collect();
            cut.objective = plain.objective.clone();
            let rp = solve_relaxation(&plain, &tight_relax()).unwrap();
            let rc = solve_relaxation(&cut, &tight_relax()).unwrap();
            assert!(
                rc.objective >= rp.objective - 1e-6 * (1.0 + rp.objective.abs()),
                "cuts weakened the bound: {} vs {}",
                rc.objective,
                rp.objective
            );
        }
    }

    #[test]
    fn fm_projects_band_to_nothing() {
        // {(x, y) : x ≤ y ≤ x + 1} projected onto x has no constraints.
        let p = Polyhedron {
            names: vec!["x".into(), "y".into()],
            rows: vec![(vec![1.0, -1.0], 0.0), (vec![-1.0, 1.0], 1.0)],
        };
        let q = fm_project(&p, &[1]).unwrap();
        assert_eq!(q.names, vec!["x".to_string()]);
        assert!(q.rows.is_empty(), "surviving rows: {:?}", q.rows);
    }

    #[test]
    fn fm_round_trips_lifted_box() {
        // x = u, y = v, (u,v) ∈ [0,1]²; eliminating u,v recovers the box.
        let p = Polyhedron {
            names: vec!["x".into(), "y".into(), "u".into(), "v".into()],
            rows: vec![
                (vec![1.0, 0.0, -1.0, 0.0], 0.0),
                (vec![-1.0, 0.0, 1.0, 0.0], 0.0),
                (vec![0.0, 1.0, 0.0, -1.0], 0.0),
                (vec![0.0, -1.0, 0.0, 1.0], 0.0),
                (vec![0.0, 0.0, 1.0, 0.0], 1.0),
                (vec![0.0, 0.0, -1.0, 0.0], 0.0),
                (vec![0.0, 0.0, 0.0, 1.0], 1.0),
                (vec![0.0, 0.0, 0.0, -1.0], 0.0),
            ],
        };
        let q = fm_project(&p, &[2, 3]).unwrap();
        let box2 = Polyhedron {
            names: vec!["x".into(), "y".into()],
            rows: vec![
                (vec![1.0, 0.0], 1.0),
                (vec![-1.0, 0.0], 0.0),
                (vec![0.0, 1.0], 1.0),
                (vec![0.0, -1.0], 0.0),
            ],
        };
        assert!(containment_violation(&q, &box2).unwrap() <= 1e-9);
        assert!(containment_violation(&box2, &q).unwrap() <= 1e-9);
    }

    #[test]
    fn fm_size_guard_triggers() {
        let n = 13;
        let p = Polyhedron {
            names: (0..n).map(|i| format!("y{i}")).collect(),
            rows: vec![(vec![1.0; n], 1.0)],
        };
        assert!(matches!(fm_project(&p, &[0]), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn one_split_projection_equals_bigm_polyhedron() {
        // 2 variables, 2 affine disjuncts: eliminating the lifted variables
        // from the 1-split model leaves exactly the big-M polyhedron.
        let mut prob = DisjunctiveProblem::new_box(vec![0.0, 0.0], vec![1.0, 1.0]);
        let d1 = Disjunct {
            constraints: vec![DisjunctConstraint {
                lhs: SeparableFunction::new(vec![UnivariateTerm::linear(0, 1.0)], 0.0),
                rhs: 0.2,
            }],
        };
        let d2 = Disjunct {
            constraints: vec![DisjunctConstraint {
                lhs: SeparableFunction::new(vec![UnivariateTerm::linear(0, -1.0)], 0.0),
                rhs: -0.8,
            }],
        };
        prob.disjunctions.push(Disjunction { disjuncts: vec![d1, d2] });
        prob.objective = vec![1.0, 0.0];
        prob.sense = ObjSense::Minimize;

        let p1 = partition_uniform(2, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p1);
        let split = compile_psplit(&prob, &p1, &bounds, PsplitOptions::default()).unwrap();
        let bigm = compile_bigm(&prob, &bounds).unwrap();

        let poly_split = Polyhedron::from_mixed(&split).unwrap();
        let lifted: Vec<usize> = poly_split
            .names
            .iter()
            .enumerate()
            .filter(|(_, n)| n.starts_with("a_") || n.starts_with("nu_"))
            .map(|(j, _)| j)
            .collect();
        let projected = fm_project(&poly_split, &lifted).unwrap();
        let poly_bigm = Polyhedron::from_mixed(&bigm).unwrap();
        assert!(containment_violation(&projected, &poly_bigm).unwrap() <= 1e-9);
        assert!(containment_violation(&poly_bigm, &projected).unwrap() <= 1e-9);
    }

    #[test]
    fn shared_alphas_reduce_variable_count_and_keep_value() {
        // Both disjuncts carry the same sum x₀+x₁+x₂ (one scaled): sharing
        // merges the lifted variables without changing the relaxation.
        let mut prob = DisjunctiveProblem::new_box(vec![0.0; 3], vec![1.0; 3]);
        let d1 = Disjunct {
            constraints: vec![DisjunctConstraint {
                lhs: SeparableFunction::affine(&[1.0, 1.0, 1.0], 0.0),
                rhs: 1.0,
            }],
        };
        let d2 = Disjunct {
            constraints: vec![DisjunctConstraint {
                lhs: SeparableFunction::affine(&[2.0, 2.0, 2.0], 0.0),
                rhs: 5.0,
            }],
        };
        prob.disjunctions.push(Disjunction { disjuncts: vec![d1, d2] });
        prob.objective = vec![1.0, 1.0, 1.0];
        let p = partition_uniform(3, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let plain = compile_psplit(&prob, &p, &bounds, PsplitOptions::default()).unwrap();
        let shared = compile_psplit(
            &prob,
            &p,
            &bounds,
            PsplitOptions { share_alpha: true, linking: false },
        )
        .unwrap();
        assert!(shared.num_continuous() < plain.num_continuous());
        let rp = solve_relaxation(&plain, &tight_relax()).unwrap();
        let rs = solve_relaxation(&shared, &tight_relax()).unwrap();
        assert!((rp.objective - rs.objective).abs() <= 1e-6 * (1.0 + rp.objective.abs()));
    }
}
