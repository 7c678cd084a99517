//! Model export/import and 2-D relaxation grids.
//!
//! The LP dialect is the primary exchange format because it carries the
//! convex quadratic rows (bracketed `[ q x ^2 … ]` blocks). The MPS writer
//! covers linear models only: the classic section layout with
//! whitespace-aligned fields (long generated names rule out 8-column fixed
//! fields). Both writers are deterministic — coefficients are printed with
//! 17 significant digits, so values survive a round trip bit-exactly.
//!
//! [`project_2d`] reproduces the relaxation figures: fix two coordinates at
//! each grid-cell center, run the outer-approximation relaxation with a zero
//! objective, and record feasible/infeasible per cell. [`render_grid`]
//! writes the result as an SVG heat map plus a CSV twin.

use std::fmt::Write as _;
use std::path::Path;

use crate::mixed::{MixedModel, QuadTerm, Row, Sense, VarKind};
use crate::model::ObjSense;
use crate::solver::{solve_relaxation, LpStatus, RelaxOptions};
use crate::{Error, Result};

/// Format a coefficient with 17 significant digits (exact f64 round trip).
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Append a signed term list: `+ c name` or `+ c name ^2`.
fn push_terms(out: &mut String, terms: &[(String, f64)], squared: bool) {
    for (name, c) in terms {
        let sign = if *c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {name}", num(c.abs()));
        if squared {
            out.push_str(" ^2");
        }
    }
}

/// Write `m` in the LP dialect: objective, `Subject To` rows (quadratic
/// pieces expanded around zero inside bracket blocks), `Bounds` for every
/// variable, `Binaries`, `End`.
pub fn write_lp(m: &MixedModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, lp_string(m))?;
    Ok(())
}

/// The LP text for `m` (see [`write_lp`]).
pub fn lp_string(m: &MixedModel) -> String {
    let canon = m.canonical_form();
    let mut out = String::from("\\ disjunctive model export\n");
    out.push_str(match m.sense {
        ObjSense::Minimize => "Minimize\n",
        ObjSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let obj_terms: Vec<(String, f64)> = canon
        .objective
        .iter()
        .map(|&(j, c)| (m.vars[j].name.clone(), c))
        .collect();
    push_terms(&mut out, &obj_terms, false);
    out.push_str("\nSubject To\n");
    for row in &canon.rows {
        let _ = write!(out, " {}:", row.name);
        let lin: Vec<(String, f64)> =
            row.lin.iter().map(|&(j, c)| (m.vars[j].name.clone(), c)).collect();
        push_terms(&mut out, &lin, false);
        if !row.quad.is_empty() {
            out.push_str(" [");
            let quad: Vec<(String, f64)> =
                row.quad.iter().map(|&(j, c)| (m.vars[j].name.clone(), c)).collect();
            push_terms(&mut out, &quad, true);
            out.push_str(" ]");
        }
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {sense} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in &m.vars {
        let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), v.name, num(v.upper));
    }
    let binaries: Vec<&str> = m
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n ");
        out.push_str(&binaries.join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

/// Parse the LP dialect produced by [`write_lp`] back into a model.
///
/// Variables are created in `Bounds` order; quadratic bracket terms become
/// zero-centered pieces (the writer already expanded the centers), so the
/// canonical forms of the original and re-read models agree exactly.
pub fn read_lp(path: impl AsRef<Path>) -> Result<MixedModel> {
    parse_lp(&std::fs::read_to_string(path)?)
}

/// Parse LP text (see [`read_lp`]).
pub fn parse_lp(text: &str) -> Result<MixedModel> {
    #[derive(Clone, Copy, PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Bounds,
        Binaries,
        Done,
    }
    let mut sense = ObjSense::Minimize;
    let mut objective_toks: Vec<String> = Vec::new();
    let mut row_lines: Vec<(usize, String)> = Vec::new();
    let mut bound_lines: Vec<(usize, String)> = Vec::new();
    let mut binary_names: Vec<String> = Vec::new();
    let mut section = Section::Preamble;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Minimize" | "Maximize" => {
                sense =
                    if line == "Maximize" { ObjSense::Maximize } else { ObjSense::Minimize };
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Binaries" => {
                section = Section::Binaries;
                continue;
            }
            "End" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                objective_toks.extend(line.split_whitespace().map(str::to_string))
            }
            Section::Rows => row_lines.push((lineno + 1, line.to_string())),
            Section::Bounds => bound_lines.push((lineno + 1, line.to_string())),
            Section::Binaries => {
                binary_names.extend(line.split_whitespace().map(str::to_string))
            }
            Section::Preamble | Section::Done => {
                return Err(Error::Parse(format!(
                    "LP line {}: unexpected content {line:?}",
                    lineno + 1
                )))
            }
        }
    }

    let mut m = MixedModel::new(sense);
    // Variables in Bounds order: ` lo <= name <= hi`.
    for (lineno, line) in &bound_lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 || toks[1] != "<=" || toks[3] != "<=" {
            return Err(Error::Parse(format!("LP line {lineno}: malformed bound {line:?}")));
        }
        let lo = parse_num(toks[0], *lineno)?;
        let hi = parse_num(toks[4], *lineno)?;
        let kind = if binary_names.iter().any(|b| b == toks[2]) {
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        m.add_var(toks[2].to_string(), lo, hi, kind);
    }
    // Objective: `obj:` then signed terms.
    let toks = objective_toks;
    if toks.first().map(String::as_str) != Some("obj:") {
        return Err(Error::Parse("LP objective must start with `obj:`".into()));
    }
    let (terms, rest) = parse_terms(&toks[1..], &|n| m.var_index(n), 0)?;
    if !rest.is_empty() {
        return Err(Error::Parse(format!(
            "LP objective: trailing tokens {:?}",
            &rest[..rest.len().min(3)]
        )));
    }
    m.objective = terms.iter().map(|t| (t.0, t.1)).collect();

    for (lineno, line) in &row_lines {
        let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        let name = toks
            .first()
            .and_then(|t| t.strip_suffix(':'))
            .ok_or_else(|| {
                Error::Parse(format!("LP line {lineno}: row must start with `name:`"))
            })?
            .to_string();
        let mut rest: &[String] = &toks[1..];
        let mut lin: Vec<(usize, f64)> = Vec::new();
        let mut quad: Vec<QuadTerm> = Vec::new();
        // Linear terms up to an optional bracket block.
        let (terms, after) = parse_terms(rest, &|n| m.var_index(n), *lineno)?;
        lin.extend(terms.iter().map(|t| (t.0, t.1)));
        rest = after;
        if rest.first().map(String::as_str) == Some("[") {
            let close = rest
                .iter()
                .position(|t| t == "]")
                .ok_or_else(|| Error::Parse(format!("LP line {lineno}: unclosed bracket")))?;
            let (qterms, leftover) =
                parse_terms(&rest[1..close], &|n| m.var_index(n), *lineno)?;
            if !leftover.is_empty() {
                return Err(Error::Parse(format!(
                    "LP line {lineno}: stray tokens in bracket block"
                )));
            }
            for (j, c, squared) in &qterms {
                if !squared {
                    return Err(Error::Parse(format!(
                        "LP line {lineno}: bracket terms must be squared"
                    )));
                }
                quad.push(QuadTerm { var: *j, coeff: *c, center: 0.0 });
            }
            rest = &rest[close + 1..];
        }
        if rest.len() != 2 {
            return Err(Error::Parse(format!(
                "LP line {lineno}: expected `<sense> <rhs>` at row end"
            )));
        }
        let sense = match rest[0].as_str() {
            "<=" => Sense::Le,
            ">=" => Sense::Ge,
            "=" => Sense::Eq,
            other => {
                return Err(Error::Parse(format!("LP line {lineno}: bad sense {other:?}")))
            }
        };
        let rhs = parse_num(&rest[1], *lineno)?;
        let mut row = Row::linear(name, lin, sense, rhs);
        row.quad = quad;
        m.add_row(row);
    }
    m.n_original =
        m.vars.iter().take_while(|v| is_original_name(&v.name)).count();
    m.lambda = rebuild_lambda(&m);
    Ok(m)
}

fn is_original_name(name: &str) -> bool {
    name.strip_prefix('x').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Group indicator variables `lam_{g}_{l}` back into per-disjunction lists.
fn rebuild_lambda(m: &MixedModel) -> Vec<Vec<usize>> {
    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for (j, v) in m.vars.iter().enumerate() {
        if let Some(tail) = v.name.strip_prefix("lam_") {
            let mut it = tail.split('_');
            if let (Some(g), Some(l), None) = (it.next(), it.next(), it.next()) {
                if let (Ok(g), Ok(l)) = (g.parse::<usize>(), l.parse::<usize>()) {
                    groups.entry(g).or_default().push((l, j));
                }
            }
        }
    }
    groups
        .into_values()
        .map(|mut v| {
            v.sort_unstable();
            v.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

fn parse_num(tok: &str, lineno: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("LP line {lineno}: bad number {tok:?}")))
}

/// Parse signed terms `± c name [^2]` until a non-term token; returns the
/// terms as `(var, coeff, squared)` and the unconsumed tail.
fn parse_terms<'a>(
    toks: &'a [String],
    var_index: &dyn Fn(&str) -> Option<usize>,
    lineno: usize,
) -> Result<(Vec<(usize, f64, bool)>, &'a [String])> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let sign = match toks.get(i).map(String::as_str) {
            Some("+") => 1.0,
            Some("-") => -1.0,
            _ => break,
        };
        let c = toks
            .get(i + 1)
            .ok_or_else(|| Error::Parse(format!("LP line {lineno}: dangling sign")))?;
        let name = toks
            .get(i + 2)
            .ok_or_else(|| Error::Parse(format!("LP line {lineno}: term missing variable")))?;
        let coeff = sign * parse_num(c, lineno)?;
        let j = var_index(name).ok_or_else(|| {
            Error::Parse(format!("LP line {lineno}: unknown variable {name:?}"))
        })?;
        let squared = toks.get(i + 3).map(String::as_str) == Some("^2");
        out.push((j, coeff, squared));
        i += if squared { 4 } else { 3 };
    }
    Ok((out, &toks[i..]))
}

/// Write the linear model `m` in MPS form (sections `NAME`, `OBJSENSE`,
/// `ROWS`, `COLUMNS`, `RHS`, `BOUNDS`, `ENDATA`; whitespace-aligned fields).
/// Models with quadratic rows are refused — use [`write_lp`] for those.
pub fn write_mps(m: &MixedModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mps_string(m)?)?;
    Ok(())
}

/// The MPS text for `m` (see [`write_mps`]).
pub fn mps_string(m: &MixedModel) -> Result<String> {
    if !m.is_linear() {
        return Err(Error::Unsupported(
            "MPS covers linear models only; this model has quadratic rows (use the LP writer)"
                .into(),
        ));
    }
    let canon = m.canonical_form();
    let mut out = String::from("NAME MODEL\nOBJSENSE\n");
    out.push_str(match m.sense {
        ObjSense::Minimize => "    MIN\n",
        ObjSense::Maximize => "    MAX\n",
    });
    out.push_str("ROWS\n N obj\n");
    for row in &canon.rows {
        let tag = match row.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {tag} {}", row.name);
    }
    out.push_str("COLUMNS\n");
    for (j, v) in m.vars.iter().enumerate() {
        if let Some(&(_, c)) = canon.objective.iter().find(|&&(i, _)| i == j) {
            let _ = writeln!(out, " {} obj {}", v.name, num(c));
        }
        for row in &canon.rows {
            if let Some(&(_, c)) = row.lin.iter().find(|&&(i, _)| i == j) {
                let _ = writeln!(out, " {} {} {}", v.name, row.name, num(c));
            }
        }
    }
    out.push_str("RHS\n");
    for row in &canon.rows {
        let _ = writeln!(out, " RHS {} {}", row.name, num(row.rhs));
    }
    out.push_str("BOUNDS\n");
    for v in &m.vars {
        if v.kind == VarKind::Binary {
            let _ = writeln!(out, " BV BND {}", v.name);
        } else {
            let _ = writeln!(out, " LO BND {} {}", v.name, num(v.lower));
            let _ = writeln!(out, " UP BND {} {}", v.name, num(v.upper));
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

/// Parse the MPS form produced by [`write_mps`]. Variables are created in
/// `BOUNDS` order (the writer lists every variable there).
pub fn read_mps(path: impl AsRef<Path>) -> Result<MixedModel> {
    parse_mps(&std::fs::read_to_string(path)?)
}

/// Parse MPS text (see [`read_mps`]).
pub fn parse_mps(text: &str) -> Result<MixedModel> {
    let mut sense = ObjSense::Minimize;
    let mut row_order: Vec<(String, Sense)> = Vec::new();
    let mut col_entries: Vec<(String, String, f64)> = Vec::new();
    let mut rhs: std::collections::HashMap<String, f64> = std::collections::HashMap::new();
    // name → (lower, upper, binary), in first-seen order.
    let mut var_order: Vec<String> = Vec::new();
    let mut var_info: std::collections::HashMap<String, (f64, f64, bool)> =
        std::collections::HashMap::new();

    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let lineno = lineno + 1;
        if !raw.starts_with(' ') {
            section = line.split_whitespace().next().unwrap_or("").to_string();
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section.as_str() {
            "OBJSENSE" => {
                sense = match toks[0] {
                    "MIN" => ObjSense::Minimize,
                    "MAX" => ObjSense::Maximize,
                    other => {
                        return Err(Error::Parse(format!(
                            "MPS line {lineno}: bad objective sense {other:?}"
                        )))
                    }
                };
            }
            "ROWS" => {
                if toks.len() != 2 {
                    return Err(Error::Parse(format!("MPS line {lineno}: malformed row")));
                }
                match toks[0] {
                    "N" => {}
                    "L" => row_order.push((toks[1].to_string(), Sense::Le)),
                    "G" => row_order.push((toks[1].to_string(), Sense::Ge)),
                    "E" => row_order.push((toks[1].to_string(), Sense::Eq)),
                    other => {
                        return Err(Error::Parse(format!(
                            "MPS line {lineno}: bad row tag {other:?}"
                        )))
                    }
                }
            }
            "COLUMNS" => {
                if toks.len() != 3 {
                    return Err(Error::Parse(format!(
                        "MPS line {lineno}: expected `var row value`"
                    )));
                }
                col_entries.push((
                    toks[0].to_string(),
                    toks[1].to_string(),
                    parse_num(toks[2], lineno)?,
                ));
            }
            "RHS" => {
                if toks.len() != 3 {
                    return Err(Error::Parse(format!(
                        "MPS line {lineno}: expected `RHS row value`"
                    )));
                }
                rhs.insert(toks[1].to_string(), parse_num(toks[2], lineno)?);
            }
            "BOUNDS" => {
                let name = match (toks[0], toks.len()) {
                    ("BV", 3) | ("LO", 4) | ("UP", 4) => toks[2],
                    (other, _) => {
                        return Err(Error::Parse(format!(
                            "MPS line {lineno}: unsupported bound tag {other:?}"
                        )))
                    }
                };
                if !var_info.contains_key(name) {
                    var_order.push(name.to_string());
                    var_info.insert(name.to_string(), (0.0, f64::INFINITY, false));
                }
                let entry = var_info.get_mut(name).expect("just inserted");
                match toks[0] {
                    "BV" => *entry = (0.0, 1.0, true),
                    "LO" => entry.0 = parse_num(toks[3], lineno)?,
                    _ => entry.1 = parse_num(toks[3], lineno)?,
                }
            }
            "NAME" | "ENDATA" => {}
            other => {
                return Err(Error::Parse(format!(
                    "MPS line {lineno}: content in unknown section {other:?}"
                )))
            }
        }
    }

    let mut m = MixedModel::new(sense);
    for name in &var_order {
        let &(lo, hi, binary) = &var_info[name];
        m.add_var(
            name.clone(),
            lo,
            hi,
            if binary { VarKind::Binary } else { VarKind::Continuous },
        );
    }
    let mut lin_by_row: std::collections::HashMap<&str, Vec<(usize, f64)>> =
        std::collections::HashMap::new();
    let mut objective = Vec::new();
    for (var, row, value) in &col_entries {
        let j = m
            .var_index(var)
            .ok_or_else(|| Error::Parse(format!("MPS: column {var:?} missing from BOUNDS")))?;
        if row == "obj" {
            objective.push((j, *value));
        } else {
            lin_by_row.entry(row.as_str()).or_default().push((j, *value));
        }
    }
    m.objective = objective;
    for (name, sense) in &row_order {
        let lin = lin_by_row.remove(name.as_str()).unwrap_or_default();
        let r = rhs.get(name).copied().unwrap_or(0.0);
        m.add_row(Row::linear(name.clone(), lin, *sense, r));
    }
    m.n_original =
        m.vars.iter().take_while(|v| is_original_name(&v.name)).count();
    m.lambda = rebuild_lambda(&m);
    Ok(m)
}

/// A 2-D feasibility raster of one relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityGrid {
    /// Model variable index on the horizontal axis.
    pub axis_i: usize,
    /// Model variable index on the vertical axis.
    pub axis_j: usize,
    /// Horizontal range `(lo, hi)`.
    pub range_i: (f64, f64),
    /// Vertical range `(lo, hi)`.
    pub range_j: (f64, f64),
    /// Cells per axis.
    pub resolution: usize,
    /// Row-major flags, `flags[ii * resolution + jj]`, true = feasible.
    pub flags: Vec<bool>,
    /// Formulation label shown in the rendering.
    pub label: String,
}

impl FeasibilityGrid {
    /// Center coordinate of cell `idx` along a range.
    pub fn center(range: (f64, f64), resolution: usize, idx: usize) -> f64 {
        range.0 + (idx as f64 + 0.5) * (range.1 - range.0) / resolution as f64
    }

    /// Number of feasible cells.
    pub fn feasible_count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    /// True when every feasible cell of `self` is feasible in `other`
    /// (same geometry required).
    pub fn is_subset_of(&self, other: &FeasibilityGrid) -> bool {
        self.resolution == other.resolution
            && self.range_i == other.range_i
            && self.range_j == other.range_j
            && self.flags.iter().zip(&other.flags).all(|(a, b)| !*a || *b)
    }
}

/// Raster the relaxation of `m` over variables `i`, `j`: each cell center is
/// fixed (both bounds) and tested for relaxed feasibility with a zero
/// objective. `ranges` defaults to the two variables' bounds.
pub fn project_2d(
    m: &MixedModel,
    i: usize,
    j: usize,
    resolution: usize,
    ranges: Option<((f64, f64), (f64, f64))>,
    label: impl Into<String>,
) -> Result<FeasibilityGrid> {
    if i == j || i >= m.vars.len() || j >= m.vars.len() {
        return Err(Error::InvalidArgument(format!(
            "projection axes must be two distinct variables, got {i}, {j} of {}",
            m.vars.len()
        )));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let (range_i, range_j) = ranges.unwrap_or((
        (m.vars[i].lower, m.vars[i].upper),
        (m.vars[j].lower, m.vars[j].upper),
    ));
    let opts = RelaxOptions::default();
    let mut flags = vec![false; resolution * resolution];
    let mut probe = m.clone();
    probe.objective = Vec::new();
    for ii in 0..resolution {
        let ci = FeasibilityGrid::center(range_i, resolution, ii);
        if ci < m.vars[i].lower - 1e-12 || ci > m.vars[i].upper + 1e-12 {
            continue; // outside the variable's own box
        }
        for jj in 0..resolution {
            let cj = FeasibilityGrid::center(range_j, resolution, jj);
            if cj < m.vars[j].lower - 1e-12 || cj > m.vars[j].upper + 1e-12 {
                continue;
            }
            probe.vars[i].lower = ci;
            probe.vars[i].upper = ci;
            probe.vars[j].lower = cj;
            probe.vars[j].upper = cj;
            let res = solve_relaxation(&probe, &opts)?;
            flags[ii * resolution + jj] = res.status == LpStatus::Optimal;
        }
    }
    Ok(FeasibilityGrid {
        axis_i: i,
        axis_j: j,
        range_i,
        range_j,
        resolution,
        flags,
        label: label.into(),
    })
}

/// Write `g` as an SVG heat map at `path` plus a CSV twin (same stem,
/// `.csv` extension) with one `x_i,x_j,flag` row per cell.
pub fn render_grid(g: &FeasibilityGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, grid_svg(g))?;
    std::fs::write(path.with_extension("csv"), grid_csv(g))?;
    Ok(())
}

/// The CSV twin: header `x_i,x_j,flag`, then resolution² rows.
pub fn grid_csv(g: &FeasibilityGrid) -> String {
    let mut out = String::from("x_i,x_j,flag\n");
    for ii in 0..g.resolution {
        let ci = FeasibilityGrid::center(g.range_i, g.resolution, ii);
        for jj in 0..g.resolution {
            let cj = FeasibilityGrid::center(g.range_j, g.resolution, jj);
            let flag = u8::from(g.flags[ii * g.resolution + jj]);
            let _ = writeln!(out, "{ci},{cj},{flag}");
        }
    }
    out
}

/// The SVG heat map: one rectangle per feasible cell over a light canvas.
pub fn grid_svg(g: &FeasibilityGrid) -> String {
    let size = 600.0;
    let margin = 40.0;
    let cell = (size - 2.0 * margin) / g.resolution as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{size}\" height=\"{size}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{margin}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\">{}</text>",
        margin - 12.0,
        g.label
    );
    for ii in 0..g.resolution {
        for jj in 0..g.resolution {
            if !g.flags[ii * g.resolution + jj] {
                continue;
            }
            // SVG y grows downward; flip the vertical axis.
            let x = margin + ii as f64 * cell;
            let y = margin + (g.resolution - 1 - jj) as f64 * cell;
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"#3b6fb6\"/>"
            );
        }
    }
    let _ = writeln!(
        out,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{0}\" height=\"{0}\" fill=\"none\" \
         stroke=\"#333333\"/>",
        size - 2.0 * margin
    );
    out.push_str("</svg>\n");
    out
}
