//! Shared plumbing between the commands: instance resolution, partition and
//! bound selection, formulation compilation, and results-CSV rows.
//!
//! Every helper here is deterministic for fixed inputs; nothing reads clocks
//! or unseeded randomness, so command outputs routed through this module are
//! byte-for-byte reproducible.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use splitform::bounds::{alpha_bounds_interval, alpha_bounds_obbt, AlphaBounds, ObbtMode};
use splitform::mixed::MixedModel;
use splitform::model::DisjunctiveProblem;
use splitform::partition::{partition_uniform, Partition};
use splitform::reformulate::{
    compile_bigm, compile_hull_linear, compile_psplit, compile_two_term, PsplitOptions,
};
use splitform::solver::{MipResult, MipStatus};

/// Header of every results CSV this binary writes.
pub const RESULTS_HEADER: &str =
    "instance,formulation,P,linking,sharing,bound_mode,relax_value,mip_value,nodes,time_s,status";

/// The four compilable formulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Formulation {
    /// Indicator-constant rows with the smallest valid constants.
    Bigm,
    /// Split-lifted formulation with disaggregated copies.
    Psplit,
    /// Extended convex hull via per-disjunct variable copies (affine only).
    Hull,
    /// Indicator-constant rows plus the full two-disjunct cut family.
    #[value(name = "2term-cuts")]
    TwoTermCuts,
}

impl Formulation {
    /// Label used in CSV rows and messages.
    pub fn label(self) -> &'static str {
        match self {
            Formulation::Bigm => "bigm",
            Formulation::Psplit => "psplit",
            Formulation::Hull => "hull",
            Formulation::TwoTermCuts => "2term-cuts",
        }
    }

    /// Whether the formulation consumes a variable partition.
    pub fn uses_partition(self) -> bool {
        matches!(self, Formulation::Psplit | Formulation::TwoTermCuts)
    }
}

/// Where auxiliary-variable bounds come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundSpec {
    /// Closed-form ranges over the variable box.
    Interval,
    /// Optimized over each disjunct region, combined to union validity.
    ObbtUnion,
    /// Optimized per disjunct region, valid only on the active copy.
    ObbtLocal,
    /// Read from a bounds CSV (single-disjunction instances only).
    File(PathBuf),
}

impl BoundSpec {
    /// Label used in CSV rows.
    pub fn label(&self) -> &'static str {
        match self {
            BoundSpec::Interval => "interval",
            BoundSpec::ObbtUnion => "obbt-union",
            BoundSpec::ObbtLocal => "obbt-local",
            BoundSpec::File(_) => "file",
        }
    }
}

/// Parser for `--bounds`: a mode name or `file:PATH`.
pub fn parse_bound_spec(text: &str) -> std::result::Result<BoundSpec, String> {
    match text {
        "interval" => Ok(BoundSpec::Interval),
        "obbt-union" => Ok(BoundSpec::ObbtUnion),
        "obbt-local" => Ok(BoundSpec::ObbtLocal),
        other => match other.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(BoundSpec::File(PathBuf::from(path))),
            _ => Err(format!(
                "expected interval, obbt-union, obbt-local, or file:PATH, got `{other}`"
            )),
        },
    }
}

/// A resolved instance: the problem plus the name used in result rows.
pub struct Instance {
    /// Built-in name or file stem.
    pub name: String,
    /// The loaded problem, already validated.
    pub prob: DisjunctiveProblem,
}

/// Resolve `spec` as a built-in name (`ex1`, `ex2`) or a problem JSON path,
/// then validate the result; structural errors abort with the full report.
pub fn resolve_instance(spec: &str) -> Result<Instance> {
    let (name, prob) = match spec {
        "ex1" => ("ex1".to_string(), splitform::instances::make_ex1()),
        "ex2" => ("ex2".to_string(), splitform::instances::make_ex2()),
        path => {
            let path = Path::new(path);
            let prob = DisjunctiveProblem::load(path)
                .with_context(|| format!("loading instance `{}`", path.display()))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".to_string());
            (name, prob)
        }
    };
    let report = prob.validate();
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if !report.is_ok() {
        bail!("instance `{name}` is invalid:\n  {}", report.errors.join("\n  "));
    }
    Ok(Instance { name, prob })
}

/// Flags shared by every command that compiles a model. Options that only
/// exist for some formulations are `Option` so misuse is detectable.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub formulation: Formulation,
    /// Uniform split count (`--p`); `None` means the flag was not given.
    pub p: Option<usize>,
    /// Explicit partition literal (`--partition`); overrides `p`.
    pub partition: Option<String>,
    pub bounds: BoundSpec,
    pub linking: bool,
    pub share_alpha: bool,
}

/// Labels describing a compiled model, ready for a results-CSV row.
pub struct ModelMeta {
    pub formulation: &'static str,
    /// Split count for partition-based formulations, `-` otherwise.
    pub p: String,
    /// `on`/`off` for the split-lifted formulation, `-` otherwise.
    pub linking: &'static str,
    /// `on`/`off` for the split-lifted formulation, `-` otherwise.
    pub sharing: &'static str,
    pub bound_mode: &'static str,
}

/// Check flag consistency, compute bounds, and compile. The partition flags
/// apply only to split-based formulations; linking and sharing only to the
/// split-lifted one. Indicator-constant compilation always uses whole-sum
/// (1-split) bounds.
pub fn build_model(inst: &Instance, spec: &ModelSpec) -> Result<(MixedModel, ModelMeta)> {
    if !spec.formulation.uses_partition() {
        if spec.p.is_some() || spec.partition.is_some() {
            bail!(
                "--p/--partition apply only to split-based formulations (psplit, 2term-cuts), \
                 not {}",
                spec.formulation.label()
            );
        }
        if spec.linking || spec.share_alpha {
            bail!(
                "--linking/--share-alpha apply only to the psplit formulation, not {}",
                spec.formulation.label()
            );
        }
    }
    if spec.formulation == Formulation::TwoTermCuts && (spec.linking || spec.share_alpha) {
        bail!("--linking/--share-alpha apply only to the psplit formulation, not 2term-cuts");
    }

    let prob = &inst.prob;
    let partition = match (&spec.partition, spec.formulation.uses_partition()) {
        (Some(literal), true) => {
            let p = Partition::parse(literal).context("parsing --partition")?;
            splitform::partition::validate_partition(&p, prob.n)
                .context("validating --partition against the instance")?;
            p
        }
        _ => partition_uniform(prob.n, spec.p.unwrap_or(1))
            .context("building the uniform partition")?,
    };

    let meta = ModelMeta {
        formulation: spec.formulation.label(),
        p: if spec.formulation.uses_partition() {
            partition.len().to_string()
        } else {
            "-".to_string()
        },
        linking: match (spec.formulation, spec.linking) {
            (Formulation::Psplit, true) => "on",
            (Formulation::Psplit, false) => "off",
            _ => "-",
        },
        sharing: match (spec.formulation, spec.share_alpha) {
            (Formulation::Psplit, true) => "on",
            (Formulation::Psplit, false) => "off",
            _ => "-",
        },
        bound_mode: spec.bounds.label(),
    };

    let model = match spec.formulation {
        Formulation::Hull => compile_hull_linear(prob)?,
        Formulation::Bigm => {
            // Indicator constants need the range of the whole constraint
            // sum. File bounds may be keyed by splits; summing the brackets
            // per (disjunct, constraint) stays valid by additivity.
            let bounds = match &spec.bounds {
                BoundSpec::File(_) => {
                    let whole = partition_uniform(prob.n, 1)?;
                    compute_bounds(prob, &whole, &spec.bounds)?
                        .into_iter()
                        .map(|b| sum_to_whole(&b))
                        .collect()
                }
                _ => {
                    let whole = partition_uniform(prob.n, 1)?;
                    compute_bounds(prob, &whole, &spec.bounds)?
                }
            };
            compile_bigm(prob, &bounds)?
        }
        Formulation::Psplit => {
            let bounds = compute_bounds(prob, &partition, &spec.bounds)?;
            let opts = PsplitOptions { linking: spec.linking, share_alpha: spec.share_alpha };
            compile_psplit(prob, &partition, &bounds, opts)?
        }
        Formulation::TwoTermCuts => {
            let bounds = compute_bounds(prob, &partition, &spec.bounds)?;
            compile_two_term(prob, &partition, &bounds)?
        }
    };
    Ok((model, meta))
}

/// Collapse per-split entries to whole-sum (split 0) brackets by adding the
/// per-split brackets of each `(disjunct, constraint)`. Each entry brackets
/// its own partial sum, so the sums bracket the whole sum.
fn sum_to_whole(b: &AlphaBounds) -> AlphaBounds {
    let mut out = AlphaBounds::new();
    for (&(l, k, _), e) in &b.entries {
        match out.entries.get_mut(&(l, k, 0)) {
            Some(acc) => {
                acc.lower += e.lower;
                acc.upper += e.upper;
                // Locality is sticky: a sum with one locally-valid part is
                // itself only locally valid, and must stay rejectable.
                if e.provenance == splitform::bounds::Provenance::Local {
                    acc.provenance = e.provenance;
                }
            }
            None => out.insert(l, k, 0, e.clone()),
        }
    }
    out
}

/// One bound set per disjunction under partition `p`, per the chosen mode.
pub fn compute_bounds(
    prob: &DisjunctiveProblem,
    p: &Partition,
    spec: &BoundSpec,
) -> Result<Vec<AlphaBounds>> {
    match spec {
        BoundSpec::Interval => Ok(prob
            .disjunctions
            .iter()
            .map(|d| alpha_bounds_interval(d, p, &prob.lower, &prob.upper))
            .collect()),
        BoundSpec::ObbtUnion | BoundSpec::ObbtLocal => {
            let mode = if *spec == BoundSpec::ObbtUnion {
                ObbtMode::Union
            } else {
                ObbtMode::Local
            };
            (0..prob.disjunctions.len())
                .map(|g| {
                    alpha_bounds_obbt(prob, g, p, mode)
                        .with_context(|| format!("tightening bounds for disjunction {g}"))
                })
                .collect()
        }
        BoundSpec::File(path) => {
            // The bounds CSV carries no disjunction column, so it can only
            // describe a single-disjunction instance.
            if prob.disjunctions.len() != 1 {
                bail!(
                    "--bounds file: applies only to single-disjunction instances \
                     (this one has {})",
                    prob.disjunctions.len()
                );
            }
            let b = AlphaBounds::read_csv(path)
                .with_context(|| format!("reading bounds from `{}`", path.display()))?;
            Ok(vec![b])
        }
    }
}

/// `v` as a CSV field: plain shortest-roundtrip decimal, `-` when not finite
/// (no incumbent, or infeasible).
pub fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "-".to_string()
    }
}

/// Stable lowercase status labels for CSV rows.
pub fn status_label(status: MipStatus) -> &'static str {
    match status {
        MipStatus::Optimal => "optimal",
        MipStatus::Infeasible => "infeasible",
        MipStatus::NodeLimit => "node-limit",
        MipStatus::TimeLimit => "time-limit",
    }
}

/// One results row. `time_s` is `-` unless the caller opted into timing:
/// wall-clock in an output file breaks byte-for-byte rerun identity, so it
/// is never recorded by default.
pub fn results_row(
    instance: &str,
    meta: &ModelMeta,
    relax_value: f64,
    mip: &MipResult,
    timing: Option<f64>,
) -> String {
    let time_s = match timing {
        Some(t) => format!("{t:.3}"),
        None => "-".to_string(),
    };
    format!(
        "{instance},{},{},{},{},{},{},{},{},{time_s},{}",
        meta.formulation,
        meta.p,
        meta.linking,
        meta.sharing,
        meta.bound_mode,
        fmt_value(relax_value),
        fmt_value(mip.objective),
        mip.nodes,
        status_label(mip.status),
    )
}

/// Append `row` to the CSV at `path`, writing the header first when the file
/// is new or empty.
pub fn append_results_row(path: &Path, row: &str) -> Result<()> {
    let existing = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e).with_context(|| format!("reading `{}`", path.display())),
    };
    let mut out = existing;
    if out.is_empty() {
        out.push_str(RESULTS_HEADER);
        out.push('\n');
    }
    out.push_str(row);
    out.push('\n');
    std::fs::write(path, out).with_context(|| format!("writing `{}`", path.display()))?;
    Ok(())
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
