//! Batch front end for the disjunction reformulation toolkit.
//!
//! Five subcommands tie the pipeline together: `reformulate` compiles an
//! instance and writes an LP or MPS file, `solve` runs branch-and-bound,
//! `compare` sweeps formulations over one instance and tabulates relaxation
//! strength, `project` rasters a 2-D feasibility grid of a compiled model's
//! relaxation, and `generate` writes instance files for the bundled problem
//! families.
//!
//! Every command is deterministic for a fixed flag set (seeds included):
//! rerunning writes byte-identical files. Progress and timing go to stderr;
//! machine-readable output goes to stdout and the `--out`/`--results` paths.
//! The exit code is zero exactly when no error occurred.

mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use splitform::emit;
use splitform::instances;
use splitform::solver::{
    solve_bnb, solve_relaxation, BnbOptions, LpStatus, RelaxOptions,
};

use pipeline::{
    append_results_row, build_model, fmt_value, parse_bound_spec, resolve_instance, results_row,
    status_label, BoundSpec, Formulation, ModelSpec, RESULTS_HEADER,
};

/// Reformulation toolkit for disjunctive constraints: compile, solve,
/// compare, and inspect indicator-constant, split-lifted, and hull models.
#[derive(Parser)]
#[command(name = "splitform", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an instance and write the model as an LP or MPS file.
    Reformulate(ReformulateArgs),
    /// Solve an instance with branch-and-bound and report the optimum.
    Solve(SolveArgs),
    /// Sweep formulations over one instance and tabulate their strength.
    Compare(CompareArgs),
    /// Raster the relaxed feasible set of a model over two variables.
    Project(ProjectArgs),
    /// Write instance or network files for the bundled problem families.
    Generate(GenerateArgs),
}

/// Instance selection plus optional objective override; shared by the
/// commands that optimize.
#[derive(Args)]
struct InstanceArgs {
    /// Built-in instance name (ex1, ex2) or a problem JSON file.
    instance: String,
    /// Override the objective with dense coefficients over the original
    /// variables, e.g. --objective 1,1,1,1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    objective: Option<Vec<f64>>,
    /// Override the objective direction.
    #[arg(long, value_enum)]
    sense: Option<SenseArg>,
}

/// Objective direction flag values.
#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum SenseArg {
    /// Minimize the objective.
    Min,
    /// Maximize the objective.
    Max,
}

impl InstanceArgs {
    /// Resolve the instance and apply any objective override.
    fn resolve(&self) -> Result<pipeline::Instance> {
        let mut inst = resolve_instance(&self.instance)?;
        if let Some(coeffs) = &self.objective {
            if coeffs.len() != inst.prob.n {
                bail!(
                    "--objective needs one coefficient per variable ({}), got {}",
                    inst.prob.n,
                    coeffs.len()
                );
            }
            inst.prob.objective = coeffs.clone();
        }
        if let Some(sense) = self.sense {
            inst.prob.sense = match sense {
                SenseArg::Min => splitform::model::ObjSense::Minimize,
                SenseArg::Max => splitform::model::ObjSense::Maximize,
            };
        }
        Ok(inst)
    }
}

/// Flags selecting and configuring a formulation; shared by the commands
/// that compile a model.
#[derive(Args)]
struct FormulationArgs {
    /// Formulation to compile.
    #[arg(long, value_enum, default_value_t = Formulation::Psplit)]
    formulation: Formulation,
    /// Number of uniform splits (split-based formulations only).
    #[arg(long)]
    p: Option<usize>,
    /// Explicit variable partition, e.g. "0,1|2,3" (overrides --p).
    #[arg(long)]
    partition: Option<String>,
    /// Bound source: interval, obbt-union, obbt-local, or file:PATH.
    #[arg(long, default_value = "interval", value_parser = parse_bound_spec)]
    bounds: BoundSpec,
    /// Couple lifted copies of different constraints with linking rows.
    #[arg(long)]
    linking: bool,
    /// Merge split sums equal up to a positive scalar into one variable.
    #[arg(long)]
    share_alpha: bool,
}

impl FormulationArgs {
    fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            formulation: self.formulation,
            p: self.p,
            partition: self.partition.clone(),
            bounds: self.bounds.clone(),
            linking: self.linking,
            share_alpha: self.share_alpha,
        }
    }
}

#[derive(Args)]
struct ReformulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    formulation: FormulationArgs,
    /// Output model path; the extension picks the format (.lp or .mps).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    formulation: FormulationArgs,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Maximum number of branch-and-bound nodes.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Append one result row to this CSV (header added when missing).
    #[arg(long)]
    results: Option<PathBuf>,
    /// Record wall-clock in the CSV time_s column. Off by default so reruns
    /// are byte-identical; timing always appears on stderr.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Split counts to sweep, e.g. --p 1,2,4; an indicator-constant row is
    /// always included first.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<usize>,
    /// Bound source: interval, obbt-union, obbt-local, or file:PATH.
    #[arg(long, default_value = "interval", value_parser = parse_bound_spec)]
    bounds: BoundSpec,
    /// Couple lifted copies of different constraints with linking rows.
    #[arg(long)]
    linking: bool,
    /// Merge split sums equal up to a positive scalar into one variable.
    #[arg(long)]
    share_alpha: bool,
    /// Wall-clock limit in seconds, applied per sweep entry.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Maximum number of branch-and-bound nodes, applied per sweep entry.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Output CSV path; the same table is echoed to stdout.
    #[arg(long)]
    out: PathBuf,
    /// Record wall-clock in the CSV time_s column. Off by default so reruns
    /// are byte-identical; timing always appears on stderr.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ProjectArgs {
    /// Built-in instance name (ex1, ex2) or a problem JSON file.
    instance: String,
    #[command(flatten)]
    formulation: FormulationArgs,
    /// The two variable indices spanning the grid.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0, 1])]
    axes: Vec<usize>,
    /// Cells per axis.
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    /// Output SVG path; a CSV twin is written with the same stem.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    family: GenerateCmd,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Cluster-assignment instance from a points CSV.
    Clustering {
        /// Points CSV: one comma-separated coordinate row per point.
        #[arg(long)]
        points: PathBuf,
        /// Number of clusters.
        #[arg(long)]
        k: usize,
        /// Output problem JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Point-to-ball assignment instance with seeded ball centers.
    Pball {
        /// Number of unit balls.
        #[arg(long)]
        balls: usize,
        /// Number of points to place (at most one per ball).
        #[arg(long)]
        points: usize,
        /// Ambient dimension.
        #[arg(long)]
        dim: usize,
        /// RNG seed for the ball centers.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output problem JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sparse-input funnel instance for a ReLU network weights JSON.
    Osif {
        /// Network weights JSON path.
        #[arg(long)]
        network: PathBuf,
        /// Output unit whose pre-activation value is maximized.
        #[arg(long)]
        target_class: usize,
        /// ℓ1 budget on the inputs.
        #[arg(long)]
        budget: f64,
        /// Output problem JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded desk-scale ReLU network weights JSON (two hidden layers of 4).
    Network {
        /// Input dimension.
        #[arg(long)]
        inputs: usize,
        /// Output dimension.
        #[arg(long)]
        outputs: usize,
        /// RNG seed for weights and biases.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output weights JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded random affine disjunction over a box.
    RandomAffine {
        /// Number of variables (at most 8).
        #[arg(long)]
        n: usize,
        /// RNG seed for rows and bounds.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output problem JSON path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reformulate(args) => cmd_reformulate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Project(args) => cmd_project(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_reformulate(args: ReformulateArgs) -> Result<()> {
    let inst = args.instance.resolve()?;
    let (model, _meta) = build_model(&inst, &args.formulation.to_spec())?;
    match args.out.extension().and_then(|e| e.to_str()) {
        Some("lp") => emit::write_lp(&model, &args.out)?,
        Some("mps") => emit::write_mps(&model, &args.out)?,
        other => bail!(
            "--out must end in .lp or .mps, got `{}`",
            other.unwrap_or("(none)")
        ),
    }
    println!(
        "variables {} ({} binary), rows {}",
        model.vars.len(),
        model.num_binary(),
        model.rows.len()
    );
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = args.instance.resolve()?;
    let (model, meta) = build_model(&inst, &args.formulation.to_spec())?;
    let relax = solve_relaxation(&model, &RelaxOptions::default())
        .context("solving the continuous relaxation")?;
    let relax_value = match relax.status {
        LpStatus::Optimal => relax.objective,
        _ => f64::NAN,
    };
    let opts = BnbOptions {
        time_limit: args.time_limit,
        node_limit: args.node_limit,
        ..BnbOptions::default()
    };
    let res = solve_bnb(&model, &opts).context("running branch-and-bound")?;
    println!("status {}", status_label(res.status));
    println!("relaxation {}", fmt_value(relax_value));
    println!("objective {}", fmt_value(res.objective));
    println!("bound {}", fmt_value(res.best_bound));
    println!("nodes {}", res.nodes);
    eprintln!("time {:.3} s", res.time_s);
    if let Some(path) = &args.results {
        let timing = args.timing.then_some(res.time_s);
        append_results_row(path, &results_row(&inst.name, &meta, relax_value, &res, timing))?;
        eprintln!("appended result to {}", path.display());
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let inst = args.instance.resolve()?;
    // Indicator-constant baseline first, then one split-lifted row per P,
    // in the order requested. Rows land in this fixed order regardless of
    // how the entries are executed.
    let mut specs = vec![ModelSpec {
        formulation: Formulation::Bigm,
        p: None,
        partition: None,
        bounds: args.bounds.clone(),
        linking: false,
        share_alpha: false,
    }];
    for &p in &args.p {
        specs.push(ModelSpec {
            formulation: Formulation::Psplit,
            p: Some(p),
            partition: None,
            bounds: args.bounds.clone(),
            linking: args.linking,
            share_alpha: args.share_alpha,
        });
    }
    let opts = BnbOptions {
        time_limit: args.time_limit,
        node_limit: args.node_limit,
        ..BnbOptions::default()
    };
    let mut csv = String::from(RESULTS_HEADER);
    csv.push('\n');
    for spec in &specs {
        let (model, meta) = build_model(&inst, spec)?;
        let relax = solve_relaxation(&model, &RelaxOptions::default())
            .with_context(|| format!("relaxation of the {} entry", meta.formulation))?;
        let relax_value = match relax.status {
            LpStatus::Optimal => relax.objective,
            _ => f64::NAN,
        };
        let res = solve_bnb(&model, &opts)
            .with_context(|| format!("branch-and-bound on the {} entry", meta.formulation))?;
        eprintln!(
            "{} P={}: relaxation {} optimum {} in {} nodes, {:.3} s",
            meta.formulation,
            meta.p,
            fmt_value(relax_value),
            fmt_value(res.objective),
            res.nodes,
            res.time_s
        );
        let timing = args.timing.then_some(res.time_s);
        csv.push_str(&results_row(&inst.name, &meta, relax_value, &res, timing));
        csv.push('\n');
    }
    std::fs::write(&args.out, &csv)
        .with_context(|| format!("writing `{}`", args.out.display()))?;
    print!("{csv}");
    Ok(())
}

fn cmd_project(args: ProjectArgs) -> Result<()> {
    let inst = resolve_instance(&args.instance)?;
    let &[i, j] = args.axes.as_slice() else {
        bail!("--axes needs exactly two variable indices, got {}", args.axes.len());
    };
    if i >= inst.prob.n || j >= inst.prob.n {
        bail!(
            "--axes must name original problem variables (0..{}), got {i},{j}",
            inst.prob.n
        );
    }
    let (model, meta) = build_model(&inst, &args.formulation.to_spec())?;
    let label = format!(
        "{} {} P={} bounds={}",
        inst.name, meta.formulation, meta.p, meta.bound_mode
    );
    let grid = emit::project_2d(&model, i, j, args.resolution, None, label)
        .context("rastering the relaxation")?;
    emit::render_grid(&grid, &args.out)
        .with_context(|| format!("writing `{}`", args.out.display()))?;
    println!(
        "feasible {} of {} cells",
        grid.feasible_count(),
        args.resolution * args.resolution
    );
    eprintln!(
        "wrote {} and {}",
        args.out.display(),
        args.out.with_extension("csv").display()
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    match args.family {
        GenerateCmd::Clustering { points, k, out } => {
            let pts = instances::read_points_csv(&points)
                .with_context(|| format!("reading `{}`", points.display()))?;
            let prob = instances::make_clustering(&pts, k)?;
            save_problem(&prob, &out)?;
            eprintln!(
                "clustering: {} points, {} clusters -> {} variables, {} disjunctions; wrote {}",
                pts.len(),
                k,
                prob.n,
                prob.disjunctions.len(),
                out.display()
            );
        }
        GenerateCmd::Pball { balls, points, dim, seed, out } => {
            let prob = instances::make_pball(balls, points, dim, seed)?;
            save_problem(&prob, &out)?;
            eprintln!(
                "pball: {balls} balls, {points} points, dim {dim}, seed {seed} -> \
                 {} variables, {} disjunctions; wrote {}",
                prob.n,
                prob.disjunctions.len(),
                out.display()
            );
        }
        GenerateCmd::Osif { network, target_class, budget, out } => {
            let nn = instances::load_network(&network)
                .with_context(|| format!("reading `{}`", network.display()))?;
            let prob = instances::make_osif(&nn, target_class, budget)?;
            save_problem(&prob, &out)?;
            eprintln!(
                "osif: target class {target_class}, budget {budget} -> \
                 {} variables, {} disjunctions; wrote {}",
                prob.n,
                prob.disjunctions.len(),
                out.display()
            );
        }
        GenerateCmd::Network { inputs, outputs, seed, out } => {
            let nn = instances::osif_desk_network(inputs, outputs, seed);
            instances::save_network(&nn, &out)
                .with_context(|| format!("writing `{}`", out.display()))?;
            eprintln!(
                "network: {inputs} inputs, {outputs} outputs, seed {seed}; wrote {}",
                out.display()
            );
        }
        GenerateCmd::RandomAffine { n, seed, out } => {
            let prob = instances::make_random_affine(n, seed)?;
            save_problem(&prob, &out)?;
            eprintln!(
                "random-affine: {n} variables, seed {seed} -> {} disjunctions; wrote {}",
                prob.disjunctions.len(),
                out.display()
            );
        }
    }
    Ok(())
}

/// Validate and save a generated problem; refuses to write an invalid file.
fn save_problem(prob: &splitform::model::DisjunctiveProblem, out: &Path) -> Result<()> {
    let report = prob.validate();
    if !report.is_ok() {
        bail!("generated instance is invalid:\n  {}", report.errors.join("\n  "));
    }
    prob.save(out).with_context(|| format!("writing `{}`", out.display()))?;
    Ok(())
}
