//! Acceptance gate for the toolkit: ten independent checks covering the
//! formulation equivalences, the relaxation hierarchy, hull convergence,
//! projection containment, tightened bound values, grid reproductions,
//! cross-formulation optima, node-count trends, and command-line
//! determinism. Each test prints one PASS line with its measured margins
//! (visible with --nocapture); a failure carries the offending values.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitform::bounds::{alpha_bounds_interval, alpha_bounds_obbt, AlphaBounds, ObbtMode};
use splitform::emit::{project_2d, FeasibilityGrid};
use splitform::instances::{
    ex1_weak_bounds, make_clustering, make_ex1, make_ex2, make_osif, make_pball_centers,
    make_random_affine, osif_desk_network,
};
use splitform::mixed::{MixedModel, Sense};
use splitform::model::{DisjunctiveProblem, ObjSense};
use splitform::partition::{halving_chain, partition_uniform, Partition};
use splitform::reformulate::{
    compile_bigm, compile_hull_linear, compile_psplit, containment_violation, fm_project,
    linking_candidate_count, Polyhedron, PsplitOptions,
};
use splitform::solver::{
    solve_bnb, solve_lp, solve_relaxation, BnbOptions, LpProblem, LpRow, LpStatus, MipStatus,
    RelaxOptions,
};

/// Objectives are drawn fresh per (instance, trial) from this seeded stream.
const OBJECTIVES_PER_INSTANCE: usize = 100;

/// High-precision relaxation value. Equivalence checks compare two
/// independently converged numbers, so each solve runs far tighter than the
/// comparison tolerance to keep tolerance stacking out of the margin.
fn relax_value(m: &MixedModel) -> f64 {
    let opts = RelaxOptions { tol: 1e-8, max_cuts_per_row: 500 };
    let res = solve_relaxation(m, &opts).expect("relaxation solve");
    assert_eq!(res.status, LpStatus::Optimal, "relaxation must be feasible and bounded");
    assert!(!res.cut_budget_exhausted, "relaxation must converge within budget");
    res.objective
}

/// Replace the model objective with dense coefficients over the original
/// variables (rows are objective-independent, so compiled models can be
/// reused across trials).
fn set_objective(m: &mut MixedModel, coeffs: &[f64]) {
    m.objective =
        coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, &c)| (i, c)).collect();
}

/// The shared instance set: both bundled examples plus thirty seeded random
/// affine disjunctions with 2–8 variables.
fn instance_set() -> Vec<(String, DisjunctiveProblem)> {
    let mut set =
        vec![("ex1".to_string(), make_ex1()), ("ex2".to_string(), make_ex2())];
    for i in 0..30u64 {
        let n = 2 + (i as usize % 7);
        let prob = make_random_affine(n, 1000 + i).expect("random affine instance");
        set.push((format!("rand{i:02}n{n}"), prob));
    }
    set
}

fn random_objectives(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..OBJECTIVES_PER_INSTANCE)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn interval_bounds(prob: &DisjunctiveProblem, p: &Partition) -> Vec<AlphaBounds> {
    prob.disjunctions
        .iter()
        .map(|d| alpha_bounds_interval(d, p, &prob.lower, &prob.upper))
        .collect()
}

#[test]
fn a01_indicator_constant_matches_one_split() {
    let t0 = Instant::now();
    let mut worst = 0.0_f64;
    let set = instance_set();
    for (idx, (name, prob)) in set.iter().enumerate() {
        let p1 = partition_uniform(prob.n, 1).unwrap();
        let bounds = interval_bounds(prob, &p1);
        let mut bigm = compile_bigm(prob, &bounds).unwrap();
        let mut one_split =
            compile_psplit(prob, &p1, &bounds, PsplitOptions::default()).unwrap();
        for obj in random_objectives(prob.n, 7000 + idx as u64) {
            set_objective(&mut bigm, &obj);
            set_objective(&mut one_split, &obj);
            let va = relax_value(&bigm);
            let vb = relax_value(&one_split);
            let gap = (va - vb).abs();
            worst = worst.max(gap);
            assert!(gap <= 1e-6, "{name}: indicator-constant {va} vs 1-split {vb}");
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "time budget exceeded: {dt:.2?}");
    println!(
        "acceptance 01 (indicator-constant ≡ 1-split): PASS — {} instances × {} objectives, \
         worst relaxation gap {worst:.2e}, {dt:.2?}",
        set.len(),
        OBJECTIVES_PER_INSTANCE
    );
}

#[test]
fn a02_refinement_chains_tighten_monotonically() {
    let mut max_step = 0.0_f64;
    let set = instance_set();
    let mut chains = 0usize;
    for (idx, (name, prob)) in set.iter().enumerate() {
        let chain = halving_chain(prob.n);
        let mut models: Vec<MixedModel> = chain
            .iter()
            .map(|p| {
                let bounds = interval_bounds(prob, p);
                compile_psplit(prob, p, &bounds, PsplitOptions::default()).unwrap()
            })
            .collect();
        for obj in random_objectives(prob.n, 8000 + idx as u64) {
            let mut prev = f64::NEG_INFINITY;
            for (step, m) in models.iter_mut().enumerate() {
                set_objective(m, &obj);
                let v = relax_value(m);
                assert!(
                    v >= prev - 1e-6,
                    "{name}: refinement step {step} weakened the bound: {prev} -> {v}"
                );
                if prev.is_finite() {
                    max_step = max_step.max(v - prev);
                }
                prev = v;
            }
            chains += 1;
        }
    }
    assert!(
        max_step > 1e-3,
        "no strict tightening witness across the set (max step {max_step:.2e})"
    );
    println!(
        "acceptance 02 (refinement hierarchy): PASS — {chains} chains monotone within 1e-6, \
         largest strict step {max_step:.4}"
    );
}

#[test]
fn a03_full_split_matches_hull_on_affine_instances() {
    let mut worst = 0.0_f64;
    let mut instances = 0usize;
    for (idx, (name, prob)) in instance_set().iter().enumerate() {
        if prob
            .disjunctions
            .iter()
            .any(|d| d.disjuncts.iter().any(|l| l.constraints.iter().any(|c| !c.lhs.is_affine())))
        {
            continue; // hull compilation covers affine disjuncts only
        }
        let pn = partition_uniform(prob.n, prob.n).unwrap();
        let bounds = interval_bounds(prob, &pn);
        let mut full_split =
            compile_psplit(prob, &pn, &bounds, PsplitOptions::default()).unwrap();
        let mut hull = compile_hull_linear(prob).unwrap();
        for obj in random_objectives(prob.n, 9000 + idx as u64) {
            set_objective(&mut full_split, &obj);
            set_objective(&mut hull, &obj);
            let va = relax_value(&full_split);
            let vb = relax_value(&hull);
            let gap = (va - vb).abs();
            worst = worst.max(gap);
            assert!(gap <= 1e-6, "{name}: full split {va} vs hull {vb}");
        }
        instances += 1;
    }
    println!(
        "acceptance 03 (full split ≡ hull, affine): PASS — {instances} instances × \
         {OBJECTIVES_PER_INSTANCE} objectives, worst gap {worst:.2e}"
    );
}

#[test]
fn a04_projected_one_split_equals_indicator_polyhedron() {
    // Two variables, two affine disjuncts on [−2, 2]²:
    // [x0 + x1 ≤ 1] ∨ [−x0 + x1 ≤ −1].
    use splitform::model::{Disjunct, DisjunctConstraint, Disjunction, SeparableFunction};
    let mut prob = DisjunctiveProblem::new_box(vec![-2.0, -2.0], vec![2.0, 2.0]);
    prob.disjunctions.push(Disjunction {
        disjuncts: vec![
            Disjunct {
                constraints: vec![DisjunctConstraint {
                    lhs: SeparableFunction::affine(&[1.0, 1.0], 0.0),
                    rhs: 1.0,
                }],
            },
            Disjunct {
                constraints: vec![DisjunctConstraint {
                    lhs: SeparableFunction::affine(&[-1.0, 1.0], 0.0),
                    rhs: -1.0,
                }],
            },
        ],
    });
    assert!(prob.validate().is_ok());

    let p1 = partition_uniform(2, 1).unwrap();
    let bounds = interval_bounds(&prob, &p1);
    let lifted = compile_psplit(&prob, &p1, &bounds, PsplitOptions::default()).unwrap();
    let indicator = compile_bigm(&prob, &bounds).unwrap();

    let full = Polyhedron::from_mixed(&lifted).unwrap();
    // Keep x and the indicators; eliminate every lifted auxiliary variable.
    let eliminate: Vec<usize> = (0..full.names.len())
        .filter(|&j| {
            let n = full.names[j].as_str();
            !(n.starts_with('x') || n.starts_with("lam_"))
        })
        .collect();
    assert!(!eliminate.is_empty(), "the lifted model must carry auxiliaries");
    let projected = fm_project(&full, &eliminate).unwrap();
    let reference = Polyhedron::from_mixed(&indicator).unwrap();

    let fwd = containment_violation(&projected, &reference).unwrap();
    let bwd = containment_violation(&reference, &projected).unwrap();
    assert!(fwd <= 1e-9, "projection ⊄ indicator polyhedron: violation {fwd:.2e}");
    assert!(bwd <= 1e-9, "indicator polyhedron ⊄ projection: violation {bwd:.2e}");
    println!(
        "acceptance 04 (1-split projects onto the indicator polyhedron): PASS — \
         containment violations {fwd:.2e} / {bwd:.2e}"
    );
}

/// Fraction of `coarse`'s feasible cells that `fine` drops.
fn dropped_fraction(coarse: &FeasibilityGrid, fine: &FeasibilityGrid) -> f64 {
    let c = coarse.feasible_count();
    let f = fine.feasible_count();
    assert!(c > 0, "coarse grid is empty");
    (c - f) as f64 / c as f64
}

#[test]
fn a05_ball_grids_nest_with_weak_bounds_and_shrink_with_tight_bounds() {
    let t0 = Instant::now();
    let prob = make_ex1();
    let res = 101;

    let grid_for = |bounds: AlphaBounds, pc: usize, tag: &str| {
        let p = partition_uniform(prob.n, pc).unwrap();
        let m = compile_psplit(&prob, &p, &[bounds], PsplitOptions::default()).unwrap();
        project_2d(&m, 0, 1, res, None, format!("{tag}{pc}")).unwrap()
    };

    // Deliberately weak bound family: relaxations strictly nest as the
    // partition refines, each level losing at least 1% of the coarser cells.
    let weak: Vec<FeasibilityGrid> =
        [1, 2, 4].iter().map(|&pc| grid_for(ex1_weak_bounds(pc).unwrap(), pc, "weak")).collect();
    for w in weak.windows(2) {
        assert!(w[1].is_subset_of(&w[0]), "weak-bound grids must nest as P grows");
        let dropped = dropped_fraction(&w[0], &w[1]);
        assert!(
            dropped >= 0.01,
            "refinement must strictly shrink the grid by ≥1%, dropped {:.3}%",
            dropped * 100.0
        );
    }

    // Tightest bounds: counts are nonincreasing in P (not necessarily
    // strict — these relaxations are already nearly exact).
    let tight: Vec<FeasibilityGrid> = [1, 2, 4]
        .iter()
        .map(|&pc| {
            let p = partition_uniform(prob.n, pc).unwrap();
            let b = alpha_bounds_obbt(&prob, 0, &p, ObbtMode::Union).unwrap();
            grid_for(b, pc, "tight")
        })
        .collect();
    for w in tight.windows(2) {
        assert!(
            w[1].feasible_count() <= w[0].feasible_count(),
            "tight-bound grids must not grow: {} -> {}",
            w[0].feasible_count(),
            w[1].feasible_count()
        );
    }

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 120.0, "time budget exceeded: {dt:.2?}");
    let weak_counts: Vec<usize> = weak.iter().map(|g| g.feasible_count()).collect();
    let tight_counts: Vec<usize> = tight.iter().map(|g| g.feasible_count()).collect();
    println!(
        "acceptance 05 (ball-instance grids): PASS — weak-bound cells {weak_counts:?} strictly \
         nested, tight-bound cells {tight_counts:?} nonincreasing, {dt:.2?}"
    );
}

#[test]
fn a06_linking_rows_shrink_the_grid_without_cutting_integer_points() {
    let prob = make_ex2();
    let p2 = partition_uniform(prob.n, 2).unwrap();
    let bounds = interval_bounds(&prob, &p2);

    let candidates = linking_candidate_count(
        &prob.disjunctions[0],
        &p2,
        &bounds[0],
        &prob.lower,
        &prob.upper,
    );
    assert_eq!(candidates, 16, "candidate linking rows under the 2-way split");

    let res = 101;
    let base = compile_psplit(&prob, &p2, &bounds, PsplitOptions::default()).unwrap();
    let linked = compile_psplit(
        &prob,
        &p2,
        &bounds,
        PsplitOptions { linking: true, share_alpha: false },
    )
    .unwrap();
    let g_base = project_2d(&base, 0, 1, res, None, "plain").unwrap();
    let g_link = project_2d(&linked, 0, 1, res, None, "linked").unwrap();

    assert!(g_link.is_subset_of(&g_base), "linking must only remove relaxation cells");
    let dropped = dropped_fraction(&g_base, &g_link);
    assert!(
        dropped >= 0.01,
        "linking must remove ≥1% of cells, removed {:.3}%",
        dropped * 100.0
    );

    // No integer-feasible cell may disappear: a cell is integer-feasible
    // when some single disjunct admits the cell center with the free
    // variables inside the box. Checked directly on the disjunct rows.
    let mut integer_cells = 0usize;
    for ii in 0..res {
        let ci = FeasibilityGrid::center((prob.lower[0], prob.upper[0]), res, ii);
        for jj in 0..res {
            let cj = FeasibilityGrid::center((prob.lower[1], prob.upper[1]), res, jj);
            let feasible = prob.disjunctions[0].disjuncts.iter().any(|disjunct| {
                let mut lower = prob.lower.clone();
                let mut upper = prob.upper.clone();
                lower[0] = ci;
                upper[0] = ci;
                lower[1] = cj;
                upper[1] = cj;
                let rows = disjunct
                    .constraints
                    .iter()
                    .map(|c| LpRow {
                        coeffs: c
                            .lhs
                            .terms
                            .iter()
                            .map(|t| (t.var_index, t.lin_coeff))
                            .collect(),
                        sense: Sense::Le,
                        rhs: c.rhs - c.lhs.constant,
                    })
                    .collect();
                let lp = LpProblem {
                    lower,
                    upper,
                    rows,
                    objective: vec![0.0; prob.n],
                };
                solve_lp(&lp).unwrap().status == LpStatus::Optimal
            });
            if feasible {
                integer_cells += 1;
                assert!(
                    g_link.flags[ii * res + jj],
                    "linking removed an integer-feasible cell at ({ci}, {cj})"
                );
            }
        }
    }
    println!(
        "acceptance 06 (linking rows): PASS — 16 candidates, grid {} -> {} cells \
         (−{:.1}%), all {integer_cells} integer-feasible cells kept",
        g_base.feasible_count(),
        g_link.feasible_count(),
        dropped * 100.0
    );
}

#[test]
fn a07_tightened_bound_values_are_exact() {
    let prob = make_ex1();
    let d = &prob.disjunctions[0];
    let cases: [(usize, f64, f64); 3] = [
        (1, 64.0, 2.0),
        (2, 32.0, std::f64::consts::SQRT_2),
        (4, 16.0, 1.0),
    ];
    for (pc, ball_hi, half_hi) in cases {
        let p = partition_uniform(prob.n, pc).unwrap();
        let iv = alpha_bounds_interval(d, &p, &prob.lower, &prob.upper);
        let ob = alpha_bounds_obbt(&prob, 0, &p, ObbtMode::Union).unwrap();
        for s in 0..pc {
            let e = iv.require(0, 0, s).unwrap();
            assert!(
                (e.lower - 0.0).abs() <= 1e-9 && (e.upper - ball_hi).abs() <= 1e-9,
                "interval ball bounds at P={pc}, split {s}: ({}, {})",
                e.lower,
                e.upper
            );
            let e = ob.require(0, 0, s).unwrap();
            assert!(
                (e.lower - 0.0).abs() <= 1e-9 && (e.upper - ball_hi).abs() <= 1e-9,
                "tightened ball bounds at P={pc}, split {s}: ({}, {})",
                e.lower,
                e.upper
            );
            let e = ob.require(1, 0, s).unwrap();
            assert!(
                (e.upper - half_hi).abs() <= 1e-9,
                "tightened halfspace upper at P={pc}, split {s}: {}",
                e.upper
            );
            if pc == 4 {
                assert!(
                    (e.lower - -4.0).abs() <= 1e-9,
                    "tightened halfspace lower at P=4, split {s}: {}",
                    e.lower
                );
            }
        }
    }
    println!(
        "acceptance 07 (tightened bound values): PASS — ball splits (0, 64/32/16), \
         halfspace uppers 2/√2/1 and lower −4, all to 1e-9"
    );
}

/// The three desk instances: clustering (6 points, 2 clusters), assignment
/// of 2 points to 2 balls, and a sparse-input funnel on a seeded 4-4 hidden
/// ReLU network.
fn desk_instances() -> Vec<(String, DisjunctiveProblem)> {
    let pts = vec![
        vec![0.0, 0.0],
        vec![0.5, 0.0],
        vec![0.0, 0.5],
        vec![3.0, 3.0],
        vec![3.5, 3.0],
        vec![3.0, 3.5],
    ];
    let clustering = make_clustering(&pts, 2).unwrap();
    let pball =
        make_pball_centers(&[vec![0.0, 0.0], vec![10.0, 0.0]], 2).unwrap();
    let nn = osif_desk_network(3, 2, 4);
    let osif = make_osif(&nn, 0, 2.0).unwrap();
    vec![
        ("clustering".to_string(), clustering),
        ("pball".to_string(), pball),
        ("osif".to_string(), osif),
    ]
}

/// Exhaustive oracle: every assignment of one active disjunct per
/// disjunction, each solved as a fixed convex subproblem on the
/// indicator-constant model; returns the sense-aware best value.
fn lambda_enumeration_optimum(m: &MixedModel) -> f64 {
    let radices: Vec<usize> = m.lambda.iter().map(|g| g.len()).collect();
    assert!(!radices.is_empty(), "the oracle needs at least one disjunction");
    let minimize = m.sense == ObjSense::Minimize;
    let mut best = if minimize { f64::INFINITY } else { f64::NEG_INFINITY };
    let mut choice = vec![0usize; radices.len()];
    loop {
        let mut sub = m.clone();
        for (g, lam_vars) in m.lambda.iter().enumerate() {
            for (l, &j) in lam_vars.iter().enumerate() {
                let v = if l == choice[g] { 1.0 } else { 0.0 };
                sub.vars[j].lower = v;
                sub.vars[j].upper = v;
            }
        }
        let res = solve_relaxation(&sub, &RelaxOptions { tol: 1e-8, max_cuts_per_row: 500 })
            .expect("oracle subproblem");
        if res.status == LpStatus::Optimal {
            assert!(!res.cut_budget_exhausted, "oracle subproblem must converge");
            best = if minimize {
                best.min(res.objective)
            } else {
                best.max(res.objective)
            };
        }
        let mut g = 0;
        loop {
            if g == radices.len() {
                return best;
            }
            choice[g] += 1;
            if choice[g] < radices[g] {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

/// Direct arithmetic oracle for the clustering instance: enumerate every
/// assignment, place each cluster center at its members' centroid, and sum
/// squared distances.
fn clustering_centroid_optimum(points: &[Vec<f64>], k: usize) -> f64 {
    assert_eq!(k, 2, "the enumeration below is written for two clusters");
    let dim = points[0].len();
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << points.len()) {
        let mut cost = 0.0;
        for cluster in 0..2u32 {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .enumerate()
                .filter(|(i, _)| (mask >> i) & 1 == cluster)
                .map(|(_, p)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..dim {
                let mean =
                    members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                cost += members.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>();
            }
        }
        best = best.min(cost);
    }
    best
}

#[test]
fn a08_every_formulation_reaches_the_enumerated_optimum() {
    let t0 = Instant::now();
    let mut runs = 0usize;
    for (name, prob) in desk_instances() {
        let p1 = partition_uniform(prob.n, 1).unwrap();
        let bigm = compile_bigm(&prob, &interval_bounds(&prob, &p1)).unwrap();
        let oracle = lambda_enumeration_optimum(&bigm);
        assert!(oracle.is_finite(), "{name}: every desk instance has a feasible assignment");
        if name == "clustering" {
            let pts = vec![
                vec![0.0, 0.0],
                vec![0.5, 0.0],
                vec![0.0, 0.5],
                vec![3.0, 3.0],
                vec![3.5, 3.0],
                vec![3.0, 3.5],
            ];
            let direct = clustering_centroid_optimum(&pts, 2);
            assert!(
                (oracle - direct).abs() <= 1e-6,
                "assignment oracle {oracle} vs centroid arithmetic {direct}"
            );
        }
        let tol = 1e-5 * oracle.abs().max(1.0);

        let mut models: Vec<(String, MixedModel)> = vec![("bigm".to_string(), bigm)];
        let affine = prob
            .disjunctions
            .iter()
            .all(|d| d.disjuncts.iter().all(|l| l.constraints.iter().all(|c| c.lhs.is_affine())));
        if affine {
            models.push(("hull".to_string(), compile_hull_linear(&prob).unwrap()));
        }
        for pc in [1, 2, prob.n] {
            let p = partition_uniform(prob.n, pc).unwrap();
            let bounds = interval_bounds(&prob, &p);
            for linking in [false, true] {
                for share_alpha in [false, true] {
                    let opts = PsplitOptions { linking, share_alpha };
                    let m = compile_psplit(&prob, &p, &bounds, opts).unwrap();
                    models.push((
                        format!(
                            "psplit P={pc} linking={} sharing={}",
                            if linking { "on" } else { "off" },
                            if share_alpha { "on" } else { "off" }
                        ),
                        m,
                    ));
                }
            }
        }

        for (label, model) in models {
            let res = solve_bnb(&model, &BnbOptions::default()).unwrap();
            assert_eq!(
                res.status,
                MipStatus::Optimal,
                "{name}/{label}: search must close"
            );
            assert!(
                (res.objective - oracle).abs() <= tol,
                "{name}/{label}: optimum {} vs oracle {oracle}",
                res.objective
            );
            runs += 1;
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "time budget exceeded: {dt:.2?}");
    println!(
        "acceptance 08 (cross-formulation optima): PASS — {runs} searches across 3 desk \
         instances all match their enumeration oracles within 1e-5 relative, {dt:.2?}"
    );
}

#[test]
fn a09_two_way_splits_do_not_increase_median_node_counts() {
    let mut nodes_one = Vec::new();
    let mut nodes_two = Vec::new();
    let mut detail = String::new();
    for (name, prob) in desk_instances() {
        let p1 = partition_uniform(prob.n, 1).unwrap();
        let bigm = compile_bigm(&prob, &interval_bounds(&prob, &p1)).unwrap();
        let n1 = solve_bnb(&bigm, &BnbOptions::default()).unwrap().nodes;

        let p2 = partition_uniform(prob.n, 2).unwrap();
        let bounds = interval_bounds(&prob, &p2);
        let two =
            compile_psplit(&prob, &p2, &bounds, PsplitOptions::default()).unwrap();
        let n2 = solve_bnb(&two, &BnbOptions::default()).unwrap().nodes;

        detail.push_str(&format!(" {name}: {n1} -> {n2};"));
        nodes_one.push(n1);
        nodes_two.push(n2);
    }
    let median = |v: &mut Vec<u64>| -> u64 {
        v.sort_unstable();
        v[v.len() / 2]
    };
    let m1 = median(&mut nodes_one);
    let m2 = median(&mut nodes_two);
    assert!(
        m2 <= m1,
        "median nodes with 2-way splits ({m2}) exceed the indicator-constant median ({m1})"
    );
    println!(
        "acceptance 09 (node-count trend): PASS — median nodes {m1} (indicator-constant) vs \
         {m2} (2-way split);{detail} absolute counts are desk-scale only"
    );
}

fn run_cli(dir: &Path, args: &[&str]) -> std::process::Output {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_splitform"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawning the binary");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn a10_rerunning_every_command_is_byte_identical() {
    // Each command runs twice in two fresh directories; every artifact must
    // agree byte for byte (results CSVs include no wall-clock by default).
    let commands: Vec<Vec<&str>> = vec![
        vec!["reformulate", "ex1", "--formulation", "psplit", "--p", "2", "--out", "m.lp"],
        vec!["reformulate", "ex2", "--formulation", "bigm", "--out", "m.mps"],
        vec![
            "solve", "ex2", "--objective", "-1,-2,0,-1", "--formulation", "psplit", "--p", "2",
            "--linking", "--results", "r.csv",
        ],
        vec!["compare", "ex2", "--objective", "-1,-2,0,-1", "--p", "1,2,4", "--out", "sweep.csv"],
        vec![
            "project", "ex1", "--formulation", "psplit", "--p", "2", "--resolution", "21",
            "--out", "grid.svg",
        ],
        vec![
            "generate", "pball", "--balls", "2", "--points", "2", "--dim", "2", "--seed", "11",
            "--out", "pball.json",
        ],
        vec!["generate", "network", "--inputs", "3", "--outputs", "2", "--seed", "4", "--out", "net.json"],
        vec!["generate", "random-affine", "--n", "5", "--seed", "2", "--out", "rand.json"],
        vec!["generate", "clustering", "--points", "pts.csv", "--k", "2", "--out", "clust.json"],
        vec![
            "generate", "osif", "--network", "net.json", "--target-class", "0", "--budget", "2",
            "--out", "osif.json",
        ],
    ];
    let artifacts = [
        "m.lp", "m.mps", "r.csv", "sweep.csv", "grid.svg", "grid.csv", "pball.json",
        "net.json", "rand.json", "clust.json", "osif.json",
    ];

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        std::fs::write(dir.path().join("pts.csv"), "0,0\n1,0\n0,1\n1,1\n").unwrap();
        for cmd in &commands {
            run_cli(dir.path(), cmd);
        }
    }
    let mut stdout_identical = 0usize;
    for cmd in &commands {
        let a = run_cli(dirs[0].path(), cmd);
        let b = run_cli(dirs[1].path(), cmd);
        assert_eq!(
            a.stdout, b.stdout,
            "stdout of {:?} differs across reruns",
            cmd
        );
        stdout_identical += 1;
    }
    for name in artifacts {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs across reruns");
    }
    println!(
        "acceptance 10 (command determinism): PASS — {} commands, {} artifacts byte-identical \
         across fresh-directory reruns, {} stdouts identical",
        commands.len(),
        artifacts.len(),
        stdout_identical
    );
}
