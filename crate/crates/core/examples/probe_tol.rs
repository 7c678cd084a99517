//! Scan the equivalence pair across 100 objectives at tight tolerances.
use splitform::bounds::alpha_bounds_interval;
use splitform::instances::make_ex1;
use splitform::partition::partition_uniform;
use splitform::reformulate::{compile_bigm, compile_psplit, PsplitOptions};
use splitform::solver::{solve_relaxation, RelaxOptions};

fn main() {
    let prob = make_ex1();
    let p1 = partition_uniform(prob.n, 1).unwrap();
    let bounds: Vec<_> = prob
        .disjunctions
        .iter()
        .map(|d| alpha_bounds_interval(d, &p1, &prob.lower, &prob.upper))
        .collect();
    let mut bigm = compile_bigm(&prob, &bounds).unwrap();
    let mut ps = compile_psplit(&prob, &p1, &bounds, PsplitOptions::default()).unwrap();
    use rand::{Rng, SeedableRng};
    for tol in [1e-7, 1e-8, 1e-9] {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7000);
        let opts = RelaxOptions { tol, max_cuts_per_row: 500 };
        let (mut n_exh, mut worst_gap, mut errs) = (0usize, 0.0f64, 0usize);
        for _ in 0..100 {
            let obj: Vec<f64> = (0..prob.n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for m in [&mut bigm, &mut ps] {
                m.objective = obj
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(i, &c)| (i, c))
                    .collect();
            }
            match (solve_relaxation(&bigm, &opts), solve_relaxation(&ps, &opts)) {
                (Ok(a), Ok(b)) => {
                    if a.cut_budget_exhausted || b.cut_budget_exhausted {
                        n_exh += 1;
                    }
                    worst_gap = worst_gap.max((a.objective - b.objective).abs());
                }
                _ => errs += 1,
            }
        }
        println!("tol {tol:.0e}: worst gap {worst_gap:.3e}, exhausted pairs {n_exh}, errors {errs}");
    }
}
