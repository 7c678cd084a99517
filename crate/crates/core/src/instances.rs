//! Instance constructors: the two worked examples, seeded random affine
//! disjunctions, exact clustering, point-to-ball assignment, and sparse-input
//! maximization over trained ReLU networks.
//!
//! Every constructor returns a [`DisjunctiveProblem`] that passes
//! [`DisjunctiveProblem::validate`] with no errors; seeded generators are
//! deterministic.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{AlphaBounds, BoundEntry, Provenance};
use crate::model::{
    Disjunct, DisjunctConstraint, DisjunctiveProblem, Disjunction, GlobalRow, IndicatorRow,
    ObjSense, RowSense, SeparableFunction, UnivariateTerm,
};
use crate::partition::Partition;
use crate::{Error, Result};

/// The 4-variable running example: `[Σ x_i² ≤ 1] ∨ [Σ −x_i ≤ −12]` on
/// `[−4, 4]⁴`. The objective is left at zero for the caller to fill in.
pub fn make_ex1() -> DisjunctiveProblem {
    let mut prob = DisjunctiveProblem::new_box(vec![-4.0; 4], vec![4.0; 4]);
    let ball = Disjunct {
        constraints: vec![DisjunctConstraint {
            lhs: SeparableFunction::new(
                (0..4).map(|i| UnivariateTerm::quadratic(i, 1.0, 0.0)).collect(),
                0.0,
            ),
            rhs: 1.0,
        }],
    };
    let halfspace = Disjunct {
        constraints: vec![DisjunctConstraint {
            lhs: SeparableFunction::affine(&[-1.0, -1.0, -1.0, -1.0], 0.0),
            rhs: -12.0,
        }],
    };
    prob.disjunctions.push(Disjunction { disjuncts: vec![ball, halfspace] });
    prob
}

/// The 4-variable affine example on `[0, 5]⁴`: two disjuncts with two
/// constraints each. The objective is left at zero for the caller to fill
/// in.
pub fn make_ex2() -> DisjunctiveProblem {
    let mut prob = DisjunctiveProblem::new_box(vec![0.0; 4], vec![5.0; 4]);
    let d1 = Disjunct {
        constraints: vec![
            DisjunctConstraint {
                lhs: SeparableFunction::affine(&[1.0, 1.0, 1.0, 1.0], 0.0),
                rhs: 1.5,
            },
            DisjunctConstraint {
                lhs: SeparableFunction::affine(&[1.5, -1.2, 1.0, -1.0], 0.0),
                rhs: -1.0,
            },
        ],
    };
    let d2 = Disjunct {
        constraints: vec![
            DisjunctConstraint {
                lhs: SeparableFunction::affine(&[-1.0, -2.0, -1.0, -2.0], 0.0),
                rhs: -26.0,
            },
            DisjunctConstraint {
                lhs: SeparableFunction::affine(&[-2.0, 1.0, 1.0, -0.5], 0.0),
                rhs: -1.0,
            },
        ],
    };
    prob.disjunctions.push(Disjunction { disjuncts: vec![d1, d2] });
    prob
}

/// The deliberately weak interval-style bound family for [`make_ex1`] under
/// the uniform `P`-way split, `P ∈ {1, 2, 4}`: with `m = 0.5P² − 3.5P + 7`,
/// each ball split gets `(0, 16m)` and each halfspace split `(−4m, m)`.
pub fn ex1_weak_bounds(p_count: usize) -> Result<AlphaBounds> {
    if !matches!(p_count, 1 | 2 | 4) {
        return Err(Error::InvalidArgument(format!(
            "the weak bound family is defined for P ∈ {{1, 2, 4}}, got {p_count}"
        )));
    }
    let p = p_count as f64;
    let m = 0.5 * p * p - 3.5 * p + 7.0;
    let mut bounds = AlphaBounds::new();
    for s in 0..p_count {
        bounds.insert(
            0,
            0,
            s,
            BoundEntry { lower: 0.0, upper: 16.0 * m, provenance: Provenance::User },
        );
        bounds.insert(
            1,
            0,
            s,
            BoundEntry { lower: -4.0 * m, upper: m, provenance: Provenance::User },
        );
    }
    Ok(bounds)
}

/// A seeded random affine disjunction on a box: `n ≤ 8` variables, 2–3
/// disjuncts with one constraint each. Every disjunct is feasible by
/// construction (its right-hand side is set from a random box point plus
/// slack). The objective is zero for the caller to fill in.
pub fn make_random_affine(n: usize, seed: u64) -> Result<DisjunctiveProblem> {
    if n == 0 || n > 8 {
        return Err(Error::InvalidArgument(format!(
            "random affine instances cover 1 ≤ n ≤ 8, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for _ in 0..n {
        let lo: f64 = rng.random_range(-5.0..0.0);
        let width: f64 = rng.random_range(1.0..8.0);
        lower.push(lo);
        upper.push(lo + width);
    }
    let mut prob = DisjunctiveProblem::new_box(lower.clone(), upper.clone());
    let n_disjuncts = rng.random_range(2..=3);
    let mut disjuncts = Vec::with_capacity(n_disjuncts);
    for _ in 0..n_disjuncts {
        let coeffs: Vec<f64> = (0..n)
            .map(|_| {
                let c: f64 = rng.random_range(-2.0..2.0);
                if c.abs() < 0.1 {
                    0.1_f64.copysign(c)
                } else {
                    c
                }
            })
            .collect();
        // Anchor the row at a random interior point so the disjunct is
        // feasible over the box.
        let anchor: Vec<f64> =
            (0..n).map(|i| rng.random_range(lower[i]..upper[i])).collect();
        let slack: f64 = rng.random_range(0.1..1.0);
        let rhs = coeffs.iter().zip(&anchor).map(|(c, x)| c * x).sum::<f64>() + slack;
        disjuncts.push(Disjunct {
            constraints: vec![DisjunctConstraint {
                lhs: SeparableFunction::affine(&coeffs, 0.0),
                rhs,
            }],
        });
    }
    prob.disjunctions.push(Disjunction { disjuncts });
    Ok(prob)
}

/// Exact clustering: choose `k` centers minimizing the sum of per-point
/// radii, where each point's disjunction assigns it to one center via
/// `Σ_d (center_{j,d} − point_d)² ≤ r_i`.
///
/// Variables: `k·dim` center coordinates (cluster-major), then one radius
/// per point. Center boxes span the data bounding box; radii live in
/// `[0, max pairwise squared distance]`.
pub fn make_clustering(points: &[Vec<f64>], k: usize) -> Result<DisjunctiveProblem> {
    let dim = check_points(points)?;
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ k ≤ number of points, got k = {k} for {} points",
            points.len()
        )));
    }
    let rmax = max_pairwise_sq_dist(points, &(0..dim).collect::<Vec<_>>());
    let mut lower = Vec::with_capacity(k * dim + points.len());
    let mut upper = Vec::with_capacity(k * dim + points.len());
    for _ in 0..k {
        for d in 0..dim {
            let lo = points.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[d]).fold(f64::NEG_INFINITY, f64::max);
            lower.push(lo);
            upper.push(hi);
        }
    }
    for _ in points {
        lower.push(0.0);
        upper.push(rmax);
    }
    let mut prob = DisjunctiveProblem::new_box(lower, upper);
    let r_base = k * dim;
    for i in 0..points.len() {
        prob.objective[r_base + i] = 1.0;
    }
    for (i, point) in points.iter().enumerate() {
        let mut disjuncts = Vec::with_capacity(k);
        for j in 0..k {
            let mut terms: Vec<UnivariateTerm> =
                (0..dim).map(|d| UnivariateTerm::quadratic(j * dim + d, 1.0, point[d])).collect();
            terms.push(UnivariateTerm::linear(r_base + i, -1.0));
            disjuncts.push(Disjunct {
                constraints: vec![DisjunctConstraint {
                    lhs: SeparableFunction::new(terms, 0.0),
                    rhs: 0.0,
                }],
            });
        }
        prob.disjunctions.push(Disjunction { disjuncts });
    }
    Ok(prob)
}

/// Data-driven split-sum bounds for [`make_clustering`], one bound set per
/// point disjunction: the distance part of each split is bounded above by
/// the largest squared pairwise point distance restricted to the split's
/// coordinates, and below by zero; a radius term contributes `[−rmax, 0]`.
///
/// These bounds hold at every optimal solution (centers stay inside the
/// convex hull of the data), which preserves the mixed-binary optimum; they
/// are supplied as caller bounds, not box-derived ones.
pub fn clustering_alpha_bounds(
    points: &[Vec<f64>],
    k: usize,
    p: &Partition,
) -> Result<Vec<AlphaBounds>> {
    let dim = check_points(points)?;
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ k ≤ number of points, got k = {k} for {} points",
            points.len()
        )));
    }
    let n = k * dim + points.len();
    crate::partition::validate_partition(p, n)?;
    let rmax = max_pairwise_sq_dist(points, &(0..dim).collect::<Vec<_>>());
    let r_base = k * dim;
    let mut out = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let mut bounds = AlphaBounds::new();
        for j in 0..k {
            for (s, class) in p.classes.iter().enumerate() {
                // Data dimensions whose center-j coordinate lies in this split.
                let dims: Vec<usize> = (0..dim)
                    .filter(|d| class.contains(&(j * dim + d)))
                    .collect();
                let has_r = class.contains(&(r_base + i));
                let upper = max_pairwise_sq_dist(points, &dims);
                let lower = if has_r { -rmax } else { 0.0 };
                bounds.insert(
                    j,
                    0,
                    s,
                    BoundEntry { lower, upper, provenance: Provenance::User },
                );
            }
        }
        out.push(bounds);
    }
    Ok(out)
}

/// Largest squared Euclidean distance between any two points, restricted to
/// the listed coordinates. Zero when fewer than two points or no coordinates.
fn max_pairwise_sq_dist(points: &[Vec<f64>], dims: &[usize]) -> f64 {
    let mut best: f64 = 0.0;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d2: f64 =
                dims.iter().map(|&d| (points[a][d] - points[b][d]).powi(2)).sum();
            best = best.max(d2);
        }
    }
    best
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::InvalidArgument("no data points given".into()))?;
    if dim == 0 {
        return Err(Error::InvalidArgument("data points must have at least one coordinate".into()));
    }
    if let Some(bad) = points.iter().position(|p| p.len() != dim) {
        return Err(Error::InvalidArgument(format!(
            "point {bad} has {} coordinates, expected {dim}",
            points[bad].len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("data points must be finite".into()));
    }
    Ok(dim)
}

/// Read one point per line, comma-separated coordinates, no header.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let point: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("points CSV line {}: bad number {f:?}", lineno + 1))
                })
            })
            .collect::<Result<_>>()?;
        points.push(point);
    }
    check_points(&points)?;
    Ok(points)
}

/// Write one point per line, comma-separated coordinates.
pub fn write_points_csv(points: &[Vec<f64>], path: impl AsRef<Path>) -> Result<()> {
    check_points(points)?;
    let mut text = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Point-to-ball assignment with explicit centers: place `n_points` points,
/// each inside one of the unit balls, minimizing the total ℓ1 distance over
/// all unordered point pairs. At most one point per ball.
///
/// Variables: point coordinates (point-major), then one auxiliary `t ≥ |Δ|`
/// per pair per dimension carrying the ℓ1 objective.
pub fn make_pball_centers(
    centers: &[Vec<f64>],
    n_points: usize,
) -> Result<DisjunctiveProblem> {
    let dim = check_points(centers)?;
    if n_points == 0 || n_points > centers.len() {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ points ≤ balls (one point per ball), got {n_points} points for {} balls",
            centers.len()
        )));
    }
    // Box per dimension: the center range padded by the unit radius.
    let mut dim_lo = vec![f64::INFINITY; dim];
    let mut dim_hi = vec![f64::NEG_INFINITY; dim];
    for c in centers {
        for d in 0..dim {
            dim_lo[d] = dim_lo[d].min(c[d] - 1.0);
            dim_hi[d] = dim_hi[d].max(c[d] + 1.0);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n_points)
        .flat_map(|a| (a + 1..n_points).map(move |b| (a, b)))
        .collect();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for _ in 0..n_points {
        lower.extend_from_slice(&dim_lo);
        upper.extend_from_slice(&dim_hi);
    }
    for _ in &pairs {
        for d in 0..dim {
            lower.push(0.0);
            upper.push(dim_hi[d] - dim_lo[d]);
        }
    }
    let mut prob = DisjunctiveProblem::new_box(lower, upper);
    let t_base = n_points * dim;
    for (pi, &(a, b)) in pairs.iter().enumerate() {
        for d in 0..dim {
            let t = t_base + pi * dim + d;
            prob.objective[t] = 1.0;
            let (va, vb) = (a * dim + d, b * dim + d);
            prob.globals.push(GlobalRow {
                coeffs: vec![(va, 1.0), (vb, -1.0), (t, -1.0)],
                sense: RowSense::Le,
                rhs: 0.0,
            });
            prob.globals.push(GlobalRow {
                coeffs: vec![(va, -1.0), (vb, 1.0), (t, -1.0)],
                sense: RowSense::Le,
                rhs: 0.0,
            });
        }
    }
    for p in 0..n_points {
        let disjuncts = centers
            .iter()
            .map(|c| Disjunct {
                constraints: vec![DisjunctConstraint {
                    lhs: SeparableFunction::new(
                        (0..dim)
                            .map(|d| UnivariateTerm::quadratic(p * dim + d, 1.0, c[d]))
                            .collect(),
                        0.0,
                    ),
                    rhs: 1.0,
                }],
            })
            .collect();
        prob.disjunctions.push(Disjunction { disjuncts });
    }
    // One point per ball: Σ_p λ_{p,j} ≤ 1 for every ball j.
    for j in 0..centers.len() {
        prob.indicator_rows.push(IndicatorRow {
            terms: (0..n_points).map(|p| (p, j, 1.0)).collect(),
            sense: RowSense::Le,
            rhs: 1.0,
        });
    }
    Ok(prob)
}

/// Seeded point-to-ball instance: `n_balls` unit-ball centers drawn
/// uniformly from `[0, 10]^dim`, then [`make_pball_centers`].
pub fn make_pball(
    n_balls: usize,
    n_points: usize,
    dim: usize,
    seed: u64,
) -> Result<DisjunctiveProblem> {
    if n_balls == 0 || dim == 0 {
        return Err(Error::InvalidArgument(
            "need at least one ball and one dimension".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..n_balls)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect();
    make_pball_centers(&centers, n_points)
}

/// Activation applied after a layer's affine map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// `max(0, z)` — encoded as a two-disjunct switch per node.
    Relu,
    /// Identity (output layers).
    Linear,
}

/// One dense layer `z = W·input + b` followed by its activation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Weight matrix, one row per node.
    #[serde(rename = "w")]
    pub weights: Vec<Vec<f64>>,
    /// Bias vector, one entry per node.
    #[serde(rename = "b")]
    pub bias: Vec<f64>,
    /// Activation function.
    #[serde(rename = "act")]
    pub activation: Activation,
}

/// A dense feed-forward network as stored in the JSON schema
/// `{"layers": [{"w": [[…]], "b": […], "act": "relu"|"linear"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkWeights {
    /// Layers in forward order.
    pub layers: Vec<Layer>,
}

impl NetworkWeights {
    /// Input dimension (columns of the first weight matrix).
    pub fn input_dim(&self) -> usize {
        self.layers.first().and_then(|l| l.weights.first()).map_or(0, |row| row.len())
    }

    /// Output dimension (rows of the last weight matrix).
    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.len())
    }

    /// Check layer dimensions chain and matrices are well-formed.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidArgument("network has no layers".into()));
        }
        let mut prev = self.input_dim();
        for (li, layer) in self.layers.iter().enumerate() {
            if layer.weights.is_empty() {
                return Err(Error::InvalidArgument(format!("layer {li} has no nodes")));
            }
            if layer.bias.len() != layer.weights.len() {
                return Err(Error::InvalidArgument(format!(
                    "layer {li}: {} bias entries for {} nodes",
                    layer.bias.len(),
                    layer.weights.len()
                )));
            }
            for (ni, row) in layer.weights.iter().enumerate() {
                if row.len() != prev {
                    return Err(Error::InvalidArgument(format!(
                        "layer {li} node {ni}: {} inputs, expected {prev}",
                        row.len()
                    )));
                }
            }
            prev = layer.weights.len();
        }
        Ok(())
    }
}

/// Parse a network from the JSON schema, validating dimension chaining.
pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkWeights> {
    let text = std::fs::read_to_string(path)?;
    let nn: NetworkWeights = serde_json::from_str(&text)?;
    nn.validate()?;
    Ok(nn)
}

/// Write a network in the JSON schema read by [`load_network`].
pub fn save_network(nn: &NetworkWeights, path: impl AsRef<Path>) -> Result<()> {
    nn.validate()?;
    let text = serde_json::to_string_pretty(nn)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Forward pass: post-activation values per layer (last entry = outputs).
pub fn forward(nn: &NetworkWeights, input: &[f64]) -> Result<Vec<Vec<f64>>> {
    nn.validate()?;
    if input.len() != nn.input_dim() {
        return Err(Error::InvalidArgument(format!(
            "input has {} entries, network expects {}",
            input.len(),
            nn.input_dim()
        )));
    }
    let mut acts = Vec::with_capacity(nn.layers.len());
    let mut prev: Vec<f64> = input.to_vec();
    for layer in &nn.layers {
        let mut out = Vec::with_capacity(layer.weights.len());
        for (row, b) in layer.weights.iter().zip(&layer.bias) {
            let z: f64 = row.iter().zip(&prev).map(|(w, x)| w * x).sum::<f64>() + b;
            out.push(match layer.activation {
                Activation::Relu => z.max(0.0),
                Activation::Linear => z,
            });
        }
        acts.push(out.clone());
        prev = out;
    }
    Ok(acts)
}

/// Exact extreme of `w᷀x + bias` over `{x ∈ [0,1]^n, Σx ≤ budget}` by the
/// greedy fractional fill (the LP optimum).
fn budget_extreme(w: &[f64], bias: f64, budget: f64, maximize: bool) -> f64 {
    let mut ws: Vec<f64> = w.to_vec();
    if maximize {
        ws.sort_by(|a, b| b.total_cmp(a));
    } else {
        ws.sort_by(|a, b| a.total_cmp(b));
    }
    let mut rem = budget;
    let mut v = bias;
    for wi in ws {
        if rem <= 0.0 || (maximize && wi <= 0.0) || (!maximize && wi >= 0.0) {
            break;
        }
        let step = rem.min(1.0);
        v += wi * step;
        rem -= step;
    }
    v
}

/// Sparse-input maximization over a trained ReLU network: inputs in
/// `[0, 1]` under an ℓ1 budget (inputs are nonnegative, so the budget is a
/// single linear row), each undetermined ReLU node encoded as the two-term
/// switch disjunction, and the objective maximizing the target output unit
/// (the pre-softmax logit stands in for class probability).
///
/// Node boxes come from interval arithmetic; the first hidden layer
/// additionally folds the ℓ1 budget into its pre-activation brackets so
/// every emitted disjunct is feasible. Nodes whose pre-activation interval
/// does not straddle zero are fixed (always-active nodes become global
/// equality rows, always-inactive nodes a zero box) instead of a disjunction.
///
/// Variable order: inputs, hidden-node outputs layer by layer, outputs.
pub fn make_osif(
    nn: &NetworkWeights,
    target_class: usize,
    l1_budget: f64,
) -> Result<DisjunctiveProblem> {
    nn.validate()?;
    if nn.layers.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least one hidden layer and one output layer".into(),
        ));
    }
    let (hidden, output) = nn.layers.split_at(nn.layers.len() - 1);
    if let Some(li) = hidden.iter().position(|l| l.activation != Activation::Relu) {
        return Err(Error::Unsupported(format!(
            "hidden layer {li} must use relu activation"
        )));
    }
    let output = &output[0];
    if output.activation != Activation::Linear {
        return Err(Error::Unsupported("the output layer must be linear".into()));
    }
    if target_class >= output.weights.len() {
        return Err(Error::InvalidArgument(format!(
            "target class {target_class} out of range for {} outputs",
            output.weights.len()
        )));
    }
    if !(l1_budget >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative ℓ1 budget {l1_budget}")));
    }

    let n_inputs = nn.input_dim();
    let total_vars = n_inputs
        + hidden.iter().map(|l| l.weights.len()).sum::<usize>()
        + output.weights.len();
    let mut lower = vec![0.0; n_inputs];
    let mut upper = vec![1.0; n_inputs];
    lower.reserve(total_vars);
    upper.reserve(total_vars);

    // State of one node's pre-activation bracket.
    enum Node {
        Always,  // pre ≥ 0 everywhere: y = w᷀a + b as a global equality
        Never,   // pre ≤ 0 everywhere: y fixed at zero
        Switch,  // straddles zero: two-term disjunction
    }

    let mut prob = DisjunctiveProblem::new_box(vec![0.0; n_inputs], vec![1.0; n_inputs]);
    prob.globals.push(GlobalRow {
        coeffs: (0..n_inputs).map(|i| (i, 1.0)).collect(),
        sense: RowSense::Le,
        rhs: l1_budget,
    });

    let mut prev_vars: Vec<usize> = (0..n_inputs).collect();
    let mut prev_lo = vec![0.0; n_inputs];
    let mut prev_hi = vec![1.0; n_inputs];
    // Budget-constrained first layer, plain interval arithmetic afterwards.
    let mut first = true;
    for layer in hidden {
        let mut layer_vars = Vec::with_capacity(layer.weights.len());
        let mut layer_lo = Vec::with_capacity(layer.weights.len());
        let mut layer_hi = Vec::with_capacity(layer.weights.len());
        for (row, &b) in layer.weights.iter().zip(&layer.bias) {
            let (pre_lo, pre_hi) = if first {
                (
                    budget_extreme(row, b, l1_budget, false),
                    budget_extreme(row, b, l1_budget, true),
                )
            } else {
                let mut lo = b;
                let mut hi = b;
                for (w, j) in row.iter().zip(0..prev_vars.len()) {
                    if *w >= 0.0 {
                        lo += w * prev_lo[j];
                        hi += w * prev_hi[j];
                    } else {
                        lo += w * prev_hi[j];
                        hi += w * prev_lo[j];
                    }
                }
                (lo, hi)
            };
            let state = if pre_lo >= 0.0 {
                Node::Always
            } else if pre_hi <= 0.0 {
                Node::Never
            } else {
                Node::Switch
            };
            let (y_lo, y_hi) = match state {
                Node::Always => (pre_lo, pre_hi),
                Node::Never => (0.0, 0.0),
                Node::Switch => (0.0, pre_hi),
            };
            let y = prob.n;
            prob.n += 1;
            prob.lower.push(y_lo);
            prob.upper.push(y_hi);
            prob.objective.push(0.0);
            match state {
                Node::Always => {
                    // y = w᷀a + b exactly.
                    let mut coeffs: Vec<(usize, f64)> = row
                        .iter()
                        .zip(&prev_vars)
                        .filter(|(w, _)| **w != 0.0)
                        .map(|(w, &v)| (v, *w))
                        .collect();
                    coeffs.push((y, -1.0));
                    prob.globals.push(GlobalRow { coeffs, sense: RowSense::Eq, rhs: -b });
                }
                Node::Never => {}
                Node::Switch => {
                    let wx = |scale: f64| -> Vec<UnivariateTerm> {
                        row.iter()
                            .zip(&prev_vars)
                            .filter(|(w, _)| **w != 0.0)
                            .map(|(w, &v)| UnivariateTerm::linear(v, scale * w))
                            .collect()
                    };
                    // Active: y = w᷀a + b and w᷀a + b ≥ 0.
                    let mut eq_up = wx(1.0);
                    eq_up.push(UnivariateTerm::linear(y, -1.0));
                    let mut eq_dn = wx(-1.0);
                    eq_dn.push(UnivariateTerm::linear(y, 1.0));
                    let active = Disjunct {
                        constraints: vec![
                            DisjunctConstraint {
                                lhs: SeparableFunction::new(eq_up, 0.0),
                                rhs: -b,
                            },
                            DisjunctConstraint {
                                lhs: SeparableFunction::new(eq_dn, 0.0),
                                rhs: b,
                            },
                            DisjunctConstraint {
                                lhs: SeparableFunction::new(wx(-1.0), 0.0),
                                rhs: b,
                            },
                        ],
                    };
                    // Inactive: y = 0 and w᷀a + b ≤ 0.
                    let inactive = Disjunct {
                        constraints: vec![
                            DisjunctConstraint {
                                lhs: SeparableFunction::new(
                                    vec![UnivariateTerm::linear(y, 1.0)],
                                    0.0,
                                ),
                                rhs: 0.0,
                            },
                            DisjunctConstraint {
                                lhs: SeparableFunction::new(
                                    vec![UnivariateTerm::linear(y, -1.0)],
                                    0.0,
                                ),
                                rhs: 0.0,
                            },
                            DisjunctConstraint {
                                lhs: SeparableFunction::new(wx(1.0), 0.0),
                                rhs: -b,
                            },
                        ],
                    };
                    prob.disjunctions
                        .push(Disjunction { disjuncts: vec![active, inactive] });
                }
            }
            layer_vars.push(y);
            layer_lo.push(y_lo);
            layer_hi.push(y_hi);
        }
        prev_vars = layer_vars;
        prev_lo = layer_lo;
        prev_hi = layer_hi;
        first = false;
    }
    // Output layer: interval boxes plus exact equality rows.
    for (row, &b) in output.weights.iter().zip(&output.bias) {
        let mut lo = b;
        let mut hi = b;
        for (w, j) in row.iter().zip(0..prev_vars.len()) {
            if *w >= 0.0 {
                lo += w * prev_lo[j];
                hi += w * prev_hi[j];
            } else {
                lo += w * prev_hi[j];
                hi += w * prev_lo[j];
            }
        }
        let out = prob.n;
        prob.n += 1;
        prob.lower.push(lo);
        prob.upper.push(hi);
        prob.objective.push(0.0);
        let mut coeffs: Vec<(usize, f64)> = row
            .iter()
            .zip(&prev_vars)
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, &v)| (v, *w))
            .collect();
        coeffs.push((out, -1.0));
        prob.globals.push(GlobalRow { coeffs, sense: RowSense::Eq, rhs: -b });
    }
    let target_var = total_vars - output.weights.len() + target_class;
    prob.objective[target_var] = 1.0;
    prob.sense = ObjSense::Maximize;
    Ok(prob)
}

/// A small seeded dense network for desk-scale experiments: `n_inputs` → 4
/// → 4 → `n_outputs`, ReLU hidden layers, weights in `(−1, 1)` and biases
/// in `(−0.3, 0.3)`.
pub fn osif_desk_network(n_inputs: usize, n_outputs: usize, seed: u64) -> NetworkWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut make_layer = |n_in: usize, n_out: usize, activation: Activation| Layer {
        weights: (0..n_out)
            .map(|_| (0..n_in).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
        bias: (0..n_out).map(|_| rng.random_range(-0.3..0.3)).collect(),
        activation,
    };
    NetworkWeights {
        layers: vec![
            make_layer(n_inputs, 4, Activation::Relu),
            make_layer(4, 4, Activation::Relu),
            make_layer(4, n_outputs, Activation::Linear),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::alpha_bounds_interval;
    use crate::partition::{partition_uniform, Partition};
    use crate::reformulate::compile_bigm;
    use crate::solver::{solve_bnb, BnbOptions, MipStatus};

    fn bigm_optimum(prob: &DisjunctiveProblem, bounds: &[AlphaBounds]) -> f64 {
        let m = compile_bigm(prob, bounds).unwrap();
        let res = solve_bnb(&m, &BnbOptions::default()).unwrap();
        assert_eq!(res.status, MipStatus::Optimal);
        res.objective
    }

    fn interval_bounds_for(prob: &DisjunctiveProblem, p: &Partition) -> Vec<AlphaBounds> {
        prob.disjunctions
            .iter()
            .map(|d| alpha_bounds_interval(d, p, &prob.lower, &prob.upper))
            .collect()
    }

    #[test]
    fn ex1_boundary_points() {
        let prob = make_ex1();
        let ball = &prob.disjunctions[0].disjuncts[0].constraints[0];
        assert_eq!(ball.lhs.evaluate(&[1.0, 0.0, 0.0, 0.0]), 1.0);
        let half = &prob.disjunctions[0].disjuncts[1].constraints[0];
        assert_eq!(half.lhs.evaluate(&[3.0, 3.0, 3.0, 3.0]), -12.0);
        assert_eq!(half.rhs, -12.0);
        assert!(prob.validate().errors.is_empty());
    }

    #[test]
    fn ex2_printed_coefficients() {
        let prob = make_ex2();
        let row = &prob.disjunctions[0].disjuncts[0].constraints[1];
        let coeffs: Vec<f64> = row.lhs.terms.iter().map(|t| t.lin_coeff).collect();
        assert_eq!(coeffs, vec![1.5, -1.2, 1.0, -1.0]);
        assert_eq!(row.rhs, -1.0);
        let d2r1 = &prob.disjunctions[0].disjuncts[1].constraints[0];
        assert_eq!(d2r1.rhs, -26.0);
        // Hand arithmetic: at (0,5,0,5) the first row of disjunct 2 gives
        // −20 > −26, violated.
        assert_eq!(d2r1.lhs.evaluate(&[0.0, 5.0, 0.0, 5.0]), -20.0);
        assert!(!d2r1.satisfied_at(&[0.0, 5.0, 0.0, 5.0], 1e-9));
        assert!(prob.validate().errors.is_empty());
    }

    #[test]
    fn weak_bound_family_values() {
        for (pc, ball_hi, half_lo, half_hi) in
            [(1usize, 64.0, -16.0, 4.0), (2, 32.0, -8.0, 2.0), (4, 16.0, -4.0, 1.0)]
        {
            let b = ex1_weak_bounds(pc).unwrap();
            for s in 0..pc {
                let e0 = b.require(0, 0, s).unwrap();
                assert_eq!((e0.lower, e0.upper), (0.0, ball_hi), "P={pc}");
                let e1 = b.require(1, 0, s).unwrap();
                assert_eq!((e1.lower, e1.upper), (half_lo, half_hi), "P={pc}");
            }
        }
        assert!(ex1_weak_bounds(3).is_err());
    }

    #[test]
    fn random_affine_instances_validate() {
        for seed in 0..10 {
            let n = 2 + (seed as usize % 7);
            let prob = make_random_affine(n, seed).unwrap();
            let rep = prob.validate();
            assert!(rep.errors.is_empty(), "seed {seed}: {:?}", rep.errors);
        }
        assert!(make_random_affine(9, 0).is_err());
    }

    #[test]
    fn clustering_identical_points_costs_nothing() {
        let points = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        let prob = make_clustering(&points, 2).unwrap();
        assert!(prob.validate().errors.is_empty());
        let p = partition_uniform(prob.n, 1).unwrap();
        let bounds = clustering_alpha_bounds(&points, 2, &p).unwrap();
        let obj = bigm_optimum(&prob, &bounds);
        assert!(obj.abs() <= 1e-6, "optimum {obj}");
    }

    #[test]
    fn clustering_two_points_one_cluster() {
        // Points (0,0) and (2,0), one center: best center (1,0), cost 1+1.
        let points = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let prob = make_clustering(&points, 1).unwrap();
        assert!(prob.validate().errors.is_empty());
        let p = partition_uniform(prob.n, 1).unwrap();
        let bounds = clustering_alpha_bounds(&points, 1, &p).unwrap();
        let obj = bigm_optimum(&prob, &bounds);
        assert!((obj - 2.0).abs() <= 1e-5, "optimum {obj}");
    }

    #[test]
    fn clustering_unit_square_corners() {
        // Four corners, two clusters: pair adjacent corners. Each cluster
        // holds two points 1 apart, so each point sits 0.5 from the centroid
        // along one axis: per cluster 2·(0.5)² = 0.5, total 1.
        let points =
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let prob = make_clustering(&points, 2).unwrap();
        let p = partition_uniform(prob.n, 1).unwrap();
        let bounds = clustering_alpha_bounds(&points, 2, &p).unwrap();
        let obj = bigm_optimum(&prob, &bounds);
        // Exhaustive oracle: every assignment, centers at centroids.
        let mut best = f64::INFINITY;
        for mask in 0..16u32 {
            let mut cost = 0.0;
            for cluster in 0..2 {
                let members: Vec<&Vec<f64>> = points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (mask >> i) & 1 == cluster)
                    .map(|(_, p)| p)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                for d in 0..2 {
                    let mean: f64 =
                        members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                    cost += members.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>();
                }
            }
            best = best.min(cost);
        }
        assert!((best - 1.0).abs() <= 1e-12, "oracle {best}");
        assert!((obj - best).abs() <= 1e-5, "optimum {obj} vs oracle {best}");
    }

    #[test]
    fn clustering_bounds_restrict_to_split_coordinates() {
        // Points (0,0) and (3,4): full distance 25; x-only 9; r term −25.
        let points = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        // One cluster → vars: cx, cy, r0, r1. Split the center coordinates
        // apart and group the radii.
        let p = Partition::parse("0|1|2,3").unwrap();
        let bounds = clustering_alpha_bounds(&points, 1, &p).unwrap();
        let e = bounds[0].require(0, 0, 0).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 9.0));
        let e = bounds[0].require(0, 0, 1).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 16.0));
        let e = bounds[0].require(0, 0, 2).unwrap();
        assert_eq!((e.lower, e.upper), (-25.0, 0.0));
    }

    #[test]
    fn pball_single_ball_costs_nothing() {
        let prob = make_pball_centers(&[vec![5.0, 5.0]], 1).unwrap();
        assert!(prob.validate().errors.is_empty());
        let p = partition_uniform(prob.n, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let obj = bigm_optimum(&prob, &bounds);
        assert!(obj.abs() <= 1e-6, "optimum {obj}");
    }

    #[test]
    fn pball_two_separated_balls() {
        // Centers (0,0) and (10,0): the points sit on facing boundaries,
        // ℓ1 distance 8.
        let prob = make_pball_centers(&[vec![0.0, 0.0], vec![10.0, 0.0]], 2).unwrap();
        assert!(prob.validate().errors.is_empty());
        let p = partition_uniform(prob.n, 2).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let obj = bigm_optimum(&prob, &bounds);
        assert!((obj - 8.0).abs() <= 1e-5, "optimum {obj}");
    }

    #[test]
    fn pball_seeded_instances_reproduce() {
        let a = make_pball(3, 2, 2, 7).unwrap();
        let b = make_pball(3, 2, 2, 7).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = make_pball(3, 2, 2, 8).unwrap();
        assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
        assert!(make_pball_centers(&[vec![0.0, 0.0]], 2).is_err());
    }

    #[test]
    fn points_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        let points = vec![vec![0.0, 1.5], vec![-2.25, 3.0]];
        write_points_csv(&points, &path).unwrap();
        assert_eq!(read_points_csv(&path).unwrap(), points);
        std::fs::write(&path, "1.0,2.0\n1.0,oops\n").unwrap();
        assert!(read_points_csv(&path).is_err());
    }

    #[test]
    fn network_json_round_trip_and_validation() {
        let nn = osif_desk_network(3, 2, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_network(&nn, &path).unwrap();
        assert_eq!(load_network(&path).unwrap(), nn);

        let mut bad = nn.clone();
        bad.layers[1].weights[0].pop();
        assert!(bad.validate().is_err());
        assert!(NetworkWeights { layers: vec![] }.validate().is_err());
    }

    #[test]
    fn osif_zero_weight_network_scores_the_bias() {
        let nn = NetworkWeights {
            layers: vec![
                Layer {
                    weights: vec![vec![0.0, 0.0]],
                    bias: vec![0.0],
                    activation: Activation::Relu,
                },
                Layer {
                    weights: vec![vec![0.0]],
                    bias: vec![0.7],
                    activation: Activation::Linear,
                },
            ],
        };
        let prob = make_osif(&nn, 0, 5.0).unwrap();
        assert!(prob.validate().errors.is_empty());
        assert!(prob.disjunctions.is_empty(), "no node straddles zero");
        let p = partition_uniform(prob.n, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let obj = bigm_optimum(&prob, &bounds);
        assert!((obj - 0.7).abs() <= 1e-6, "optimum {obj}");
    }

    #[test]
    fn osif_single_chain_network() {
        // 1 input, 1 hidden node (w=1, b=0), unit output: optimum 1 at x=1;
        // the input box binds before the budget.
        let nn = NetworkWeights {
            layers: vec![
                Layer {
                    weights: vec![vec![1.0]],
                    bias: vec![0.0],
                    activation: Activation::Relu,
                },
                Layer {
                    weights: vec![vec![1.0]],
                    bias: vec![0.0],
                    activation: Activation::Linear,
                },
            ],
        };
        let prob = make_osif(&nn, 0, 5.0).unwrap();
        let p = partition_uniform(prob.n, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let obj = bigm_optimum(&prob, &bounds);
        assert!((obj - 1.0).abs() <= 1e-6, "optimum {obj}");
    }

    #[test]
    fn osif_incumbent_matches_forward_pass() {
        // A 2-2 net with sign-mixed weights so both hidden nodes straddle
        // zero; the incumbent's internal values must equal a direct forward
        // pass.
        let nn = NetworkWeights {
            layers: vec![
                Layer {
                    weights: vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
                    bias: vec![0.2, 0.2],
                    activation: Activation::Relu,
                },
                Layer {
                    weights: vec![vec![1.0, 1.0]],
                    bias: vec![0.0],
                    activation: Activation::Linear,
                },
            ],
        };
        let prob = make_osif(&nn, 0, 2.0).unwrap();
        assert!(prob.validate().errors.is_empty());
        assert_eq!(prob.disjunctions.len(), 2);
        let p = partition_uniform(prob.n, 1).unwrap();
        let bounds = interval_bounds_for(&prob, &p);
        let m = compile_bigm(&prob, &bounds).unwrap();
        let res = solve_bnb(&m, &BnbOptions::default()).unwrap();
        assert_eq!(res.status, MipStatus::Optimal);
        let x_in = &res.x[0..2];
        let acts = forward(&nn, x_in).unwrap();
        // Hidden activations sit at vars 2..4, the output at var 4.
        for (i, v) in acts[0].iter().enumerate() {
            assert!((res.x[2 + i] - v).abs() <= 1e-6, "hidden {i}: {} vs {v}", res.x[2 + i]);
        }
        assert!((res.x[4] - acts[1][0]).abs() <= 1e-6);
        assert!((res.objective - acts[1][0]).abs() <= 1e-6);
    }

    #[test]
    fn osif_rejects_bad_networks() {
        let mut nn = osif_desk_network(3, 2, 4);
        nn.layers[0].activation = Activation::Linear;
        assert!(matches!(make_osif(&nn, 0, 2.0), Err(Error::Unsupported(_))));
        let nn = osif_desk_network(3, 2, 4);
        assert!(make_osif(&nn, 5, 2.0).is_err());
        assert!(make_osif(&nn, 0, -1.0).is_err());
    }

    #[test]
    fn osif_desk_network_has_switching_nodes() {
        // The acceptance instance needs genuine disjunctions and shareable
        // split sums across the two disjuncts of each node.
        let nn = osif_desk_network(3, 2, 4);
        let prob = make_osif(&nn, 0, 2.0).unwrap();
        assert!(prob.validate().errors.is_empty());
        assert!(!prob.disjunctions.is_empty());
        // Layer-aligned partition: each node's pre-activation variables live
        // in a different class from its own output, so the shared w᷀x sums
        // are visible.
        let p = Partition {
            classes: vec![
                (0..3).collect(),
                (3..7).collect(),
                (7..11).collect(),
                (11..prob.n).collect(),
            ],
        };
        let groups = crate::bounds::detect_shared_alphas(&prob.disjunctions[0], &p);
        assert!(
            !groups.is_empty(),
            "the active copy row and the inactive switch row share w᷀x"
        );
    }
}
