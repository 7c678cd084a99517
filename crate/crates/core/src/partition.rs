//! Variable partitionings: disjoint index classes I_1…I_P covering all
//! variables, which determine how constraint sums are split into partial
//! sums. More classes give a tighter (and larger) compiled model.

use serde::{Deserialize, Serialize};

use crate::model::Disjunction;
use crate::{Error, Result};

/// A partition of `{0..n-1}` into `P` nonempty classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// The index classes, each sorted ascending.
    pub classes: Vec<Vec<usize>>,
}

impl Partition {
    /// Number of classes `P`.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    /// True when there are no classes (never produced by the constructors).
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Parse the CLI literal syntax `"0,1|2,3"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut classes = Vec::new();
        for part in text.split('|') {
            let mut class = Vec::new();
            for tok in part.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let idx: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index {tok:?} in partition literal")))?;
                class.push(idx);
            }
            if class.is_empty() {
                return Err(Error::Parse("empty class in partition literal".into()));
            }
            class.sort_unstable();
            classes.push(class);
        }
        if classes.is_empty() {
            return Err(Error::Parse("empty partition literal".into()));
        }
        Ok(Partition { classes })
    }

    /// Render in the CLI literal syntax.
    pub fn to_literal(&self) -> String {
        self.classes
            .iter()
            .map(|c| c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Contiguous index blocks of size ⌈n/P⌉ or ⌊n/P⌋, in index order.
///
/// The first `n mod P` classes take the larger size, so class sizes never
/// differ by more than one and concatenating the classes yields `0..n`.
pub fn partition_uniform(n: usize, p: usize) -> Result<Partition> {
    if p < 1 || p > n {
        return Err(Error::InvalidArgument(format!("class count P = {p} must satisfy 1 ≤ P ≤ n = {n}")));
    }
    let base = n / p;
    let extra = n % p;
    let mut classes = Vec::with_capacity(p);
    let mut next = 0;
    for k in 0..p {
        let size = base + usize::from(k < extra);
        classes.push((next..next + size).collect());
        next += size;
    }
    Ok(Partition { classes })
}

/// Group variables with similar constraint impact into the same class.
///
/// Variables are sorted (descending) by the key
/// `max over all disjunct constraints of |a| + |q|·(box span)` — the largest
/// swing the variable can contribute to any constraint — with ties broken by
/// index, then cut into `P` classes of near-equal size.
pub fn partition_by_coefficient(
    d: &Disjunction,
    p: usize,
    lower: &[f64],
    upper: &[f64],
) -> Result<Partition> {
    let n = lower.len();
    if p < 1 || p > n {
        return Err(Error::InvalidArgument(format!("class count P = {p} must satisfy 1 ≤ P ≤ n = {n}")));
    }
    let mut key = vec![0.0_f64; n];
    for disjunct in &d.disjuncts {
        for c in &disjunct.constraints {
            for t in &c.lhs.terms {
                if t.var_index < n {
                    let span = upper[t.var_index] - lower[t.var_index];
                    let k = t.lin_coeff.abs() + t.quad_coeff.abs() * span;
                    if k > key[t.var_index] {
                        key[t.var_index] = k;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key[b].partial_cmp(&key[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let base = n / p;
    let extra = n % p;
    let mut classes = Vec::with_capacity(p);
    let mut next = 0;
    for k in 0..p {
        let size = base + usize::from(k < extra);
        let mut class: Vec<usize> = order[next..next + size].to_vec();
        class.sort_unstable();
        classes.push(class);
        next += size;
    }
    Ok(Partition { classes })
}

/// Check that `p` covers `{0..n-1}` with pairwise-disjoint nonempty classes.
pub fn validate_partition(p: &Partition, n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for (ci, class) in p.classes.iter().enumerate() {
        if class.is_empty() {
            return Err(Error::InvalidArgument(format!("class {ci} is empty")));
        }
        for &i in class {
            if i >= n {
                return Err(Error::InvalidArgument(format!("class {ci} contains index {i} ≥ n = {n}")));
            }
            if seen[i] {
                return Err(Error::InvalidArgument(format!("index {i} appears in more than one class")));
            }
            seen[i] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidArgument(format!("index {missing} is not covered by any class")));
    }
    Ok(())
}

/// A refinement chain of contiguous partitions obtained by repeatedly
/// halving every class: P = 1, 2, 4, … up to singletons.
///
/// Each partition in the chain refines the previous one, which is the
/// premise of the relaxation-hierarchy guarantees; plain uniform partitions
/// of increasing P do not refine each other in general.
pub fn halving_chain(n: usize) -> Vec<Partition> {
    let mut chain = vec![Partition { classes: vec![(0..n).collect()] }];
    loop {
        let last = chain.last().unwrap();
        if last.classes.iter().all(|c| c.len() == 1) {
            break;
        }
        let mut classes = Vec::new();
        for class in &last.classes {
            if class.len() == 1 {
                classes.push(class.clone());
            } else {
                let mid = class.len().div_ceil(2);
                classes.push(class[..mid].to_vec());
                classes.push(class[mid..].to_vec());
            }
        }
        chain.push(Partition { classes });
    }
    chain
}
