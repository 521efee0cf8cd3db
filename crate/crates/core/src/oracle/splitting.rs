use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{CrsError, Result};
use crate::graph::{EdgeId, EdgeSet, FractionalPoint, Multigraph};
use crate::rng::RngStream;

/// A graph in which one edge was replaced by `k` parallel siblings sharing its value.
#[derive(Clone, Debug)]
pub struct SplitInstance {
    pub graph: Multigraph,
    pub x: FractionalPoint,
    /// The original edge first, then the `k − 1` new ids.
    pub siblings: Vec<EdgeId>,
}

pub fn split_edge(
    g: &Multigraph,
    x: &FractionalPoint,
    e: EdgeId,
    k: usize,
) -> Result<SplitInstance> {
    x.check_graph(g)?;
    g.check_edge(e)?;
    if k == 0 {
        return Err(CrsError::parameter("split count must be at least 1"));
    }
    let m = g.edge_count();
    let edge = g.edge(e);
    let endpoints = g
        .edges()
        .iter()
        .map(|f| (f.u, f.v))
        .chain(std::iter::repeat((edge.u, edge.v)).take(k - 1));
    let graph = Multigraph::new(g.vertex_count(), endpoints)?;
    let share = x.get(e) / k as f64;
    let mut values = x.values().to_vec();
    values[e] = share;
    values.extend(std::iter::repeat(share).take(k - 1));
    let siblings = std::iter::once(e).chain(m..m + k - 1).collect();
    Ok(SplitInstance {
        graph,
        x: FractionalPoint::new(values)?,
        siblings,
    })
}

/// Exact law of the random sibling set `D`, as `(mask over sibling positions, probability)`
/// for all `2^k` subsets. Nonempty `J` get `(1/x_e)(x_e/k)^{|J|}(1 − x_e/k)^{k−|J|}`;
/// the empty set carries the remaining mass.
pub fn sibling_lift_law(x_e: &BigRational, k: usize) -> Result<Vec<(u32, BigRational)>> {
    if x_e <= &BigRational::zero() || x_e > &BigRational::one() {
        return Err(CrsError::parameter("sibling lift needs 0 < x_e ≤ 1"));
    }
    if k == 0 || k > 16 {
        return Err(CrsError::parameter("sibling lift law supports 1 ≤ k ≤ 16"));
    }
    let p = x_e / BigRational::from_integer(BigInt::from(k));
    let q = BigRational::one() - &p;
    let mut law = Vec::with_capacity(1 << k);
    let mut nonempty = BigRational::zero();
    for mask in 1u32..(1u32 << k) {
        let j = mask.count_ones() as usize;
        let mut w = BigRational::one() / x_e;
        for _ in 0..j {
            w *= &p;
        }
        for _ in j..k {
            w *= &q;
        }
        nonempty += &w;
        law.push((mask, w));
    }
    law.insert(0, (0, BigRational::one() - nonempty));
    Ok(law)
}

/// Lifts `a` to the split graph, replacing `e` (if present) by a random sibling set `D`.
pub fn sibling_lift(
    a: &EdgeSet,
    split: &SplitInstance,
    x_e: f64,
    r: &mut RngStream,
) -> Result<EdgeSet> {
    if !(x_e > 0.0 && x_e <= 1.0) {
        return Err(CrsError::parameter("sibling lift needs 0 < x_e ≤ 1"));
    }
    let k = split.siblings.len();
    let e = split.siblings[0];
    let mut out = EdgeSet::empty(split.graph.edge_count());
    for f in a.iter() {
        if f != e {
            out.insert(f);
        }
    }
    if !a.contains(e) {
        return Ok(out);
    }
    let p = x_e / k as f64;
    let none = (1.0 - p).powi(k as i32);
    if !r.bernoulli((1.0 - none) / x_e) {
        return Ok(out);
    }
    // First present sibling, conditioned on at least one, then the rest independently.
    let mut u = r.uniform() * (1.0 - none);
    let mut first = k - 1;
    let mut mass = p;
    for i in 0..k {
        if u < mass {
            first = i;
            break;
        }
        u -= mass;
        mass *= 1.0 - p;
    }
    out.insert(split.siblings[first]);
    for &s in &split.siblings[first + 1..] {
        if r.bernoulli(p) {
            out.insert(s);
        }
    }
    Ok(out)
}
