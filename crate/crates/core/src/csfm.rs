//! A small constrained submodular maximization pipeline over matchings:
//! set-function oracles, multilinear estimates, continuous greedy and rounding.

use std::fmt;
use std::str::FromStr;

use crate::error::{CrsError, Result};
use crate::graph::{EdgeId, EdgeSet, FractionalPoint, Multigraph};
use crate::mc::run_trials;
use crate::rng::{independent_round, RngStream};
use crate::sampler::{resolve_procedure, Matching};
use crate::schemes::Procedure;

/// Largest ground set accepted by the exhaustive property checks.
pub const MAX_EXHAUSTIVE_GROUND_SET: usize = 10;
/// Largest non-bipartite edge count accepted by [`max_weight_matching`].
pub const MAX_GENERAL_MATCHING_EDGES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Modular,
    Coverage,
    Cut,
}

impl FromStr for OracleKind {
    type Err = CrsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "modular" => Ok(OracleKind::Modular),
            "coverage" => Ok(OracleKind::Coverage),
            "cut" => Ok(OracleKind::Cut),
            other => Err(CrsError::input(format!("unknown function kind '{other}'"))),
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Modular => "modular",
            OracleKind::Coverage => "coverage",
            OracleKind::Cut => "cut",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum OracleData {
    /// `f(S) = Σ_{e∈S} w_e`.
    Modular(Vec<f64>),
    /// `f(S) = Σ_{i ∈ ∪_{e∈S} covers_e} item_weight_i`.
    Coverage {
        covers: Vec<Vec<usize>>,
        item_weights: Vec<f64>,
    },
    /// `f(S) = Σ w_ij` over pairs `{i, j}` with exactly one element in `S`.
    Cut(Vec<(usize, usize, f64)>),
}

/// A nonnegative set function on edge ids `0..ground_size`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmodularOracle {
    ground_size: usize,
    data: OracleData,
}

fn check_weight(w: f64, what: &str) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(CrsError::input(format!(
            "{what} must be finite and nonnegative, got {w}"
        )))
    }
}

impl SubmodularOracle {
    pub fn modular(weights: Vec<f64>) -> Result<Self> {
        for &w in &weights {
            check_weight(w, "modular weight")?;
        }
        Ok(SubmodularOracle {
            ground_size: weights.len(),
            data: OracleData::Modular(weights),
        })
    }

    pub fn coverage(covers: Vec<Vec<usize>>, item_weights: Vec<f64>) -> Result<Self> {
        for &w in &item_weights {
            check_weight(w, "item weight")?;
        }
        if let Some(&i) = covers.iter().flatten().find(|&&i| i >= item_weights.len()) {
            return Err(CrsError::input(format!("covered item {i} out of range")));
        }
        Ok(SubmodularOracle {
            ground_size: covers.len(),
            data: OracleData::Coverage {
                covers,
                item_weights,
            },
        })
    }

    pub fn cut(ground_size: usize, pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, w) in &pairs {
            check_weight(w, "cut weight")?;
            if i >= ground_size || j >= ground_size || i == j {
                return Err(CrsError::input(format!("invalid cut pair ({i}, {j})")));
            }
        }
        Ok(SubmodularOracle {
            ground_size,
            data: OracleData::Cut(pairs),
        })
    }

    /// Random instance of the given kind on `m` elements, reproducible from `r`.
    pub fn random(kind: OracleKind, m: usize, r: &mut RngStream) -> Result<Self> {
        match kind {
            OracleKind::Modular => Self::modular((0..m).map(|_| r.uniform()).collect()),
            OracleKind::Coverage => {
                let items = (2 * m).max(1);
                let item_weights: Vec<f64> = (0..items).map(|_| 0.5 + r.uniform()).collect();
                let covers = (0..m)
                    .map(|_| {
                        let mut c: Vec<usize> = (0..items).filter(|_| r.bernoulli(0.3)).collect();
                        if c.is_empty() {
                            c.push(r.index(items));
                        }
                        c
                    })
                    .collect();
                Self::coverage(covers, item_weights)
            }
            OracleKind::Cut => {
                let mut pairs = Vec::new();
                for i in 0..m {
                    for j in i + 1..m {
                        if r.bernoulli(0.5) {
                            pairs.push((i, j, r.uniform()));
                        }
                    }
                }
                Self::cut(m, pairs)
            }
        }
    }

    pub fn kind(&self) -> OracleKind {
        match self.data {
            OracleData::Modular(_) => OracleKind::Modular,
            OracleData::Coverage { .. } => OracleKind::Coverage,
            OracleData::Cut(_) => OracleKind::Cut,
        }
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    /// Modular and coverage functions are monotone; cut functions are not.
    pub fn is_monotone(&self) -> bool {
        self.kind() != OracleKind::Cut
    }

    /// `f(S)` for `S` given as a membership mask.
    pub fn evaluate_mask(&self, mask: &[bool]) -> f64 {
        match &self.data {
            OracleData::Modular(w) => w.iter().zip(mask).filter(|(_, &b)| b).map(|(w, _)| w).sum(),
            OracleData::Coverage {
                covers,
                item_weights,
            } => {
                let mut hit = vec![false; item_weights.len()];
                for (e, c) in covers.iter().enumerate() {
                    if mask.get(e).copied().unwrap_or(false) {
                        for &i in c {
                            hit[i] = true;
                        }
                    }
                }
                hit.iter()
                    .zip(item_weights)
                    .filter(|(&h, _)| h)
                    .map(|(_, w)| w)
                    .sum()
            }
            OracleData::Cut(pairs) => pairs
                .iter()
                .filter(|&&(i, j, _)| mask[i] != mask[j])
                .map(|&(_, _, w)| w)
                .sum(),
        }
    }

    pub fn evaluate(&self, s: &EdgeSet) -> Result<f64> {
        self.check_len(s.universe())?;
        Ok(self.evaluate_mask(s.mask()))
    }

    pub fn evaluate_ids(&self, ids: &[EdgeId]) -> Result<f64> {
        let s = EdgeSet::from_ids(self.ground_size, ids)?;
        Ok(self.evaluate_mask(s.mask()))
    }

    fn check_len(&self, m: usize) -> Result<()> {
        if m == self.ground_size {
            Ok(())
        } else {
            Err(CrsError::input(format!(
                "set over {m} elements does not match a ground set of {}",
                self.ground_size
            )))
        }
    }

    fn exhaustive_values(&self) -> Result<Vec<f64>> {
        let m = self.ground_size;
        if m > MAX_EXHAUSTIVE_GROUND_SET {
            return Err(CrsError::capability(format!(
                "exhaustive checks support at most {MAX_EXHAUSTIVE_GROUND_SET} elements, got {m}"
            )));
        }
        Ok((0u32..1 << m)
            .map(|s| {
                let mask: Vec<bool> = (0..m).map(|e| s >> e & 1 == 1).collect();
                self.evaluate_mask(&mask)
            })
            .collect())
    }

    /// `f(S + e) - f(S) ≥ f(T + e) - f(T)` for all `S ⊆ T`, `e ∉ T`.
    pub fn check_submodular_exhaustive(&self, tol: f64) -> Result<bool> {
        let v = self.exhaustive_values()?;
        let m = self.ground_size;
        let full = (1usize << m) - 1;
        for t in 0..=full {
            let mut s = t;
            loop {
                for e in (0..m).filter(|&e| t >> e & 1 == 0) {
                    let bit = 1 << e;
                    if v[s | bit] - v[s] < v[t | bit] - v[t] - tol {
                        return Ok(false);
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
        Ok(true)
    }

    /// `f(S) ≤ f(S + e)` for all `S`, `e`.
    pub fn check_monotone_exhaustive(&self, tol: f64) -> Result<bool> {
        let v = self.exhaustive_values()?;
        let m = self.ground_size;
        Ok((0..v.len()).all(|s| (0..m).all(|e| v[s | 1 << e] >= v[s] - tol)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultilinearEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Monte Carlo estimate of `E[f(R(x))]`.
pub fn multilinear_estimate(
    f: &SubmodularOracle,
    x: &FractionalPoint,
    samples: u64,
    r: &RngStream,
) -> Result<MultilinearEstimate> {
    f.check_len(x.len())?;
    if samples == 0 {
        return Err(CrsError::parameter("at least one sample is required"));
    }
    let mom = run_trials(samples, r, 1, |rs, out| {
        out[0] = f.evaluate_mask(independent_round(x, rs).mask());
        Ok(())
    })?;
    Ok(MultilinearEstimate {
        value: mom.mean(0),
        stderr: mom.std_error(0),
        samples,
    })
}

/// Maximum-weight matching. Bipartite graphs of any size use successive shortest paths;
/// other graphs are searched exhaustively.
pub fn max_weight_matching(g: &Multigraph, weights: &[f64]) -> Result<Matching> {
    if weights.len() != g.edge_count() {
        return Err(CrsError::input(
            "weight vector length does not match the graph",
        ));
    }
    if weights.iter().any(|w| w.is_nan()) {
        return Err(CrsError::input("weights must not be NaN"));
    }
    match g.two_coloring() {
        Some(sides) => Ok(bipartite_max_weight(g, &sides, weights)),
        None => {
            if g.edge_count() > MAX_GENERAL_MATCHING_EDGES {
                return Err(CrsError::capability(format!(
                    "non-bipartite max-weight matching supports at most \
                     {MAX_GENERAL_MATCHING_EDGES} edges, got {}",
                    g.edge_count()
                )));
            }
            Ok(brute_force_max_weight(g, weights))
        }
    }
}

fn brute_force_max_weight(g: &Multigraph, weights: &[f64]) -> Matching {
    fn rec(
        i: usize,
        g: &Multigraph,
        w: &[f64],
        used: &mut [bool],
        cur: &mut Vec<EdgeId>,
        val: f64,
        best: &mut (f64, Matching),
    ) {
        if i == w.len() {
            if val > best.0 {
                *best = (val, cur.clone());
            }
            return;
        }
        rec(i + 1, g, w, used, cur, val, best);
        let e = g.edge(i);
        if w[i] > 0.0 && !used[e.u] && !used[e.v] {
            used[e.u] = true;
            used[e.v] = true;
            cur.push(i);
            rec(i + 1, g, w, used, cur, val + w[i], best);
            cur.pop();
            used[e.u] = false;
            used[e.v] = false;
        }
    }
    let mut best = (0.0, Vec::new());
    let mut used = vec![false; g.vertex_count()];
    rec(0, g, weights, &mut used, &mut Vec::new(), 0.0, &mut best);
    best.1
}

/// Min-cost flow with Bellman-Ford shortest paths; stops once no augmenting path gains.
fn bipartite_max_weight(g: &Multigraph, sides: &[bool], weights: &[f64]) -> Matching {
    struct Arc {
        to: usize,
        cap: i32,
        cost: f64,
        edge: Option<EdgeId>,
    }
    let n = g.vertex_count();
    let (source, sink) = (n, n + 1);
    let mut arcs: Vec<Arc> = Vec::new();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    let mut add = |arcs: &mut Vec<Arc>, a: usize, b: usize, cost: f64, edge: Option<EdgeId>| {
        out[a].push(arcs.len());
        arcs.push(Arc {
            to: b,
            cap: 1,
            cost,
            edge,
        });
        out[b].push(arcs.len());
        arcs.push(Arc {
            to: a,
            cap: 0,
            cost: -cost,
            edge: None,
        });
    };
    // Keep only the heaviest edge of each parallel class.
    let mut best_in_class: Vec<Option<EdgeId>> = vec![None; g.parallel_class_count()];
    for (e, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            let c = g.parallel_class(e);
            if best_in_class[c].is_none_or(|b| weights[b] < w) {
                best_in_class[c] = Some(e);
            }
        }
    }
    for e in best_in_class.into_iter().flatten() {
        let edge = g.edge(e);
        let (l, rr) = if sides[edge.u] {
            (edge.u, edge.v)
        } else {
            (edge.v, edge.u)
        };
        add(&mut arcs, l, rr, -weights[e], Some(e));
    }
    for v in 0..n {
        if sides[v] {
            add(&mut arcs, source, v, 0.0, None);
        } else {
            add(&mut arcs, v, sink, 0.0, None);
        }
    }
    loop {
        let mut dist = vec![f64::INFINITY; n + 2];
        let mut via: Vec<Option<usize>> = vec![None; n + 2];
        dist[source] = 0.0;
        for _ in 0..n + 2 {
            let mut changed = false;
            for a in 0..n + 2 {
                if dist[a].is_infinite() {
                    continue;
                }
                for &i in &out[a] {
                    let arc = &arcs[i];
                    if arc.cap > 0 && dist[a] + arc.cost < dist[arc.to] - 1e-12 {
                        dist[arc.to] = dist[a] + arc.cost;
                        via[arc.to] = Some(i);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !(dist[sink] < -1e-12) {
            break;
        }
        let mut v = sink;
        while let Some(i) = via[v] {
            arcs[i].cap -= 1;
            arcs[i ^ 1].cap += 1;
            v = arcs[i ^ 1].to;
        }
    }
    let mut m: Matching = arcs
        .iter()
        .filter(|a| a.cap == 0)
        .filter_map(|a| a.edge)
        .collect();
    m.sort_unstable();
    m
}

/// Continuous greedy over `b · P_matching(g)` for a monotone oracle.
///
/// Each of `steps` rounds estimates `E[f(R ∪ e) − f(R ∖ e)]` at the current point from
/// `samples` shared roundings and moves `b / steps` along a max-weight matching.
pub fn continuous_greedy(
    f: &SubmodularOracle,
    g: &Multigraph,
    b: f64,
    steps: u32,
    samples: u64,
    r: &RngStream,
) -> Result<FractionalPoint> {
    let m = g.edge_count();
    f.check_len(m)?;
    if !f.is_monotone() {
        return Err(CrsError::capability(
            "continuous greedy supports monotone functions only",
        ));
    }
    if steps < 10 {
        return Err(CrsError::parameter(format!(
            "steps must be at least 10, got {steps}"
        )));
    }
    if !(b > 0.0 && b <= 1.0) {
        return Err(CrsError::parameter(format!(
            "b must lie in (0, 1], got {b}"
        )));
    }
    if samples == 0 {
        return Err(CrsError::parameter("at least one sample is required"));
    }
    let mut counts = vec![0u32; m];
    let mut x = FractionalPoint::zeros(m);
    for step in 0..steps {
        let base = r.derive(u64::from(step));
        let grad = run_trials(samples, &base, m, |rs, out| {
            let mut mask = independent_round(&x, rs).mask().to_vec();
            for (e, o) in out.iter_mut().enumerate() {
                let had = mask[e];
                mask[e] = true;
                let with = f.evaluate_mask(&mask);
                mask[e] = false;
                let without = f.evaluate_mask(&mask);
                mask[e] = had;
                *o = with - without;
            }
            Ok(())
        })?;
        let w: Vec<f64> = (0..m).map(|e| grad.mean(e)).collect();
        for e in max_weight_matching(g, &w)? {
            counts[e] += 1;
        }
        x = FractionalPoint::new(
            counts
                .iter()
                .map(|&c| (f64::from(c) * b / f64::from(steps)).min(1.0))
                .collect(),
        )?;
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundingEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Mean of `f` on the matching produced by `procedure` from `x`, over `trials` runs.
pub fn round_and_evaluate(
    f: &SubmodularOracle,
    g: &Multigraph,
    x: &FractionalPoint,
    procedure: Procedure,
    trials: u64,
    r: &RngStream,
) -> Result<RoundingEstimate> {
    f.check_len(g.edge_count())?;
    x.check_graph(g)?;
    if trials == 0 {
        return Err(CrsError::parameter("at least one trial is required"));
    }
    let mom = run_trials(trials, r, 1, |rs, out| {
        let m = resolve_procedure(procedure, g, x, rs)?;
        out[0] = f.evaluate_ids(&m)?;
        Ok(())
    })?;
    Ok(RoundingEstimate {
        mean: mom.mean(0),
        stderr: mom.std_error(0),
        trials,
    })
}

/// `max f(M)` over all matchings `M`, by enumeration.
pub fn brute_force_opt(f: &SubmodularOracle, g: &Multigraph) -> Result<(f64, Matching)> {
    f.check_len(g.edge_count())?;
    if g.edge_count() > MAX_GENERAL_MATCHING_EDGES + 4 {
        return Err(CrsError::capability(format!(
            "brute-force optimum supports at most {} edges",
            MAX_GENERAL_MATCHING_EDGES + 4
        )));
    }
    fn rec(
        i: usize,
        g: &Multigraph,
        f: &SubmodularOracle,
        used: &mut [bool],
        mask: &mut [bool],
        best: &mut (f64, Matching),
    ) {
        if i == mask.len() {
            let v = f.evaluate_mask(mask);
            if v > best.0 {
                *best = (v, (0..mask.len()).filter(|&e| mask[e]).collect());
            }
            return;
        }
        rec(i + 1, g, f, used, mask, best);
        let e = g.edge(i);
        if !used[e.u] && !used[e.v] {
            used[e.u] = true;
            used[e.v] = true;
            mask[i] = true;
            rec(i + 1, g, f, used, mask, best);
            mask[i] = false;
            used[e.u] = false;
            used[e.v] = false;
        }
    }
    let mut best = (f.evaluate_mask(&vec![false; g.edge_count()]), Vec::new());
    let mut used = vec![false; g.vertex_count()];
    let mut mask = vec![false; g.edge_count()];
    rec(0, g, f, &mut used, &mut mask, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k33() -> Multigraph {
        Multigraph::new(6, (0..3).flat_map(|i| (3..6).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn kinds_and_properties() {
        let mut r = RngStream::new(1, 0);
        for kind in [OracleKind::Modular, OracleKind::Coverage, OracleKind::Cut] {
            let f = SubmodularOracle::random(kind, 7, &mut r).unwrap();
            assert_eq!(f.kind(), kind);
            assert!(f.check_submodular_exhaustive(1e-12).unwrap());
            assert_eq!(f.check_monotone_exhaustive(1e-12).unwrap(), f.is_monotone());
        }
        let big = SubmodularOracle::modular(vec![1.0; 11]).unwrap();
        assert!(matches!(
            big.check_submodular_exhaustive(0.0),
            Err(CrsError::Capability(_))
        ));
    }

    #[test]
    fn integral_point_has_zero_variance() {
        let f = SubmodularOracle::modular(vec![1.0, 2.0, 4.0]).unwrap();
        let x = FractionalPoint::new(vec![1.0, 0.0, 1.0]).unwrap();
        let est = multilinear_estimate(&f, &x, 100, &RngStream::new(3, 0)).unwrap();
        assert_eq!(est.value, 5.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn matching_basics() {
        let g = k33();
        let m = max_weight_matching(&g, &[1.0; 9]).unwrap();
        assert_eq!(m.len(), 3);
        assert!(max_weight_matching(&g, &[-1.0; 9]).unwrap().is_empty());
        let tri = Multigraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(
            max_weight_matching(&tri, &[1.0, 3.0, 2.0]).unwrap(),
            vec![1]
        );
    }

    #[test]
    fn greedy_single_edge_reaches_b() {
        let g = Multigraph::new(2, [(0, 1)]).unwrap();
        let f = SubmodularOracle::modular(vec![1.0]).unwrap();
        let x = continuous_greedy(&f, &g, 0.7, 20, 10, &RngStream::new(0, 0)).unwrap();
        assert!((x.get(0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn greedy_rejects_cut_and_few_steps() {
        let g = Multigraph::new(2, [(0, 1)]).unwrap();
        let cut = SubmodularOracle::cut(1, vec![]).unwrap();
        let r = RngStream::new(0, 0);
        assert!(matches!(
            continuous_greedy(&cut, &g, 1.0, 10, 10, &r),
            Err(CrsError::Capability(_))
        ));
        let f = SubmodularOracle::modular(vec![1.0]).unwrap();
        assert!(matches!(
            continuous_greedy(&f, &g, 1.0, 9, 10, &r),
            Err(CrsError::Parameter(_))
        ));
    }
}
