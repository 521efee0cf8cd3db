//! Enumeration-based ground truth for expected marginals, balancedness and monotonicity.

mod distribution;
mod dominance;
mod path_event;
mod splitting;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

pub use distribution::{TruncatedDistribution, DEFAULT_TAIL};
pub use dominance::{check_stochastic_dominance, DominanceReport};
pub use path_event::{greedy_partition, path_event_probability, PathEventEstimate};
pub use splitting::{sibling_lift, sibling_lift_law, split_edge, SplitInstance};

use crate::error::{CrsError, Result};
use crate::graph::{EdgeId, EdgeSet, FractionalPoint, Multigraph};
use crate::rng::{keep_probability, RngStream};
use crate::schemes::{MarginalVector, SchemeKind};

/// Largest `|a|` accepted by [`exact_expected_marginals`].
pub const MAX_EXACT_SET: usize = 12;
/// Largest `|supp(x)|` accepted by [`exact_balancedness`].
pub const MAX_EXACT_SUPPORT: usize = 12;
/// Largest `|supp(x)|` for exhaustive monotonicity.
pub const MAX_MONOTONICITY_SUPPORT: usize = 10;
const MAX_COLORING_VERTICES: usize = 20;
const MONOTONICITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeBalance {
    pub edge: EdgeId,
    pub value: f64,
    /// 99% confidence half-width; absent for exact values.
    pub half_width: Option<f64>,
    pub std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancednessReport {
    pub edges: Vec<EdgeBalance>,
    pub min: f64,
    pub min_edge: Option<EdgeId>,
    pub mode: EstimateMode,
    /// Certified bound on truncation error (exact mode).
    pub error_bound: f64,
    pub trials: Option<u64>,
}

impl BalancednessReport {
    pub fn exact(edges: Vec<(EdgeId, f64)>, error_bound: f64) -> Self {
        Self::build(
            edges
                .into_iter()
                .map(|(edge, value)| EdgeBalance {
                    edge,
                    value,
                    half_width: None,
                    std_error: None,
                })
                .collect(),
            EstimateMode::Exact,
            error_bound,
            None,
        )
    }

    pub(crate) fn build(
        edges: Vec<EdgeBalance>,
        mode: EstimateMode,
        error_bound: f64,
        trials: Option<u64>,
    ) -> Self {
        let (min, min_edge) = edges.iter().fold((f64::INFINITY, None), |(m, id), b| {
            if b.value < m {
                (b.value, Some(b.edge))
            } else {
                (m, id)
            }
        });
        BalancednessReport {
            min: if min_edge.is_some() { min } else { 1.0 },
            min_edge,
            edges,
            mode,
            error_bound,
            trials,
        }
    }

    pub fn value(&self, e: EdgeId) -> Option<f64> {
        self.edges.iter().find(|b| b.edge == e).map(|b| b.value)
    }

    pub fn entry(&self, e: EdgeId) -> Option<&EdgeBalance> {
        self.edges.iter().find(|b| b.edge == e)
    }
}

fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut s = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = s;
        if s == 0 {
            done = true;
        } else {
            s = (s - 1) & mask;
        }
        Some(cur)
    })
}

#[derive(Clone, Copy)]
enum Formula {
    Max,
    Sum,
    Mixed,
}

/// Exact expectations over a fixed universe of at most 16 edges, indexed by bit position.
pub struct ExactOracle<'a> {
    kind: SchemeKind,
    g: &'a Multigraph,
    universe: Vec<EdgeId>,
    xs: Vec<f64>,
    group_cache: HashMap<u32, TruncatedDistribution>,
    m_cache: HashMap<u32, Vec<f64>>,
    bip_cache: HashMap<u32, Vec<f64>>,
    cross_law: Option<Vec<(u32, f64)>>,
    error_bound: f64,
}

impl<'a> ExactOracle<'a> {
    pub fn new(
        kind: SchemeKind,
        g: &'a Multigraph,
        x: &FractionalPoint,
        universe: Vec<EdgeId>,
    ) -> Result<Self> {
        x.check_graph(g)?;
        if universe.len() > 16 {
            return Err(CrsError::capability(
                "exact oracle supports at most 16 edges",
            ));
        }
        for &e in &universe {
            g.check_edge(e)?;
            if x.get(e) <= 0.0 {
                return Err(CrsError::input(format!("edge {e} is not in supp(x)")));
            }
        }
        if kind.requires_bipartite() && !g.is_bipartite() {
            return Err(CrsError::capability("scheme requires a bipartite graph"));
        }
        let xs = universe.iter().map(|&e| x.get(e)).collect();
        Ok(ExactOracle {
            kind,
            g,
            universe,
            xs,
            group_cache: HashMap::new(),
            m_cache: HashMap::new(),
            bip_cache: HashMap::new(),
            cross_law: None,
            error_bound: 0.0,
        })
    }

    pub fn universe(&self) -> &[EdgeId] {
        &self.universe
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.universe.len()) - 1) as u32
    }

    pub fn mask_of(&self, set: &EdgeSet) -> Result<u32> {
        let mut mask = 0u32;
        for e in set.iter() {
            let i =
                self.universe.iter().position(|&f| f == e).ok_or_else(|| {
                    CrsError::input(format!("edge {e} outside the oracle universe"))
                })?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    /// Certified truncation error accumulated so far.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    fn bits(&self, mask: u32) -> impl Iterator<Item = usize> {
        (0..self.universe.len()).filter(move |&i| mask & (1 << i) != 0)
    }

    fn group_law(&mut self, mask: u32) -> TruncatedDistribution {
        if let Some(d) = self.group_cache.get(&mask) {
            return d.clone();
        }
        let mut law = TruncatedDistribution::point(0);
        for i in self.bits(mask).collect::<Vec<_>>() {
            let d = TruncatedDistribution::poisson_geq1_with_tail(self.xs[i], DEFAULT_TAIL);
            law = law.convolve(&d).trim(1e-16);
        }
        self.group_cache.insert(mask, law.clone());
        law
    }

    /// Counts `|δ(u) ∩ S|`-style neighbor sets as masks: (at u only, at v only, parallel to e).
    fn split_masks(&self, s: u32, i: usize) -> (u32, u32, u32) {
        let e = self.universe[i];
        let edge = self.g.edge(e);
        let (mut a, mut b, mut c) = (0u32, 0u32, 0u32);
        for j in self.bits(s) {
            if j == i {
                continue;
            }
            let f = self.universe[j];
            if self.g.are_parallel(e, f) {
                c |= 1 << j;
            } else {
                let fe = self.g.edge(f);
                if fe.touches(edge.u) {
                    a |= 1 << j;
                } else if fe.touches(edge.v) {
                    b |= 1 << j;
                }
            }
        }
        (a, b, c)
    }

    fn bipartite_positions(&self, s: u32) -> u32 {
        let mut active = vec![false; self.g.edge_count()];
        for i in self.bits(s) {
            active[self.universe[i]] = true;
        }
        let mask = self.g.bipartite_edge_mask(&active);
        self.bits(s)
            .filter(|&i| mask[self.universe[i]])
            .fold(0u32, |acc, i| acc | (1 << i))
    }

    /// `E[y | Ā = S]` for the intensity-based formulas.
    fn conditional(&mut self, s: u32, formula: Formula) -> Vec<f64> {
        let n = self.universe.len();
        let mut out = vec![0.0; n];
        let bip = match formula {
            Formula::Mixed => self.bipartite_positions(s),
            Formula::Max => s,
            Formula::Sum => 0,
        };
        for i in self.bits(s).collect::<Vec<_>>() {
            let (a, b, c) = self.split_masks(s, i);
            let la = self.group_law(a);
            let lb = self.group_law(b);
            let lc = self.group_law(c);
            let rest = if bip & (1 << i) != 0 {
                lc.convolve(&la.max_with(&lb))
            } else {
                lc.convolve(&la).convolve(&lb)
            };
            let own = TruncatedDistribution::poisson_geq1_with_tail(self.xs[i], DEFAULT_TAIL);
            let mut v = 0.0;
            for (k, &pk) in own.probs().iter().enumerate().skip(1) {
                for (m, &pm) in rest.probs().iter().enumerate() {
                    v += pk * pm * k as f64 / (k + m) as f64;
                }
            }
            self.error_bound = self.error_bound.max(own.tail() + rest.tail());
            out[i] = v;
        }
        out
    }

    fn m(&mut self, s: u32) -> Vec<f64> {
        if let Some(v) = self.m_cache.get(&s) {
            return v.clone();
        }
        let v = match self.kind {
            SchemeKind::BipPoisson | SchemeKind::RefBipartition => {
                self.conditional(s, Formula::Max)
            }
            SchemeKind::GenPoisson => self.conditional(s, Formula::Sum),
            SchemeKind::Mixed => self.conditional(s, Formula::Mixed),
            SchemeKind::RefScaledTwoThirds => self
                .conditional(s, Formula::Max)
                .into_iter()
                .map(|v| v * 2.0 / 3.0)
                .collect(),
            _ => unreachable!("deterministic kinds have no survivor law"),
        };
        self.m_cache.insert(s, v.clone());
        v
    }

    /// `E[y^a]` where `a` is given by a mask; the subsampling step is averaged out.
    fn intensity_expected(&mut self, a: u32) -> Vec<f64> {
        let n = self.universe.len();
        let mut out = vec![0.0; n];
        let keep: Vec<f64> = self.xs.iter().map(|&x| keep_probability(x)).collect();
        for s in submasks(a) {
            let mut w = 1.0;
            for i in self.bits(a) {
                w *= if s & (1 << i) != 0 {
                    keep[i]
                } else {
                    1.0 - keep[i]
                };
            }
            if w == 0.0 {
                continue;
            }
            let m = self.m(s);
            for i in 0..n {
                out[i] += w * m[i];
            }
        }
        out
    }

    fn cross_law(&mut self) -> Result<Vec<(u32, f64)>> {
        if let Some(l) = &self.cross_law {
            return Ok(l.clone());
        }
        let mut verts: Vec<usize> = self
            .universe
            .iter()
            .flat_map(|&e| [self.g.edge(e).u, self.g.edge(e).v])
            .collect();
        verts.sort_unstable();
        verts.dedup();
        if verts.len() > MAX_COLORING_VERTICES {
            return Err(CrsError::capability(format!(
                "vertex-coloring enumeration supports at most {MAX_COLORING_VERTICES} vertices"
            )));
        }
        let ends: Vec<(usize, usize)> = self
            .universe
            .iter()
            .map(|&e| {
                let edge = self.g.edge(e);
                (
                    verts.binary_search(&edge.u).unwrap(),
                    verts.binary_search(&edge.v).unwrap(),
                )
            })
            .collect();
        let mut hist: HashMap<u32, u64> = HashMap::new();
        let t = verts.len();
        // Fixing the first vertex's side halves the work without changing the law.
        let colorings = if t == 0 { 1u64 } else { 1u64 << (t - 1) };
        for c in 0..colorings {
            let col = c << 1;
            let mut mask = 0u32;
            for (i, &(a, b)) in ends.iter().enumerate() {
                if ((col >> a) & 1) != ((col >> b) & 1) {
                    mask |= 1 << i;
                }
            }
            *hist.entry(mask).or_insert(0) += 1;
        }
        let mut law: Vec<(u32, f64)> = hist
            .into_iter()
            .map(|(m, c)| (m, c as f64 / colorings as f64))
            .collect();
        law.sort_unstable_by_key(|&(m, _)| m);
        self.cross_law = Some(law.clone());
        Ok(law)
    }

    fn bipartition_expected(&mut self, a: u32) -> Result<Vec<f64>> {
        let law = self.cross_law()?;
        let n = self.universe.len();
        let mut out = vec![0.0; n];
        for (t, p) in law {
            let b = a & t;
            let v = match self.bip_cache.get(&b) {
                Some(v) => v.clone(),
                None => {
                    let v = self.intensity_expected(b);
                    self.bip_cache.insert(b, v.clone());
                    v
                }
            };
            for i in 0..n {
                out[i] += p * v[i];
            }
        }
        Ok(out)
    }

    /// `E[y^a]` per universe position.
    pub fn expected_given(&mut self, a: u32) -> Result<Vec<f64>> {
        let n = self.universe.len();
        Ok(match self.kind {
            SchemeKind::BipSimple | SchemeKind::GenRandomOrder | SchemeKind::RefIsolated => {
                let mut out = vec![0.0; n];
                for i in self.bits(a) {
                    let e = self.universe[i];
                    let edge = self.g.edge(e);
                    let (mut du, mut dv, mut union) = (0usize, 0usize, 0usize);
                    for j in self.bits(a) {
                        let fe = self.g.edge(self.universe[j]);
                        let tu = fe.touches(edge.u);
                        let tv = fe.touches(edge.v);
                        du += tu as usize;
                        dv += tv as usize;
                        union += (tu || tv) as usize;
                    }
                    out[i] = match self.kind {
                        SchemeKind::BipSimple => 1.0 / du.max(dv) as f64,
                        SchemeKind::GenRandomOrder => 1.0 / union as f64,
                        _ => 0.5f64.powi(union as i32),
                    };
                }
                out
            }
            SchemeKind::RefBipartition => self.bipartition_expected(a)?,
            _ => self.intensity_expected(a),
        })
    }

    /// `E[y^{R(x)}_e] / x_e` per universe position, with `R(x)` ranging over the universe.
    pub fn balancedness(&mut self) -> Result<Vec<f64>> {
        let n = self.universe.len();
        let full = self.full_mask();
        let mut acc = vec![0.0; n];
        match self.kind {
            SchemeKind::BipPoisson
            | SchemeKind::GenPoisson
            | SchemeKind::Mixed
            | SchemeKind::RefScaledTwoThirds => {
                // Survivors of rounding then subsampling are independent with mass 1 − e^{−x}.
                let surv: Vec<f64> = self.xs.iter().map(|&x| -(-x).exp_m1()).collect();
                for s in submasks(full) {
                    let w: f64 = (0..n)
                        .map(|i| {
                            if s & (1 << i) != 0 {
                                surv[i]
                            } else {
                                1.0 - surv[i]
                            }
                        })
                        .product();
                    let m = self.m(s);
                    for i in 0..n {
                        acc[i] += w * m[i];
                    }
                }
            }
            SchemeKind::RefBipartition => {
                let surv: Vec<f64> = self.xs.iter().map(|&x| -(-x).exp_m1()).collect();
                for (t, p) in self.cross_law()? {
                    for s in submasks(t) {
                        let w: f64 = self
                            .bits(t)
                            .map(|i| {
                                if s & (1 << i) != 0 {
                                    surv[i]
                                } else {
                                    1.0 - surv[i]
                                }
                            })
                            .product();
                        let m = self.m(s);
                        for i in 0..n {
                            acc[i] += p * w * m[i];
                        }
                    }
                }
            }
            _ => {
                for r in submasks(full) {
                    let w: f64 = (0..n)
                        .map(|i| {
                            if r & (1 << i) != 0 {
                                self.xs[i]
                            } else {
                                1.0 - self.xs[i]
                            }
                        })
                        .product();
                    let y = self.expected_given(r)?;
                    for i in 0..n {
                        acc[i] += w * y[i];
                    }
                }
            }
        }
        Ok((0..n).map(|i| acc[i] / self.xs[i]).collect())
    }
}

/// Exact `E[y^a]` as a full-length marginal vector.
pub fn exact_expected_marginals(
    kind: SchemeKind,
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
) -> Result<MarginalVector> {
    if a.len() > MAX_EXACT_SET {
        return Err(CrsError::capability(format!(
            "exact marginals support |A| ≤ {MAX_EXACT_SET}"
        )));
    }
    let universe = a.ids();
    let mut oracle = ExactOracle::new(kind, g, x, universe.clone())?;
    let y = oracle.expected_given(oracle.full_mask())?;
    let mut out = vec![0.0; g.edge_count()];
    for (i, &e) in universe.iter().enumerate() {
        out[e] = y[i];
    }
    Ok(out)
}

/// Exact balancedness `E[y^{R(x)}_e] / x_e` for every `e ∈ supp(x)`.
pub fn exact_balancedness(
    kind: SchemeKind,
    g: &Multigraph,
    x: &FractionalPoint,
) -> Result<BalancednessReport> {
    let supp = x.support();
    if supp.len() > MAX_EXACT_SUPPORT {
        return Err(CrsError::capability(format!(
            "exact balancedness supports |supp(x)| ≤ {MAX_EXACT_SUPPORT}"
        )));
    }
    let mut oracle = ExactOracle::new(kind, g, x, supp.clone())?;
    let c = oracle.balancedness()?;
    let bound = oracle.error_bound() * supp.len().max(1) as f64;
    Ok(BalancednessReport::exact(
        supp.into_iter().zip(c).collect(),
        bound,
    ))
}

/// Exact rational balancedness for the kinds whose marginals are rational functions of `a`.
pub fn exact_balancedness_rational(
    kind: SchemeKind,
    g: &Multigraph,
    x: &[BigRational],
) -> Result<Vec<(EdgeId, BigRational)>> {
    if !matches!(
        kind,
        SchemeKind::BipSimple | SchemeKind::GenRandomOrder | SchemeKind::RefIsolated
    ) {
        return Err(CrsError::capability(format!(
            "rational mode is unavailable for {kind:?}"
        )));
    }
    if x.len() != g.edge_count() {
        return Err(CrsError::input("point length does not match the graph"));
    }
    if kind.requires_bipartite() && !g.is_bipartite() {
        return Err(CrsError::capability("scheme requires a bipartite graph"));
    }
    let one = BigRational::one();
    if x.iter().any(|v| v < &BigRational::zero() || v > &one) {
        return Err(CrsError::input("point entries must lie in [0, 1]"));
    }
    let supp: Vec<EdgeId> = (0..x.len()).filter(|&e| !x[e].is_zero()).collect();
    let n = supp.len();
    if n > MAX_EXACT_SUPPORT {
        return Err(CrsError::capability(format!(
            "exact balancedness supports |supp(x)| ≤ {MAX_EXACT_SUPPORT}"
        )));
    }
    let mut acc = vec![BigRational::zero(); n];
    for r in 0u32..(1u32 << n) {
        let mut w = BigRational::one();
        for (i, &e) in supp.iter().enumerate() {
            if r & (1 << i) != 0 {
                w *= &x[e];
            } else {
                w *= &one - &x[e];
            }
        }
        if w.is_zero() {
            continue;
        }
        for i in (0..n).filter(|&i| r & (1 << i) != 0) {
            let edge = g.edge(supp[i]);
            let (mut du, mut dv, mut union) = (0i64, 0i64, 0i64);
            for j in (0..n).filter(|&j| r & (1 << j) != 0) {
                let fe = g.edge(supp[j]);
                let tu = fe.touches(edge.u);
                let tv = fe.touches(edge.v);
                du += tu as i64;
                dv += tv as i64;
                union += (tu || tv) as i64;
            }
            let y = match kind {
                SchemeKind::BipSimple => {
                    BigRational::new(BigInt::from(1), BigInt::from(du.max(dv)))
                }
                SchemeKind::GenRandomOrder => {
                    BigRational::new(BigInt::from(1), BigInt::from(union))
                }
                _ => BigRational::new(BigInt::from(1), BigInt::from(2).pow(union as u32)),
            };
            acc[i] += &w * y;
        }
    }
    Ok(supp
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, &acc[i] / &x[e]))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub edge: EdgeId,
    pub smaller: Vec<EdgeId>,
    pub larger: Vec<EdgeId>,
    pub value_smaller: f64,
    pub value_larger: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MonotonicityOutcome {
    Pass { pairs_checked: u64 },
    Fail(MonotonicityViolation),
}

impl MonotonicityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, MonotonicityOutcome::Pass { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonotonicityMode {
    Exhaustive,
    /// Random `(e, A, B)` triples drawn from the given stream seed.
    Sampled {
        pairs: u64,
        seed: u64,
    },
}

/// Checks `f(A)_e ≥ f(B)_e` for `e ∈ A ⊆ B` over `n` positions; `f` returns values per position.
pub fn check_monotone_family<F>(
    universe: &[EdgeId],
    mode: MonotonicityMode,
    mut f: F,
) -> Result<MonotonicityOutcome>
where
    F: FnMut(u32) -> Result<Vec<f64>>,
{
    let n = universe.len();
    let ids = |mask: u32| -> Vec<EdgeId> {
        (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| universe[i])
            .collect()
    };
    let violation = |e: usize, a: u32, b: u32, ya: f64, yb: f64| {
        MonotonicityOutcome::Fail(MonotonicityViolation {
            edge: universe[e],
            smaller: ids(a),
            larger: ids(b),
            value_smaller: ya,
            value_larger: yb,
        })
    };
    match mode {
        MonotonicityMode::Exhaustive => {
            if n > MAX_MONOTONICITY_SUPPORT {
                return Err(CrsError::capability(format!(
                    "exhaustive monotonicity supports |supp(x)| ≤ {MAX_MONOTONICITY_SUPPORT}"
                )));
            }
            let full = ((1u64 << n) - 1) as u32;
            let table: Vec<Vec<f64>> = (0..=full).map(&mut f).collect::<Result<_>>()?;
            let mut pairs = 0u64;
            for b in 0..=full {
                for a in submasks(b) {
                    pairs += 1;
                    for e in (0..n).filter(|&e| a & (1 << e) != 0) {
                        if table[a as usize][e] < table[b as usize][e] - MONOTONICITY_TOL {
                            return Ok(violation(
                                e,
                                a,
                                b,
                                table[a as usize][e],
                                table[b as usize][e],
                            ));
                        }
                    }
                }
            }
            Ok(MonotonicityOutcome::Pass {
                pairs_checked: pairs,
            })
        }
        MonotonicityMode::Sampled { pairs, seed } => {
            if n > 16 || n == 0 {
                return Err(CrsError::capability(
                    "sampled monotonicity supports 1..=16 edges",
                ));
            }
            let mut r = RngStream::new(seed, 0);
            let mut cache: HashMap<u32, Vec<f64>> = HashMap::new();
            let mut get = |m: u32| -> Result<Vec<f64>> {
                if let Some(v) = cache.get(&m) {
                    return Ok(v.clone());
                }
                let v = f(m)?;
                cache.insert(m, v.clone());
                Ok(v)
            };
            for _ in 0..pairs {
                let e = r.index(n);
                let mut a = 1u32 << e;
                let mut b = a;
                for i in (0..n).filter(|&i| i != e) {
                    match r.index(3) {
                        0 => {}
                        1 => b |= 1 << i,
                        _ => {
                            a |= 1 << i;
                            b |= 1 << i;
                        }
                    }
                }
                let ya = get(a)?[e];
                let yb = get(b)?[e];
                if ya < yb - MONOTONICITY_TOL {
                    return Ok(violation(e, a, b, ya, yb));
                }
            }
            Ok(MonotonicityOutcome::Pass {
                pairs_checked: pairs,
            })
        }
    }
}

/// Checks monotonicity of exact expected marginals over subsets of `supp(x)`.
pub fn verify_monotonicity(
    kind: SchemeKind,
    g: &Multigraph,
    x: &FractionalPoint,
    mode: MonotonicityMode,
) -> Result<MonotonicityOutcome> {
    let supp = x.support();
    let mut oracle = ExactOracle::new(kind, g, x, supp.clone())?;
    check_monotone_family(&supp, mode, |m| oracle.expected_given(m))
}

/// Converts a rational to `f64` for reporting.
pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rat;

    fn path3(eps: f64) -> (Multigraph, FractionalPoint) {
        (
            Multigraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap(),
            FractionalPoint::new(vec![1.0 - eps, eps, 1.0 - eps]).unwrap(),
        )
    }

    #[test]
    fn single_edge_subsampling_kinds() {
        let g = Multigraph::new(2, [(0, 1)]).unwrap();
        for &xe in &[1.0, 0.4] {
            let x = FractionalPoint::new(vec![xe]).unwrap();
            let expect = (1.0 - (-xe).exp()) / xe;
            for kind in [
                SchemeKind::BipPoisson,
                SchemeKind::GenPoisson,
                SchemeKind::Mixed,
            ] {
                let r = exact_balancedness(kind, &g, &x).unwrap();
                assert!((r.min - expect).abs() < 1e-12, "{kind:?}");
            }
        }
        let x = FractionalPoint::new(vec![1.0]).unwrap();
        let y =
            exact_expected_marginals(SchemeKind::BipPoisson, &g, &x, &EdgeSet::full(1)).unwrap();
        assert!((y[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn deterministic_formula_matches() {
        let (g, x) = path3(0.5);
        let a = EdgeSet::from_ids(3, &[0, 1]).unwrap();
        let y = exact_expected_marginals(SchemeKind::BipSimple, &g, &x, &a).unwrap();
        assert_eq!(y, vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn random_order_middle_edge_rational() {
        let g = Multigraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let x = vec![rat(9, 10), rat(1, 10), rat(9, 10)];
        let c = exact_balancedness_rational(SchemeKind::GenRandomOrder, &g, &x).unwrap();
        assert_eq!(c[1].1, rat(37, 100));
    }

    #[test]
    fn float_and_rational_agree() {
        let (g, x) = path3(0.3);
        let xr = x.to_rational();
        for kind in [
            SchemeKind::BipSimple,
            SchemeKind::GenRandomOrder,
            SchemeKind::RefIsolated,
        ] {
            let f = exact_balancedness(kind, &g, &x).unwrap();
            let r = exact_balancedness_rational(kind, &g, &xr).unwrap();
            for (e, v) in r {
                assert!((f.value(e).unwrap() - rational_to_f64(&v)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isolated_reference_closed_form() {
        let (g, x) = path3(0.3);
        let r = exact_balancedness(SchemeKind::RefIsolated, &g, &x).unwrap();
        let expect = 0.5 * (1.0 - 0.7 / 2.0) * (1.0 - 0.7 / 2.0);
        assert!((r.value(1).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn size_caps() {
        let g = Multigraph::new(2, (0..13).map(|_| (0, 1))).unwrap();
        let x = FractionalPoint::new(vec![0.01; 13]).unwrap();
        assert!(matches!(
            exact_balancedness(SchemeKind::GenPoisson, &g, &x),
            Err(CrsError::Capability(_))
        ));
        assert!(matches!(
            verify_monotonicity(SchemeKind::GenPoisson, &g, &x, MonotonicityMode::Exhaustive),
            Err(CrsError::Capability(_))
        ));
    }

    #[test]
    fn edge_outside_set_is_zero() {
        let (g, x) = path3(0.3);
        let a = EdgeSet::from_ids(3, &[0]).unwrap();
        let y = exact_expected_marginals(SchemeKind::Mixed, &g, &x, &a).unwrap();
        assert_eq!(y[1], 0.0);
        assert_eq!(y[2], 0.0);
    }
}
