//! Marginal-producing contention resolution procedures for matchings.
//!
//! Every scheme maps `(g, x, a, randomness)` to a conditional marginal vector
//! `y` with `supp(y) ⊆ a` lying in the matching polytope.

use std::fmt;
use std::str::FromStr;

use crate::error::{CrsError, Result};
use crate::graph::{EdgeSet, FractionalPoint, Multigraph};
use crate::rng::{subsample, RngStream};

pub type MarginalVector = Vec<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    BipSimple,
    BipPoisson,
    GenRandomOrder,
    GenPoisson,
    Mixed,
    RefIsolated,
    RefBipartition,
    RefScaledTwoThirds,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 8] = [
        SchemeKind::BipSimple,
        SchemeKind::BipPoisson,
        SchemeKind::GenRandomOrder,
        SchemeKind::GenPoisson,
        SchemeKind::Mixed,
        SchemeKind::RefIsolated,
        SchemeKind::RefBipartition,
        SchemeKind::RefScaledTwoThirds,
    ];

    pub fn requires_bipartite(self) -> bool {
        matches!(self, SchemeKind::BipSimple | SchemeKind::BipPoisson)
    }

    /// Output marginal is a fixed function of `a`.
    pub fn is_deterministic(self) -> bool {
        matches!(self, SchemeKind::BipSimple | SchemeKind::GenRandomOrder)
    }

    /// Uses the subsample + conditioned-Poisson pipeline.
    pub fn uses_intensity(self) -> bool {
        matches!(
            self,
            SchemeKind::BipPoisson
                | SchemeKind::GenPoisson
                | SchemeKind::Mixed
                | SchemeKind::RefBipartition
                | SchemeKind::RefScaledTwoThirds
        )
    }

    pub fn supports_merged(self) -> bool {
        matches!(
            self,
            SchemeKind::BipPoisson | SchemeKind::GenPoisson | SchemeKind::Mixed
        )
    }
}

/// A full rounding procedure: independent rounding followed by a scheme, or a
/// merged variant that draws unconditioned Poisson intensities directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Procedure {
    Cr(SchemeKind),
    Merged(SchemeKind),
}

impl Procedure {
    pub fn kind(self) -> SchemeKind {
        match self {
            Procedure::Cr(k) | Procedure::Merged(k) => k,
        }
    }

    pub fn all() -> Vec<Procedure> {
        let mut out: Vec<Procedure> = SchemeKind::ALL.iter().map(|&k| Procedure::Cr(k)).collect();
        out.extend(
            SchemeKind::ALL
                .iter()
                .filter(|k| k.supports_merged())
                .map(|&k| Procedure::Merged(k)),
        );
        out
    }
}

impl FromStr for Procedure {
    type Err = CrsError;

    fn from_str(s: &str) -> Result<Self> {
        use SchemeKind::*;
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "ex1.4" => Procedure::Cr(RefIsolated),
            "ex2.2" => Procedure::Cr(BipSimple),
            "alg1" => Procedure::Cr(BipPoisson),
            "alg2" => Procedure::Merged(BipPoisson),
            "ex4.1" => Procedure::Cr(GenRandomOrder),
            "alg3" => Procedure::Cr(GenPoisson),
            "alg4" => Procedure::Merged(GenPoisson),
            "alg5" => Procedure::Cr(Mixed),
            "alg6" => Procedure::Merged(Mixed),
            "ref-bipartition" => Procedure::Cr(RefBipartition),
            "ref-2of3" => Procedure::Cr(RefScaledTwoThirds),
            other => return Err(CrsError::input(format!("unknown scheme '{other}'"))),
        })
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SchemeKind::*;
        let s = match *self {
            Procedure::Cr(RefIsolated) => "ex1.4",
            Procedure::Cr(BipSimple) => "ex2.2",
            Procedure::Cr(BipPoisson) => "alg1",
            Procedure::Merged(BipPoisson) => "alg2",
            Procedure::Cr(GenRandomOrder) => "ex4.1",
            Procedure::Cr(GenPoisson) => "alg3",
            Procedure::Merged(GenPoisson) => "alg4",
            Procedure::Cr(Mixed) => "alg5",
            Procedure::Merged(Mixed) => "alg6",
            Procedure::Cr(RefBipartition) => "ref-bipartition",
            Procedure::Cr(RefScaledTwoThirds) => "ref-2of3",
            Procedure::Merged(k) => return write!(f, "merged-{k:?}"),
        };
        f.write_str(s)
    }
}

/// Per-edge integer intensities `q`; positive exactly on the survivor set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntensityVector(pub Vec<u64>);

impl IntensityVector {
    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn support(&self) -> EdgeSet {
        EdgeSet::from_mask(self.0.iter().map(|&c| c > 0).collect())
    }
}

pub(crate) fn check_scheme_input(g: &Multigraph, x: &FractionalPoint, a: &EdgeSet) -> Result<()> {
    x.check_graph(g)?;
    if a.universe() != g.edge_count() {
        return Err(CrsError::input("edge set does not match the graph"));
    }
    if let Some(e) = a.iter().find(|&e| x.get(e) <= 0.0) {
        return Err(CrsError::input(format!(
            "edge {e} is in A but not in supp(x)"
        )));
    }
    Ok(())
}

fn require_bipartite(g: &Multigraph) -> Result<()> {
    if g.is_bipartite() {
        Ok(())
    } else {
        Err(CrsError::capability("scheme requires a bipartite graph"))
    }
}

fn vertex_sums(g: &Multigraph, q: &[u64]) -> Vec<u64> {
    let mut s = vec![0u64; g.vertex_count()];
    for (e, edge) in g.edges().iter().enumerate() {
        s[edge.u] += q[e];
        s[edge.v] += q[e];
    }
    s
}

fn class_sums(g: &Multigraph, q: &[u64]) -> Vec<u64> {
    let mut s = vec![0u64; g.parallel_class_count()];
    for (e, &qe) in q.iter().enumerate() {
        s[g.parallel_class(e)] += qe;
    }
    s
}

/// `y_e = q_e / max(Σ_{δ(u)} q, Σ_{δ(v)} q)`, with `0/0 = 0`.
pub fn max_formula(g: &Multigraph, q: &[u64]) -> MarginalVector {
    let s = vertex_sums(g, q);
    g.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            if q[e] == 0 {
                0.0
            } else {
                q[e] as f64 / s[edge.u].max(s[edge.v]) as f64
            }
        })
        .collect()
}

/// `y_e = q_e / Σ_{δ(u) ∪ δ(v)} q`, with `0/0 = 0`.
pub fn sum_formula(g: &Multigraph, q: &[u64]) -> MarginalVector {
    let s = vertex_sums(g, q);
    let c = class_sums(g, q);
    g.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            if q[e] == 0 {
                0.0
            } else {
                q[e] as f64 / (s[edge.u] + s[edge.v] - c[g.parallel_class(e)]) as f64
            }
        })
        .collect()
}

/// Max formula on bipartite components of `(V, supp(q))`, sum formula elsewhere.
pub fn mixed_formula(g: &Multigraph, q: &[u64]) -> MarginalVector {
    let active: Vec<bool> = q.iter().map(|&c| c > 0).collect();
    let bip = g.bipartite_edge_mask(&active);
    let ymax = max_formula(g, q);
    let ysum = sum_formula(g, q);
    (0..q.len())
        .map(|e| if bip[e] { ymax[e] } else { ysum[e] })
        .collect()
}

/// Subsamples `a` and draws conditioned Poisson intensities on the survivors.
pub fn draw_intensity(
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
) -> Result<IntensityVector> {
    check_scheme_input(g, x, a)?;
    let kept = subsample(a, x, r)?;
    let mut q = vec![0u64; g.edge_count()];
    for e in kept.iter() {
        q[e] = r.poisson_geq1(x.get(e))?;
    }
    Ok(IntensityVector(q))
}

pub fn bip_simple_marginals(
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
) -> Result<MarginalVector> {
    check_scheme_input(g, x, a)?;
    require_bipartite(g)?;
    let mut deg = vec![0usize; g.vertex_count()];
    for e in a.iter() {
        let edge = g.edge(e);
        deg[edge.u] += 1;
        deg[edge.v] += 1;
    }
    Ok((0..g.edge_count())
        .map(|e| {
            if a.contains(e) {
                let edge = g.edge(e);
                1.0 / deg[edge.u].max(deg[edge.v]) as f64
            } else {
                0.0
            }
        })
        .collect())
}

pub fn bip_poisson_marginals(
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
) -> Result<MarginalVector> {
    require_bipartite(g)?;
    let q = draw_intensity(g, x, a, r)?;
    Ok(max_formula(g, q.counts()))
}

pub fn gen_random_order_marginals(
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
) -> Result<MarginalVector> {
    check_scheme_input(g, x, a)?;
    let ones: Vec<u64> = a.mask().iter().map(|&b| b as u64).collect();
    Ok(sum_formula(g, &ones))
}

pub fn gen_poisson_marginals(
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
) -> Result<MarginalVector> {
    let q = draw_intensity(g, x, a, r)?;
    Ok(sum_formula(g, q.counts()))
}

pub fn mixed_marginals(
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
) -> Result<MarginalVector> {
    let q = draw_intensity(g, x, a, r)?;
    Ok(mixed_formula(g, q.counts()))
}

/// Unconditioned `q_e ~ Pois(x_e)` on all edges followed by the kind's formula.
pub fn merged_marginals(
    kind: SchemeKind,
    g: &Multigraph,
    x: &FractionalPoint,
    r: &mut RngStream,
) -> Result<MarginalVector> {
    x.check_graph(g)?;
    let q: Vec<u64> = x.values().iter().map(|&xe| r.poisson(xe)).collect();
    match kind {
        SchemeKind::BipPoisson => {
            require_bipartite(g)?;
            Ok(max_formula(g, &q))
        }
        SchemeKind::GenPoisson => Ok(sum_formula(g, &q)),
        SchemeKind::Mixed => Ok(mixed_formula(g, &q)),
        other => Err(CrsError::parameter(format!(
            "{other:?} has no merged variant"
        ))),
    }
}

/// Indicator of isolated edges after keeping each edge of `a` with probability 1/2.
pub fn isolated_coins(g: &Multigraph, a: &EdgeSet, r: &mut RngStream) -> EdgeSet {
    let mut kept = EdgeSet::empty(g.edge_count());
    for e in a.iter() {
        if r.bernoulli(0.5) {
            kept.insert(e);
        }
    }
    kept
}

pub(crate) fn isolated_edges(g: &Multigraph, kept: &EdgeSet) -> MarginalVector {
    let ones: Vec<u64> = kept.mask().iter().map(|&b| b as u64).collect();
    sum_formula(g, &ones)
        .into_iter()
        .map(|v| if v == 1.0 { 1.0 } else { 0.0 })
        .collect()
}

/// Uniform side per vertex; `true` marks side U.
pub fn random_sides(g: &Multigraph, r: &mut RngStream) -> Vec<bool> {
    (0..g.vertex_count()).map(|_| r.bernoulli(0.5)).collect()
}

pub(crate) fn crossing(g: &Multigraph, a: &EdgeSet, sides: &[bool]) -> EdgeSet {
    let mut out = EdgeSet::empty(g.edge_count());
    for e in a.iter() {
        let edge = g.edge(e);
        if sides[edge.u] != sides[edge.v] {
            out.insert(e);
        }
    }
    out
}

pub fn reference_marginals(
    kind: SchemeKind,
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
) -> Result<MarginalVector> {
    check_scheme_input(g, x, a)?;
    match kind {
        SchemeKind::RefIsolated => {
            let kept = isolated_coins(g, a, r);
            Ok(isolated_edges(g, &kept))
        }
        SchemeKind::RefBipartition => {
            let sides = random_sides(g, r);
            let cross = crossing(g, a, &sides);
            let q = draw_intensity(g, x, &cross, r)?;
            Ok(max_formula(g, q.counts()))
        }
        SchemeKind::RefScaledTwoThirds => {
            let q = draw_intensity(g, x, a, r)?;
            Ok(max_formula(g, q.counts())
                .into_iter()
                .map(|v| v * 2.0 / 3.0)
                .collect())
        }
        other => Err(CrsError::parameter(format!(
            "{other:?} is not a reference scheme"
        ))),
    }
}

/// Conditional marginal `y^a` of any scheme kind.
pub fn marginals(
    kind: SchemeKind,
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
) -> Result<MarginalVector> {
    match kind {
        SchemeKind::BipSimple => bip_simple_marginals(g, x, a),
        SchemeKind::BipPoisson => bip_poisson_marginals(g, x, a, r),
        SchemeKind::GenRandomOrder => gen_random_order_marginals(g, x, a),
        SchemeKind::GenPoisson => gen_poisson_marginals(g, x, a, r),
        SchemeKind::Mixed => mixed_marginals(g, x, a, r),
        _ => reference_marginals(kind, g, x, a, r),
    }
}

/// `y^{R(x)}` for a CR procedure, or the merged marginal.
pub fn procedure_marginals(
    p: Procedure,
    g: &Multigraph,
    x: &FractionalPoint,
    r: &mut RngStream,
) -> Result<MarginalVector> {
    match p {
        Procedure::Cr(kind) => {
            let a = crate::rng::independent_round(x, r);
            marginals(kind, g, x, &a, r)
        }
        Procedure::Merged(kind) => merged_marginals(kind, g, x, r),
    }
}
