//! Undirected multigraphs, fractional points and polytope predicates.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{CrsError, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Largest vertex count accepted by the odd-set enumeration.
pub const MAX_ODD_SET_VERTICES: usize = 20;

/// Tolerance used by floating-point polytope checks.
pub const POLYTOPE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, w: VertexId) -> bool {
        self.u == w || self.v == w
    }
}

/// Undirected multigraph without self-loops. Edge ids are dense `0..m`.
#[derive(Clone, Debug)]
pub struct Multigraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeId>>,
    parallel_class: Vec<usize>,
    class_count: usize,
}

impl Multigraph {
    pub fn new<I>(vertex_count: usize, endpoints: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut edges = Vec::new();
        let mut incidence = vec![Vec::new(); vertex_count];
        for (id, (u, v)) in endpoints.into_iter().enumerate() {
            if u >= vertex_count || v >= vertex_count {
                return Err(CrsError::input(format!(
                    "edge {id} has endpoint out of range ({u}, {v}) for {vertex_count} vertices"
                )));
            }
            if u == v {
                return Err(CrsError::input(format!("edge {id} is a self-loop at {u}")));
            }
            edges.push(Edge { u, v });
            incidence[u].push(id);
            incidence[v].push(id);
        }
        let mut classes = std::collections::HashMap::new();
        let mut parallel_class = Vec::with_capacity(edges.len());
        for e in &edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            let next = classes.len();
            parallel_class.push(*classes.entry(key).or_insert(next));
        }
        let class_count = classes.len();
        Ok(Multigraph {
            vertex_count,
            edges,
            incidence,
            parallel_class,
            class_count,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v]
    }

    /// Id of the class of edges sharing `e`'s endpoint pair.
    pub fn parallel_class(&self, e: EdgeId) -> usize {
        self.parallel_class[e]
    }

    pub fn parallel_class_count(&self) -> usize {
        self.class_count
    }

    pub fn are_parallel(&self, e: EdgeId, f: EdgeId) -> bool {
        self.parallel_class[e] == self.parallel_class[f]
    }

    pub fn are_adjacent(&self, e: EdgeId, f: EdgeId) -> bool {
        let a = self.edges[e];
        let b = self.edges[f];
        a.touches(b.u) || a.touches(b.v)
    }

    /// Edges of δ(u) ∪ δ(v) for `e = {u, v}`, each listed once, `e` included.
    pub fn closed_neighborhood(&self, e: EdgeId) -> Vec<EdgeId> {
        let Edge { u, v } = self.edges[e];
        let mut out: Vec<EdgeId> = self.incidence[u].clone();
        out.extend(
            self.incidence[v]
                .iter()
                .copied()
                .filter(|&f| !self.edges[f].touches(u)),
        );
        out
    }

    /// Edges with endpoint set `{u, v}`.
    pub fn edges_between(&self, u: VertexId, v: VertexId) -> Result<Vec<EdgeId>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.incidence[u]
            .iter()
            .copied()
            .filter(|&f| self.edges[f].other(u) == v && u != v)
            .collect())
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.vertex_count {
            return Err(CrsError::input(format!("vertex {v} out of range")));
        }
        Ok(())
    }

    pub fn check_edge(&self, e: EdgeId) -> Result<()> {
        if e >= self.edges.len() {
            return Err(CrsError::input(format!("edge {e} out of range")));
        }
        Ok(())
    }

    /// True if no two edges in `set` share an endpoint.
    pub fn is_matching(&self, set: &[EdgeId]) -> Result<bool> {
        let mut used = vec![false; self.vertex_count];
        for &e in set {
            self.check_edge(e)?;
        }
        for &e in set {
            let Edge { u, v } = self.edges[e];
            if used[u] || used[v] {
                return Ok(false);
            }
            used[u] = true;
            used[v] = true;
        }
        Ok(true)
    }

    /// Proper two-coloring of the whole graph, if one exists. `true` marks side U.
    pub fn two_coloring(&self) -> Option<Vec<bool>> {
        let all = vec![true; self.edge_count()];
        let mut color: Vec<Option<bool>> = vec![None; self.vertex_count];
        for s in 0..self.vertex_count {
            if color[s].is_none() && !self.color_from(s, &all, &mut color) {
                return None;
            }
        }
        Some(color.into_iter().map(|c| c.unwrap_or(true)).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.two_coloring().is_some()
    }

    fn color_from(&self, s: VertexId, active: &[bool], color: &mut [Option<bool>]) -> bool {
        let mut ok = true;
        color[s] = Some(true);
        let mut queue = VecDeque::from([s]);
        while let Some(w) = queue.pop_front() {
            let cw = color[w].unwrap();
            for &f in &self.incidence[w] {
                if !active[f] {
                    continue;
                }
                let z = self.edges[f].other(w);
                match color[z] {
                    None => {
                        color[z] = Some(!cw);
                        queue.push_back(z);
                    }
                    Some(cz) if cz == cw => ok = false,
                    _ => {}
                }
            }
        }
        ok
    }

    /// Connected components of `(V, active)`, isolated vertices included as singletons.
    pub fn components(&self, active: &[bool]) -> Vec<Component> {
        assert_eq!(active.len(), self.edge_count());
        let mut color: Vec<Option<bool>> = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        let mut out = Vec::new();
        for s in 0..self.vertex_count {
            if seen[s] {
                continue;
            }
            let bipartite = self.color_from(s, active, &mut color);
            let mut vertices = Vec::new();
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(w) = queue.pop_front() {
                vertices.push(w);
                for &f in &self.incidence[w] {
                    if active[f] {
                        let z = self.edges[f].other(w);
                        if !seen[z] {
                            seen[z] = true;
                            queue.push_back(z);
                        }
                    }
                }
            }
            vertices.sort_unstable();
            let mut edges: Vec<EdgeId> = vertices
                .iter()
                .flat_map(|&w| self.incidence[w].iter().copied())
                .filter(|&f| active[f])
                .collect();
            edges.sort_unstable();
            edges.dedup();
            let side = vertices.iter().map(|&w| color[w].unwrap_or(true)).collect();
            out.push(Component {
                vertices,
                edges,
                bipartite,
                side,
            });
        }
        out
    }

    /// Per-edge flag: edge is active and lies in a bipartite component of `(V, active)`.
    pub fn bipartite_edge_mask(&self, active: &[bool]) -> Vec<bool> {
        let mut mask = vec![false; self.edge_count()];
        for c in self.components(active) {
            if c.bipartite {
                for &e in &c.edges {
                    mask[e] = true;
                }
            }
        }
        mask
    }

    /// Sum of `x` over δ(v).
    pub fn load(&self, x: &[f64], v: VertexId) -> f64 {
        self.incidence[v].iter().map(|&e| x[e]).sum()
    }

    /// Checks `x ≥ 0` and `x(δ(v)) ≤ b` for every vertex, with tolerance.
    pub fn in_degree_polytope(&self, x: &[f64], b: f64) -> Result<bool> {
        self.check_len(x.len())?;
        Ok(in_degree_polytope_generic(self, x, &b))
    }

    /// Exact rational degree-polytope membership.
    pub fn in_degree_polytope_exact(&self, x: &[BigRational], b: &BigRational) -> Result<bool> {
        self.check_len(x.len())?;
        Ok(in_degree_polytope_generic(self, x, b))
    }

    /// Membership in `b · P_matching`, by degree constraints plus every odd set.
    pub fn in_matching_polytope(&self, x: &[f64], b: f64) -> Result<bool> {
        self.check_len(x.len())?;
        self.check_odd_set_size()?;
        Ok(in_degree_polytope_generic(self, x, &b) && odd_sets_ok(self, x, &b))
    }

    pub fn in_matching_polytope_exact(&self, x: &[BigRational], b: &BigRational) -> Result<bool> {
        self.check_len(x.len())?;
        self.check_odd_set_size()?;
        Ok(in_degree_polytope_generic(self, x, b) && odd_sets_ok(self, x, b))
    }

    fn check_odd_set_size(&self) -> Result<()> {
        if self.vertex_count > MAX_ODD_SET_VERTICES {
            return Err(CrsError::capability(format!(
                "odd-set enumeration supports at most {MAX_ODD_SET_VERTICES} vertices, got {}",
                self.vertex_count
            )));
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.edge_count() {
            return Err(CrsError::input(format!(
                "vector has {len} entries, graph has {} edges",
                self.edge_count()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub bipartite: bool,
    /// Side of each vertex in `vertices` under a BFS coloring; meaningful only when bipartite.
    pub side: Vec<bool>,
}

pub(crate) trait PolyScalar: Clone + PartialOrd {
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul_usize(&self, n: usize) -> Self;
    fn half(&self) -> Self;
    fn le_tol(&self, bound: &Self) -> bool;
}

impl PolyScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_usize(&self, n: usize) -> Self {
        self * n as f64
    }
    fn half(&self) -> Self {
        self / 2.0
    }
    fn le_tol(&self, bound: &Self) -> bool {
        *self <= *bound + POLYTOPE_TOL
    }
}

impl PolyScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_usize(&self, n: usize) -> Self {
        self * BigRational::from_integer(BigInt::from(n))
    }
    fn half(&self) -> Self {
        self / BigRational::from_integer(BigInt::from(2))
    }
    fn le_tol(&self, bound: &Self) -> bool {
        self <= bound
    }
}

fn in_degree_polytope_generic<T: PolyScalar>(g: &Multigraph, x: &[T], b: &T) -> bool {
    let zero = T::zero();
    if x.iter().any(|xe| !zero.le_tol(xe)) {
        return false;
    }
    (0..g.vertex_count()).all(|v| {
        let load = g
            .incident(v)
            .iter()
            .fold(T::zero(), |acc, &e| acc.add(&x[e]));
        load.le_tol(b)
    })
}

fn odd_sets_ok<T: PolyScalar>(g: &Multigraph, x: &[T], b: &T) -> bool {
    let n = g.vertex_count();
    if n < 3 {
        return true;
    }
    let masks: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .map(|e| (1u32 << e.u, 1u32 << e.v))
        .collect();
    for s in 1u32..(1u32 << n) {
        let size = s.count_ones() as usize;
        if size < 3 || size % 2 == 0 {
            continue;
        }
        let mut inside = T::zero();
        for (e, &(mu, mv)) in masks.iter().enumerate() {
            if s & mu != 0 && s & mv != 0 {
                inside = inside.add(&x[e]);
            }
        }
        let bound = b.mul_usize(size - 1).half();
        if !inside.le_tol(&bound) {
            return false;
        }
    }
    true
}

/// A validated vector of edge values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (e, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(CrsError::input(format!("x[{e}] = {v} is not in [0, 1]")));
            }
        }
        Ok(FractionalPoint(values))
    }

    pub fn zeros(m: usize) -> Self {
        FractionalPoint(vec![0.0; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, e: EdgeId) -> f64 {
        self.0[e]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<EdgeId> {
        (0..self.0.len()).filter(|&e| self.0[e] > 0.0).collect()
    }

    pub fn to_rational(&self) -> Vec<BigRational> {
        self.0
            .iter()
            .map(|&v| BigRational::from_float(v).expect("finite"))
            .collect()
    }

    pub(crate) fn check_graph(&self, g: &Multigraph) -> Result<()> {
        g.check_len(self.len())
    }
}

#[cfg(test)]
pub(crate) fn rat_one() -> BigRational {
    <BigRational as num_traits::One>::one()
}

#[cfg(test)]
pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A set of edges backed by a membership mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    mask: Vec<bool>,
}

impl EdgeSet {
    pub fn empty(m: usize) -> Self {
        EdgeSet {
            mask: vec![false; m],
        }
    }

    pub fn from_ids(m: usize, ids: &[EdgeId]) -> Result<Self> {
        let mut s = EdgeSet::empty(m);
        for &e in ids {
            if e >= m {
                return Err(CrsError::input(format!("edge {e} out of range")));
            }
            s.mask[e] = true;
        }
        Ok(s)
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        EdgeSet { mask }
    }

    pub fn full(m: usize) -> Self {
        EdgeSet {
            mask: vec![true; m],
        }
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.mask[e]
    }

    pub fn insert(&mut self, e: EdgeId) {
        self.mask[e] = true;
    }

    pub fn remove(&mut self, e: EdgeId) {
        self.mask[e] = false;
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn ids(&self) -> Vec<EdgeId> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(e, _)| e)
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}
