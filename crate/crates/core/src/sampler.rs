//! Turning marginal vectors into random matchings.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CrsError, Result};
use crate::graph::{EdgeId, EdgeSet, FractionalPoint, Multigraph, VertexId};
use crate::rng::{independent_round, RngStream};
use crate::schemes::{
    check_scheme_input, crossing, draw_intensity, isolated_coins, isolated_edges, random_sides,
    Procedure, SchemeKind,
};

/// Sorted list of edge ids forming a matching.
pub type Matching = Vec<EdgeId>;

/// Largest support accepted by the general (odd-set) decomposition.
pub const MAX_GENERAL_DECOMPOSITION_EDGES: usize = 24;
const MAX_GENERAL_DECOMPOSITION_VERTICES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCombination {
    pub terms: Vec<(BigRational, Matching)>,
}

impl ConvexCombination {
    pub fn weights_f64(&self) -> Vec<f64> {
        self.terms
            .iter()
            .map(|(w, _)| w.to_f64().unwrap_or(0.0))
            .collect()
    }

    pub fn total_weight(&self) -> BigRational {
        self.terms
            .iter()
            .fold(BigRational::zero(), |acc, (w, _)| acc + w)
    }

    /// `Σ λ_i χ^{M_i}` over `m` edges.
    pub fn reconstruct(&self, m: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); m];
        for (w, matching) in &self.terms {
            for &e in matching {
                out[e] += w;
            }
        }
        out
    }

    pub fn sample(&self, r: &mut RngStream) -> &Matching {
        let total = self.total_weight().to_f64().unwrap_or(1.0);
        let mut u = r.uniform() * total;
        for (w, matching) in &self.terms {
            let wf = w.to_f64().unwrap_or(0.0);
            if u < wf {
                return matching;
            }
            u -= wf;
        }
        &self.terms.last().expect("nonempty combination").1
    }
}

fn rat_from_u64(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Decomposes `y` in the bipartite matching polytope of `g` into matchings, exactly.
pub fn birkhoff_decompose(g: &Multigraph, y: &[BigRational]) -> Result<ConvexCombination> {
    let sides = g
        .two_coloring()
        .ok_or_else(|| CrsError::capability("decomposition requires a bipartite graph"))?;
    decompose_with_sides(g, &sides, y)
}

/// Float front end: checks membership with tolerance, converts exactly and rescales any
/// load excess left by rounding.
pub fn birkhoff_decompose_f64(g: &Multigraph, y: &[f64]) -> Result<ConvexCombination> {
    if !g.in_degree_polytope(y, 1.0)? {
        return Err(CrsError::input(
            "vector is outside the bipartite matching polytope",
        ));
    }
    let mut yr: Vec<BigRational> = y
        .iter()
        .map(|&v| BigRational::from_float(v.max(0.0)).expect("finite"))
        .collect();
    let max_load = (0..g.vertex_count())
        .map(|v| {
            g.incident(v)
                .iter()
                .fold(BigRational::zero(), |acc, &e| acc + &yr[e])
        })
        .max()
        .unwrap_or_else(BigRational::zero);
    if max_load > BigRational::one() {
        for v in yr.iter_mut() {
            *v = &*v / &max_load;
        }
    }
    birkhoff_decompose(g, &yr)
}

pub(crate) fn decompose_with_sides(
    g: &Multigraph,
    sides: &[bool],
    y: &[BigRational],
) -> Result<ConvexCombination> {
    if y.len() != g.edge_count() {
        return Err(CrsError::input(
            "marginal vector length does not match the graph",
        ));
    }
    if y.iter().any(|v| v.is_negative()) {
        return Err(CrsError::input("marginal vector has a negative entry"));
    }
    let one = BigRational::one();
    let mut load = vec![BigRational::zero(); g.vertex_count()];
    for (e, edge) in g.edges().iter().enumerate() {
        if !y[e].is_zero() {
            if sides[edge.u] == sides[edge.v] {
                return Err(CrsError::input(format!(
                    "edge {e} does not cross the bipartition"
                )));
            }
            load[edge.u] += &y[e];
            load[edge.v] += &y[e];
        }
    }
    if load.iter().any(|l| l > &one) {
        return Err(CrsError::input(
            "vector is outside the bipartite matching polytope",
        ));
    }

    // Auxiliary graph: left = U ∪ W', right = W ∪ U'. Every vertex has weighted degree 1.
    let n = g.vertex_count();
    let left_of = |w: VertexId| if sides[w] { w } else { n + w };
    let right_of = |w: VertexId| if sides[w] { n + w } else { w };
    struct AuxEdge {
        l: usize,
        r: usize,
        value: BigRational,
        original: Option<EdgeId>,
    }
    let mut aux: Vec<AuxEdge> = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        if y[e].is_zero() {
            continue;
        }
        let (u, w) = if sides[edge.u] {
            (edge.u, edge.v)
        } else {
            (edge.v, edge.u)
        };
        aux.push(AuxEdge {
            l: u,
            r: w,
            value: y[e].clone(),
            original: Some(e),
        });
        aux.push(AuxEdge {
            l: n + w,
            r: n + u,
            value: y[e].clone(),
            original: None,
        });
    }
    let touched: Vec<VertexId> = (0..n).filter(|&w| !load[w].is_zero()).collect();
    for &w in &touched {
        let slack = &one - &load[w];
        if !slack.is_zero() {
            aux.push(AuxEdge {
                l: left_of(w),
                r: right_of(w),
                value: slack,
                original: None,
            });
        }
    }

    let mut merged: BTreeMap<Matching, BigRational> = BTreeMap::new();
    let mut remaining = one.clone();
    let nodes = 2 * n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (i, a) in aux.iter().enumerate() {
        adj[a.l].push(i);
    }
    // Each touched vertex contributes exactly one left node: itself or its dummy copy.
    let mut left_nodes: Vec<usize> = touched.iter().map(|&w| left_of(w)).collect();
    // Only left nodes that actually carry value take part.
    left_nodes.retain(|&l| adj[l].iter().any(|&i| !aux[i].value.is_zero()));

    while !left_nodes.is_empty() {
        let view: Vec<(usize, usize, bool)> =
            aux.iter().map(|a| (a.l, a.r, !a.value.is_zero())).collect();
        let pm = perfect_matching(&view, &adj, &left_nodes, nodes)
            .ok_or_else(|| CrsError::input("no perfect matching on the padded support"))?;
        let lambda = pm
            .iter()
            .map(|&i| aux[i].value.clone())
            .min()
            .expect("nonempty matching");
        let mut projected: Matching = pm.iter().filter_map(|&i| aux[i].original).collect();
        projected.sort_unstable();
        for &i in &pm {
            aux[i].value -= &lambda;
        }
        *merged.entry(projected).or_insert_with(BigRational::zero) += &lambda;
        remaining -= &lambda;
        left_nodes.retain(|&l| adj[l].iter().any(|&i| !aux[i].value.is_zero()));
    }
    if remaining.is_positive() {
        *merged.entry(Vec::new()).or_insert_with(BigRational::zero) += remaining;
    }
    let terms: Vec<(BigRational, Matching)> = merged.into_iter().map(|(m, w)| (w, m)).collect();
    let support: Vec<EdgeId> = (0..y.len()).filter(|&e| !y[e].is_zero()).collect();
    Ok(ConvexCombination {
        terms: caratheodory_reduce(terms, &support),
    })
}

/// Kuhn's augmenting-path algorithm restricted to active edges; returns edge indices.
fn perfect_matching(
    edges: &[(usize, usize, bool)],
    adj: &[Vec<usize>],
    left_nodes: &[usize],
    nodes: usize,
) -> Option<Vec<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; nodes];
    fn augment(
        l: usize,
        edges: &[(usize, usize, bool)],
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &i in &adj[l] {
            let (_, r, active) = edges[i];
            if !active || seen[r] {
                continue;
            }
            seen[r] = true;
            let free = match match_right[r] {
                None => true,
                Some(j) => augment(edges[j].0, edges, adj, seen, match_right),
            };
            if free {
                match_right[r] = Some(i);
                return true;
            }
        }
        false
    }
    for &l in left_nodes {
        let mut seen = vec![false; nodes];
        if !augment(l, edges, adj, &mut seen, &mut match_right) {
            return None;
        }
    }
    Some(match_right.into_iter().flatten().collect())
}

/// Drops terms until at most `|support| + 1` remain, keeping the weighted sum fixed.
fn caratheodory_reduce(
    mut terms: Vec<(BigRational, Matching)>,
    support: &[EdgeId],
) -> Vec<(BigRational, Matching)> {
    let d = support.len() + 1;
    while terms.len() > d {
        let cols = d + 1;
        // Rows: one per support edge plus the all-ones row.
        let mut mat: Vec<Vec<BigRational>> = support
            .iter()
            .map(|&e| {
                terms[..cols]
                    .iter()
                    .map(|(_, m)| {
                        if m.binary_search(&e).is_ok() {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        mat.push(vec![BigRational::one(); cols]);
        let mu = null_vector(mat, cols);
        let t = (0..cols)
            .filter(|&i| mu[i].is_positive())
            .map(|i| &terms[i].0 / &mu[i])
            .min()
            .expect("null vector has a positive entry");
        for i in 0..cols {
            let delta = &t * &mu[i];
            terms[i].0 -= delta;
        }
        terms.retain(|(w, _)| w.is_positive());
    }
    terms
}

fn null_vector(mut mat: Vec<Vec<BigRational>>, cols: usize) -> Vec<BigRational> {
    let rows = mat.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, p);
        let inv = BigRational::one() / &mat[row][col];
        for c in 0..cols {
            mat[row][c] = &mat[row][c] * &inv;
        }
        for r in 0..rows {
            if r != row && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in 0..cols {
                    let sub = &f * &mat[row][c];
                    mat[r][c] -= sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..cols)
        .find(|c| !pivots.contains(c))
        .expect("more columns than rank");
    let mut mu = vec![BigRational::zero(); cols];
    mu[free] = BigRational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        mu[pc] = -mat[r][free].clone();
    }
    mu
}

/// Decomposes `y` in the (general) matching polytope into matchings by walking down faces.
pub fn matching_polytope_decompose(g: &Multigraph, y: &[BigRational]) -> Result<ConvexCombination> {
    if y.len() != g.edge_count() {
        return Err(CrsError::input(
            "marginal vector length does not match the graph",
        ));
    }
    if y.iter().any(|v| v.is_negative()) {
        return Err(CrsError::input("marginal vector has a negative entry"));
    }
    let support: Vec<EdgeId> = (0..y.len()).filter(|&e| !y[e].is_zero()).collect();
    if support.len() > MAX_GENERAL_DECOMPOSITION_EDGES {
        return Err(CrsError::capability(format!(
            "general decomposition supports at most {MAX_GENERAL_DECOMPOSITION_EDGES} edges"
        )));
    }
    let mut verts: Vec<VertexId> = support
        .iter()
        .flat_map(|&e| [g.edge(e).u, g.edge(e).v])
        .collect();
    verts.sort_unstable();
    verts.dedup();
    if verts.len() > MAX_GENERAL_DECOMPOSITION_VERTICES {
        return Err(CrsError::capability(format!(
            "general decomposition supports at most {MAX_GENERAL_DECOMPOSITION_VERTICES} vertices"
        )));
    }
    let local = |w: VertexId| verts.binary_search(&w).unwrap();
    let k = support.len();
    let ends: Vec<(usize, usize)> = support
        .iter()
        .map(|&e| (local(g.edge(e).u), local(g.edge(e).v)))
        .collect();

    // Constraints a·y ≤ β with a a 0/1 mask over support positions.
    let mut constraints: Vec<(Vec<bool>, BigRational)> = Vec::new();
    for v in 0..verts.len() {
        let mask = ends.iter().map(|&(a, b)| a == v || b == v).collect();
        constraints.push((mask, BigRational::one()));
    }
    let nv = verts.len();
    for s in 1u32..(1u32 << nv) {
        let size = s.count_ones() as u64;
        if size < 3 || size % 2 == 0 {
            continue;
        }
        let mask: Vec<bool> = ends
            .iter()
            .map(|&(a, b)| s & (1 << a) != 0 && s & (1 << b) != 0)
            .collect();
        if mask.iter().filter(|&&b| b).count() as u64 >= (size - 1) / 2 + 1 {
            constraints.push((mask, rat_from_u64((size - 1) / 2)));
        }
    }

    let matchings = enumerate_matchings(&ends, nv);
    let mut cur: Vec<BigRational> = support.iter().map(|&e| y[e].clone()).collect();
    let dot = |mask: &[bool], v: &[BigRational]| {
        mask.iter()
            .zip(v)
            .filter(|(&b, _)| b)
            .fold(BigRational::zero(), |acc, (_, x)| acc + x)
    };
    if constraints.iter().any(|(a, beta)| &dot(a, &cur) > beta) {
        return Err(CrsError::input("vector is outside the matching polytope"));
    }
    let mut weight = BigRational::one();
    let mut terms: Vec<(BigRational, Matching)> = Vec::new();
    loop {
        if cur.iter().all(|v| v.is_zero()) {
            if weight.is_positive() {
                terms.push((weight, Vec::new()));
            }
            break;
        }
        let tight: Vec<usize> = (0..constraints.len())
            .filter(|&i| dot(&constraints[i].0, &cur) == constraints[i].1)
            .collect();
        let chosen = matchings.iter().find(|m| {
            m.iter().all(|&i| !cur[i].is_zero())
                && tight.iter().all(|&c| {
                    let (mask, beta) = &constraints[c];
                    rat_from_u64(m.iter().filter(|&&i| mask[i]).count() as u64) == *beta
                })
        });
        let m = chosen
            .ok_or_else(|| {
                CrsError::input("no matching on the minimal face; vector is infeasible")
            })?
            .clone();
        let chi: Vec<BigRational> = (0..k)
            .map(|i| {
                if m.contains(&i) {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        let mut lambda = BigRational::one();
        for &i in &m {
            if cur[i] < lambda {
                lambda = cur[i].clone();
            }
        }
        for (mask, beta) in &constraints {
            let slack_m = beta - dot(mask, &chi);
            if slack_m.is_positive() {
                let ratio = (beta - dot(mask, &cur)) / slack_m;
                if ratio < lambda {
                    lambda = ratio;
                }
            }
        }
        let projected: Matching = {
            let mut v: Vec<EdgeId> = m.iter().map(|&i| support[i]).collect();
            v.sort_unstable();
            v
        };
        if lambda >= BigRational::one() {
            terms.push((weight, projected));
            break;
        }
        terms.push((&weight * &lambda, projected));
        let rest = BigRational::one() - &lambda;
        for i in 0..k {
            cur[i] = (&cur[i] - &lambda * &chi[i]) / &rest;
        }
        weight *= rest;
    }
    let mut merged: BTreeMap<Matching, BigRational> = BTreeMap::new();
    for (w, m) in terms {
        *merged.entry(m).or_insert_with(BigRational::zero) += w;
    }
    let terms = merged.into_iter().map(|(m, w)| (w, m)).collect();
    Ok(ConvexCombination {
        terms: caratheodory_reduce(terms, &support),
    })
}

/// All matchings among `ends` (local vertex pairs), as lists of positions.
fn enumerate_matchings(ends: &[(usize, usize)], nv: usize) -> Vec<Vec<usize>> {
    fn rec(
        i: usize,
        ends: &[(usize, usize)],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == ends.len() {
            out.push(cur.clone());
            return;
        }
        rec(i + 1, ends, used, cur, out);
        let (a, b) = ends[i];
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            cur.push(i);
            rec(i + 1, ends, used, cur, out);
            cur.pop();
            used[a] = false;
            used[b] = false;
        }
    }
    let mut out = Vec::new();
    rec(0, ends, &mut vec![false; nv], &mut Vec::new(), &mut out);
    // Larger matchings first so the face search finds covering ones quickly.
    out.sort_by_key(|m| std::cmp::Reverse(m.len()));
    out
}

/// Keeps `e` iff its clock is strictly first among `δ(u) ∪ δ(v)`; ties go to the smaller id.
pub fn select_by_clocks(g: &Multigraph, clocks: &[f64]) -> Matching {
    (0..g.edge_count())
        .filter(|&e| {
            clocks[e].is_finite()
                && g.closed_neighborhood(e)
                    .into_iter()
                    .filter(|&f| f != e)
                    .all(|f| (clocks[e], e) < (clocks[f], f))
        })
        .collect()
}

/// Independent `Exp(w_e)` clocks; locally-first edges form the matching.
pub fn exp_clock_matching(g: &Multigraph, w: &[f64], r: &mut RngStream) -> Result<Matching> {
    if w.len() != g.edge_count() {
        return Err(CrsError::input(
            "weight vector length does not match the graph",
        ));
    }
    if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(CrsError::input(
            "clock rates must be finite and nonnegative",
        ));
    }
    let clocks: Vec<f64> = w.iter().map(|&v| r.exponential(v)).collect();
    Ok(select_by_clocks(g, &clocks))
}

/// Selects `e ∈ a` iff it comes first, in a uniform order of `a`, among its adjacent edges in `a`.
pub fn random_order_matching(g: &Multigraph, a: &EdgeSet, r: &mut RngStream) -> Matching {
    let mut order: Vec<EdgeId> = a.ids();
    r.shuffle(&mut order);
    let mut rank = vec![usize::MAX; g.edge_count()];
    for (i, &e) in order.iter().enumerate() {
        rank[e] = i;
    }
    let mut out: Matching = order
        .iter()
        .copied()
        .filter(|&e| {
            g.closed_neighborhood(e)
                .into_iter()
                .all(|f| f == e || rank[f] > rank[e])
        })
        .collect();
    out.sort_unstable();
    out
}

fn max_formula_rational(g: &Multigraph, q: &[u64], active: &[bool]) -> Vec<BigRational> {
    let mut s = vec![0u64; g.vertex_count()];
    for (e, edge) in g.edges().iter().enumerate() {
        if active[e] {
            s[edge.u] += q[e];
            s[edge.v] += q[e];
        }
    }
    (0..g.edge_count())
        .map(|e| {
            if !active[e] || q[e] == 0 {
                BigRational::zero()
            } else {
                let edge = g.edge(e);
                BigRational::new(BigInt::from(q[e]), BigInt::from(s[edge.u].max(s[edge.v])))
            }
        })
        .collect()
}

/// Samples one matching whose conditional marginal is the scheme's `y^a`.
pub fn resolve(
    kind: SchemeKind,
    g: &Multigraph,
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
) -> Result<Matching> {
    check_scheme_input(g, x, a)?;
    let m = g.edge_count();
    match kind {
        SchemeKind::GenRandomOrder => Ok(random_order_matching(g, a, r)),
        SchemeKind::RefIsolated => {
            let kept = isolated_coins(g, a, r);
            let y = isolated_edges(g, &kept);
            Ok((0..m).filter(|&e| y[e] == 1.0).collect())
        }
        SchemeKind::BipSimple => {
            let sides = g
                .two_coloring()
                .ok_or_else(|| CrsError::capability("scheme requires a bipartite graph"))?;
            let ones: Vec<u64> = a.mask().iter().map(|&b| b as u64).collect();
            let y = max_formula_rational(g, &ones, a.mask());
            Ok(decompose_with_sides(g, &sides, &y)?.sample(r).clone())
        }
        SchemeKind::BipPoisson | SchemeKind::GenPoisson | SchemeKind::Mixed => {
            let q = draw_intensity(g, x, a, r)?;
            matching_from_intensity(kind, g, q.counts(), r)
        }
        SchemeKind::RefBipartition => {
            let sides = random_sides(g, r);
            let cross = crossing(g, a, &sides);
            let q = draw_intensity(g, x, &cross, r)?;
            let active: Vec<bool> = q.counts().iter().map(|&c| c > 0).collect();
            let y = max_formula_rational(g, q.counts(), &active);
            Ok(decompose_with_sides(g, &sides, &y)?.sample(r).clone())
        }
        SchemeKind::RefScaledTwoThirds => {
            let q = draw_intensity(g, x, a, r)?;
            let active: Vec<bool> = q.counts().iter().map(|&c| c > 0).collect();
            let y = max_formula_rational(g, q.counts(), &active);
            let two_thirds = BigRational::new(BigInt::from(2), BigInt::from(3));
            let mut out = Vec::new();
            for c in g.components(&active) {
                if c.edges.is_empty() {
                    continue;
                }
                let mut yc = vec![BigRational::zero(); m];
                for &e in &c.edges {
                    yc[e] = y[e].clone();
                }
                if c.bipartite {
                    let mut sides = vec![true; g.vertex_count()];
                    for (i, &w) in c.vertices.iter().enumerate() {
                        sides[w] = c.side[i];
                    }
                    let picked = decompose_with_sides(g, &sides, &yc)?.sample(r).clone();
                    if r.bernoulli(2.0 / 3.0) {
                        out.extend(picked);
                    }
                } else {
                    for v in yc.iter_mut() {
                        *v = &*v * &two_thirds;
                    }
                    out.extend(matching_polytope_decompose(g, &yc)?.sample(r).clone());
                }
            }
            out.sort_unstable();
            Ok(out)
        }
    }
}

/// Resolves a positive-intensity vector with the kind's formula into one matching.
fn matching_from_intensity(
    kind: SchemeKind,
    g: &Multigraph,
    q: &[u64],
    r: &mut RngStream,
) -> Result<Matching> {
    let m = g.edge_count();
    let active: Vec<bool> = q.iter().map(|&c| c > 0).collect();
    match kind {
        SchemeKind::BipPoisson => {
            let sides = g
                .two_coloring()
                .ok_or_else(|| CrsError::capability("scheme requires a bipartite graph"))?;
            let y = max_formula_rational(g, q, &active);
            Ok(decompose_with_sides(g, &sides, &y)?.sample(r).clone())
        }
        SchemeKind::GenPoisson => {
            let w: Vec<f64> = q.iter().map(|&c| c as f64).collect();
            exp_clock_matching(g, &w, r)
        }
        SchemeKind::Mixed => {
            let comps = g.components(&active);
            let mut sides = vec![true; g.vertex_count()];
            let mut bip = vec![false; m];
            for c in comps.iter().filter(|c| c.bipartite) {
                for (i, &w) in c.vertices.iter().enumerate() {
                    sides[w] = c.side[i];
                }
                for &e in &c.edges {
                    bip[e] = true;
                }
            }
            let y = max_formula_rational(g, q, &bip);
            let mut out = decompose_with_sides(g, &sides, &y)?.sample(r).clone();
            let w: Vec<f64> = (0..m)
                .map(|e| {
                    if active[e] && !bip[e] {
                        q[e] as f64
                    } else {
                        0.0
                    }
                })
                .collect();
            out.extend(exp_clock_matching(g, &w, r)?);
            out.sort_unstable();
            Ok(out)
        }
        other => Err(CrsError::parameter(format!(
            "{other:?} has no intensity resolution"
        ))),
    }
}

/// Runs a full procedure on `x`: independent rounding then the scheme, or, for merged
/// variants, unconditioned Poisson intensities on every edge.
pub fn resolve_procedure(
    procedure: Procedure,
    g: &Multigraph,
    x: &FractionalPoint,
    r: &mut RngStream,
) -> Result<Matching> {
    x.check_graph(g)?;
    match procedure {
        Procedure::Cr(kind) => {
            let a = independent_round(x, r);
            resolve(kind, g, x, &a, r)
        }
        Procedure::Merged(kind) => {
            if !kind.supports_merged() {
                return Err(CrsError::parameter(format!(
                    "{kind:?} has no merged variant"
                )));
            }
            let q: Vec<u64> = x.values().iter().map(|&xe| r.poisson(xe)).collect();
            matching_from_intensity(kind, g, &q, r)
        }
    }
}

/// One constraint family in an intersection: a scheme and the graph it resolves on.
/// All graphs share the same edge-id ground set.
#[derive(Clone, Copy, Debug)]
pub struct SchemeContext<'a> {
    pub kind: SchemeKind,
    pub graph: &'a Multigraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamCoupling {
    /// Each scheme draws from its own derived stream.
    Independent,
    /// Every scheme replays the same stream.
    Shared,
}

/// Intersection of the sets returned by each scheme on the same input `a`.
pub fn intersect_schemes(
    contexts: &[SchemeContext<'_>],
    x: &FractionalPoint,
    a: &EdgeSet,
    r: &mut RngStream,
    coupling: StreamCoupling,
) -> Result<Vec<EdgeId>> {
    if contexts.is_empty() {
        return Err(CrsError::input("intersection needs at least one scheme"));
    }
    let mut keep = vec![true; a.universe()];
    for (i, ctx) in contexts.iter().enumerate() {
        let mut stream = match coupling {
            StreamCoupling::Independent => r.derive(i as u64),
            StreamCoupling::Shared => r.derive(0),
        };
        let picked = resolve(ctx.kind, ctx.graph, x, a, &mut stream)?;
        let mut hit = vec![false; a.universe()];
        for e in picked {
            hit[e] = true;
        }
        for (k, h) in keep.iter_mut().zip(hit) {
            *k &= h;
        }
    }
    Ok((0..a.universe()).filter(|&e| keep[e]).collect())
}
