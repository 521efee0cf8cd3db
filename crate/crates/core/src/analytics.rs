//! Analytic constants, instance generators and Monte Carlo balancedness estimation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{CrsError, Result};
use crate::graph::{EdgeId, FractionalPoint, Multigraph};
use crate::instance::Instance;
use crate::mc::run_trials;
use crate::oracle::{BalancednessReport, EdgeBalance, EstimateMode};
use crate::rng::{keep_probability, CdfTable, RngStream};
use crate::schemes::{procedure_marginals, Procedure, SchemeKind};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;
/// Smallest trial count accepted by [`estimate_balancedness`].
pub const MIN_TRIALS: u64 = 1000;
/// Largest `n` for which [`optimality_limit`] tabulates exactly.
pub const EXACT_LIMIT_N: u64 = 12;

fn check_b(b: f64) -> Result<()> {
    if b.is_finite() && (0.0..=1.0).contains(&b) {
        Ok(())
    } else {
        Err(CrsError::parameter(format!(
            "b must lie in [0, 1], got {b}"
        )))
    }
}

/// `E[1/(1 + max(F, F'))]` for iid integer laws with CDF `cdf`.
fn max_series(cdf: impl Iterator<Item = f64>) -> f64 {
    let mut prev = 0.0;
    let mut total = 0.0;
    for (k, f) in cdf.enumerate() {
        total += (f * f - prev * prev) / (1 + k) as f64;
        prev = f;
    }
    total
}

/// `β(b) = E[1/(1 + max(P1, P2))]` with `P1, P2` iid `Pois(b)`.
pub fn beta(b: f64) -> Result<f64> {
    check_b(b)?;
    let mut cdf = Vec::new();
    let mut pmf = (-b).exp();
    let mut acc = pmf;
    cdf.push(acc);
    let mut k = 0u32;
    while 1.0 - acc > 1e-17 && k < 200 {
        k += 1;
        pmf *= b / k as f64;
        acc += pmf;
        cdf.push(acc);
    }
    Ok(max_series(cdf.into_iter()))
}

/// `γ(b) = (1 − e^{−2b}) / (2b)`, equal to 1 at `b = 0`.
pub fn gamma(b: f64) -> Result<f64> {
    check_b(b)?;
    Ok(keep_probability(2.0 * b))
}

/// `E[1/(1 + Pois(2b))]` summed term by term.
pub fn gamma_series(b: f64) -> Result<f64> {
    check_b(b)?;
    let lambda = 2.0 * b;
    let mut pmf = (-lambda).exp();
    let mut total = pmf;
    let mut mass = pmf;
    let mut k = 0u32;
    while 1.0 - mass > 1e-17 && k < 200 {
        k += 1;
        pmf *= lambda / k as f64;
        mass += pmf;
        total += pmf / (1 + k) as f64;
    }
    Ok(total)
}

/// Exact `E[1/(1 + max(B1, B2))]` with `B1, B2` iid `Bin(n − 1, b/n)`.
pub fn optimality_limit_exact(n: u64, b: f64) -> Result<f64> {
    check_b(b)?;
    if n < 2 {
        return Err(CrsError::parameter("n must be at least 2"));
    }
    let p = b / n as f64;
    let mut cdf = Vec::with_capacity(n as usize);
    let mut pmf = ((n - 1) as f64 * (-p).ln_1p()).exp();
    let mut acc = pmf;
    cdf.push(acc);
    if p < 1.0 {
        let ratio = p / (1.0 - p);
        for k in 0..n - 1 {
            pmf *= (n - 1 - k) as f64 / (k + 1) as f64 * ratio;
            acc += pmf;
            cdf.push(acc);
        }
    }
    Ok(max_series(cdf.into_iter()))
}

/// Result of [`optimality_limit`]: exact for small `n`, otherwise a Monte Carlo mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

pub fn optimality_limit(n: u64, b: f64, trials: u64, r: &RngStream) -> Result<LimitEstimate> {
    check_b(b)?;
    if n < 2 {
        return Err(CrsError::parameter("n must be at least 2"));
    }
    if n <= EXACT_LIMIT_N {
        return Ok(LimitEstimate {
            value: optimality_limit_exact(n, b)?,
            std_error: 0.0,
            exact: true,
        });
    }
    if trials == 0 {
        return Err(CrsError::parameter("trials must be positive"));
    }
    let table = CdfTable::binomial(n - 1, b / n as f64);
    let m = run_trials(trials, r, 1, |rs, out| {
        let a = table.sample(rs);
        let c = table.sample(rs);
        out[0] = 1.0 / (1 + a.max(c)) as f64;
        Ok(())
    })?;
    Ok(LimitEstimate {
        value: m.mean(0),
        std_error: m.std_error(0),
        exact: false,
    })
}

/// Named instance families.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    Knn {
        n: usize,
        b: f64,
    },
    Fig5Star {
        eps: f64,
        k: usize,
    },
    Path3 {
        eps: f64,
    },
    RandomBipartite {
        n: usize,
        density: f64,
        b: f64,
        seed: u64,
    },
    RandomGeneral {
        n: usize,
        density: f64,
        b: f64,
        seed: u64,
    },
    File(PathBuf),
}

fn parse_list(s: &str, count: usize, kind: &str) -> Result<Vec<String>> {
    let parts: Vec<String> = s.split(',').map(|p| p.trim().to_string()).collect();
    if parts.len() != count {
        return Err(CrsError::input(format!(
            "instance kind '{kind}' expects {count} parameters, got '{s}'"
        )));
    }
    Ok(parts)
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| CrsError::input(format!("cannot parse {what} from '{s}'")))
}

impl FromStr for InstanceSpec {
    type Err = CrsError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').ok_or_else(|| {
            CrsError::input(format!(
                "instance spec '{s}' is not of the form kind:params"
            ))
        })?;
        let kind = kind.trim().to_ascii_lowercase();
        Ok(match kind.as_str() {
            "knn" => {
                let p = parse_list(params, 2, &kind)?;
                InstanceSpec::Knn {
                    n: num(&p[0], "n")?,
                    b: num(&p[1], "b")?,
                }
            }
            "fig5" => {
                let p = parse_list(params, 2, &kind)?;
                InstanceSpec::Fig5Star {
                    eps: num(&p[0], "eps")?,
                    k: num(&p[1], "k")?,
                }
            }
            "path3" => {
                let p = parse_list(params, 1, &kind)?;
                InstanceSpec::Path3 {
                    eps: num(&p[0], "eps")?,
                }
            }
            "randbip" | "randgen" => {
                let p = parse_list(params, 4, &kind)?;
                let (n, density, b, seed) = (
                    num(&p[0], "n")?,
                    num(&p[1], "density")?,
                    num(&p[2], "b")?,
                    num(&p[3], "seed")?,
                );
                if kind == "randbip" {
                    InstanceSpec::RandomBipartite {
                        n,
                        density,
                        b,
                        seed,
                    }
                } else {
                    InstanceSpec::RandomGeneral {
                        n,
                        density,
                        b,
                        seed,
                    }
                }
            }
            "file" => InstanceSpec::File(PathBuf::from(params)),
            other => return Err(CrsError::input(format!("unknown instance kind '{other}'"))),
        })
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSpec::Knn { n, b } => write!(f, "knn:{n},{b}"),
            InstanceSpec::Fig5Star { eps, k } => write!(f, "fig5:{eps},{k}"),
            InstanceSpec::Path3 { eps } => write!(f, "path3:{eps}"),
            InstanceSpec::RandomBipartite {
                n,
                density,
                b,
                seed,
            } => {
                write!(f, "randbip:{n},{density},{b},{seed}")
            }
            InstanceSpec::RandomGeneral {
                n,
                density,
                b,
                seed,
            } => {
                write!(f, "randgen:{n},{density},{b},{seed}")
            }
            InstanceSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn open_unit(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CrsError::input(format!(
            "{what} must lie in (0, 1), got {v}"
        )))
    }
}

/// Scales random weights so the heaviest vertex load equals `b`.
fn scaled_weights(g: &Multigraph, b: f64, r: &mut RngStream) -> Vec<f64> {
    let w: Vec<f64> = (0..g.edge_count()).map(|_| r.uniform_open()).collect();
    let max_load = (0..g.vertex_count())
        .map(|v| g.load(&w, v))
        .fold(0.0, f64::max);
    if max_load == 0.0 {
        return w;
    }
    w.iter().map(|&x| (x * b / max_load).min(1.0)).collect()
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    match *spec {
        InstanceSpec::Knn { n, b } => {
            if n == 0 {
                return Err(CrsError::input("knn needs n ≥ 1"));
            }
            check_b(b).map_err(|_| CrsError::input(format!("knn needs 0 ≤ b ≤ 1, got {b}")))?;
            let ends = (0..n).flat_map(|i| (0..n).map(move |j| (i, n + j)));
            let g = Multigraph::new(2 * n, ends)?;
            let x = FractionalPoint::new(vec![b / n as f64; n * n])?;
            Instance::new(g, x, Some((0..n).collect()))
        }
        InstanceSpec::Fig5Star { eps, k } => {
            open_unit(eps, "eps")?;
            if k == 0 {
                return Err(CrsError::input("fig5 needs k ≥ 1"));
            }
            // u = 0, v = 1, u's other neighbor = 2, v's other neighbors = 3..3+k.
            let mut ends = vec![(0, 1), (0, 2)];
            let mut xs = vec![eps, 1.0 - eps];
            for i in 0..k {
                ends.push((1, 3 + i));
                xs.push((1.0 - eps) / k as f64);
            }
            let g = Multigraph::new(3 + k, ends)?;
            let side_u = std::iter::once(0).chain(3..3 + k).collect();
            Instance::new(g, FractionalPoint::new(xs)?, Some(side_u))
        }
        InstanceSpec::Path3 { eps } => {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(CrsError::input(format!(
                    "path3 needs 0 < eps ≤ 1, got {eps}"
                )));
            }
            let g = Multigraph::new(4, [(0, 1), (1, 2), (2, 3)])?;
            let x = FractionalPoint::new(vec![1.0 - eps, eps, 1.0 - eps])?;
            Instance::new(g, x, Some(vec![0, 2]))
        }
        InstanceSpec::RandomBipartite {
            n,
            density,
            b,
            seed,
        } => {
            random_params(n, density, b)?;
            let mut r = RngStream::new(seed, 0);
            let mut ends = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if r.bernoulli(density) {
                        ends.push((i, n + j));
                    }
                }
            }
            let g = Multigraph::new(2 * n, ends)?;
            let x = scaled_weights(&g, b, &mut r);
            Instance::new(g, FractionalPoint::new(x)?, Some((0..n).collect()))
        }
        InstanceSpec::RandomGeneral {
            n,
            density,
            b,
            seed,
        } => {
            random_params(n, density, b)?;
            let mut r = RngStream::new(seed, 0);
            let mut ends = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if r.bernoulli(density) {
                        ends.push((i, j));
                    }
                }
            }
            let g = Multigraph::new(n, ends)?;
            // Two thirds of the degree polytope sits inside the matching polytope.
            let x = scaled_weights(&g, b, &mut r)
                .into_iter()
                .map(|v| v * 2.0 / 3.0)
                .collect();
            Instance::new(g, FractionalPoint::new(x)?, None)
        }
        InstanceSpec::File(ref path) => Instance::load(path),
    }
}

fn random_params(n: usize, density: f64, b: f64) -> Result<()> {
    if n == 0 {
        return Err(CrsError::input("random instances need n ≥ 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(CrsError::input(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    check_b(b).map_err(|e| CrsError::input(e.to_string()))
}

/// How per-trial observations of `y_e / x_e` are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Average of `y^{R(x)}_e / x_e` over independent full runs.
    Direct,
    /// Per trial, the marginal of `e` with `e` forced into the input (schemes), or the
    /// Poisson size-biased form `E[h(q + 1_e)]` (merged variants). Same expectation, far
    /// smaller variance for small `x_e`.
    #[default]
    Conditional,
}

/// Monte Carlo balancedness with 99% normal confidence intervals.
pub fn estimate_balancedness(
    procedure: Procedure,
    g: &Multigraph,
    x: &FractionalPoint,
    trials: u64,
    r: &RngStream,
    estimator: Estimator,
) -> Result<BalancednessReport> {
    x.check_graph(g)?;
    if trials < MIN_TRIALS {
        return Err(CrsError::parameter(format!(
            "at least {MIN_TRIALS} trials are required, got {trials}"
        )));
    }
    let kind = procedure.kind();
    if kind.requires_bipartite() && !g.is_bipartite() {
        return Err(CrsError::capability("scheme requires a bipartite graph"));
    }
    if let Procedure::Merged(k) = procedure {
        if !k.supports_merged() {
            return Err(CrsError::parameter(format!("{k:?} has no merged variant")));
        }
    }
    let supp = x.support();
    let moments = match estimator {
        Estimator::Direct => run_trials(trials, r, supp.len(), |rs, out| {
            let y = procedure_marginals(procedure, g, x, rs)?;
            for (i, &e) in supp.iter().enumerate() {
                out[i] = y[e] / x.get(e);
            }
            Ok(())
        })?,
        Estimator::Conditional => {
            let ctx = ConditionalContext::new(procedure, g, x)?;
            run_trials(trials, r, supp.len(), |rs, out| {
                ctx.trial(rs, &supp, out);
                Ok(())
            })?
        }
    };
    let edges = supp
        .iter()
        .enumerate()
        .map(|(i, &edge)| {
            let se = moments.std_error(i);
            EdgeBalance {
                edge,
                value: moments.mean(i),
                half_width: Some(Z99 * se),
                std_error: Some(se),
            }
        })
        .collect();
    Ok(BalancednessReport::build(
        edges,
        EstimateMode::MonteCarlo,
        0.0,
        Some(trials),
    ))
}

/// Union-find with parity, tracking whether each component is bipartite.
struct ParityUnionFind {
    parent: Vec<usize>,
    parity: Vec<bool>,
    bipartite: Vec<bool>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        ParityUnionFind {
            parent: (0..n).collect(),
            parity: vec![false; n],
            bipartite: vec![true; n],
        }
    }

    fn find(&mut self, v: usize) -> (usize, bool) {
        let mut root = v;
        let mut par = false;
        while self.parent[root] != root {
            par ^= self.parity[root];
            root = self.parent[root];
        }
        // Path compression with parity bookkeeping.
        let mut cur = v;
        let mut cur_par = par;
        while self.parent[cur] != root && cur != root {
            let next = self.parent[cur];
            let next_par = cur_par ^ self.parity[cur];
            self.parent[cur] = root;
            self.parity[cur] = cur_par;
            cur = next;
            cur_par = next_par;
        }
        (root, par)
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            if pa == pb {
                self.bipartite[ra] = false;
            }
        } else {
            self.parent[rb] = ra;
            self.parity[rb] = !(pa ^ pb);
            self.bipartite[ra] = self.bipartite[ra] && self.bipartite[rb];
        }
    }

    /// Whether the component containing `a` and `b` stays bipartite after adding edge `ab`.
    fn bipartite_with(&mut self, a: usize, b: usize) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            self.bipartite[ra] && pa != pb
        } else {
            self.bipartite[ra] && self.bipartite[rb]
        }
    }

    fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
        self.parity.iter_mut().for_each(|p| *p = false);
        self.bipartite.iter_mut().for_each(|b| *b = true);
    }
}

/// Precomputed per-edge tables for the conditional estimator.
struct ConditionalContext<'a> {
    procedure: Procedure,
    g: &'a Multigraph,
    x: &'a [f64],
    poisson: Vec<CdfTable>,
    geq1: Vec<Option<CdfTable>>,
    keep: Vec<f64>,
}

impl<'a> ConditionalContext<'a> {
    fn new(procedure: Procedure, g: &'a Multigraph, x: &'a FractionalPoint) -> Result<Self> {
        let xv = x.values();
        Ok(ConditionalContext {
            procedure,
            g,
            x: xv,
            poisson: xv.iter().map(|&v| CdfTable::poisson(v)).collect(),
            geq1: xv
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        CdfTable::poisson_geq1(v).ok()
                    } else {
                        None
                    }
                })
                .collect(),
            keep: xv.iter().map(|&v| keep_probability(v)).collect(),
        })
    }

    fn trial(&self, r: &mut RngStream, supp: &[EdgeId], out: &mut [f64]) {
        match self.procedure {
            Procedure::Merged(kind) => self.merged_trial(kind, r, supp, out),
            Procedure::Cr(kind) => self.cr_trial(kind, r, supp, out),
        }
    }

    fn merged_trial(&self, kind: SchemeKind, r: &mut RngStream, supp: &[EdgeId], out: &mut [f64]) {
        let g = self.g;
        let m = g.edge_count();
        let q: Vec<u64> = (0..m).map(|e| self.poisson[e].sample(r)).collect();
        let mut s = vec![0u64; g.vertex_count()];
        let mut c = vec![0u64; g.parallel_class_count()];
        for (e, edge) in g.edges().iter().enumerate() {
            s[edge.u] += q[e];
            s[edge.v] += q[e];
            c[g.parallel_class(e)] += q[e];
        }
        let mut uf = None;
        if kind == SchemeKind::Mixed {
            let mut u = ParityUnionFind::new(g.vertex_count());
            for (e, edge) in g.edges().iter().enumerate() {
                if q[e] > 0 {
                    u.union(edge.u, edge.v);
                }
            }
            uf = Some(u);
        }
        for (i, &e) in supp.iter().enumerate() {
            let edge = g.edge(e);
            let (su, sv) = (s[edge.u] + 1, s[edge.v] + 1);
            let sum = su + sv - (c[g.parallel_class(e)] + 1);
            let use_max = match kind {
                SchemeKind::BipPoisson => true,
                SchemeKind::GenPoisson => false,
                _ => uf.as_mut().unwrap().bipartite_with(edge.u, edge.v),
            };
            out[i] = 1.0 / if use_max { su.max(sv) } else { sum } as f64;
        }
    }

    fn cr_trial(&self, kind: SchemeKind, r: &mut RngStream, supp: &[EdgeId], out: &mut [f64]) {
        let g = self.g;
        let m = g.edge_count();
        let n = g.vertex_count();
        let in_r: Vec<bool> = (0..m).map(|e| r.bernoulli(self.x[e])).collect();
        match kind {
            SchemeKind::BipSimple | SchemeKind::GenRandomOrder | SchemeKind::RefIsolated => {
                let coin: Vec<bool> = if kind == SchemeKind::RefIsolated {
                    (0..m).map(|_| r.bernoulli(0.5)).collect()
                } else {
                    vec![true; m]
                };
                let active: Vec<bool> = (0..m).map(|e| in_r[e] && coin[e]).collect();
                let mut d = vec![0u64; n];
                let mut c = vec![0u64; g.parallel_class_count()];
                for (e, edge) in g.edges().iter().enumerate() {
                    if active[e] {
                        d[edge.u] += 1;
                        d[edge.v] += 1;
                        c[g.parallel_class(e)] += 1;
                    }
                }
                for (i, &e) in supp.iter().enumerate() {
                    let edge = g.edge(e);
                    let add = (!active[e]) as u64;
                    let (du, dv) = (d[edge.u] + add, d[edge.v] + add);
                    let union = du + dv - (c[g.parallel_class(e)] + add);
                    out[i] = match kind {
                        SchemeKind::BipSimple => 1.0 / du.max(dv) as f64,
                        SchemeKind::GenRandomOrder => 1.0 / union as f64,
                        _ => (coin[e] && union == 1) as u8 as f64,
                    };
                }
            }
            _ => {
                let sides: Vec<bool> = if kind == SchemeKind::RefBipartition {
                    (0..n).map(|_| r.bernoulli(0.5)).collect()
                } else {
                    Vec::new()
                };
                let eligible = |e: usize| {
                    kind != SchemeKind::RefBipartition || {
                        let edge = g.edge(e);
                        sides[edge.u] != sides[edge.v]
                    }
                };
                let keep: Vec<bool> = (0..m).map(|e| r.bernoulli(self.keep[e])).collect();
                let qc: Vec<u64> = (0..m)
                    .map(|e| self.geq1[e].as_ref().map_or(0, |t| t.sample(r)))
                    .collect();
                let in_bar: Vec<bool> = (0..m).map(|e| in_r[e] && keep[e] && eligible(e)).collect();
                let mut s = vec![0u64; n];
                let mut c = vec![0u64; g.parallel_class_count()];
                let mut uf = ParityUnionFind::new(if kind == SchemeKind::Mixed { n } else { 0 });
                uf.reset();
                for (e, edge) in g.edges().iter().enumerate() {
                    if in_bar[e] {
                        s[edge.u] += qc[e];
                        s[edge.v] += qc[e];
                        c[g.parallel_class(e)] += qc[e];
                        if kind == SchemeKind::Mixed {
                            uf.union(edge.u, edge.v);
                        }
                    }
                }
                for (i, &e) in supp.iter().enumerate() {
                    if !(keep[e] && eligible(e)) {
                        out[i] = 0.0;
                        continue;
                    }
                    let edge = g.edge(e);
                    let add = if in_bar[e] { 0 } else { qc[e] };
                    let (su, sv) = (s[edge.u] + add, s[edge.v] + add);
                    let sum = su + sv - (c[g.parallel_class(e)] + add);
                    let qe = qc[e] as f64;
                    out[i] = match kind {
                        SchemeKind::GenPoisson => qe / sum as f64,
                        SchemeKind::Mixed => {
                            if uf.bipartite_with(edge.u, edge.v) {
                                qe / su.max(sv) as f64
                            } else {
                                qe / sum as f64
                            }
                        }
                        SchemeKind::RefScaledTwoThirds => 2.0 / 3.0 * qe / su.max(sv) as f64,
                        _ => qe / su.max(sv) as f64,
                    };
                }
            }
        }
    }
}
