use serde::Serialize;

use crate::error::{CrsError, Result};
use crate::graph::{EdgeId, FractionalPoint, Multigraph, VertexId};
use crate::mc::run_trials;
use crate::rng::{keep_probability, RngStream};

const HYPOTHESIS_TOL: f64 = 1e-9;
const SIDE_TARGET: f64 = 0.33;

/// Splits `V ∖ {u, v}` into `(V_u, V_v)` with `x(E_{u,V_u}) ≥ 0.33` and `x(E_{v,V_v}) ≥ 0.33`.
pub fn greedy_partition(
    g: &Multigraph,
    x: &FractionalPoint,
    e: EdgeId,
) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    x.check_graph(g)?;
    g.check_edge(e)?;
    let edge = g.edge(e);
    let (u, v) = (edge.u, edge.v);
    let xv = x.values();
    let between: f64 = g.edges_between(u, v)?.iter().map(|&f| xv[f]).sum();
    let out_u = g.load(xv, u) - between;
    let out_v = g.load(xv, v) - between;
    if out_u < 0.99 - HYPOTHESIS_TOL {
        return Err(CrsError::input(format!(
            "hypothesis x(δ(u) ∖ E_uv) ≥ 0.99 fails: {out_u}"
        )));
    }
    if out_v < 0.99 - HYPOTHESIS_TOL {
        return Err(CrsError::input(format!(
            "hypothesis x(δ(v) ∖ E_uv) ≥ 0.99 fails: {out_v}"
        )));
    }
    if between > 0.01 + HYPOTHESIS_TOL {
        return Err(CrsError::input(format!(
            "hypothesis x(E_uv) ≤ 0.01 fails: {between}"
        )));
    }
    let n = g.vertex_count();
    let mut to_u = vec![0.0; n];
    let mut to_v = vec![0.0; n];
    for (f, fe) in g.edges().iter().enumerate() {
        if fe.touches(u) && !fe.touches(v) {
            to_u[fe.other(u)] += xv[f];
        } else if fe.touches(v) && !fe.touches(u) {
            to_v[fe.other(v)] += xv[f];
        }
    }
    let mut order: Vec<VertexId> = (0..n).filter(|&w| w != u && w != v).collect();
    order.sort_by(|&a, &b| {
        (to_u[b] + to_v[b])
            .partial_cmp(&(to_u[a] + to_v[a]))
            .unwrap()
            .then(a.cmp(&b))
    });
    let (mut vu, mut vv) = (Vec::new(), Vec::new());
    let (mut load_u, mut load_v) = (0.0, 0.0);
    let mut rest_to: Option<bool> = None;
    for w in order {
        let to_u_side = match rest_to {
            Some(side) => side,
            None => to_u[w] >= to_v[w],
        };
        if to_u_side {
            vu.push(w);
            load_u += to_u[w];
        } else {
            vv.push(w);
            load_v += to_v[w];
        }
        if rest_to.is_none() {
            if load_u >= SIDE_TARGET {
                rest_to = Some(false);
            } else if load_v >= SIDE_TARGET {
                rest_to = Some(true);
            }
        }
    }
    vu.sort_unstable();
    vv.sort_unstable();
    Ok((vu, vv))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathEventEstimate {
    pub trials: u64,
    /// Frequency of: `e` survives, its component is a 3-edge path with `e` in the middle,
    /// and all three intensities equal 1.
    pub event_c: f64,
    pub event_c_std_error: f64,
    /// Frequency of the stronger partition-based event.
    pub event_d: f64,
    pub event_d_std_error: f64,
    /// Trials where the stronger event held but the path event did not (must be 0).
    pub d_without_c: u64,
    pub side_loads: (f64, f64),
    /// `0.33² e^{-4}`.
    pub analytic_floor: f64,
}

/// Monte Carlo estimate of the path events conditioned on `e ∈ R(x)`, using the merged
/// formulation: `q_g ~ Pois(x_g)` for `g ≠ e`, and `q_e` the subsample-then-conditioned draw.
pub fn path_event_probability(
    g: &Multigraph,
    x: &FractionalPoint,
    e: EdgeId,
    trials: u64,
    r: &RngStream,
) -> Result<PathEventEstimate> {
    let (vu, _vv) = greedy_partition(g, x, e)?;
    if trials == 0 {
        return Err(CrsError::parameter("trials must be positive"));
    }
    let edge = g.edge(e);
    let (u, v) = (edge.u, edge.v);
    let n = g.vertex_count();
    let mut on_u_side = vec![false; n];
    for &w in &vu {
        on_u_side[w] = true;
    }
    let xv = x.values();
    let side_u: f64 = g
        .incident(u)
        .iter()
        .filter(|&&f| !g.edge(f).touches(v) && on_u_side[g.edge(f).other(u)])
        .map(|&f| xv[f])
        .sum();
    let side_v: f64 = g
        .incident(v)
        .iter()
        .filter(|&&f| !g.edge(f).touches(u) && !on_u_side[g.edge(f).other(v)])
        .map(|&f| xv[f])
        .sum();
    let keep_e = keep_probability(xv[e]);
    let m = g.edge_count();
    let counts = run_trials(trials, r, 3, |rs, out| {
        let mut q = vec![0u64; m];
        for f in 0..m {
            q[f] = if f == e {
                if rs.bernoulli(keep_e) {
                    rs.poisson_geq1(xv[e])?
                } else {
                    0
                }
            } else {
                rs.poisson(xv[f])
            };
        }
        let c = event_c(g, &q, e);
        let d = event_d(g, &q, e, &on_u_side);
        out[0] = c as u8 as f64;
        out[1] = d as u8 as f64;
        out[2] = (d && !c) as u8 as f64;
        Ok(())
    })?;
    Ok(PathEventEstimate {
        trials,
        event_c: counts.mean(0),
        event_c_std_error: counts.std_error(0),
        event_d: counts.mean(1),
        event_d_std_error: counts.std_error(1),
        d_without_c: counts.total(2).round() as u64,
        side_loads: (side_u, side_v),
        analytic_floor: SIDE_TARGET * SIDE_TARGET * (-4.0f64).exp(),
    })
}

fn active_incident(g: &Multigraph, q: &[u64], w: VertexId) -> Vec<EdgeId> {
    g.incident(w)
        .iter()
        .copied()
        .filter(|&f| q[f] > 0)
        .collect()
}

fn event_c(g: &Multigraph, q: &[u64], e: EdgeId) -> bool {
    if q[e] != 1 {
        return false;
    }
    let edge = g.edge(e);
    let at_u = active_incident(g, q, edge.u);
    let at_v = active_incident(g, q, edge.v);
    if at_u.len() != 2 || at_v.len() != 2 {
        return false;
    }
    let gu = *at_u.iter().find(|&&f| f != e).unwrap();
    let hv = *at_v.iter().find(|&&f| f != e).unwrap();
    let up = g.edge(gu).other(edge.u);
    let vp = g.edge(hv).other(edge.v);
    if up == edge.v || vp == edge.u || up == vp {
        return false;
    }
    q[gu] == 1
        && q[hv] == 1
        && active_incident(g, q, up).len() == 1
        && active_incident(g, q, vp).len() == 1
}

fn event_d(g: &Multigraph, q: &[u64], e: EdgeId, on_u_side: &[bool]) -> bool {
    let edge = g.edge(e);
    let (u, v) = (edge.u, edge.v);
    if q[e] != 1 {
        return false;
    }
    let mut to_own = (0u64, 0u64);
    let mut own_edge = (None, None);
    for &f in g.incident(u) {
        if f == e || q[f] == 0 {
            continue;
        }
        let w = g.edge(f).other(u);
        if w == v {
            return false;
        }
        if !on_u_side[w] {
            return false;
        }
        to_own.0 += q[f];
        own_edge.0 = Some(f);
    }
    for &f in g.incident(v) {
        if f == e || q[f] == 0 {
            continue;
        }
        let w = g.edge(f).other(v);
        if w == u {
            return false;
        }
        if on_u_side[w] {
            return false;
        }
        to_own.1 += q[f];
        own_edge.1 = Some(f);
    }
    if to_own != (1, 1) {
        return false;
    }
    let (eu, ev) = (own_edge.0.unwrap(), own_edge.1.unwrap());
    let up = g.edge(eu).other(u);
    let vp = g.edge(ev).other(v);
    g.incident(up).iter().all(|&f| f == eu || q[f] == 0)
        && g.incident(vp).iter().all(|&f| f == ev || q[f] == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_star(mid: f64, pendant: f64) -> (Multigraph, FractionalPoint) {
        let mut ends = vec![(0, 1)];
        let mut xs = vec![mid];
        for i in 0..10 {
            ends.push((0, 2 + i));
            xs.push(pendant);
        }
        for i in 0..10 {
            ends.push((1, 12 + i));
            xs.push(pendant);
        }
        (
            Multigraph::new(22, ends).unwrap(),
            FractionalPoint::new(xs).unwrap(),
        )
    }

    #[test]
    fn partition_of_symmetric_double_star() {
        let (g, x) = double_star(0.01, 0.099);
        let (vu, vv) = greedy_partition(&g, &x, 0).unwrap();
        assert_eq!(vu.len() + vv.len(), 20);
        let side = |set: &[usize], hub: usize| -> f64 {
            set.iter()
                .flat_map(|&w| g.edges_between(hub, w).unwrap())
                .map(|f| x.get(f))
                .sum()
        };
        assert!(side(&vu, 0) >= 0.33);
        assert!(side(&vv, 1) >= 0.33);
    }

    #[test]
    fn hypotheses_are_checked() {
        let (g, x) = double_star(0.5, 0.05);
        let err = greedy_partition(&g, &x, 0).unwrap_err().to_string();
        assert!(err.contains("0.99"), "{err}");
        let (g, x) = double_star(0.02, 0.099);
        let err = greedy_partition(&g, &x, 0).unwrap_err().to_string();
        assert!(err.contains("E_uv"), "{err}");
    }

    #[test]
    fn stronger_event_implies_path_event() {
        let (g, x) = double_star(0.01, 0.099);
        let est = path_event_probability(&g, &x, 0, 20_000, &RngStream::new(1, 0)).unwrap();
        assert_eq!(est.d_without_c, 0);
        assert!(est.event_d <= est.event_c);
    }
}
