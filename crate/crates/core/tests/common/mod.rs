#![allow(dead_code)]

use crs_core::graph::{FractionalPoint, Multigraph};
use crs_core::rng::RngStream;

pub struct Case {
    pub name: &'static str,
    pub graph: Multigraph,
    pub x: FractionalPoint,
}

fn case(name: &'static str, n: usize, ends: &[(usize, usize)], xs: &[f64]) -> Case {
    Case {
        name,
        graph: Multigraph::new(n, ends.iter().copied()).unwrap(),
        x: FractionalPoint::new(xs.to_vec()).unwrap(),
    }
}

/// Small instances inside the matching polytope, each with at most 8 edges.
pub fn battery() -> Vec<Case> {
    let third = 1.0 / 3.0;
    let mut out = vec![
        case("single-edge", 2, &[(0, 1)], &[1.0]),
        case("path3-0.1", 4, &[(0, 1), (1, 2), (2, 3)], &[0.9, 0.1, 0.9]),
        case("path3-0.5", 4, &[(0, 1), (1, 2), (2, 3)], &[0.5, 0.5, 0.5]),
        case("k22-half", 4, &[(0, 2), (0, 3), (1, 2), (1, 3)], &[0.5; 4]),
        case("star3", 4, &[(0, 1), (0, 2), (0, 3)], &[third; 3]),
        case("parallel3", 2, &[(0, 1), (0, 1), (0, 1)], &[0.3, 0.3, 0.3]),
        case(
            "parallel-path",
            4,
            &[(0, 1), (0, 1), (1, 2), (2, 3)],
            &[0.4, 0.3, 0.3, 0.6],
        ),
        case("triangle", 3, &[(0, 1), (1, 2), (0, 2)], &[third; 3]),
        case(
            "c5",
            5,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)],
            &[0.4; 5],
        ),
        case(
            "bowtie",
            5,
            &[(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)],
            &[0.25; 6],
        ),
        case(
            "k4",
            4,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            &[third; 6],
        ),
        case(
            "c6-chord",
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (0, 3)],
            &[0.3, 0.6, 0.3, 0.6, 0.3, 0.4, 0.3],
        ),
    ];
    out.push(random_case("random-bipartite", true, 8, 11));
    out.push(random_case("random-general", false, 8, 12));
    out
}

/// A random instance with `m` edges; general graphs are scaled into two thirds of the
/// degree polytope, which lies inside the matching polytope.
pub fn random_case(name: &'static str, bipartite: bool, m: usize, seed: u64) -> Case {
    let mut r = RngStream::new(seed, 77);
    let (n, ends): (usize, Vec<(usize, usize)>) = if bipartite {
        let n = 4;
        (
            2 * n,
            (0..m).map(|_| (r.index(n), n + r.index(n))).collect(),
        )
    } else {
        let n = 6;
        (
            n,
            (0..m)
                .map(|_| loop {
                    let (a, b) = (r.index(n), r.index(n));
                    if a != b {
                        break (a, b);
                    }
                })
                .collect(),
        )
    };
    let g = Multigraph::new(n, ends.iter().copied()).unwrap();
    let w: Vec<f64> = (0..m).map(|_| 0.1 + r.uniform()).collect();
    let max_load = (0..n).map(|v| g.load(&w, v)).fold(0.0, f64::max);
    let scale = if bipartite { 1.0 } else { 2.0 / 3.0 };
    let xs: Vec<f64> = w.iter().map(|v| (v / max_load * scale).min(1.0)).collect();
    Case {
        name,
        graph: g,
        x: FractionalPoint::new(xs).unwrap(),
    }
}
