//! Worked examples across modules, checked against closed forms and hand-computed instances.

mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crs_core::analytics::{
    beta, estimate_balancedness, gamma, generate_instance, optimality_limit, Estimator,
    InstanceSpec,
};
use crs_core::graph::{EdgeSet, FractionalPoint, Multigraph};
use crs_core::mc::run_trials;
use crs_core::oracle::{
    check_monotone_family, exact_balancedness, exact_expected_marginals, sibling_lift, split_edge,
    verify_monotonicity, MonotonicityMode,
};
use crs_core::rng::{draw, independent_round, subsample, Distribution, RngStream};
use crs_core::sampler::{birkhoff_decompose, random_order_matching, resolve};
use crs_core::schemes::{
    bip_simple_marginals, gen_random_order_marginals, marginals, max_formula, merged_marginals,
    mixed_formula, sum_formula, Procedure, SchemeKind,
};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Bipartite instance with sides u1..u4 (0..3) and v1..v5 (4..8); the last two edges
/// (u2v1, u4v4) are outside the input set.
fn bipartite_witness() -> (Multigraph, FractionalPoint, EdgeSet) {
    let (u, v) = (|i: usize| i - 1, |j: usize| 3 + j);
    let ends = [
        (u(1), v(1)),
        (u(1), v(2)),
        (u(1), v(4)),
        (u(2), v(2)),
        (u(3), v(2)),
        (u(3), v(3)),
        (u(3), v(4)),
        (u(4), v(5)),
        (u(2), v(1)),
        (u(4), v(4)),
    ];
    let g = Multigraph::new(9, ends).unwrap();
    let x = FractionalPoint::new(vec![1.0 / 3.0; 10]).unwrap();
    let a = EdgeSet::from_ids(10, &[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
    (g, x, a)
}

/// Non-bipartite instance on u1..u3, v1..v3, w (0..6); edges u1u2 and v1w are outside the input.
fn general_witness() -> (Multigraph, FractionalPoint, EdgeSet, Vec<f64>) {
    let ends = [
        (0, 1),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 5),
        (2, 6),
        (3, 4),
        (3, 6),
        (4, 5),
        (4, 6),
        (5, 6),
    ];
    let g = Multigraph::new(7, ends).unwrap();
    let x = FractionalPoint::new(vec![0.2; 11]).unwrap();
    let a = EdgeSet::from_ids(11, &[1, 2, 3, 4, 5, 6, 8, 9, 10]).unwrap();
    let y = vec![
        0.0,
        1.0 / 3.0,
        0.25,
        0.25,
        0.2,
        0.2,
        0.2,
        0.0,
        0.2,
        0.2,
        0.2,
    ];
    (g, x, a, y)
}

#[test]
fn bipartite_witness_marginals_and_decomposition() {
    let (g, x, a) = bipartite_witness();
    let y = bip_simple_marginals(&g, &x, &a).unwrap();
    let third = 1.0 / 3.0;
    assert_eq!(
        y,
        vec![third, third, third, third, third, third, third, 1.0, 0.0, 0.0]
    );

    let yr: Vec<BigRational> = y
        .iter()
        .map(|&v| {
            if v == 1.0 {
                rat(1, 1)
            } else if v == 0.0 {
                rat(0, 1)
            } else {
                rat(1, 3)
            }
        })
        .collect();
    let comb = birkhoff_decompose(&g, &yr).unwrap();
    assert_eq!(comb.reconstruct(10), yr);
    assert_eq!(comb.total_weight(), BigRational::one());
    assert!(comb.terms.len() <= 9);
    for (_, m) in &comb.terms {
        assert!(g.is_matching(m).unwrap());
        assert!(m.iter().all(|&e| a.contains(e)));
        // The pendant edge has marginal 1, so every term uses it.
        assert!(m.contains(&7));
    }
}

#[test]
fn general_witness_random_order_marginals() {
    let (g, x, a, expected) = general_witness();
    let y = gen_random_order_marginals(&g, &x, &a).unwrap();
    for (got, want) in y.iter().zip(&expected) {
        assert!((got - want).abs() < 1e-15, "{y:?}");
    }
    let freq = run_trials(200_000, &RngStream::new(40, 0), 11, |rs, out| {
        for e in random_order_matching(&g, &a, rs) {
            out[e] = 1.0;
        }
        Ok(())
    })
    .unwrap();
    for (e, want) in expected.iter().enumerate() {
        let z = (freq.mean(e) - want) / freq.std_error(e).max(1e-12);
        assert!(z.abs() < 4.5, "edge {e}: {} vs {want}", freq.mean(e));
    }
}

#[test]
fn formula_patterns() {
    let tri = Multigraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let path = Multigraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let star = Multigraph::new(3, [(0, 1), (0, 2)]).unwrap();
    assert_eq!(sum_formula(&tri, &[1, 1, 1]), vec![1.0 / 3.0; 3]);
    assert_eq!(mixed_formula(&tri, &[1, 1, 1]), vec![1.0 / 3.0; 3]);
    assert_eq!(sum_formula(&path, &[1, 1, 1]), vec![0.5, 1.0 / 3.0, 0.5]);
    assert_eq!(mixed_formula(&path, &[1, 1, 1]), vec![0.5; 3]);
    assert_eq!(max_formula(&star, &[1, 2]), vec![1.0 / 3.0, 2.0 / 3.0]);
    assert_eq!(sum_formula(&path, &[0, 0, 0]), vec![0.0; 3]);
}

#[test]
fn mixed_matches_bipartite_scheme_on_bipartite_graphs() {
    for seed in 0..20 {
        let case = common::random_case("bip", true, 7, seed);
        let a = EdgeSet::full(case.graph.edge_count());
        let mut r1 = RngStream::new(seed, 9);
        let mut r2 = RngStream::new(seed, 9);
        let y1 = marginals(SchemeKind::Mixed, &case.graph, &case.x, &a, &mut r1).unwrap();
        let y2 = marginals(SchemeKind::BipPoisson, &case.graph, &case.x, &a, &mut r2).unwrap();
        assert_eq!(y1, y2);
    }
}

#[test]
fn merged_variant_matches_two_stage_pipeline() {
    let inst = generate_instance(&InstanceSpec::Path3 { eps: 0.2 }).unwrap();
    let (g, x) = (&inst.graph, &inst.x);
    for kind in [SchemeKind::GenPoisson, SchemeKind::Mixed] {
        let merged = run_trials(400_000, &RngStream::new(41, 0), 3, |rs, out| {
            out.copy_from_slice(&merged_marginals(kind, g, x, rs)?);
            Ok(())
        })
        .unwrap();
        let staged = run_trials(400_000, &RngStream::new(41, 1), 3, |rs, out| {
            let a = independent_round(x, rs);
            out.copy_from_slice(&marginals(kind, g, x, &a, rs)?);
            Ok(())
        })
        .unwrap();
        for e in 0..3 {
            let se = (merged.std_error(e).powi(2) + staged.std_error(e).powi(2)).sqrt();
            let z = (merged.mean(e) - staged.mean(e)) / se;
            assert!(z.abs() < 4.0, "{kind:?} edge {e}: z = {z}");
        }
    }
}

#[test]
fn reference_schemes() {
    let tri = Multigraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let x = FractionalPoint::new(vec![0.5; 3]).unwrap();
    let a = EdgeSet::full(3);
    let rep = exact_balancedness(SchemeKind::RefIsolated, &tri, &x).unwrap();
    assert!(rep.min >= 1.0 / 8.0);
    for case in common::battery() {
        let rep = exact_balancedness(SchemeKind::RefIsolated, &case.graph, &case.x).unwrap();
        assert!(rep.min >= 1.0 / 8.0 - 1e-12, "{}", case.name);
    }
    let mut r = RngStream::new(42, 0);
    for _ in 0..200 {
        let y = marginals(SchemeKind::RefScaledTwoThirds, &tri, &x, &a, &mut r).unwrap();
        assert!(tri.in_matching_polytope(&y, 1.0).unwrap());
    }
    // Each edge crosses a uniform side assignment with probability one half.
    let crossing = run_trials(100_000, &RngStream::new(43, 0), 1, |rs, out| {
        let sides = crs_core::schemes::random_sides(&tri, rs);
        out[0] = (sides[0] != sides[1]) as u8 as f64;
        Ok(())
    })
    .unwrap();
    assert!((crossing.mean(0) - 0.5).abs() < 4.0 * crossing.std_error(0));
}

#[test]
fn distribution_examples() {
    let freq = run_trials(400_000, &RngStream::new(44, 0), 3, |rs, out| {
        out[0] = (draw(Distribution::Poisson(1.0), rs)?.as_f64() == 0.0) as u8 as f64;
        out[1] = (draw(Distribution::PoissonGeq1(1.0), rs)?.as_f64() == 1.0) as u8 as f64;
        let a = draw(Distribution::Exponential(2.0), rs)?.as_f64();
        let b = draw(Distribution::Exponential(3.0), rs)?.as_f64();
        out[2] = (a < b) as u8 as f64;
        Ok(())
    })
    .unwrap();
    let e1 = (-1.0f64).exp();
    for (i, want) in [e1, e1 / (1.0 - e1), 0.4].into_iter().enumerate() {
        assert!(
            (freq.mean(i) - want).abs() < 4.0 * freq.std_error(i),
            "{i}: {}",
            freq.mean(i)
        );
    }
    assert!(draw(Distribution::PoissonGeq1(0.0), &mut RngStream::new(0, 0)).is_err());
}

#[test]
fn subsampling_composes_to_poisson_presence() {
    let x = FractionalPoint::new(vec![1.0, 0.4, 0.05]).unwrap();
    let freq = run_trials(400_000, &RngStream::new(45, 0), 3, |rs, out| {
        let a = independent_round(&x, rs);
        for e in subsample(&a, &x, rs)?.iter() {
            out[e] = 1.0;
        }
        Ok(())
    })
    .unwrap();
    for (e, &xe) in x.values().iter().enumerate() {
        let want = 1.0 - (-xe).exp();
        assert!((freq.mean(e) - want).abs() < 4.0 * freq.std_error(e));
    }
}

#[test]
fn exact_oracle_examples() {
    let single = Multigraph::new(2, [(0, 1)]).unwrap();
    let x1 = FractionalPoint::new(vec![1.0]).unwrap();
    let a = EdgeSet::full(1);
    let y = exact_expected_marginals(SchemeKind::BipPoisson, &single, &x1, &a).unwrap();
    assert!((y[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    for xe in [0.3, 0.7, 1.0] {
        let x = FractionalPoint::new(vec![xe]).unwrap();
        for kind in [
            SchemeKind::BipPoisson,
            SchemeKind::GenPoisson,
            SchemeKind::Mixed,
        ] {
            let c = exact_balancedness(kind, &single, &x).unwrap().min;
            assert!((c - (1.0 - (-xe).exp()) / xe).abs() < 1e-11);
        }
    }

    // K_{2,2} at one half: enumerate the 16 outcomes of R(x) with the degree formula.
    let k22 = Multigraph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
    let x = FractionalPoint::new(vec![0.5; 4]).unwrap();
    let mut brute = 0.0;
    for mask in 0u32..16 {
        if mask & 1 == 0 {
            continue;
        }
        let set = EdgeSet::from_mask((0..4).map(|i| mask >> i & 1 == 1).collect());
        brute += bip_simple_marginals(&k22, &x, &set).unwrap()[0] / 16.0;
    }
    let exact = exact_balancedness(SchemeKind::BipSimple, &k22, &x).unwrap();
    assert!((exact.value(0).unwrap() - brute / 0.5).abs() < 1e-14);
    let mc = estimate_balancedness(
        Procedure::Cr(SchemeKind::BipSimple),
        &k22,
        &x,
        200_000,
        &RngStream::new(46, 0),
        Estimator::Direct,
    )
    .unwrap();
    let e0 = mc.entry(0).unwrap();
    assert!((e0.value - brute / 0.5).abs() < 4.0 * e0.std_error.unwrap());
}

#[test]
fn monotonicity_examples() {
    // Every 3-edge bipartite multigraph on up to 6 vertices, up to relabelling.
    let shapes: [&[(usize, usize)]; 6] = [
        &[(0, 1), (2, 3), (4, 5)],
        &[(0, 1), (0, 2), (3, 4)],
        &[(0, 1), (0, 2), (0, 3)],
        &[(0, 1), (1, 2), (2, 3)],
        &[(0, 1), (0, 1), (0, 2)],
        &[(0, 1), (0, 1), (0, 1)],
    ];
    for ends in shapes {
        let g = Multigraph::new(6, ends.iter().copied()).unwrap();
        let x = FractionalPoint::new(vec![1.0 / 3.0; 3]).unwrap();
        let out = verify_monotonicity(SchemeKind::BipSimple, &g, &x, MonotonicityMode::Exhaustive)
            .unwrap();
        assert!(out.passed(), "{ends:?}");
        let out = verify_monotonicity(SchemeKind::GenPoisson, &g, &x, MonotonicityMode::Exhaustive)
            .unwrap();
        assert!(out.passed(), "{ends:?}");
    }

    // Inverting the degree formula rewards contention and breaks monotonicity.
    let path = Multigraph::new(3, [(0, 1), (1, 2)]).unwrap();
    let inverted = |mask: u32| -> crs_core::Result<Vec<f64>> {
        let deg = |v: usize| {
            path.incident(v)
                .iter()
                .filter(|&&f| mask >> f & 1 == 1)
                .count() as f64
        };
        Ok((0..2)
            .map(|e| {
                if mask >> e & 1 == 0 {
                    return 0.0;
                }
                let edge = path.edge(e);
                let d = deg(edge.u).max(deg(edge.v));
                d / (d + 1.0)
            })
            .collect())
    };
    match check_monotone_family(&[0, 1], MonotonicityMode::Exhaustive, inverted).unwrap() {
        crs_core::oracle::MonotonicityOutcome::Fail(w) => {
            assert!(w.value_larger > w.value_smaller);
            assert!(w.smaller.len() < w.larger.len());
        }
        other => panic!("expected a violation, got {other:?}"),
    }
}

#[test]
fn splitting_examples() {
    let g = Multigraph::new(3, [(0, 1), (1, 2)]).unwrap();
    let x = FractionalPoint::new(vec![0.8, 0.2]).unwrap();
    let same = split_edge(&g, &x, 0, 1).unwrap();
    assert_eq!(same.graph.edges(), g.edges());
    assert_eq!(same.x.values(), x.values());

    let split = split_edge(&g, &x, 0, 4).unwrap();
    assert_eq!(split.siblings.len(), 4);
    for &s in &split.siblings {
        assert!((split.x.get(s) - 0.2).abs() < 1e-15);
    }
    for v in 0..3 {
        assert!((split.graph.load(split.x.values(), v) - g.load(x.values(), v)).abs() < 1e-12);
    }
    for (i, &s) in split.siblings.iter().enumerate() {
        for &t in &split.siblings[i + 1..] {
            assert!(!split.graph.is_matching(&[s, t]).unwrap());
        }
    }

    // Rounding e then lifting gives independent siblings present with probability x_e / k.
    let k = 3;
    let xe = 0.6;
    let g1 = Multigraph::new(2, [(0, 1)]).unwrap();
    let x1 = FractionalPoint::new(vec![xe]).unwrap();
    let split = split_edge(&g1, &x1, 0, k).unwrap();
    let freq = run_trials(400_000, &RngStream::new(47, 0), k + 1, |rs, out| {
        let a = independent_round(&x1, rs);
        let d = sibling_lift(&a, &split, xe, rs)?;
        for (i, &s) in split.siblings.iter().enumerate() {
            out[i] = d.contains(s) as u8 as f64;
        }
        out[k] = (d.contains(split.siblings[0]) && d.contains(split.siblings[1])) as u8 as f64;
        Ok(())
    })
    .unwrap();
    let p = xe / k as f64;
    for i in 0..k {
        assert!((freq.mean(i) - p).abs() < 4.0 * freq.std_error(i));
    }
    assert!((freq.mean(k) - p * p).abs() < 4.0 * freq.std_error(k));
    assert!(sibling_lift(&EdgeSet::full(k), &split, 0.0, &mut RngStream::new(0, 0)).is_err());
}

#[test]
fn resolve_returns_integral_points() {
    let path = Multigraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let x = FractionalPoint::new(vec![1.0, 0.0, 1.0]).unwrap();
    let a = EdgeSet::from_ids(3, &[0, 2]).unwrap();
    let mut r = RngStream::new(48, 0);
    for _ in 0..50 {
        assert_eq!(
            resolve(SchemeKind::BipSimple, &path, &x, &a, &mut r).unwrap(),
            vec![0, 2]
        );
        assert_eq!(
            resolve(SchemeKind::GenRandomOrder, &path, &x, &a, &mut r).unwrap(),
            vec![0, 2]
        );
    }
    let empty = EdgeSet::empty(3);
    for kind in SchemeKind::ALL {
        assert!(resolve(kind, &path, &x, &empty, &mut r).unwrap().is_empty());
    }
}

#[test]
fn analytic_examples() {
    assert_eq!(beta(0.0).unwrap(), 1.0);
    assert_eq!(gamma(0.0).unwrap(), 1.0);
    let mut prev = f64::INFINITY;
    for i in 0..=20 {
        let b = i as f64 / 20.0;
        let (bb, gb) = (beta(b).unwrap(), gamma(b).unwrap());
        assert!(bb <= prev + 1e-15);
        assert!(gb <= bb + 1e-15);
        prev = bb;
    }
    // beta(1/2) by sampling the maximum of two Poisson variables.
    let mc = run_trials(1_000_000, &RngStream::new(49, 0), 1, |rs, out| {
        let m = rs.poisson(0.5).max(rs.poisson(0.5));
        out[0] = 1.0 / (1 + m) as f64;
        Ok(())
    })
    .unwrap();
    assert!((mc.mean(0) - beta(0.5).unwrap()).abs() < 4.0 * mc.std_error(0));

    let two = optimality_limit(2, 1.0, 1000, &RngStream::new(0, 0)).unwrap();
    assert!((two.value - 0.625).abs() < 1e-12);
    assert_eq!(
        optimality_limit(50, 0.0, 1000, &RngStream::new(0, 0))
            .unwrap()
            .value,
        1.0
    );
}

#[test]
fn optimality_limit_decreases_toward_beta() {
    let b1 = beta(1.0).unwrap();
    let mut prev = f64::INFINITY;
    for n in [2, 5, 12, 40, 200] {
        let est = optimality_limit(n, 1.0, 2_000_000, &RngStream::new(50, n)).unwrap();
        let slack = 3.0 * est.std_error;
        assert!(est.value >= b1 - slack, "n = {n}: {}", est.value);
        assert!(
            est.value <= prev + slack,
            "n = {n}: {} after {prev}",
            est.value
        );
        prev = est.value;
    }
}

#[test]
fn generated_instances_have_stated_loads() {
    let knn = generate_instance(&InstanceSpec::Knn { n: 3, b: 1.0 }).unwrap();
    assert_eq!(knn.graph.edge_count(), 9);
    for v in 0..6 {
        assert!((knn.graph.load(knn.x.values(), v) - 1.0).abs() < 1e-12);
    }
    let star = generate_instance(&InstanceSpec::Fig5Star { eps: 0.01, k: 100 }).unwrap();
    for v in [0, 1] {
        assert!((star.graph.load(star.x.values(), v) - 1.0).abs() < 1e-12);
    }
    let path = generate_instance(&InstanceSpec::Path3 { eps: 0.001 }).unwrap();
    let loads: Vec<f64> = (0..4)
        .map(|v| path.graph.load(path.x.values(), v))
        .collect();
    for (got, want) in loads.iter().zip([0.999, 1.0, 1.0, 0.999]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn ex1_4_is_one_eighth_balanced_by_sampling() {
    for case in common::battery() {
        let rep = estimate_balancedness(
            Procedure::Cr(SchemeKind::RefIsolated),
            &case.graph,
            &case.x,
            100_000,
            &RngStream::new(51, 0),
            Estimator::Conditional,
        )
        .unwrap();
        for e in &rep.edges {
            assert!(
                e.value >= 0.125 - 4.0 * e.std_error.unwrap(),
                "{}",
                case.name
            );
        }
    }
}
