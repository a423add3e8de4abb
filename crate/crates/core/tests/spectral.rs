use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use dimer_core::covering::{count_exact, enumerate, exact_impurity_distribution, vertex_impurity_probabilities};
use dimer_core::lattice::{grid_cell, RootedEdgeKind};
use dimer_core::spectral::{
    bounds, calibrate_convention, count_q_trees, free_energy, laplacian, placements_per_tree, rectangle_closed_form,
    rooted_edges, strip_count, tree_count, Convention,
};
use dimer_core::{build_cell_rectangle, build_cell_region, build_rectangle, rooted_class_graph, Coord, Lattice, OuterEdge};

fn notched_region() -> Lattice {
    let cells: Vec<_> = [(1, 0), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1)]
        .iter()
        .map(|&(x, y)| grid_cell(x, y))
        .collect();
    let terms: Vec<_> = [(0, 0), (4, 1), (1, 3)].iter().map(|&(x, y)| grid_cell(x, y)).collect();
    build_cell_region(&cells, &terms).unwrap()
}

fn one_cell() -> Lattice {
    build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap()
}

fn regions() -> Vec<Lattice> {
    vec![
        one_cell(),
        build_cell_rectangle(2, 1).unwrap(),
        build_cell_rectangle(1, 2).unwrap(),
        notched_region(),
    ]
}

/// Contraction and deletion on a multigraph, self-loops dropped.
fn deletion_contraction(n: usize, edges: &[(usize, usize)]) -> u64 {
    if n == 1 {
        return 1;
    }
    let Some(&(a, b)) = edges.first() else {
        return 0;
    };
    let rest = &edges[1..];
    let deleted = deletion_contraction(n, rest);
    let relabel = |v: usize| {
        let v = if v == b { a } else { v };
        if v > b {
            v - 1
        } else {
            v
        }
    };
    let contracted: Vec<_> = rest
        .iter()
        .map(|&(x, y)| (relabel(x), relabel(y)))
        .filter(|(x, y)| x != y)
        .collect();
    deleted + deletion_contraction(n - 1, &contracted)
}

#[test]
fn kirchhoff_matches_deletion_contraction() {
    for lat in regions() {
        let g = rooted_class_graph(&lat).unwrap();
        let (n, edges) = rooted_edges(&g);
        let det = tree_count(&laplacian(&lat).unwrap());
        assert_eq!(det, BigInt::from(deletion_contraction(n, &edges)));
        assert_eq!(BigInt::from(count_q_trees(&lat).unwrap().all), det);
    }
}

#[test]
fn frozen_tree_counts() {
    let dets: Vec<_> = regions().iter().map(|l| tree_count(&laplacian(l).unwrap())).collect();
    assert_eq!(dets[0], BigInt::from(7));
    assert_eq!(dets[1], BigInt::from(26));
    assert_eq!(dets[3], BigInt::from(13474));
}

/// Absorbing walk on the rooted graph: every step picks an incident edge
/// uniformly, a terminal edge pays 1 and any other root edge pays 0.
fn walk_hitting(lat: &Lattice) -> Vec<f64> {
    let g = rooted_class_graph(lat).unwrap();
    let root = g.root();
    let multi = g.multigraph();
    let mut p = vec![0.0; root];
    for _ in 0..100_000 {
        let mut next = vec![0.0; root];
        let mut deg = vec![0.0; root];
        for e in &multi {
            for (u, w) in [(e.a, e.b), (e.b, e.a)] {
                if u == root {
                    continue;
                }
                deg[u] += 1.0;
                next[u] += if w != root {
                    p[w]
                } else if matches!(e.kind, RootedEdgeKind::Outer(OuterEdge::Terminal(_))) {
                    1.0
                } else {
                    0.0
                };
            }
        }
        let next: Vec<f64> = next.iter().zip(&deg).map(|(s, d)| s / d).collect();
        let delta = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        if delta < 1e-15 {
            break;
        }
    }
    p
}

#[test]
fn hitting_probabilities_match_walk() {
    for lat in regions() {
        let sys = laplacian(&lat).unwrap();
        assert_eq!(sys.is_harmonic(), Some(true));
        for (a, b) in sys.p.to_f64().iter().zip(walk_hitting(&lat)) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn sandwich_holds_on_cell_regions() {
    for lat in regions() {
        let d = count_exact(&lat);
        let r = bounds(&lat, Some(d.clone())).unwrap();
        assert_eq!(r.sandwich_holds(), Some(true));
    }
    let r = bounds(&notched_region(), None).unwrap();
    assert_eq!(r.tree_count_q, Some(555));
    assert_eq!(r.lower, Some(BigUint::from(2220u32)));
    assert_eq!(r.upper, BigRational::from_integer(BigInt::from(5_389_600)));
}

#[test]
fn trees_partition_the_coverings() {
    for lat in regions() {
        let k = lat.impurity_budget().unwrap();
        let n = lat.vertex_count();
        let groups = placements_per_tree(&lat, enumerate(&lat)).unwrap();
        let total: u64 = groups.iter().map(|g| g.count).sum();
        assert_eq!(BigUint::from(total), count_exact(&lat));
        let q = count_q_trees(&lat).unwrap();
        assert_eq!(groups.len() as u64, q.q);
        assert_eq!(q.placements, BigUint::from(total));
        let cap = BigRational::new(BigInt::from(n), BigInt::from(k)).pow(k as i32);
        for g in &groups {
            assert_eq!(BigInt::from(g.count), g.permanent);
            assert!(g.count >= 1 << k);
            assert!(BigRational::from_integer(BigInt::from(g.count)) <= cap);
        }
    }
}

#[test]
fn vertex_bounds_dominate_exact_probabilities() {
    for lat in regions() {
        let r = bounds(&lat, None).unwrap();
        let exact = vertex_impurity_probabilities(&lat).unwrap();
        assert_eq!(r.per_vertex.len(), exact.len());
        for vb in &r.per_vertex {
            let (_, p) = exact.iter().find(|(v, _)| *v == vb.vertex).unwrap();
            assert!(p <= &vb.bound, "{p} > {}", vb.bound);
        }
    }
}

#[test]
fn convention_is_minus() {
    let (conv, rows) = calibrate_convention().unwrap();
    assert_eq!(conv, Convention::Minus);
    assert_eq!(rows[0].exact, BigUint::from(12u8));
    assert_eq!(rows[1].exact, BigUint::from(50u8));
    assert!((rows[1].plus - 50.0).abs() > 1.0);
}

#[test]
fn closed_form_counts_match_enumeration() {
    for (c, r) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (3, 2)] {
        let f = rectangle_closed_form(c, r, Convention::Minus);
        assert!((f.det_eigen - f.det_direct).abs() <= 1e-9 * f.det_direct.abs());
        let exact = count_exact(&build_cell_rectangle(c, r).unwrap()).to_f64().unwrap();
        assert!((f.count - exact).abs() <= 1e-9 * exact, "{c}x{r}: {} vs {exact}", f.count);
    }
}

#[test]
fn closed_form_probabilities_are_per_edge() {
    for (c, r) in [(2, 1), (2, 2), (3, 2)] {
        let lat = build_cell_rectangle(c, r).unwrap();
        let dist = exact_impurity_distribution(&lat).unwrap();
        let f = rectangle_closed_form(c, r, Convention::Minus);
        for x in 1..=c {
            for y in 1..=r {
                let v = lat.vertex_at(grid_cell(x as i32, y as i32)).unwrap();
                let want = f.probabilities[(x - 1) * r + (y - 1)];
                for &e in lat.incident(v) {
                    if let Some(entry) = dist.get(e) {
                        let got = entry.probability.to_f64().unwrap();
                        assert!((got - want).abs() < 1e-12, "{c}x{r} cell ({x},{y}): {got} vs {want}");
                    }
                }
            }
        }
    }
}

#[test]
fn eigen_determinant_matches_direct() {
    for (c, r) in [(1, 1), (4, 3), (6, 5), (10, 7)] {
        for conv in [Convention::Plus, Convention::Minus] {
            let f = rectangle_closed_form(c, r, conv);
            assert!((f.det_eigen - f.det_direct).abs() <= 1e-9 * f.det_direct.abs());
        }
    }
}

#[test]
fn strip_law_matches_enumeration() {
    for k in 1..=4 {
        assert_eq!(strip_count(k).unwrap(), count_exact(&build_rectangle(2 * k, 1).unwrap()));
    }
}

#[test]
fn free_energy_converges() {
    let a = free_energy(1024).unwrap();
    let b = free_energy(2048).unwrap();
    assert!(a > 0.0 && b > 0.0);
    assert!((a - b).abs() < 1e-6);
    let catalan = 0.915_965_594_177_219;
    assert!((b - 4.0 * catalan / std::f64::consts::PI).abs() < 1e-6);
}
