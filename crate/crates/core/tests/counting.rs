use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;

use dimer_core::covering::{
    central_edges, count_exact, count_fixed_impurities, count_with, enumerate, exact_impurity_distribution,
    validate, Constraint, Covering,
};
use dimer_core::lattice::grid_cell;
use dimer_core::{
    build_bowtie, build_cell_rectangle, build_cell_region, build_rectangle, build_triangular, class_graph,
    rooted_class_graph, Coord, EdgeClass, Lattice, LatticeError, VertexClass,
};

fn notched_region() -> Lattice {
    let cells: Vec<_> = [(1, 0), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1)]
        .iter()
        .map(|&(x, y)| grid_cell(x, y))
        .collect();
    let terms: Vec<_> = [(0, 0), (4, 1), (1, 3)].iter().map(|&(x, y)| grid_cell(x, y)).collect();
    build_cell_region(&cells, &terms).unwrap()
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

#[test]
fn rectangle_counts() {
    assert_eq!(count_exact(&build_rectangle(2, 1).unwrap()), big(8));
    assert_eq!(count_exact(&build_rectangle(3, 2).unwrap()), big(160));
    assert_eq!(count_exact(&build_rectangle(4, 3).unwrap()), big(12400));
}

#[test]
fn strip_counts() {
    let expected = [8, 48, 288, 1728];
    for (k, want) in (1..=4).zip(expected) {
        assert_eq!(count_exact(&build_rectangle(2 * k, 1).unwrap()), big(want));
    }
}

#[test]
fn central_edges_fixed_counts() {
    let g32 = build_rectangle(3, 2).unwrap();
    let c = central_edges(&g32);
    assert_eq!(c.len(), 1);
    assert_eq!(count_fixed_impurities(&g32, &c).unwrap(), big(8));
    let g43 = build_rectangle(4, 3).unwrap();
    let c = central_edges(&g43);
    assert_eq!(c.len(), 1);
    assert_eq!(g43.edge_coords(c[0]), (Coord::new(4, 2), Coord::new(4, 4)));
    assert_eq!(count_fixed_impurities(&g43, &c).unwrap(), big(400));
    assert_eq!(count_fixed_impurities(&g43, &[]).unwrap(), big(12400));
}

#[test]
fn central_probability() {
    let lat = build_rectangle(3, 2).unwrap();
    let d = exact_impurity_distribution(&lat).unwrap();
    let e = central_edges(&lat)[0];
    assert_eq!(d.get(e).unwrap().probability, BigRational::new(1.into(), 20.into()));
}

#[test]
fn distribution_is_mirror_symmetric() {
    let lat = build_rectangle(2, 1).unwrap();
    let d = exact_impurity_distribution(&lat).unwrap();
    for entry in &d.entries {
        let (a, b) = lat.edge_coords(entry.edge);
        let mirror = lat.edge_at(Coord::new(4 - a.x, a.y), Coord::new(4 - b.x, b.y)).unwrap();
        assert_eq!(d.get(mirror).unwrap().count, entry.count);
    }
    assert_eq!(d.probability_sum(), BigRational::from_integer(2.into()));
}

#[test]
fn hand_built_covering_validates() {
    let lat = build_rectangle(3, 2).unwrap();
    let pairs = [
        ((0, 0), (2, 0)),
        ((2, 4), (2, 2)),
        ((6, 2), (4, 2)),
        ((0, 2), (1, 1)),
        ((0, 4), (1, 3)),
        ((4, 4), (3, 3)),
        ((6, 4), (5, 3)),
        ((3, 1), (4, 0)),
        ((5, 1), (6, 0)),
    ];
    let pairs: Vec<_> = pairs
        .iter()
        .map(|&((a, b), (c, d))| (Coord::new(a, b), Coord::new(c, d)))
        .collect();
    let edges = dimer_core::covering::edges_from_coords(&lat, &pairs).unwrap();
    assert!(validate(&lat, &edges).is_ok());
    let cov = Covering::from_edges(&lat, &edges).unwrap();
    assert_eq!(cov.impurities(&lat).len(), 3);
    assert!(validate(&lat, &edges[1..]).is_err());
}

#[test]
fn cell_region_sizes() {
    let one = build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap();
    assert_eq!(one.count_class(VertexClass::V1), 2);
    assert_eq!(one.count_class(VertexClass::V2), 4);
    assert_eq!(one.count_class(VertexClass::V3), 4);
    assert_eq!(one.impurity_budget().unwrap(), 1);
    assert!(matches!(
        build_cell_region(&[Coord::new(0, 0)], &[]),
        Err(LatticeError::Budget { .. })
    ));
    let region = notched_region();
    assert_eq!(region.impurity_budget().unwrap(), 2);
    assert_eq!(region.terminals().len(), 3);
    assert_eq!(count_exact(&region), big(6582));
    assert_eq!(count_exact(&build_cell_rectangle(2, 1).unwrap()), big(50));
}

#[test]
fn class_graphs_split_the_centers() {
    let lat = build_rectangle(3, 2).unwrap();
    let g1 = class_graph(&lat, VertexClass::V1);
    let g2 = class_graph(&lat, VertexClass::V2);
    assert_eq!(g1.vertices().len(), 6);
    assert_eq!(g1.edges().len() + g2.edges().len(), 12);
    for z in lat.vertices_of(VertexClass::V3) {
        assert!(g1.edge_through(z).is_some());
        assert!(g2.edge_through(z).is_some());
    }
    let block = build_rectangle(1, 2).unwrap();
    assert_eq!(class_graph(&block, VertexClass::V1).edges().len(), 2);
    assert!(rooted_class_graph(&lat).is_err());
}

#[test]
fn rooted_graph_of_one_cell() {
    let lat = build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap();
    let g = rooted_class_graph(&lat).unwrap();
    assert_eq!(g.boundary_middles().len(), 3);
    assert_eq!(g.outer().len(), 4);
    assert_eq!(g.base().edges().len(), 1);
}

#[test]
fn bowtie_and_rectangle_agree_per_configuration() {
    let g = build_rectangle(3, 2).unwrap();
    let b = build_bowtie(3, 2).unwrap();
    assert_eq!(b.impurity_budget().unwrap(), 3);
    let mut by_config: BTreeMap<Vec<(Coord, Coord)>, u64> = BTreeMap::new();
    for c in enumerate(&b) {
        let imp: Vec<_> = c.impurities(&b).iter().map(|&e| b.edge_coords(e)).collect();
        *by_config.entry(imp).or_insert(0) += 1;
    }
    assert!(!by_config.is_empty());
    for (imp, n) in &by_config {
        let on_g: Vec<_> = imp.iter().map(|&(x, y)| g.edge_at(x, y).unwrap()).collect();
        let on_b: Vec<_> = imp.iter().map(|&(x, y)| b.edge_at(x, y).unwrap()).collect();
        assert_eq!(count_fixed_impurities(&g, &on_g).unwrap(), big(*n));
        assert_eq!(count_fixed_impurities(&b, &on_b).unwrap(), big(*n));
    }
}

#[test]
fn triangular_holes_reduce_to_bowtie() {
    let t = build_triangular(3, 2).unwrap();
    let b = build_bowtie(3, 2).unwrap();
    let e3: Vec<_> = (0..t.edge_count()).filter(|&e| t.edge(e).class == EdgeClass::E3).collect();
    assert_eq!(e3.len(), 4);
    assert_eq!(build_triangular(1, 2).unwrap().edges().iter().filter(|e| e.class == EdgeClass::E3).count(), 0);
    let mut total = BigUint::default();
    for mask in 0u32..(1 << e3.len()) {
        let chosen: Vec<_> = (0..e3.len()).filter(|i| mask >> i & 1 == 1).map(|i| e3[i]).collect();
        let mut ends: Vec<_> = chosen.iter().flat_map(|&e| [t.edge(e).u, t.edge(e).v]).collect();
        ends.sort_unstable();
        if ends.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let constraint = Constraint {
            forced: chosen.clone(),
            forbidden: e3.iter().copied().filter(|e| !chosen.contains(e)).collect(),
        };
        let on_t = count_with(&t, &constraint);
        let holes: Vec<_> = ends.iter().map(|&v| b.vertex_at(t.coord(v)).unwrap()).collect();
        let on_b = count_exact(&b.without_vertices(&holes));
        assert_eq!(on_t, on_b, "E3 set {mask:b}");
        total += on_t;
    }
    assert_eq!(total, count_exact(&t));
}

#[test]
fn triangular_coverings_validate() {
    let t = build_triangular(3, 2).unwrap();
    let all: Vec<Covering> = enumerate(&t).collect();
    assert_eq!(BigUint::from(all.len()), count_exact(&t));
    for c in &all {
        assert!(validate(&t, &c.edges(&t)).is_ok());
    }
}
