//! Dimer coverings: validation, exhaustive enumeration and exact counting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::geometry::{Coord, EdgeClass, VertexClass};
use crate::lattice::{EdgeId, Family, Lattice, VertexId};

const FREE: EdgeId = EdgeId::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoveringError {
    #[error("{0} - {1} is not an edge of the lattice")]
    UnknownEdge(Coord, Coord),
    #[error("edge id {0} is out of range")]
    UnknownEdgeId(EdgeId),
    #[error("not a perfect matching: {0}")]
    Violation(Violation),
    #[error("fixed edge {0} - {1} is not an impurity edge")]
    NotImpurity(Coord, Coord),
    #[error("fixed edges share vertex {0}")]
    Overlap(Coord),
    #[error("{fixed} fixed impurities exceed the budget {budget}")]
    OverBudget { fixed: usize, budget: usize },
    #[error("the lattice has no dimer covering")]
    EmptyModel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Violation {
    pub uncovered: Vec<VertexId>,
    pub doubly_covered: Vec<VertexId>,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{} uncovered, {} covered more than once",
            self.uncovered.len(),
            self.doubly_covered.len()
        )
    }
}

/// A perfect matching, stored as the matching edge of every vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Covering {
    matched: Vec<EdgeId>,
}

impl Covering {
    /// Checks that `edges` is a perfect matching of `lat`.
    pub fn from_edges(lat: &Lattice, edges: &[EdgeId]) -> Result<Covering, CoveringError> {
        let mut hits = alloc::vec![0u32; lat.vertex_count()];
        let mut matched = alloc::vec![FREE; lat.vertex_count()];
        for &e in edges {
            if e >= lat.edge_count() {
                return Err(CoveringError::UnknownEdgeId(e));
            }
            let edge = lat.edge(e);
            for w in [edge.u, edge.v] {
                hits[w] += 1;
                matched[w] = e;
            }
        }
        let mut violation = Violation::default();
        for (v, &h) in hits.iter().enumerate() {
            match h {
                0 => violation.uncovered.push(v),
                1 => {}
                _ => violation.doubly_covered.push(v),
            }
        }
        if violation.uncovered.is_empty() && violation.doubly_covered.is_empty() {
            Ok(Covering { matched })
        } else {
            Err(CoveringError::Violation(violation))
        }
    }

    pub fn from_coords(lat: &Lattice, pairs: &[(Coord, Coord)]) -> Result<Covering, CoveringError> {
        let edges = edges_from_coords(lat, pairs)?;
        Covering::from_edges(lat, &edges)
    }

    /// Caller guarantees `matched` is a perfect matching.
    pub(crate) fn from_matched(matched: Vec<EdgeId>) -> Covering {
        Covering { matched }
    }

    pub fn matched_edge(&self, v: VertexId) -> EdgeId {
        self.matched[v]
    }

    pub fn partner(&self, lat: &Lattice, v: VertexId) -> VertexId {
        lat.edge(self.matched[v]).other(v)
    }

    pub fn contains(&self, lat: &Lattice, e: EdgeId) -> bool {
        self.matched[lat.edge(e).u] == e
    }

    /// Edges of the matching, ascending.
    pub fn edges(&self, lat: &Lattice) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = (0..self.matched.len())
            .filter(|&v| lat.edge(self.matched[v]).u == v)
            .map(|v| self.matched[v])
            .collect();
        out.sort_unstable();
        out
    }

    /// Dimers on unit edges (and face-center edges on the triangular
    /// lattice), ascending.
    pub fn impurities(&self, lat: &Lattice) -> Vec<EdgeId> {
        self.edges(lat)
            .into_iter()
            .filter(|&e| lat.edge(e).class.is_impurity())
            .collect()
    }

    pub fn edge_coords(&self, lat: &Lattice) -> Vec<(Coord, Coord)> {
        self.edges(lat).into_iter().map(|e| lat.edge_coords(e)).collect()
    }

    /// Swaps the dimers `before` for `after`. Both sets must cover the same
    /// vertices and `before` must be in the matching.
    pub(crate) fn swap(&mut self, lat: &Lattice, before: &[EdgeId], after: &[EdgeId]) {
        debug_assert!(before.iter().all(|&e| self.contains(lat, e)));
        for &e in after {
            let edge = lat.edge(e);
            self.matched[edge.u] = e;
            self.matched[edge.v] = e;
        }
    }
}

pub fn edges_from_coords(lat: &Lattice, pairs: &[(Coord, Coord)]) -> Result<Vec<EdgeId>, CoveringError> {
    pairs
        .iter()
        .map(|&(a, b)| lat.edge_at(a, b).ok_or(CoveringError::UnknownEdge(a, b)))
        .collect()
}

/// Ok iff `edges` is a perfect matching of `lat`.
pub fn validate(lat: &Lattice, edges: &[EdgeId]) -> Result<(), CoveringError> {
    Covering::from_edges(lat, edges).map(|_| ())
}

/// Restrictions on the coverings being enumerated or counted.
#[derive(Clone, Debug, Default)]
pub struct Constraint {
    /// Edges that must be dimers.
    pub forced: Vec<EdgeId>,
    /// Edges that must not be dimers.
    pub forbidden: Vec<EdgeId>,
}

impl Constraint {
    pub fn forcing(edges: &[EdgeId]) -> Constraint {
        Constraint {
            forced: edges.to_vec(),
            forbidden: Vec::new(),
        }
    }
}

struct Search<'a> {
    lat: &'a Lattice,
    matched: Vec<EdgeId>,
    forbidden: Vec<bool>,
}

impl<'a> Search<'a> {
    /// `None` if the forced edges overlap or leave a vertex stranded.
    fn new(lat: &'a Lattice, constraint: &Constraint) -> Option<Search<'a>> {
        let mut forbidden = alloc::vec![false; lat.edge_count()];
        for &e in &constraint.forbidden {
            forbidden[e] = true;
        }
        let mut s = Search {
            lat,
            matched: alloc::vec![FREE; lat.vertex_count()],
            forbidden,
        };
        for &e in &constraint.forced {
            let edge = lat.edge(e);
            if s.forbidden[e] || s.matched[edge.u] != FREE || s.matched[edge.v] != FREE {
                return None;
            }
            s.set(e);
        }
        let stranded = (0..lat.vertex_count()).any(|v| s.matched[v] == FREE && !s.has_free_edge(v));
        (!stranded).then_some(s)
    }

    fn set(&mut self, e: EdgeId) {
        let edge = self.lat.edge(e);
        self.matched[edge.u] = e;
        self.matched[edge.v] = e;
    }

    fn clear(&mut self, e: EdgeId) {
        let edge = self.lat.edge(e);
        self.matched[edge.u] = FREE;
        self.matched[edge.v] = FREE;
    }

    fn usable(&self, v: VertexId, e: EdgeId) -> bool {
        !self.forbidden[e] && self.matched[self.lat.edge(e).other(v)] == FREE
    }

    fn has_free_edge(&self, v: VertexId) -> bool {
        self.lat.incident(v).iter().any(|&e| self.usable(v, e))
    }

    /// Uncovered neighbors of the two endpoints of `e` can still be matched.
    fn locally_feasible(&self, e: EdgeId) -> bool {
        let edge = self.lat.edge(e);
        [edge.u, edge.v].iter().all(|&x| {
            self.lat
                .neighbors(x)
                .all(|y| self.matched[y] != FREE || self.has_free_edge(y))
        })
    }

    fn lowest_uncovered(&self, from: VertexId) -> Option<VertexId> {
        (from..self.matched.len()).find(|&v| self.matched[v] == FREE)
    }

    /// Matches `v` through its first admissible incident edge at position
    /// `start` or later; returns that position.
    fn try_from(&mut self, v: VertexId, start: usize) -> Option<usize> {
        let inc = self.lat.incident(v);
        for (i, &e) in inc.iter().enumerate().skip(start) {
            if !self.usable(v, e) {
                continue;
            }
            self.set(e);
            if self.locally_feasible(e) {
                return Some(i);
            }
            self.clear(e);
        }
        None
    }

    fn key(&self) -> Vec<u64> {
        let mut key = alloc::vec![0u64; self.matched.len().div_ceil(64)];
        for (v, &m) in self.matched.iter().enumerate() {
            if m != FREE {
                key[v / 64] |= 1 << (v % 64);
            }
        }
        key
    }

    fn count(&mut self, from: VertexId, memo: &mut BTreeMap<Vec<u64>, BigUint>) -> BigUint {
        let Some(v) = self.lowest_uncovered(from) else {
            return BigUint::one();
        };
        let key = self.key();
        if let Some(c) = memo.get(&key) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        let mut start = 0;
        while let Some(pos) = self.try_from(v, start) {
            let e = self.lat.incident(v)[pos];
            total += self.count(v + 1, memo);
            self.clear(e);
            start = pos + 1;
        }
        memo.insert(key, total.clone());
        total
    }
}

/// Every covering satisfying `constraint`, in backtracking order
/// (lowest uncovered vertex first, its edges in id order).
pub struct Enumerator<'a> {
    search: Option<Search<'a>>,
    stack: Vec<(VertexId, usize)>,
    resumed: bool,
}

impl Iterator for Enumerator<'_> {
    type Item = Covering;

    fn next(&mut self) -> Option<Covering> {
        let search = self.search.as_mut()?;
        let mut backtracking = self.resumed;
        self.resumed = true;
        loop {
            if backtracking {
                let Some(&(v, pos)) = self.stack.last() else {
                    self.search = None;
                    return None;
                };
                let e = search.lat.incident(v)[pos];
                search.clear(e);
                match search.try_from(v, pos + 1) {
                    Some(p) => {
                        self.stack.last_mut().expect("nonempty").1 = p;
                        backtracking = false;
                    }
                    None => {
                        self.stack.pop();
                    }
                }
            } else {
                let from = self.stack.last().map_or(0, |&(v, _)| v);
                match search.lowest_uncovered(from) {
                    None => return Some(Covering::from_matched(search.matched.clone())),
                    Some(v) => match search.try_from(v, 0) {
                        Some(p) => self.stack.push((v, p)),
                        None => backtracking = true,
                    },
                }
            }
        }
    }
}

pub fn enumerate(lat: &Lattice) -> Enumerator<'_> {
    enumerate_with(lat, &Constraint::default())
}

pub fn enumerate_with<'a>(lat: &'a Lattice, constraint: &Constraint) -> Enumerator<'a> {
    Enumerator {
        search: Search::new(lat, constraint),
        stack: Vec::new(),
        resumed: false,
    }
}

/// Number of coverings, by memoizing on the set of covered vertices.
pub fn count_exact(lat: &Lattice) -> BigUint {
    count_with(lat, &Constraint::default())
}

pub fn count_with(lat: &Lattice, constraint: &Constraint) -> BigUint {
    match Search::new(lat, constraint) {
        Some(mut s) => s.count(0, &mut BTreeMap::new()),
        None => BigUint::zero(),
    }
}

/// Splits the search at the first vertex with more than one admissible
/// edge. The counts of the returned constraints sum to the count of the
/// input.
pub fn split_first_branch(lat: &Lattice, constraint: &Constraint) -> Vec<Constraint> {
    let Some(mut s) = Search::new(lat, constraint) else {
        return Vec::new();
    };
    let mut forced = constraint.forced.clone();
    let mut from = 0;
    while let Some(v) = s.lowest_uncovered(from) {
        let mut options = Vec::new();
        let mut start = 0;
        while let Some(pos) = s.try_from(v, start) {
            let e = lat.incident(v)[pos];
            options.push(e);
            s.clear(e);
            start = pos + 1;
        }
        match options[..] {
            [] => return Vec::new(),
            [e] => {
                s.set(e);
                forced.push(e);
                from = v + 1;
            }
            _ => {
                return options
                    .into_iter()
                    .map(|e| {
                        let mut f = forced.clone();
                        f.push(e);
                        Constraint {
                            forced: f,
                            forbidden: constraint.forbidden.clone(),
                        }
                    })
                    .collect()
            }
        }
    }
    alloc::vec![Constraint {
        forced,
        forbidden: constraint.forbidden.clone(),
    }]
}

/// Checks a set of impurities to be held fixed.
pub fn check_fixed(lat: &Lattice, fixed: &[EdgeId]) -> Result<(), CoveringError> {
    let mut used = alloc::vec![false; lat.vertex_count()];
    for &e in fixed {
        if e >= lat.edge_count() {
            return Err(CoveringError::UnknownEdgeId(e));
        }
        let edge = lat.edge(e);
        if !edge.class.is_impurity() {
            let (a, b) = lat.edge_coords(e);
            return Err(CoveringError::NotImpurity(a, b));
        }
        for w in [edge.u, edge.v] {
            if used[w] {
                return Err(CoveringError::Overlap(lat.coord(w)));
            }
            used[w] = true;
        }
    }
    if !matches!(lat.family(), Family::Triangular { .. }) {
        if let Ok(budget) = lat.impurity_budget() {
            if fixed.len() > budget {
                return Err(CoveringError::OverBudget {
                    fixed: fixed.len(),
                    budget,
                });
            }
        }
    }
    Ok(())
}

/// Number of coverings whose impurities include every edge of `fixed`.
pub fn count_fixed_impurities(lat: &Lattice, fixed: &[EdgeId]) -> Result<BigUint, CoveringError> {
    check_fixed(lat, fixed)?;
    Ok(count_with(lat, &Constraint::forcing(fixed)))
}

/// Unit edges whose midpoint is closest to the barycenter of the lattice.
pub fn central_edges(lat: &Lattice) -> Vec<EdgeId> {
    let (sx, sy, n) = lat.barycenter_sum();
    let dist = |e: EdgeId| {
        let (a, b) = lat.edge_coords(e);
        let dx = n * (i64::from(a.x) + i64::from(b.x)) - 2 * sx;
        let dy = n * (i64::from(a.y) + i64::from(b.y)) - 2 * sy;
        dx * dx + dy * dy
    };
    let e2: Vec<EdgeId> = (0..lat.edge_count())
        .filter(|&e| lat.edge(e).class == EdgeClass::E2)
        .collect();
    let Some(best) = e2.iter().map(|&e| dist(e)).min() else {
        return Vec::new();
    };
    e2.into_iter().filter(|&e| dist(e) == best).collect()
}

#[derive(Clone, Debug)]
pub struct DistributionEntry {
    pub edge: EdgeId,
    pub count: BigUint,
    pub probability: BigRational,
}

#[derive(Clone, Debug)]
pub struct ImpurityDistribution {
    pub total: BigUint,
    pub entries: Vec<DistributionEntry>,
}

impl ImpurityDistribution {
    pub fn probability_sum(&self) -> BigRational {
        self.entries
            .iter()
            .fold(BigRational::zero(), |acc, e| acc + &e.probability)
    }

    pub fn get(&self, edge: EdgeId) -> Option<&DistributionEntry> {
        self.entries.iter().find(|e| e.edge == edge)
    }
}

/// Exact probability of an impurity on every impurity-class edge.
pub fn exact_impurity_distribution(lat: &Lattice) -> Result<ImpurityDistribution, CoveringError> {
    let total = count_exact(lat);
    if total.is_zero() {
        return Err(CoveringError::EmptyModel);
    }
    let entries = (0..lat.edge_count())
        .filter(|&e| lat.edge(e).class.is_impurity())
        .map(|e| {
            let count = count_with(lat, &Constraint::forcing(&[e]));
            let probability = BigRational::new(count.clone().into(), total.clone().into());
            DistributionEntry {
                edge: e,
                count,
                probability,
            }
        })
        .collect();
    Ok(ImpurityDistribution { total, entries })
}

/// Exact probability that each V1 vertex is matched by an impurity.
pub fn vertex_impurity_probabilities(lat: &Lattice) -> Result<Vec<(VertexId, BigRational)>, CoveringError> {
    let total = count_exact(lat);
    if total.is_zero() {
        return Err(CoveringError::EmptyModel);
    }
    let total = BigInt::from(total);
    Ok(lat
        .vertices_of(VertexClass::V1)
        .map(|j| {
            let hits: BigUint = lat
                .incident(j)
                .iter()
                .filter(|&&e| lat.edge(e).class == EdgeClass::E2)
                .map(|&e| count_with(lat, &Constraint::forcing(&[e])))
                .sum();
            (j, BigRational::new(hits.into(), total.clone()))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_bowtie, build_cell_region, build_rectangle};
    use std::collections::HashSet;

    #[test]
    fn small_counts() {
        assert_eq!(count_exact(&build_rectangle(2, 1).unwrap()), BigUint::from(8u32));
        assert_eq!(count_exact(&build_rectangle(4, 1).unwrap()), BigUint::from(48u32));
        let cell = build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap();
        assert_eq!(count_exact(&cell), BigUint::from(12u32));
    }

    #[test]
    fn enumeration_matches_count() {
        for (m, n) in [(2, 1), (1, 2), (3, 2), (4, 1)] {
            let lat = build_rectangle(m, n).unwrap();
            let all: Vec<Covering> = enumerate(&lat).collect();
            assert_eq!(BigUint::from(all.len()), count_exact(&lat));
            let distinct: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(distinct.len(), all.len());
            let k = lat.impurity_budget().unwrap();
            for c in &all {
                assert!(validate(&lat, &c.edges(&lat)).is_ok());
                assert_eq!(c.impurities(&lat).len(), k);
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let lat = build_rectangle(3, 2).unwrap();
        let a: Vec<Covering> = enumerate(&lat).collect();
        let b: Vec<Covering> = enumerate(&lat).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_set_violation() {
        let lat = build_rectangle(3, 2).unwrap();
        match validate(&lat, &[]) {
            Err(CoveringError::Violation(v)) => assert_eq!(v.uncovered.len(), 18),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn central_edge_of_3x2() {
        let lat = build_rectangle(3, 2).unwrap();
        let c = central_edges(&lat);
        assert_eq!(c.len(), 1);
        assert_eq!(lat.edge_coords(c[0]), (Coord::new(2, 2), Coord::new(4, 2)));
        assert_eq!(count_fixed_impurities(&lat, &c).unwrap(), BigUint::from(8u32));
    }

    #[test]
    fn fixed_impurity_errors() {
        let lat = build_rectangle(2, 1).unwrap();
        let e1 = lat.edge_at(Coord::new(0, 0), Coord::new(1, 1)).unwrap();
        assert!(matches!(
            count_fixed_impurities(&lat, &[e1]),
            Err(CoveringError::NotImpurity(..))
        ));
        let a = lat.edge_at(Coord::new(0, 0), Coord::new(2, 0)).unwrap();
        let b = lat.edge_at(Coord::new(0, 0), Coord::new(0, 2)).unwrap();
        assert!(matches!(
            count_fixed_impurities(&lat, &[a, b]),
            Err(CoveringError::Overlap(_))
        ));
        let c = lat.edge_at(Coord::new(0, 2), Coord::new(2, 2)).unwrap();
        let d = lat.edge_at(Coord::new(4, 0), Coord::new(4, 2)).unwrap();
        assert!(matches!(
            count_fixed_impurities(&lat, &[a, c, d]),
            Err(CoveringError::OverBudget { fixed: 3, budget: 2 })
        ));
        assert!(matches!(
            edges_from_coords(&lat, &[(Coord::new(0, 0), Coord::new(4, 0))]),
            Err(CoveringError::UnknownEdge(..))
        ));
    }

    #[test]
    fn distribution_sums_to_budget() {
        let lat = build_rectangle(3, 2).unwrap();
        let d = exact_impurity_distribution(&lat).unwrap();
        assert_eq!(d.total, BigUint::from(160u32));
        assert_eq!(d.probability_sum(), BigRational::from_integer(3.into()));
    }

    #[test]
    fn split_preserves_count() {
        for lat in [build_rectangle(3, 2).unwrap(), build_bowtie(3, 2).unwrap()] {
            let parts = split_first_branch(&lat, &Constraint::default());
            assert!(parts.len() > 1);
            let sum: BigUint = parts.iter().map(|c| count_with(&lat, c)).sum();
            assert_eq!(sum, count_exact(&lat));
        }
    }
}
