//! Local moves on coverings and the flip graph they generate.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::covering::{enumerate, Covering};
use crate::geometry::{EdgeClass, VertexClass};
use crate::lattice::{EdgeId, Lattice, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    /// Two parallel half-diagonals rotate across a diamond.
    Square,
    /// An impurity pivots around a block corner.
    Triangular,
    /// Two triangular moves through a missing vertical edge of the
    /// bow-tie lattice.
    BowTie,
}

impl MoveKind {
    pub fn label(self) -> &'static str {
        match self {
            MoveKind::Square => "s",
            MoveKind::Triangular => "t",
            MoveKind::BowTie => "bowtie-t",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoveError {
    #[error("site does not belong to this lattice")]
    SiteMismatch,
    #[error("move is not applicable to this covering")]
    NotApplicable,
}

/// A place where a local move may act. The move exchanges the dimers
/// `forward` for `backward` and vice versa.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MoveSite {
    pub kind: MoveKind,
    /// Square: `[p, q]`. Triangular: `[a, b, c]` with pivot `b`.
    /// Bow-tie: the two ends of the missing vertical edge.
    pub corners: Vec<VertexId>,
    /// Face centers involved, ascending.
    pub middles: Vec<VertexId>,
    pub forward: Vec<EdgeId>,
    pub backward: Vec<EdgeId>,
}

impl MoveSite {
    fn check(&self, lat: &Lattice) -> Result<(), MoveError> {
        let ok = self
            .forward
            .iter()
            .chain(&self.backward)
            .all(|&e| e < lat.edge_count());
        if ok {
            Ok(())
        } else {
            Err(MoveError::SiteMismatch)
        }
    }
}

fn e1_neighbors(lat: &Lattice, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
    lat.incident(v)
        .iter()
        .filter(|&&e| lat.edge(e).class == EdgeClass::E1)
        .map(move |&e| lat.edge(e).other(v))
}

fn e2_neighbors(lat: &Lattice, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
    lat.incident(v)
        .iter()
        .filter(|&&e| lat.edge(e).class == EdgeClass::E2)
        .map(move |&e| lat.edge(e).other(v))
}

fn sorted(mut v: Vec<EdgeId>) -> Vec<EdgeId> {
    v.sort_unstable();
    v
}

fn edge(lat: &Lattice, a: VertexId, b: VertexId) -> Option<EdgeId> {
    lat.edge_between(a, b)
}

/// Diamonds around unit edges, including the vertical ones a bow-tie
/// lattice lacks.
fn square_sites(lat: &Lattice) -> Vec<MoveSite> {
    let mut pairs: Vec<(VertexId, VertexId)> = lat
        .edges()
        .iter()
        .filter(|e| e.class == EdgeClass::E2)
        .map(|e| (e.u, e.v))
        .collect();
    pairs.extend(missing_verticals(lat));
    pairs.sort_unstable();
    let mut out = Vec::new();
    for (p, q) in pairs {
        let common: Vec<VertexId> = e1_neighbors(lat, p)
            .filter(|&z| edge(lat, q, z).is_some())
            .collect();
        let [z1, z2] = common[..] else { continue };
        let (z1, z2) = (z1.min(z2), z1.max(z2));
        let get = |a, b| edge(lat, a, b).expect("diamond edge");
        out.push(MoveSite {
            kind: MoveKind::Square,
            corners: alloc::vec![p, q],
            middles: alloc::vec![z1, z2],
            forward: sorted(alloc::vec![get(p, z1), get(q, z2)]),
            backward: sorted(alloc::vec![get(p, z2), get(q, z1)]),
        });
    }
    out
}

fn triangle_sites(lat: &Lattice) -> Vec<MoveSite> {
    let mut out = Vec::new();
    for z in lat.vertices_of(VertexClass::V3) {
        let corners: Vec<VertexId> = e1_neighbors(lat, z).collect();
        for &b in &corners {
            let sides: Vec<VertexId> = e2_neighbors(lat, b)
                .filter(|w| corners.contains(w))
                .collect();
            for (i, &a) in sides.iter().enumerate() {
                for &c in &sides[i + 1..] {
                    let (a, c) = (a.min(c), a.max(c));
                    let get = |x, y| edge(lat, x, y).expect("block edge");
                    out.push(MoveSite {
                        kind: MoveKind::Triangular,
                        corners: alloc::vec![a, b, c],
                        middles: alloc::vec![z],
                        forward: sorted(alloc::vec![get(a, b), get(c, z)]),
                        backward: sorted(alloc::vec![get(b, c), get(a, z)]),
                    });
                }
            }
        }
    }
    out
}

/// Pairs of same-column corners two units apart with no edge between them
/// but two face centers adjacent to both.
fn missing_verticals(lat: &Lattice) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::new();
    for lo in 0..lat.vertex_count() {
        if !lat.class(lo).is_corner() {
            continue;
        }
        let Some(hi) = lat.vertex_at(lat.coord(lo).offset(0, 2)) else {
            continue;
        };
        if edge(lat, lo, hi).is_none() {
            out.push((lo, hi));
        }
    }
    out
}

fn bowtie_sites(lat: &Lattice) -> Vec<MoveSite> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (lo, hi) in missing_verticals(lat) {
        let mids: Vec<VertexId> = e1_neighbors(lat, lo)
            .filter(|&z| edge(lat, hi, z).is_some())
            .collect();
        for &z1 in &mids {
            for &z2 in &mids {
                if z1 == z2 {
                    continue;
                }
                // first move: impurity (a, b) in block z1 pivots at b onto
                // the missing edge (b, c); second: (c2, b2) pivots at b2
                // onto (b2, d) in block z2.
                for (b, c) in [(lo, hi), (hi, lo)] {
                    for a in e2_neighbors(lat, b).filter(|&a| edge(lat, a, z1).is_some()) {
                        if edge(lat, c, z1).is_none() {
                            continue;
                        }
                        for (b2, c2) in [(lo, hi), (hi, lo)] {
                            for d in e2_neighbors(lat, b2).filter(|&d| edge(lat, d, z2).is_some()) {
                                let get = |x, y| edge(lat, x, y);
                                let before = [get(a, b), get(c, z1), get(d, z2)];
                                let after = [get(a, z1), get(b2, d), get(c2, z2)];
                                if before.iter().chain(&after).any(|e| e.is_none()) {
                                    continue;
                                }
                                let before = sorted(before.iter().map(|e| e.unwrap()).collect());
                                let after = sorted(after.iter().map(|e| e.unwrap()).collect());
                                if !covers_same(lat, &before, &after) {
                                    continue;
                                }
                                let (fwd, bwd) = if before <= after {
                                    (before, after)
                                } else {
                                    (after, before)
                                };
                                if seen.insert((fwd.clone(), bwd.clone())) {
                                    out.push(MoveSite {
                                        kind: MoveKind::BowTie,
                                        corners: alloc::vec![lo, hi],
                                        middles: alloc::vec![z1.min(z2), z1.max(z2)],
                                        forward: fwd,
                                        backward: bwd,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Both edge sets are matchings of one and the same vertex set.
fn covers_same(lat: &Lattice, a: &[EdgeId], b: &[EdgeId]) -> bool {
    let verts = |s: &[EdgeId]| {
        let mut v: Vec<VertexId> = s.iter().flat_map(|&e| [lat.edge(e).u, lat.edge(e).v]).collect();
        v.sort_unstable();
        v
    };
    let (va, vb) = (verts(a), verts(b));
    va.windows(2).all(|w| w[0] != w[1]) && va == vb
}

/// Every move site of the lattice: square sites by unit edge, then
/// triangular sites by face center, then composed bow-tie sites.
pub fn list_sites(lat: &Lattice) -> Vec<MoveSite> {
    let mut sites = square_sites(lat);
    sites.extend(triangle_sites(lat));
    sites.extend(bowtie_sites(lat));
    sites
}

pub fn applicable(lat: &Lattice, cov: &Covering, site: &MoveSite) -> Result<Option<Direction>, MoveError> {
    site.check(lat)?;
    let has = |s: &[EdgeId]| s.iter().all(|&e| cov.contains(lat, e));
    Ok(if has(&site.forward) {
        Some(Direction::Forward)
    } else if has(&site.backward) {
        Some(Direction::Backward)
    } else {
        None
    })
}

pub fn apply(lat: &Lattice, cov: &Covering, site: &MoveSite) -> Result<Covering, MoveError> {
    let mut next = cov.clone();
    if apply_in_place(lat, &mut next, site)? {
        Ok(next)
    } else {
        Err(MoveError::NotApplicable)
    }
}

/// Applies the move if possible; returns whether anything changed.
pub fn apply_in_place(lat: &Lattice, cov: &mut Covering, site: &MoveSite) -> Result<bool, MoveError> {
    match applicable(lat, cov, site)? {
        Some(Direction::Forward) => cov.swap(lat, &site.forward, &site.backward),
        Some(Direction::Backward) => cov.swap(lat, &site.backward, &site.forward),
        None => return Ok(false),
    }
    Ok(true)
}

/// Coverings as nodes (enumeration order), single moves as edges.
#[derive(Clone, Debug)]
pub struct FlipGraph {
    pub nodes: Vec<Covering>,
    pub adjacency: Vec<Vec<usize>>,
}

impl FlipGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Component label per node, labels in order of first appearance.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = alloc::vec![usize::MAX; self.nodes.len()];
        let mut count = 0;
        for s in 0..self.nodes.len() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Largest BFS eccentricity within components.
    pub fn diameter(&self) -> usize {
        let n = self.nodes.len();
        let mut best = 0;
        let mut dist = alloc::vec![usize::MAX; n];
        for s in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                best = best.max(dist[u]);
                for &w in &self.adjacency[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        best
    }
}

/// Neighbor lists of the given nodes in a flip graph. `index` maps every
/// covering of the lattice to its node id.
pub fn neighbor_lists(
    lat: &Lattice,
    sites: &[MoveSite],
    index: &BTreeMap<Covering, usize>,
    nodes: &[Covering],
) -> Vec<Vec<usize>> {
    nodes
        .iter()
        .map(|c| {
            let mut adj: Vec<usize> = sites
                .iter()
                .filter_map(|s| apply(lat, c, s).ok())
                .map(|n| index[&n])
                .collect();
            adj.sort_unstable();
            adj.dedup();
            adj
        })
        .collect()
}

pub fn flip_graph(lat: &Lattice) -> FlipGraph {
    flip_graph_with(lat, &list_sites(lat))
}

pub fn flip_graph_with(lat: &Lattice, sites: &[MoveSite]) -> FlipGraph {
    let nodes: Vec<Covering> = enumerate(lat).collect();
    let index: BTreeMap<Covering, usize> = nodes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let adjacency = neighbor_lists(lat, sites, &index, &nodes);
    FlipGraph { nodes, adjacency }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmcReport {
    pub nodes: usize,
    pub edges: usize,
    pub connected: bool,
    pub components: usize,
    /// Only computed up to `DIAMETER_LIMIT` nodes.
    pub diameter: Option<usize>,
}

pub const DIAMETER_LIMIT: usize = 10_000;

pub fn lmc_report(graph: &FlipGraph) -> LmcReport {
    let (components, _) = graph.components();
    let nodes = graph.nodes.len();
    LmcReport {
        nodes,
        edges: graph.edge_count(),
        connected: components <= 1,
        components,
        diameter: (nodes <= DIAMETER_LIMIT).then(|| graph.diameter()),
    }
}

pub fn check_lmc(lat: &Lattice) -> LmcReport {
    lmc_report(&flip_graph(lat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Coord;
    use crate::lattice::{build_bowtie, build_cell_region, build_rectangle};

    fn count_kind(sites: &[MoveSite], kind: MoveKind) -> usize {
        sites.iter().filter(|s| s.kind == kind).count()
    }

    #[test]
    fn site_counts_3x2() {
        let lat = build_rectangle(3, 2).unwrap();
        let sites = list_sites(&lat);
        // unit edges with a face center on both sides
        assert_eq!(count_kind(&sites, MoveKind::Square), 7);
        assert_eq!(count_kind(&sites, MoveKind::Triangular), 24);
        assert_eq!(count_kind(&sites, MoveKind::BowTie), 0);
    }

    #[test]
    fn bowtie_keeps_square_sites() {
        let lat = build_bowtie(3, 2).unwrap();
        let sites = list_sites(&lat);
        let rect = list_sites(&build_rectangle(3, 2).unwrap());
        assert_eq!(count_kind(&sites, MoveKind::Triangular), 0);
        assert_eq!(count_kind(&sites, MoveKind::Square), count_kind(&rect, MoveKind::Square));
        assert!(count_kind(&sites, MoveKind::BowTie) > 0);
    }

    #[test]
    fn single_cell_has_triangle_sites() {
        let lat = build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap();
        let sites = list_sites(&lat);
        assert!(count_kind(&sites, MoveKind::Triangular) > 0);
    }

    #[test]
    fn moves_are_involutions() {
        let lat = build_rectangle(2, 1).unwrap();
        let sites = list_sites(&lat);
        for c in enumerate(&lat) {
            for s in &sites {
                match applicable(&lat, &c, s).unwrap() {
                    None => assert_eq!(apply(&lat, &c, s), Err(MoveError::NotApplicable)),
                    Some(_) => {
                        let once = apply(&lat, &c, s).unwrap();
                        assert_ne!(once, c);
                        assert!(crate::covering::validate(&lat, &once.edges(&lat)).is_ok());
                        assert_eq!(apply(&lat, &once, s).unwrap(), c);
                    }
                }
            }
        }
    }

    #[test]
    fn small_flip_graph_connected() {
        let r = check_lmc(&build_rectangle(2, 1).unwrap());
        assert_eq!(r.nodes, 8);
        assert!(r.connected);
        assert!(r.diameter.unwrap() <= 28);
    }
}
