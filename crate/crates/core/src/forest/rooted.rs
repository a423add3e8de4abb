use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{family_error, orient_from, subforest, DomainPartition, ForestError, Orientation, Parent, QClause};
use crate::covering::Covering;
use crate::geometry::{EdgeClass, VertexClass};
use crate::lattice::{
    class_graph, rooted_class_graph, ClassGraph, EdgeId, Family, Lattice, OuterEdge, RootedClassGraph,
    VertexId,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeClass {
    /// Reaches the root through a terminal.
    TerminalInner,
    /// Reaches the root through a boundary vertex and holds terminals.
    TerminalOuter,
    /// Reaches the root through a boundary vertex, no terminals.
    InnerOuter,
}

impl TreeClass {
    pub fn label(self) -> &'static str {
        match self {
            TreeClass::TerminalInner => "TI",
            TreeClass::TerminalOuter => "TO",
            TreeClass::InnerOuter => "IO",
        }
    }
}

/// One component of the spanning tree with the root removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreeInfo {
    /// Smallest vertex id of the component.
    pub id: VertexId,
    pub class: TreeClass,
    /// Number of terminals in the component.
    pub terminals: usize,
    pub outer: OuterEdge,
}

impl TreeInfo {
    /// Contribution to the `(TI, TO)` counts: a tree with `l` terminals
    /// counts as one TI and `l - 1` TO trees, or as `l` TO trees.
    pub fn counted(&self) -> (usize, usize) {
        match self.class {
            TreeClass::TerminalInner => (1, self.terminals - 1),
            TreeClass::TerminalOuter => (0, self.terminals),
            TreeClass::InnerOuter => (0, 0),
        }
    }
}

/// A covering of a cell region as a rooted spanning tree, a V2 forest and
/// the impurities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedDecomposition {
    /// Middles of the V1 edges of the tree, ascending.
    pub base: Vec<VertexId>,
    /// Root edges of the tree, one per component.
    pub outer: Vec<OuterEdge>,
    /// Middles of the V2 forest edges, ascending.
    pub s: Vec<VertexId>,
    pub impurities: Vec<EdgeId>,
    pub trees: Vec<TreeInfo>,
    /// TI tree id to V2 component id.
    pub pairing: BTreeMap<VertexId, VertexId>,
}

/// Everything a spanning tree of the rooted graph determines.
#[derive(Clone, Debug)]
pub struct RootedShape {
    pub k: usize,
    pub graph: RootedClassGraph,
    pub g2: ClassGraph,
    pub trees: Vec<TreeInfo>,
    /// Tree index of every V1 vertex, by position in `graph.base().vertices()`.
    pub tree_of: Vec<usize>,
    /// The forced V2 forest.
    pub s: Vec<VertexId>,
    pub s_ids: Vec<VertexId>,
    /// Component of every V2 vertex, by position in `g2.vertices()`.
    pub s_of: Vec<usize>,
}

impl RootedShape {
    /// Indices into `trees` of the terminal-rooted trees.
    pub fn inner_trees(&self) -> Vec<usize> {
        (0..self.trees.len())
            .filter(|&i| self.trees[i].class == TreeClass::TerminalInner)
            .collect()
    }
}

fn q_err(c: QClause) -> ForestError {
    ForestError::ConditionQ(c)
}

fn check_family(lat: &Lattice) -> Result<usize, ForestError> {
    match lat.family() {
        Family::CellRegion { k } => Ok(k),
        other => Err(family_error("cell-region", other)),
    }
}

fn component_ids(g: &ClassGraph, labels: &[usize], count: usize) -> Vec<VertexId> {
    let mut ids = alloc::vec![VertexId::MAX; count];
    for (i, &v) in g.vertices().iter().enumerate() {
        ids[labels[i]] = ids[labels[i]].min(v);
    }
    ids
}

/// Checks the tree part of a decomposition and derives the tree classes
/// and the forced V2 forest.
pub fn analyze_rooted(lat: &Lattice, base: &[VertexId], outer: &[OuterEdge]) -> Result<RootedShape, ForestError> {
    let k = check_family(lat)?;
    let graph = rooted_class_graph(lat)?;
    let g1 = graph.base();
    if let Some(&z) = base.iter().find(|&&z| g1.edge_through(z).is_none()) {
        return Err(q_err(QClause::UnknownMiddle(z)));
    }
    if outer.iter().any(|o| !graph.outer().contains(o)) {
        return Err(q_err(QClause::BadOuterEdge));
    }
    let mut used = alloc::vec![false; lat.vertex_count()];
    for z in base.iter().copied().chain(outer.iter().filter_map(|o| o.middle())) {
        if core::mem::replace(&mut used[z], true) {
            return Err(q_err(QClause::SharedMiddle(z)));
        }
    }
    let (count, labels) = subforest(g1, base).ok_or(q_err(QClause::Cycle))?;
    let ids = component_ids(g1, &labels, count);
    let mut attached: Vec<Vec<OuterEdge>> = alloc::vec![Vec::new(); count];
    for o in outer {
        attached[labels[g1.local(o.vertex()).expect("V1")]].push(*o);
    }
    let mut trees = Vec::with_capacity(count);
    for (c, edges) in attached.iter().enumerate() {
        if edges.iter().filter(|o| o.middle().is_some()).count() > 1 {
            return Err(q_err(QClause::BoundaryNotUnique { tree: ids[c] }));
        }
        let [edge] = edges[..] else {
            return Err(q_err(QClause::NotSpanningTree));
        };
        let terms: Vec<VertexId> = lat
            .terminals()
            .iter()
            .copied()
            .filter(|&t| labels[g1.local(t).expect("V1")] == c)
            .collect();
        let class = match edge {
            OuterEdge::Terminal(t) => {
                if terms.first() != Some(&t) {
                    return Err(q_err(QClause::LaterTerminal { tree: ids[c] }));
                }
                TreeClass::TerminalInner
            }
            OuterEdge::Boundary { .. } if terms.is_empty() => TreeClass::InnerOuter,
            OuterEdge::Boundary { .. } => TreeClass::TerminalOuter,
        };
        trees.push(TreeInfo {
            id: ids[c],
            class,
            terminals: terms.len(),
            outer: edge,
        });
    }
    let (ti, to) = trees
        .iter()
        .map(TreeInfo::counted)
        .fold((0, 0), |(a, b), (x, y)| (a + x, b + y));
    if ti != k || to + 1 != k {
        return Err(q_err(QClause::TreeCounts { ti, to, k }));
    }
    let g2 = class_graph(lat, VertexClass::V2);
    let s: Vec<VertexId> = lat.vertices_of(VertexClass::V3).filter(|&z| !used[z]).collect();
    let (s_count, s_of) = subforest(&g2, &s).ok_or(q_err(QClause::ForcedForest))?;
    if s_count != k {
        return Err(q_err(QClause::ForestComponents {
            found: s_count,
            expected: k,
        }));
    }
    let s_ids = component_ids(&g2, &s_of, s_count);
    Ok(RootedShape {
        k,
        graph,
        g2,
        trees,
        tree_of: labels,
        s,
        s_ids,
        s_of,
    })
}

/// V1 and V2 endpoints of the impurities, checked to pair the TI trees
/// with the V2 components one to one.
fn pair(lat: &Lattice, shape: &RootedShape, impurities: &[EdgeId]) -> Result<Vec<(VertexId, VertexId)>, ForestError> {
    if impurities.len() != shape.k {
        return Err(q_err(QClause::ImpurityCount {
            found: impurities.len(),
            expected: shape.k,
        }));
    }
    let mut tree_hits = alloc::vec![0usize; shape.trees.len()];
    let mut s_hits = alloc::vec![0usize; shape.s_ids.len()];
    let mut ends = Vec::new();
    for &e in impurities {
        if e >= lat.edge_count() || lat.edge(e).class != EdgeClass::E2 {
            return Err(q_err(QClause::Pairing));
        }
        let edge = lat.edge(e);
        let (x, y) = if lat.class(edge.u) == VertexClass::V1 {
            (edge.u, edge.v)
        } else {
            (edge.v, edge.u)
        };
        let t = shape.tree_of[shape.graph.base().local(x).expect("V1")];
        if shape.trees[t].class != TreeClass::TerminalInner {
            return Err(q_err(QClause::Pairing));
        }
        tree_hits[t] += 1;
        s_hits[shape.s_of[shape.g2.local(y).expect("V2")]] += 1;
        ends.push((x, y));
    }
    let trees_ok = shape
        .inner_trees()
        .iter()
        .all(|&t| tree_hits[t] == 1);
    if !trees_ok || s_hits.iter().any(|&h| h != 1) {
        return Err(q_err(QClause::Pairing));
    }
    Ok(ends)
}

fn pairing_map(shape: &RootedShape, ends: &[(VertexId, VertexId)]) -> BTreeMap<VertexId, VertexId> {
    ends.iter()
        .map(|&(x, y)| {
            let t = shape.tree_of[shape.graph.base().local(x).expect("V1")];
            let s = shape.s_of[shape.g2.local(y).expect("V2")];
            (shape.trees[t].id, shape.s_ids[s])
        })
        .collect()
}

pub fn to_rooted(lat: &Lattice, cov: &Covering) -> Result<RootedDecomposition, ForestError> {
    check_family(lat)?;
    let graph = rooted_class_graph(lat)?;
    let g1 = graph.base();
    let mut base = Vec::new();
    let mut boundary = Vec::new();
    let mut s = Vec::new();
    for z in lat.vertices_of(VertexClass::V3) {
        let w = cov.partner(lat, z);
        match lat.class(w) {
            VertexClass::V1 if g1.edge_through(z).is_some() => base.push(z),
            VertexClass::V1 => boundary.push(OuterEdge::Boundary { middle: z, vertex: w }),
            _ => s.push(z),
        }
    }
    let (count, labels) = subforest(g1, &base).ok_or(q_err(QClause::Cycle))?;
    let ids = component_ids(g1, &labels, count);
    let mut outer = Vec::with_capacity(count);
    for c in 0..count {
        let in_c = |v: VertexId| labels[g1.local(v).expect("V1")] == c;
        let mut bs = boundary.iter().filter(|o| in_c(o.vertex()));
        match (bs.next(), bs.next()) {
            (Some(o), None) => outer.push(*o),
            (Some(_), Some(_)) => return Err(q_err(QClause::BoundaryNotUnique { tree: ids[c] })),
            (None, _) => {
                let t = lat
                    .terminals()
                    .iter()
                    .copied()
                    .find(|&t| in_c(t))
                    .ok_or(q_err(QClause::NotSpanningTree))?;
                outer.push(OuterEdge::Terminal(t));
            }
        }
    }
    outer.sort_unstable();
    let dec = assemble_rooted(lat, base, outer, cov.impurities(lat))?;
    if dec.s != s {
        return Err(q_err(QClause::ForcedForest));
    }
    Ok(dec)
}

/// Builds the decomposition with the given tree and impurities, deriving
/// the V2 forest, the tree classes and the pairing.
pub fn assemble_rooted(
    lat: &Lattice,
    base: Vec<VertexId>,
    outer: Vec<OuterEdge>,
    impurities: Vec<EdgeId>,
) -> Result<RootedDecomposition, ForestError> {
    let shape = analyze_rooted(lat, &base, &outer)?;
    let ends = pair(lat, &shape, &impurities)?;
    Ok(RootedDecomposition {
        pairing: pairing_map(&shape, &ends),
        trees: shape.trees,
        s: shape.s,
        base,
        outer,
        impurities,
    })
}

/// Calls `f` with every impurity tuple that pairs the TI trees of `shape`
/// with its V2 components one to one, in TI-tree order. Stops early when
/// `f` returns `false`.
pub fn for_each_assignment(lat: &Lattice, shape: &RootedShape, mut f: impl FnMut(&[EdgeId]) -> bool) {
    let inner = shape.inner_trees();
    let mut options: Vec<Vec<(EdgeId, usize)>> = alloc::vec![Vec::new(); inner.len()];
    for (e, edge) in lat.edges().iter().enumerate() {
        if edge.class != EdgeClass::E2 {
            continue;
        }
        let (x, y) = if lat.class(edge.u) == VertexClass::V1 { (edge.u, edge.v) } else { (edge.v, edge.u) };
        let t = shape.tree_of[shape.graph.base().local(x).expect("V1")];
        if let Some(r) = inner.iter().position(|&i| i == t) {
            options[r].push((e, shape.s_of[shape.g2.local(y).expect("V2")]));
        }
    }
    let mut used = alloc::vec![false; shape.s_ids.len()];
    let mut picked = Vec::with_capacity(inner.len());
    assign(&options, &mut used, &mut picked, &mut f);
}

fn assign(
    options: &[Vec<(EdgeId, usize)>],
    used: &mut [bool],
    picked: &mut Vec<EdgeId>,
    f: &mut impl FnMut(&[EdgeId]) -> bool,
) -> bool {
    let r = picked.len();
    if r == options.len() {
        return f(picked);
    }
    for &(e, s) in &options[r] {
        if used[s] {
            continue;
        }
        used[s] = true;
        picked.push(e);
        let go = assign(options, used, picked, f);
        picked.pop();
        used[s] = false;
        if !go {
            return false;
        }
    }
    true
}

fn checked(lat: &Lattice, dec: &RootedDecomposition) -> Result<(RootedShape, Vec<(VertexId, VertexId)>), ForestError> {
    let shape = analyze_rooted(lat, &dec.base, &dec.outer)?;
    if shape.s != dec.s {
        return Err(q_err(QClause::ForcedForest));
    }
    let ends = pair(lat, &shape, &dec.impurities)?;
    if shape.trees != dec.trees || pairing_map(&shape, &ends) != dec.pairing {
        return Err(q_err(QClause::ClassMismatch));
    }
    Ok((shape, ends))
}

pub fn check_condition_q(lat: &Lattice, dec: &RootedDecomposition) -> Result<(), ForestError> {
    checked(lat, dec).map(|_| ())
}

fn orientation_of(
    shape: &RootedShape,
    dec: &RootedDecomposition,
    ends: &[(VertexId, VertexId)],
) -> BTreeMap<VertexId, Parent> {
    let mut roots: Vec<VertexId> = ends.iter().map(|e| e.0).collect();
    let mut parent = BTreeMap::new();
    for t in &shape.trees {
        if let OuterEdge::Boundary { middle, vertex } = t.outer {
            roots.push(vertex);
            parent.insert(vertex, Parent::Root { middle });
        }
    }
    let s_roots: Vec<VertexId> = ends.iter().map(|e| e.1).collect();
    let triples = orient_from(shape.graph.base(), &dec.base, &roots)
        .into_iter()
        .chain(orient_from(&shape.g2, &dec.s, &s_roots));
    for (v, p, z) in triples {
        parent.insert(v, Parent::Vertex { vertex: p, middle: z });
    }
    parent
}

/// Rebuilds the covering from a decomposition satisfying condition Q.
pub fn from_rooted(lat: &Lattice, dec: &RootedDecomposition) -> Result<Covering, ForestError> {
    let (shape, ends) = checked(lat, dec)?;
    let mut edges: Vec<EdgeId> = dec.impurities.clone();
    for (v, p) in orientation_of(&shape, dec, &ends) {
        edges.push(lat.edge_between(v, p.middle()).expect("half-diagonal"));
    }
    Covering::from_edges(lat, &edges).map_err(|_| q_err(QClause::Unrealizable))
}

pub fn orient_rooted(lat: &Lattice, dec: &RootedDecomposition) -> Result<Orientation, ForestError> {
    let (shape, ends) = checked(lat, dec)?;
    Ok(Orientation {
        parent: orientation_of(&shape, dec, &ends),
    })
}

/// Number of unit edges between each TI tree (rows, in `inner_trees`
/// order) and each V2 component (columns).
pub fn pairing_weights(lat: &Lattice, shape: &RootedShape) -> Vec<Vec<usize>> {
    let inner = shape.inner_trees();
    let mut row_of = alloc::vec![usize::MAX; shape.trees.len()];
    for (r, &t) in inner.iter().enumerate() {
        row_of[t] = r;
    }
    let mut w = alloc::vec![alloc::vec![0usize; shape.s_ids.len()]; inner.len()];
    for e in lat.edges().iter().filter(|e| e.class == EdgeClass::E2) {
        let (x, y) = if lat.class(e.u) == VertexClass::V1 { (e.u, e.v) } else { (e.v, e.u) };
        let r = row_of[shape.tree_of[shape.graph.base().local(x).expect("V1")]];
        if r != usize::MAX {
            w[r][shape.s_of[shape.g2.local(y).expect("V2")]] += 1;
        }
    }
    w
}

pub(crate) fn domain_partition_rooted(lat: &Lattice, cov: &Covering) -> Result<DomainPartition, ForestError> {
    let dec = to_rooted(lat, cov)?;
    let shape = analyze_rooted(lat, &dec.base, &dec.outer)?;
    let extra: Vec<(VertexId, VertexId)> = dec
        .outer
        .iter()
        .filter_map(|o| o.middle().map(|m| (o.vertex(), m)))
        .collect();
    let mut domains = DomainPartition::build(shape.graph.base(), &shape.tree_of, shape.trees.len(), &dec.base, &extra);
    domains.extend(DomainPartition::build(&shape.g2, &shape.s_of, shape.s_ids.len(), &dec.s, &[]));
    Ok(DomainPartition::from_domains(domains))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::enumerate;
    use crate::geometry::Coord;
    use crate::lattice::{build_cell_region, build_rectangle};

    fn single_cell() -> Lattice {
        build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap()
    }

    #[test]
    fn single_cell_round_trip() {
        let lat = single_cell();
        let mut n = 0;
        for cov in enumerate(&lat) {
            let dec = to_rooted(&lat, &cov).unwrap();
            let inner: Vec<_> = dec.trees.iter().filter(|t| t.class == TreeClass::TerminalInner).collect();
            assert_eq!(inner.len(), 1);
            assert_eq!(from_rooted(&lat, &dec).unwrap(), cov);
            n += 1;
        }
        assert_eq!(n, 12);
    }

    #[test]
    fn impurity_sits_on_terminal_tree() {
        let lat = single_cell();
        for cov in enumerate(&lat) {
            let dec = to_rooted(&lat, &cov).unwrap();
            let e = lat.edge(dec.impurities[0]);
            let x = if lat.class(e.u) == VertexClass::V1 { e.u } else { e.v };
            let shape = analyze_rooted(&lat, &dec.base, &dec.outer).unwrap();
            let t = shape.tree_of[shape.graph.base().local(x).unwrap()];
            assert_eq!(shape.trees[t].class, TreeClass::TerminalInner);
            let term = lat.terminals()[0];
            assert_eq!(shape.tree_of[shape.graph.base().local(term).unwrap()], t);
        }
    }

    #[test]
    fn rejects_rectangles() {
        let lat = build_rectangle(2, 1).unwrap();
        let cov = enumerate(&lat).next().unwrap();
        assert!(matches!(to_rooted(&lat, &cov), Err(ForestError::Lattice(_))));
    }

    #[test]
    fn two_boundary_attachments_rejected() {
        let lat = single_cell();
        let rg = rooted_class_graph(&lat).unwrap();
        let center = lat.vertex_at(Coord::new(0, 0)).unwrap();
        let mut outer: Vec<OuterEdge> = rg
            .outer()
            .iter()
            .copied()
            .filter(|o| o.middle().is_some() && o.vertex() == center)
            .take(2)
            .collect();
        outer.push(OuterEdge::Terminal(lat.terminals()[0]));
        let err = analyze_rooted(&lat, &[], &outer).unwrap_err();
        assert!(matches!(err, ForestError::ConditionQ(QClause::BoundaryNotUnique { .. })));
    }
}
