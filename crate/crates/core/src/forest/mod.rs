//! Coverings as spanning forests of the two class graphs.
//!
//! On rectangles a covering is the same thing as a pair of forests with
//! `k` components each, paired by the impurities. On cell regions the
//! V1 forest closes up into a spanning tree through an extra root vertex.

mod pairing;
mod rooted;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::covering::CoveringError;
use crate::geometry::VertexClass;
use crate::graph::forest_components;
use crate::lattice::{ClassGraph, EdgeId, Family, LatticeError, VertexId};

pub use pairing::{
    check_condition_p, domain_partition_forests, forced_complement, from_forests, orient_forests,
    to_forests, ForestDecomposition,
};
pub use rooted::{
    analyze_rooted, assemble_rooted, check_condition_q, for_each_assignment, from_rooted, orient_rooted, pairing_weights, to_rooted,
    RootedDecomposition, RootedShape, TreeClass, TreeInfo,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PClause {
    UnknownMiddle { class: VertexClass, middle: VertexId },
    SharedMiddle(VertexId),
    Cycle(VertexClass),
    ComponentCount { class: VertexClass, found: usize, expected: usize },
    ImpurityCount { found: usize, expected: usize },
    NotImpurity(EdgeId),
    /// A component holds no impurity endpoint, or more than one.
    Pairing { class: VertexClass, component: VertexId },
    PairingMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QClause {
    UnknownMiddle(VertexId),
    BadOuterEdge,
    SharedMiddle(VertexId),
    Cycle,
    BoundaryNotUnique { tree: VertexId },
    NotSpanningTree,
    /// A tree reaches the root through a terminal other than its first.
    LaterTerminal { tree: VertexId },
    TreeCounts { ti: usize, to: usize, k: usize },
    ForcedForest,
    ForestComponents { found: usize, expected: usize },
    ImpurityCount { found: usize, expected: usize },
    Pairing,
    ClassMismatch,
    Unrealizable,
}

impl fmt::Display for PClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PClause::UnknownMiddle { class, middle } => {
                write!(f, "vertex {middle} is not the middle of a {} edge", class.label())
            }
            PClause::SharedMiddle(z) => write!(f, "middle {z} used by both forests"),
            PClause::Cycle(c) => write!(f, "{} forest has a cycle", c.label()),
            PClause::ComponentCount { class, found, expected } => write!(
                f,
                "{} forest has {found} components, expected {expected}",
                class.label()
            ),
            PClause::ImpurityCount { found, expected } => {
                write!(f, "{found} impurities, expected {expected}")
            }
            PClause::NotImpurity(e) => write!(f, "edge {e} is not a unit edge"),
            PClause::Pairing { class, component } => write!(
                f,
                "{} component {component} is not paired by exactly one impurity",
                class.label()
            ),
            PClause::PairingMismatch => f.write_str("stated pairing differs from the impurities"),
        }
    }
}

impl fmt::Display for QClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QClause::UnknownMiddle(z) => write!(f, "vertex {z} is not a usable middle"),
            QClause::BadOuterEdge => f.write_str("root edge is neither a terminal nor a boundary attachment"),
            QClause::SharedMiddle(z) => write!(f, "middle {z} used twice"),
            QClause::Cycle => f.write_str("tree part has a cycle"),
            QClause::BoundaryNotUnique { tree } => {
                write!(f, "tree {tree} reaches the root through several boundary vertices")
            }
            QClause::NotSpanningTree => f.write_str("not a spanning tree of the rooted graph"),
            QClause::LaterTerminal { tree } => {
                write!(f, "tree {tree} is attached at a terminal other than its first")
            }
            QClause::TreeCounts { ti, to, k } => write!(
                f,
                "{ti} terminal-rooted and {to} terminal-outer trees, expected {k} and {}",
                k - 1
            ),
            QClause::ForcedForest => f.write_str("V2 forest is not the complement of the tree"),
            QClause::ForestComponents { found, expected } => {
                write!(f, "V2 forest has {found} components, expected {expected}")
            }
            QClause::ImpurityCount { found, expected } => {
                write!(f, "{found} impurities, expected {expected}")
            }
            QClause::Pairing => f.write_str("impurities do not pair the trees with the V2 forest"),
            QClause::ClassMismatch => f.write_str("stated tree classes or pairing are wrong"),
            QClause::Unrealizable => f.write_str("no covering corresponds to this decomposition"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForestError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error("condition P violated: {0}")]
    ConditionP(PClause),
    #[error("condition Q violated: {0}")]
    ConditionQ(QClause),
}

pub(crate) fn family_error(expected: &'static str, found: Family) -> ForestError {
    ForestError::Lattice(LatticeError::Family { expected, found })
}

/// Components of the subforest of `g` made of the edges through `middles`,
/// as labels over `g.vertices()`. `None` on a cycle or unknown middle.
pub(crate) fn subforest(g: &ClassGraph, middles: &[VertexId]) -> Option<(usize, Vec<usize>)> {
    let mut pairs = Vec::with_capacity(middles.len());
    for &z in middles {
        let e = g.edge_through(z)?;
        pairs.push((g.local(e.a)?, g.local(e.b)?));
    }
    forest_components(g.vertices().len(), pairs)
}

/// Matches every non-root vertex of the subforest to the middle of the
/// edge towards its root. Returns `(vertex, parent, middle)` triples.
pub(crate) fn orient_from(
    g: &ClassGraph,
    middles: &[VertexId],
    roots: &[VertexId],
) -> Vec<(VertexId, VertexId, VertexId)> {
    let mut adj: BTreeMap<VertexId, Vec<(VertexId, VertexId)>> = BTreeMap::new();
    for &z in middles {
        let e = g.edge_through(z).expect("middle of a class edge");
        adj.entry(e.a).or_default().push((e.b, z));
        adj.entry(e.b).or_default().push((e.a, z));
    }
    let mut out = Vec::new();
    let mut seen = alloc::collections::BTreeSet::new();
    for &r in roots {
        seen.insert(r);
        let mut stack = alloc::vec![r];
        while let Some(u) = stack.pop() {
            for &(w, z) in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(w) {
                    out.push((w, u, z));
                    stack.push(w);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// One domain: a forest component together with the middles of its edges
/// (and, on cell regions, its boundary attachment).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Domain {
    pub class: VertexClass,
    /// Smallest vertex id, used as the domain label.
    pub id: VertexId,
    pub vertices: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainPartition {
    pub domains: Vec<Domain>,
}

impl DomainPartition {
    pub(crate) fn build(
        g: &ClassGraph,
        labels: &[usize],
        count: usize,
        middles: &[VertexId],
        extra: &[(VertexId, VertexId)],
    ) -> Vec<Domain> {
        let mut groups = alloc::vec![Vec::new(); count];
        for (i, &v) in g.vertices().iter().enumerate() {
            groups[labels[i]].push(v);
        }
        for &z in middles {
            let e = g.edge_through(z).expect("middle");
            groups[labels[g.local(e.a).expect("local")]].push(z);
        }
        for &(vertex, middle) in extra {
            groups[labels[g.local(vertex).expect("local")]].push(middle);
        }
        groups
            .into_iter()
            .map(|mut vs| {
                vs.sort_unstable();
                Domain {
                    class: g.class(),
                    id: vs[0],
                    vertices: vs,
                }
            })
            .collect()
    }

    pub(crate) fn from_domains(mut domains: Vec<Domain>) -> Self {
        domains.sort();
        DomainPartition { domains }
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    /// Domain label of every vertex that belongs to a domain.
    pub fn labels(&self) -> BTreeMap<VertexId, VertexId> {
        self.domains
            .iter()
            .flat_map(|d| d.vertices.iter().map(move |&v| (v, d.id)))
            .collect()
    }
}

/// Where a vertex points in an oriented forest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parent {
    Vertex { vertex: VertexId, middle: VertexId },
    /// Attached to the extra root through a boundary face center.
    Root { middle: VertexId },
}

impl Parent {
    pub fn middle(&self) -> VertexId {
        match *self {
            Parent::Vertex { middle, .. } | Parent::Root { middle } => middle,
        }
    }
}

/// Orientation of a decomposition towards its roots. Vertices absent from
/// the map are roots matched by impurities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Orientation {
    pub parent: BTreeMap<VertexId, Parent>,
}

/// Domains of a covering of a rectangle, bow-tie or cell region.
pub fn domain_partition(
    lat: &crate::lattice::Lattice,
    cov: &crate::covering::Covering,
) -> Result<DomainPartition, ForestError> {
    match lat.family() {
        Family::CellRegion { .. } => rooted::domain_partition_rooted(lat, cov),
        _ => domain_partition_forests(lat, cov),
    }
}
