//! Finite subgraphs of the radial graph and the class graphs derived
//! from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{Coord, EdgeClass, VertexClass};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `m` blocks wide, `n` blocks tall.
    Rect { m: usize, n: usize },
    /// Composed √2-blocks with `2k - 1` terminals.
    CellRegion { k: usize },
    /// Rectangle without the vertical unit edges.
    BowTie { m: usize, n: usize },
    /// Bow-tie plus horizontal edges between face centers.
    Triangular { m: usize, n: usize },
    /// Anything else: vertex-deleted lattices and hand-assembled graphs.
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Rect { .. } => "rect",
            Family::CellRegion { .. } => "cells",
            Family::BowTie { .. } => "bowtie",
            Family::Triangular { .. } => "triangular",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Rect { m, n } => write!(f, "rect({m},{n})"),
            Family::CellRegion { k } => write!(f, "cells(k={k})"),
            Family::BowTie { m, n } => write!(f, "bowtie({m},{n})"),
            Family::Triangular { m, n } => write!(f, "triangular({m},{n})"),
            Family::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("m + n must be odd (got m = {m}, n = {n})")]
    Parity { m: usize, n: usize },
    #[error("block counts must be at least 1 (got m = {m}, n = {n})")]
    Domain { m: usize, n: usize },
    #[error("geometry: {0}")]
    Geometry(GeometryIssue),
    #[error("impurity budget (|V1| + |V2| - |V3|) / 2 is not a positive integer: numerator {numerator}, terminals {terminals}")]
    Budget { numerator: i64, terminals: usize },
    #[error("operation needs a {expected} lattice, got {found}")]
    Family { expected: &'static str, found: Family },
    #[error("{0} is not a vertex of the radial graph")]
    NotAVertex(Coord),
    #[error("{0} - {1} is not an edge of the radial graph")]
    NotAnEdge(Coord, Coord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryIssue {
    EmptyRegion,
    CellNotV1(Coord),
    DisconnectedCells,
    TerminalNotV1(Coord),
    TerminalOnCell(Coord),
    TerminalNotAttachable(Coord),
    DuplicateTerminal(Coord),
}

impl fmt::Display for GeometryIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryIssue::EmptyRegion => f.write_str("cell region is empty"),
            GeometryIssue::CellNotV1(c) => write!(f, "cell center {c} is not a V1 point"),
            GeometryIssue::DisconnectedCells => f.write_str("cells are not connected"),
            GeometryIssue::TerminalNotV1(c) => write!(f, "terminal {c} is not a V1 point"),
            GeometryIssue::TerminalOnCell(c) => write!(f, "terminal {c} coincides with a cell vertex"),
            GeometryIssue::TerminalNotAttachable(c) => {
                write!(f, "terminal {c} has no face-center neighbor in the region")
            }
            GeometryIssue::DuplicateTerminal(c) => write!(f, "terminal {c} listed twice"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    /// Smaller endpoint (vertex ids follow coordinate order).
    pub u: VertexId,
    pub v: VertexId,
    pub class: EdgeClass,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, w: VertexId) -> bool {
        self.u == w || self.v == w
    }
}

/// An immutable finite lattice. Vertices are numbered in lexicographic
/// coordinate order and edges by `(min endpoint, max endpoint)`.
#[derive(Clone, Debug)]
pub struct Lattice {
    family: Family,
    coords: Vec<Coord>,
    classes: Vec<VertexClass>,
    index: BTreeMap<Coord, VertexId>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    terminals: Vec<VertexId>,
}

impl Lattice {
    fn assemble(
        family: Family,
        vertices: &BTreeSet<Coord>,
        edge_set: &BTreeSet<(Coord, Coord)>,
        terminals: &[Coord],
    ) -> Result<Lattice, LatticeError> {
        let coords: Vec<Coord> = vertices.iter().copied().collect();
        let mut classes = Vec::with_capacity(coords.len());
        let mut index = BTreeMap::new();
        for (i, &c) in coords.iter().enumerate() {
            classes.push(c.class().ok_or(LatticeError::NotAVertex(c))?);
            index.insert(c, i);
        }
        let mut edges = Vec::with_capacity(edge_set.len());
        for &(a, b) in edge_set {
            let class = EdgeClass::classify(a, b).ok_or(LatticeError::NotAnEdge(a, b))?;
            let ia = *index.get(&a).ok_or(LatticeError::NotAVertex(a))?;
            let ib = *index.get(&b).ok_or(LatticeError::NotAVertex(b))?;
            let (u, v) = if ia < ib { (ia, ib) } else { (ib, ia) };
            edges.push(Edge { u, v, class });
        }
        edges.sort_unstable();
        edges.dedup_by(|a, b| a.u == b.u && a.v == b.v);
        let mut incident = alloc::vec![Vec::new(); coords.len()];
        for (id, e) in edges.iter().enumerate() {
            incident[e.u].push(id);
            incident[e.v].push(id);
        }
        let terminals = terminals.iter().map(|t| index[t]).collect();
        Ok(Lattice {
            family,
            coords,
            classes,
            index,
            edges,
            incident,
            terminals,
        })
    }

    /// Hand-assembled lattice. Every point and edge must satisfy the class
    /// rules; no budget check is made.
    pub fn custom(vertices: &[Coord], edges: &[(Coord, Coord)]) -> Result<Lattice, LatticeError> {
        let vs: BTreeSet<Coord> = vertices.iter().copied().collect();
        let es = edges.iter().map(|&(a, b)| ordered(a, b)).collect();
        Lattice::assemble(Family::Custom, &vs, &es, &[])
    }

    /// Copy of the lattice with the given vertices (and their edges) removed.
    pub fn without_vertices(&self, removed: &[VertexId]) -> Lattice {
        let gone: BTreeSet<VertexId> = removed.iter().copied().collect();
        let vs: BTreeSet<Coord> = (0..self.vertex_count())
            .filter(|v| !gone.contains(v))
            .map(|v| self.coords[v])
            .collect();
        let es: BTreeSet<(Coord, Coord)> = self
            .edges
            .iter()
            .filter(|e| !gone.contains(&e.u) && !gone.contains(&e.v))
            .map(|e| (self.coords[e.u], self.coords[e.v]))
            .collect();
        let ts: Vec<Coord> = self
            .terminals
            .iter()
            .filter(|t| !gone.contains(t))
            .map(|&t| self.coords[t])
            .collect();
        Lattice::assemble(Family::Custom, &vs, &es, &ts).expect("sub-lattice of a valid lattice")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn coord(&self, v: VertexId) -> Coord {
        self.coords[v]
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn class(&self, v: VertexId) -> VertexClass {
        self.classes[v]
    }

    pub fn vertex_at(&self, c: Coord) -> Option<VertexId> {
        self.index.get(&c).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn terminals(&self) -> &[VertexId] {
        &self.terminals
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.incident[a]
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(a) == b)
    }

    pub fn edge_at(&self, a: Coord, b: Coord) -> Option<EdgeId> {
        self.edge_between(self.vertex_at(a)?, self.vertex_at(b)?)
    }

    pub fn edge_coords(&self, e: EdgeId) -> (Coord, Coord) {
        let edge = &self.edges[e];
        (self.coords[edge.u], self.coords[edge.v])
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.incident[v].iter().map(move |&e| self.edges[e].other(v))
    }

    pub fn count_class(&self, class: VertexClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn vertices_of(&self, class: VertexClass) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).filter(move |&v| self.classes[v] == class)
    }

    /// Number of half-diagonal edges at `v`.
    pub fn e1_degree(&self, v: VertexId) -> usize {
        self.incident[v]
            .iter()
            .filter(|&&e| self.edges[e].class == EdgeClass::E1)
            .count()
    }

    /// Face centers with fewer than four half-diagonals.
    pub fn is_boundary_middle(&self, v: VertexId) -> bool {
        self.classes[v] == VertexClass::V3 && self.e1_degree(v) < 4
    }

    /// `(|V1| + |V2| - |V3|) / 2`, the number of impurities in every covering.
    pub fn impurity_budget(&self) -> Result<usize, LatticeError> {
        let num = budget_numerator(
            self.count_class(VertexClass::V1),
            self.count_class(VertexClass::V2),
            self.count_class(VertexClass::V3),
        );
        if num > 0 && num % 2 == 0 {
            Ok((num / 2) as usize)
        } else {
            Err(LatticeError::Budget {
                numerator: num,
                terminals: self.terminals.len(),
            })
        }
    }

    /// Every edge obeys its class/distance rule and the incidence lists
    /// agree with the edge list.
    pub fn check_invariants(&self) -> bool {
        let edges_ok = self.edges.iter().all(|e| {
            e.u < e.v && EdgeClass::classify(self.coords[e.u], self.coords[e.v]) == Some(e.class)
        });
        let incidence_ok = self
            .incident
            .iter()
            .enumerate()
            .all(|(v, inc)| inc.iter().all(|&e| self.edges[e].touches(v)));
        edges_ok && incidence_ok
    }

    /// Lattice barycenter, as a sum over vertices together with the count.
    pub fn barycenter_sum(&self) -> (i64, i64, i64) {
        let (sx, sy) = self.coords.iter().fold((0i64, 0i64), |(sx, sy), c| {
            (sx + i64::from(c.x), sy + i64::from(c.y))
        });
        (sx, sy, self.vertex_count() as i64)
    }
}

fn budget_numerator(v1: usize, v2: usize, v3: usize) -> i64 {
    v1 as i64 + v2 as i64 - v3 as i64
}

fn ordered(a: Coord, b: Coord) -> (Coord, Coord) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn check_rect_params(m: usize, n: usize) -> Result<(), LatticeError> {
    if m < 1 || n < 1 {
        return Err(LatticeError::Domain { m, n });
    }
    if (m + n) % 2 == 0 {
        return Err(LatticeError::Parity { m, n });
    }
    Ok(())
}

struct RectParts {
    vertices: BTreeSet<Coord>,
    edges: BTreeSet<(Coord, Coord)>,
}

fn rect_parts(m: usize, n: usize, vertical: bool, horizontal_centers: bool) -> RectParts {
    let (m, n) = (m as i32, n as i32);
    let mut vertices = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for i in 0..=m {
        for j in 0..=n {
            vertices.insert(Coord::new(2 * i, 2 * j));
        }
    }
    for i in 0..m {
        for j in 0..n {
            let z = Coord::new(2 * i + 1, 2 * j + 1);
            vertices.insert(z);
            for (dx, dy) in [(-1, -1), (1, -1), (-1, 1), (1, 1)] {
                edges.insert(ordered(z, z.offset(dx, dy)));
            }
            if horizontal_centers && i + 1 < m {
                edges.insert(ordered(z, z.offset(2, 0)));
            }
        }
    }
    for i in 0..=m {
        for j in 0..=n {
            let c = Coord::new(2 * i, 2 * j);
            if i < m {
                edges.insert(ordered(c, c.offset(2, 0)));
            }
            if vertical && j < n {
                edges.insert(ordered(c, c.offset(0, 2)));
            }
        }
    }
    RectParts { vertices, edges }
}

/// The `m × n` block rectangle with corner `(0, 0)` at the origin.
pub fn build_rectangle(m: usize, n: usize) -> Result<Lattice, LatticeError> {
    check_rect_params(m, n)?;
    let parts = rect_parts(m, n, true, false);
    Lattice::assemble(Family::Rect { m, n }, &parts.vertices, &parts.edges, &[])
}

pub fn build_bowtie(m: usize, n: usize) -> Result<Lattice, LatticeError> {
    check_rect_params(m, n)?;
    let parts = rect_parts(m, n, false, false);
    Lattice::assemble(Family::BowTie { m, n }, &parts.vertices, &parts.edges, &[])
}

pub fn build_triangular(m: usize, n: usize) -> Result<Lattice, LatticeError> {
    check_rect_params(m, n)?;
    let parts = rect_parts(m, n, false, true);
    Lattice::assemble(Family::Triangular { m, n }, &parts.vertices, &parts.edges, &[])
}

const DIAGONALS: [(i32, i32); 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];
const UNIT: [(i32, i32); 4] = [(-2, 0), (2, 0), (0, -2), (0, 2)];
const CELL_NEIGHBORS: [(i32, i32); 8] = [
    (-2, -2),
    (2, -2),
    (-2, 2),
    (2, 2),
    (-4, 0),
    (4, 0),
    (0, -4),
    (0, 4),
];

/// Region composed of √2-blocks centered at the V1 points `cells`, with
/// `terminals` (V1 points, in index order) attached to its boundary.
pub fn build_cell_region(cells: &[Coord], terminals: &[Coord]) -> Result<Lattice, LatticeError> {
    if cells.is_empty() {
        return Err(LatticeError::Geometry(GeometryIssue::EmptyRegion));
    }
    let cell_set: BTreeSet<Coord> = cells.iter().copied().collect();
    if let Some(&c) = cell_set.iter().find(|c| c.class() != Some(VertexClass::V1)) {
        return Err(LatticeError::Geometry(GeometryIssue::CellNotV1(c)));
    }
    // edge- or corner-sharing cells count as adjacent
    let start = *cell_set.iter().next().expect("nonempty");
    let mut seen = BTreeSet::from([start]);
    let mut stack = alloc::vec![start];
    while let Some(c) = stack.pop() {
        for (dx, dy) in CELL_NEIGHBORS {
            let d = c.offset(dx, dy);
            if cell_set.contains(&d) && seen.insert(d) {
                stack.push(d);
            }
        }
    }
    if seen.len() != cell_set.len() {
        return Err(LatticeError::Geometry(GeometryIssue::DisconnectedCells));
    }

    let mut vertices = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for &c in &cell_set {
        vertices.insert(c);
        for (dx, dy) in DIAGONALS {
            let z = c.offset(dx, dy);
            vertices.insert(z);
            edges.insert(ordered(c, z));
            // the two corners flanking this side of the diamond
            for corner in [c.offset(2 * dx, 0), c.offset(0, 2 * dy)] {
                edges.insert(ordered(corner, z));
            }
        }
        for (dx, dy) in UNIT {
            let corner = c.offset(dx, dy);
            vertices.insert(corner);
            edges.insert(ordered(c, corner));
        }
    }

    let mut seen_terminals = BTreeSet::new();
    for &t in terminals {
        if t.class() != Some(VertexClass::V1) {
            return Err(LatticeError::Geometry(GeometryIssue::TerminalNotV1(t)));
        }
        if vertices.contains(&t) {
            return Err(LatticeError::Geometry(GeometryIssue::TerminalOnCell(t)));
        }
        if !seen_terminals.insert(t) {
            return Err(LatticeError::Geometry(GeometryIssue::DuplicateTerminal(t)));
        }
    }
    for &t in terminals {
        let mids: Vec<Coord> = DIAGONALS
            .iter()
            .map(|&(dx, dy)| t.offset(dx, dy))
            .filter(|z| vertices.contains(z))
            .collect();
        if mids.is_empty() {
            return Err(LatticeError::Geometry(GeometryIssue::TerminalNotAttachable(t)));
        }
        for z in mids {
            edges.insert(ordered(t, z));
        }
        for (dx, dy) in UNIT {
            let corner = t.offset(dx, dy);
            if vertices.contains(&corner) {
                edges.insert(ordered(t, corner));
            }
        }
    }
    for &t in terminals {
        vertices.insert(t);
    }

    let count = |cls| vertices.iter().filter(|c| c.class() == Some(cls)).count();
    let num = budget_numerator(count(VertexClass::V1), count(VertexClass::V2), count(VertexClass::V3));
    let budget_err = LatticeError::Budget {
        numerator: num,
        terminals: terminals.len(),
    };
    if num <= 0 || num % 2 != 0 {
        return Err(budget_err);
    }
    let k = (num / 2) as usize;
    if terminals.len() != 2 * k - 1 {
        return Err(budget_err);
    }
    Lattice::assemble(Family::CellRegion { k }, &vertices, &edges, terminals)
}

/// Doubled coordinate of grid cell `(x, y)` in a rotated rectangular
/// arrangement of cells: `x` steps along `(1, 1)`, `y` along `(1, -1)`.
pub fn grid_cell(x: i32, y: i32) -> Coord {
    Coord::new(2 * (x + y), 2 * (x - y))
}

/// The one-impurity rectangle: cells `(x, y)` with `1 <= x <= cols`,
/// `1 <= y <= rows`, and a single terminal at grid position `(cols + 1, rows)`.
pub fn build_cell_rectangle(cols: usize, rows: usize) -> Result<Lattice, LatticeError> {
    if cols < 1 || rows < 1 {
        return Err(LatticeError::Domain { m: cols, n: rows });
    }
    let (c, r) = (cols as i32, rows as i32);
    let mut cells = Vec::new();
    for x in 1..=c {
        for y in 1..=r {
            cells.push(grid_cell(x, y));
        }
    }
    build_cell_region(&cells, &[grid_cell(c + 1, r)])
}

/// An edge of a class graph: two same-class corners joined through their
/// common face center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClassEdge {
    pub a: VertexId,
    pub b: VertexId,
    pub middle: VertexId,
}

impl ClassEdge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Graph on the V1 (or V2) points of a lattice whose edges pass through
/// face centers.
#[derive(Clone, Debug)]
pub struct ClassGraph {
    class: VertexClass,
    vertices: Vec<VertexId>,
    edges: Vec<ClassEdge>,
    by_middle: BTreeMap<VertexId, usize>,
}

impl ClassGraph {
    pub fn class(&self) -> VertexClass {
        self.class
    }

    /// Lattice vertex ids, ascending.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[ClassEdge] {
        &self.edges
    }

    /// Position of a lattice vertex in `vertices()`.
    pub fn local(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn edge_through(&self, middle: VertexId) -> Option<&ClassEdge> {
        self.by_middle.get(&middle).map(|&i| &self.edges[i])
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<&ClassEdge> {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
    }
}

/// `G_1` or `G_2` of a lattice.
pub fn class_graph(lat: &Lattice, class: VertexClass) -> ClassGraph {
    assert!(class.is_corner(), "class graphs live on V1 or V2");
    let vertices: Vec<VertexId> = lat.vertices_of(class).collect();
    let mut edges = Vec::new();
    let mut by_middle = BTreeMap::new();
    for z in lat.vertices_of(VertexClass::V3) {
        let ends: Vec<VertexId> = lat
            .incident(z)
            .iter()
            .filter(|&&e| lat.edge(e).class == EdgeClass::E1)
            .map(|&e| lat.edge(e).other(z))
            .filter(|&w| lat.class(w) == class)
            .collect();
        if let [a, b] = ends[..] {
            by_middle.insert(z, edges.len());
            edges.push(ClassEdge {
                a: a.min(b),
                b: a.max(b),
                middle: z,
            });
        }
    }
    ClassGraph {
        class,
        vertices,
        edges,
        by_middle,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OuterEdge {
    /// `R`–terminal.
    Terminal(VertexId),
    /// `R`–`vertex` through the boundary face center `middle`.
    Boundary { middle: VertexId, vertex: VertexId },
}

impl OuterEdge {
    pub fn vertex(&self) -> VertexId {
        match *self {
            OuterEdge::Terminal(t) => t,
            OuterEdge::Boundary { vertex, .. } => vertex,
        }
    }

    pub fn middle(&self) -> Option<VertexId> {
        match *self {
            OuterEdge::Terminal(_) => None,
            OuterEdge::Boundary { middle, .. } => Some(middle),
        }
    }
}

/// `G_1` with the root adjoined. The root is not a lattice vertex; in the
/// multigraph view it is node `base.vertices().len()`.
#[derive(Clone, Debug)]
pub struct RootedClassGraph {
    base: ClassGraph,
    outer: Vec<OuterEdge>,
    boundary_middles: Vec<VertexId>,
}

/// One edge of the rooted multigraph, endpoints given as local node ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootedEdge {
    pub a: usize,
    pub b: usize,
    pub kind: RootedEdgeKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootedEdgeKind {
    Base(ClassEdge),
    Outer(OuterEdge),
}

impl RootedClassGraph {
    pub fn base(&self) -> &ClassGraph {
        &self.base
    }

    pub fn outer(&self) -> &[OuterEdge] {
        &self.outer
    }

    pub fn boundary_middles(&self) -> &[VertexId] {
        &self.boundary_middles
    }

    pub fn root(&self) -> usize {
        self.base.vertices.len()
    }

    pub fn node_count(&self) -> usize {
        self.base.vertices.len() + 1
    }

    /// All edges as a multigraph over local ids, base edges first.
    pub fn multigraph(&self) -> Vec<RootedEdge> {
        let root = self.root();
        let local = |v| self.base.local(v).expect("V1 vertex");
        let base = self.base.edges.iter().map(|e| RootedEdge {
            a: local(e.a),
            b: local(e.b),
            kind: RootedEdgeKind::Base(*e),
        });
        let outer = self.outer.iter().map(|o| RootedEdge {
            a: local(o.vertex()),
            b: root,
            kind: RootedEdgeKind::Outer(*o),
        });
        base.chain(outer).collect()
    }
}

/// `G̅_1` of a cell region: terminals and boundary face centers wired to
/// the root.
pub fn rooted_class_graph(lat: &Lattice) -> Result<RootedClassGraph, LatticeError> {
    if !matches!(lat.family(), Family::CellRegion { .. }) {
        return Err(LatticeError::Family {
            expected: "cell-region",
            found: lat.family(),
        });
    }
    let base = class_graph(lat, VertexClass::V1);
    let mut outer: Vec<OuterEdge> = lat.terminals().iter().map(|&t| OuterEdge::Terminal(t)).collect();
    let mut boundary_middles = Vec::new();
    for z in lat.vertices_of(VertexClass::V3) {
        if !lat.is_boundary_middle(z) {
            continue;
        }
        boundary_middles.push(z);
        for w in lat.neighbors(z) {
            if lat.class(w) == VertexClass::V1 {
                outer.push(OuterEdge::Boundary { middle: z, vertex: w });
            }
        }
    }
    Ok(RootedClassGraph {
        base,
        outer,
        boundary_middles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_cell() -> Lattice {
        build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap()
    }

    #[test]
    fn rectangle_counts() {
        let lat = build_rectangle(3, 2).unwrap();
        let corners = lat.count_class(VertexClass::V1) + lat.count_class(VertexClass::V2);
        assert_eq!(corners, 12);
        assert_eq!(lat.count_class(VertexClass::V3), 6);
        assert_eq!(lat.impurity_budget().unwrap(), 3);
        assert_eq!(build_rectangle(2, 1).unwrap().impurity_budget().unwrap(), 2);
        assert_eq!(build_rectangle(4, 3).unwrap().impurity_budget().unwrap(), 4);
        assert!(lat.check_invariants());
    }

    #[test]
    fn rectangle_errors() {
        assert_eq!(build_rectangle(2, 2).unwrap_err(), LatticeError::Parity { m: 2, n: 2 });
        assert_eq!(build_rectangle(0, 1).unwrap_err(), LatticeError::Domain { m: 0, n: 1 });
        assert!(matches!(build_bowtie(2, 2), Err(LatticeError::Parity { .. })));
        assert!(matches!(build_triangular(2, 2), Err(LatticeError::Parity { .. })));
    }

    #[test]
    fn bowtie_drops_vertical_edges() {
        let rect = build_rectangle(3, 2).unwrap();
        let bow = build_bowtie(3, 2).unwrap();
        assert_eq!(rect.coords(), bow.coords());
        let e2 = |l: &Lattice| l.edges().iter().filter(|e| e.class == EdgeClass::E2).count();
        // 4 columns of 2 vertical unit edges
        assert_eq!(e2(&rect) - e2(&bow), 8);
        assert_eq!(bow.impurity_budget().unwrap(), 3);
        for e in bow.edges() {
            let (a, b) = (bow.coord(e.u), bow.coord(e.v));
            assert!(!(e.class == EdgeClass::E2 && a.x == b.x));
        }
    }

    #[test]
    fn triangular_center_edges() {
        let e3 = |l: &Lattice| l.edges().iter().filter(|e| e.class == EdgeClass::E3).count();
        let tri = build_triangular(3, 2).unwrap();
        assert_eq!(e3(&tri), 4);
        assert_eq!(e3(&build_triangular(1, 2).unwrap()), 0);
        assert!(tri.check_invariants());
    }

    #[test]
    fn cell_region_counts() {
        let lat = single_cell();
        assert_eq!(lat.count_class(VertexClass::V1), 2);
        assert_eq!(lat.count_class(VertexClass::V2), 4);
        assert_eq!(lat.count_class(VertexClass::V3), 4);
        assert_eq!(lat.impurity_budget().unwrap(), 1);
        assert_eq!(lat.family(), Family::CellRegion { k: 1 });
        assert!(lat.check_invariants());
    }

    #[test]
    fn cell_region_errors() {
        assert!(matches!(
            build_cell_region(&[Coord::new(0, 0)], &[]),
            Err(LatticeError::Budget { .. })
        ));
        assert!(matches!(
            build_cell_region(&[Coord::new(0, 0), Coord::new(8, 0)], &[Coord::new(2, 2)]),
            Err(LatticeError::Geometry(GeometryIssue::DisconnectedCells))
        ));
        assert!(matches!(
            build_cell_region(&[Coord::new(0, 0)], &[Coord::new(6, 6)]),
            Err(LatticeError::Geometry(GeometryIssue::TerminalNotAttachable(_)))
        ));
        assert!(matches!(
            build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 0)]),
            Err(LatticeError::Geometry(GeometryIssue::TerminalNotV1(_)))
        ));
        // corner-sharing cells are connected
        assert!(build_cell_region(
            &[Coord::new(0, 0), Coord::new(4, 0)],
            &[Coord::new(2, 2), Coord::new(6, 2), Coord::new(-2, 2)]
        )
        .is_ok());
    }

    #[test]
    fn class_graph_middles() {
        let lat = build_rectangle(3, 2).unwrap();
        let g1 = class_graph(&lat, VertexClass::V1);
        let g2 = class_graph(&lat, VertexClass::V2);
        assert_eq!(g1.vertices().len(), 6);
        assert_eq!(g1.edges().len() + g2.edges().len(), 12);
        for z in lat.vertices_of(VertexClass::V3) {
            assert!(g1.edge_through(z).is_some() && g2.edge_through(z).is_some());
        }
        let one = build_rectangle(1, 2).unwrap();
        let g = class_graph(&one, VertexClass::V1);
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn rooted_single_cell() {
        let lat = single_cell();
        let rg = rooted_class_graph(&lat).unwrap();
        assert_eq!(rg.boundary_middles().len(), 3);
        // terminal plus three boundary attachments of the center
        assert_eq!(rg.outer().len(), 4);
        assert_eq!(rg.base().edges().len(), 1);
        assert!(matches!(
            rooted_class_graph(&build_rectangle(3, 2).unwrap()),
            Err(LatticeError::Family { .. })
        ));
    }
}
