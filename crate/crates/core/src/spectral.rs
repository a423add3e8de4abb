//! Matrix-tree counts, hitting probabilities and the closed forms for
//! strips and one-impurity rectangles.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::covering::{count_exact, Covering};
use crate::forest::{
    analyze_rooted, assemble_rooted, for_each_assignment, from_rooted, pairing_weights, to_rooted, ForestError,
};
use crate::lattice::{
    build_cell_rectangle, rooted_class_graph, Lattice, LatticeError, OuterEdge, RootedClassGraph, RootedEdgeKind,
    VertexId,
};
use crate::linalg::{det_f64, det_i64, permanent, solve_f64, solve_rational};
use crate::spanning::for_each_spanning_tree;

/// Largest `|V1|` solved in exact arithmetic.
pub const EXACT_LIMIT: usize = 200;
/// Largest `|V1|` for which spanning trees are listed.
pub const TREE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("singular matrix")]
    Singular,
    #[error("{vertices} V1 vertices exceeds the limit of {limit}")]
    TooLarge { vertices: usize, limit: usize },
    #[error("argument must be at least {min}, got {got}")]
    Domain { got: usize, min: usize },
    #[error("no sign convention reproduces the enumerated counts")]
    Convention(Vec<CalibrationRow>),
}

/// Solution of `A p = b`.
#[derive(Clone, Debug, PartialEq)]
pub enum Hitting {
    Exact(Vec<BigRational>),
    Approx(Vec<f64>),
}

impl Hitting {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Hitting::Exact(p) => p.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            Hitting::Approx(p) => p.clone(),
        }
    }

    pub fn exact(&self) -> Option<&[BigRational]> {
        match self {
            Hitting::Exact(p) => Some(p),
            Hitting::Approx(_) => None,
        }
    }
}

/// The rooted Laplacian of a cell region.
#[derive(Clone, Debug)]
pub struct LaplacianSystem {
    /// V1 vertices in row order; the root is the extra last row of `a_bar`.
    pub vertices: Vec<VertexId>,
    pub a_bar: Vec<Vec<i64>>,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub p: Hitting,
    /// Vertex count of the lattice.
    pub n: usize,
    pub k: usize,
}

impl LaplacianSystem {
    /// Whether `A p = b` holds exactly. `None` for the floating path.
    pub fn is_harmonic(&self) -> Option<bool> {
        let p = self.p.exact()?;
        Some(self.a.iter().zip(&self.b).all(|(row, &bi)| {
            let s = row
                .iter()
                .zip(p)
                .fold(BigRational::zero(), |acc, (&x, y)| acc + y * BigInt::from(x));
            s == BigRational::from_integer(bi.into())
        }))
    }

    pub fn max_residual(&self) -> f64 {
        let p = self.p.to_f64();
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, &bi)| {
                let s: f64 = row.iter().zip(&p).map(|(&x, y)| x as f64 * y).sum();
                libm::fabs(s - bi as f64)
            })
            .fold(0.0, f64::max)
    }
}

/// Node count and edge list of the rooted multigraph.
pub fn rooted_edges(g: &RootedClassGraph) -> (usize, Vec<(usize, usize)>) {
    (g.node_count(), g.multigraph().iter().map(|e| (e.a, e.b)).collect())
}

pub fn laplacian(lat: &Lattice) -> Result<LaplacianSystem, SpectralError> {
    let k = lat.impurity_budget()?;
    let g = rooted_class_graph(lat)?;
    let (nodes, edges) = rooted_edges(&g);
    let mut a_bar = alloc::vec![alloc::vec![0i64; nodes]; nodes];
    for &(a, b) in &edges {
        a_bar[a][a] += 1;
        a_bar[b][b] += 1;
        a_bar[a][b] -= 1;
        a_bar[b][a] -= 1;
    }
    let m = nodes - 1;
    let a: Vec<Vec<i64>> = a_bar[..m].iter().map(|r| r[..m].to_vec()).collect();
    let vertices = g.base().vertices().to_vec();
    let b: Vec<i64> = vertices
        .iter()
        .map(|v| i64::from(lat.terminals().contains(v)))
        .collect();
    let p = if m <= EXACT_LIMIT {
        Hitting::Exact(solve_rational(&a, &b).ok_or(SpectralError::Singular)?)
    } else {
        let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let bf: Vec<f64> = b.iter().map(|&x| x as f64).collect();
        Hitting::Approx(solve_f64(&af, &bf).ok_or(SpectralError::Singular)?)
    };
    Ok(LaplacianSystem {
        vertices,
        a_bar,
        a,
        b,
        p,
        n: lat.vertex_count(),
        k,
    })
}

/// Number of spanning trees of the rooted graph, as `det A`.
pub fn tree_count(sys: &LaplacianSystem) -> BigInt {
    det_i64(&sys.a)
}

/// Tally of the spanning trees of the rooted graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QTreeCount {
    pub all: u64,
    /// Trees that correspond to at least one covering.
    pub q: u64,
    /// Sum over those trees of the number of admissible impurity tuples.
    pub placements: BigUint,
}

fn check_tree_limit(g: &RootedClassGraph) -> Result<(), SpectralError> {
    let v = g.base().vertices().len();
    if v > TREE_LIMIT {
        return Err(SpectralError::TooLarge {
            vertices: v,
            limit: TREE_LIMIT,
        });
    }
    Ok(())
}

/// Lists the spanning trees of the rooted graph and keeps those that pass
/// the tree conditions and admit an impurity tuple whose reconstruction is
/// a covering.
pub fn count_q_trees(lat: &Lattice) -> Result<QTreeCount, SpectralError> {
    let g = rooted_class_graph(lat)?;
    check_tree_limit(&g)?;
    let multi = g.multigraph();
    let (nodes, edges) = rooted_edges(&g);
    let mut tally = QTreeCount {
        all: 0,
        q: 0,
        placements: BigUint::zero(),
    };
    for_each_spanning_tree(nodes, &edges, |tree| {
        tally.all += 1;
        let mut base = Vec::new();
        let mut outer = Vec::new();
        for &i in tree {
            match multi[i].kind {
                RootedEdgeKind::Base(e) => base.push(e.middle),
                RootedEdgeKind::Outer(o) => outer.push(o),
            }
        }
        base.sort_unstable();
        outer.sort_unstable();
        let Ok(shape) = analyze_rooted(lat, &base, &outer) else {
            return;
        };
        let mut realized = 0u64;
        for_each_assignment(lat, &shape, |imp| {
            let ok = assemble_rooted(lat, base.clone(), outer.clone(), imp.to_vec())
                .and_then(|dec| from_rooted(lat, &dec))
                .is_ok();
            realized += u64::from(ok);
            true
        });
        if realized > 0 {
            tally.q += 1;
            tally.placements += realized;
        }
    });
    Ok(tally)
}

/// Coverings sharing one spanning tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeGroup {
    pub base: Vec<VertexId>,
    pub outer: Vec<OuterEdge>,
    /// `F(T)`: number of coverings in the group.
    pub count: u64,
    /// Permanent of the TI-tree by V2-component unit-edge count matrix.
    pub permanent: BigInt,
}

/// Groups coverings by the spanning tree of their rooted decomposition.
pub fn placements_per_tree(
    lat: &Lattice,
    coverings: impl IntoIterator<Item = Covering>,
) -> Result<Vec<TreeGroup>, SpectralError> {
    let mut groups: BTreeMap<(Vec<VertexId>, Vec<OuterEdge>), u64> = BTreeMap::new();
    for cov in coverings {
        let dec = to_rooted(lat, &cov)?;
        *groups.entry((dec.base, dec.outer)).or_insert(0) += 1;
    }
    groups
        .into_iter()
        .map(|((base, outer), count)| {
            let shape = analyze_rooted(lat, &base, &outer)?;
            let permanent = permanent(&pairing_weights(lat, &shape));
            Ok(TreeGroup {
                base,
                outer,
                count,
                permanent,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexBound {
    pub vertex: VertexId,
    pub p: BigRational,
    /// `|T| (N/k)^k / (2^k |T_Q|) * p_j`.
    pub bound: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub n: usize,
    pub k: usize,
    pub det_a: BigInt,
    pub tree_count_all: BigInt,
    pub tree_count_q: Option<u64>,
    /// `2^k |T_Q|`.
    pub lower: Option<BigUint>,
    /// `|det A| (N/k)^k`.
    pub upper: BigRational,
    pub exact_d: Option<BigUint>,
    pub per_vertex: Vec<VertexBound>,
}

impl BoundsReport {
    /// Whether `lower <= D <= upper`, when both sides are known.
    pub fn sandwich_holds(&self) -> Option<bool> {
        let d = self.exact_d.as_ref()?;
        let lower = self.lower.as_ref()?;
        let dr = BigRational::from_integer(BigInt::from(d.clone()));
        Some(lower <= d && dr <= self.upper)
    }
}

fn pow_ratio(n: usize, k: usize) -> BigRational {
    let r = BigRational::new(BigInt::from(n), BigInt::from(k));
    (0..k).fold(BigRational::from_integer(1.into()), |acc, _| acc * &r)
}

/// The two-sided estimate on `|D(G)|` and the per-vertex impurity bound.
/// The tree tally and per-vertex bounds are left out above
/// [`TREE_LIMIT`] V1 vertices.
pub fn bounds(lat: &Lattice, exact_d: Option<BigUint>) -> Result<BoundsReport, SpectralError> {
    let sys = laplacian(lat)?;
    let det_a = tree_count(&sys);
    let ratio = pow_ratio(sys.n, sys.k);
    let upper = BigRational::from_integer(det_a.clone()) * &ratio;
    let q = match count_q_trees(lat) {
        Ok(t) => Some(t.q),
        Err(SpectralError::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let two_k = BigUint::from(1u8) << sys.k;
    let lower = q.map(|q| &two_k * q);
    let mut per_vertex = Vec::new();
    if let (Some(q), Some(p)) = (q.filter(|&q| q > 0), sys.p.exact()) {
        let scale = BigRational::from_integer(det_a.clone()) * &ratio
            / BigRational::from_integer(BigInt::from(&two_k * q));
        per_vertex = sys
            .vertices
            .iter()
            .zip(p)
            .map(|(&vertex, pj)| VertexBound {
                vertex,
                p: pj.clone(),
                bound: &scale * pj,
            })
            .collect();
    }
    Ok(BoundsReport {
        n: sys.n,
        k: sys.k,
        tree_count_all: det_a.clone(),
        det_a,
        tree_count_q: q,
        lower,
        upper,
        exact_d,
        per_vertex,
    })
}

/// `8 * 6^(k-1)` coverings of the `2k x 1` strip.
pub fn strip_count(k: usize) -> Result<BigUint, SpectralError> {
    if k < 1 {
        return Err(SpectralError::Domain { got: k, min: 1 });
    }
    Ok((1..k).fold(BigUint::from(8u8), |acc, _| acc * 6u8))
}

/// Sign in front of the adjacency part of the rectangle operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// `4 I + K`, eigenvalues `4 + 2 cos p + 2 cos q`.
    Plus,
    /// `4 I - K`, eigenvalues `4 - 2 cos p - 2 cos q`.
    Minus,
}

impl Convention {
    pub fn label(self) -> &'static str {
        match self {
            Convention::Plus => "plus",
            Convention::Minus => "minus",
        }
    }

    fn sign(self) -> f64 {
        match self {
            Convention::Plus => 1.0,
            Convention::Minus => -1.0,
        }
    }
}

/// Closed-form quantities of the `cols x rows` one-impurity rectangle.
/// Vectors are indexed by `(x - 1) * rows + (y - 1)` for cell `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangleForm {
    pub cols: usize,
    pub rows: usize,
    pub convention: Convention,
    pub eigenvalues: Vec<f64>,
    pub det_eigen: f64,
    pub det_direct: f64,
    pub p: Vec<f64>,
    pub count: f64,
    pub probabilities: Vec<f64>,
}

/// `4 I ± K` on the grid of cells.
pub fn rectangle_operator(cols: usize, rows: usize, convention: Convention) -> Vec<Vec<f64>> {
    let n = cols * rows;
    let idx = |x: usize, y: usize| (x - 1) * rows + (y - 1);
    let mut a = alloc::vec![alloc::vec![0.0; n]; n];
    for x in 1..=cols {
        for y in 1..=rows {
            let i = idx(x, y);
            a[i][i] = 4.0;
            if x < cols {
                a[i][idx(x + 1, y)] = convention.sign();
                a[idx(x + 1, y)][i] = convention.sign();
            }
            if y < rows {
                a[i][idx(x, y + 1)] = convention.sign();
                a[idx(x, y + 1)][i] = convention.sign();
            }
        }
    }
    a
}

pub fn rectangle_closed_form(cols: usize, rows: usize, convention: Convention) -> RectangleForm {
    let s = convention.sign();
    let (nf, mf) = ((cols + 1) as f64, (rows + 1) as f64);
    let norm2 = nf * mf / 4.0;
    let phi = |k: usize, l: usize, x: usize, y: usize| {
        libm::sin(k as f64 * PI / nf * x as f64) * libm::sin(l as f64 * PI / mf * y as f64)
    };
    let mut eigenvalues = Vec::with_capacity(cols * rows);
    let mut p = alloc::vec![0.0; cols * rows];
    for k in 1..=cols {
        for l in 1..=rows {
            let e = 4.0 + s * (2.0 * libm::cos(k as f64 * PI / nf) + 2.0 * libm::cos(l as f64 * PI / mf));
            eigenvalues.push(e);
            let at_root = phi(k, l, cols, rows) / norm2;
            for x in 1..=cols {
                for y in 1..=rows {
                    p[(x - 1) * rows + (y - 1)] += phi(k, l, x, y) * at_root / e;
                }
            }
        }
    }
    let det_eigen: f64 = eigenvalues.iter().product();
    let det_direct = det_f64(&rectangle_operator(cols, rows, convention));
    let denom = 4.0 * p.iter().sum::<f64>() + 2.0;
    RectangleForm {
        cols,
        rows,
        convention,
        det_eigen,
        det_direct,
        count: libm::fabs(det_eigen) * denom,
        probabilities: p.iter().map(|x| x / denom).collect(),
        eigenvalues,
        p,
    }
}

/// Closed-form counts under both conventions next to the enumerated count.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRow {
    pub cols: usize,
    pub rows: usize,
    pub exact: BigUint,
    pub plus: f64,
    pub minus: f64,
}

/// The smallest rectangles used to fix the convention.
pub const CALIBRATION_SIZES: [(usize, usize); 2] = [(1, 1), (2, 1)];

fn close(x: f64, exact: &BigUint) -> bool {
    let e = exact.to_f64().unwrap_or(f64::INFINITY);
    libm::fabs(x - e) <= 1e-9 * e.max(1.0)
}

/// Picks the convention whose closed-form count equals the enumerated
/// count on every calibration size.
pub fn calibrate_convention() -> Result<(Convention, Vec<CalibrationRow>), SpectralError> {
    let mut rows = Vec::new();
    for (c, r) in CALIBRATION_SIZES {
        let exact = count_exact(&build_cell_rectangle(c, r)?);
        rows.push(CalibrationRow {
            cols: c,
            rows: r,
            plus: rectangle_closed_form(c, r, Convention::Plus).count,
            minus: rectangle_closed_form(c, r, Convention::Minus).count,
            exact,
        });
    }
    for conv in [Convention::Minus, Convention::Plus] {
        let ok = rows.iter().all(|row| {
            let v = if conv == Convention::Plus { row.plus } else { row.minus };
            close(v, &row.exact)
        });
        if ok {
            return Ok((conv, rows));
        }
    }
    Err(SpectralError::Convention(rows))
}

/// Midpoint rule for `(1/pi^2) * int_[0,pi]^2 log(4 + 2 cos x + 2 cos y)`
/// on a `grid x grid` mesh.
pub fn free_energy(grid: usize) -> Result<f64, SpectralError> {
    if grid < 8 {
        return Err(SpectralError::Domain { got: grid, min: 8 });
    }
    let h = PI / grid as f64;
    let c: Vec<f64> = (0..grid).map(|i| 2.0 * libm::cos((i as f64 + 0.5) * h)).collect();
    let mut total = 0.0;
    for &cx in &c {
        let row: f64 = c.iter().map(|&cy| libm::log(4.0 + cx + cy)).sum();
        total += row;
    }
    Ok(total / (grid * grid) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Coord, VertexClass};
    use crate::lattice::build_cell_region;

    #[test]
    fn single_cell_system() {
        let lat = build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap();
        let sys = laplacian(&lat).unwrap();
        assert_eq!(sys.a, alloc::vec![alloc::vec![4, -1], alloc::vec![-1, 2]]);
        assert_eq!(tree_count(&sys), BigInt::from(7));
        assert_eq!(sys.is_harmonic(), Some(true));
        let p = sys.p.exact().unwrap();
        assert_eq!(p[0], BigRational::new(1.into(), 7.into()));
        assert_eq!(p[1], BigRational::new(4.into(), 7.into()));
        assert!(sys.a_bar.iter().all(|r| r.iter().sum::<i64>() == 0));
        assert!(sys.vertices.iter().all(|&v| lat.class(v) == VertexClass::V1));
    }

    #[test]
    fn single_cell_trees() {
        let lat = build_cell_region(&[Coord::new(0, 0)], &[Coord::new(2, 2)]).unwrap();
        let t = count_q_trees(&lat).unwrap();
        assert_eq!(t.all, 7);
        assert_eq!(t.q, 4);
        assert_eq!(t.placements, BigUint::from(12u8));
    }

    #[test]
    fn strip_values() {
        assert_eq!(strip_count(1).unwrap(), BigUint::from(8u8));
        assert_eq!(strip_count(3).unwrap(), BigUint::from(288u32));
        assert!(strip_count(0).is_err());
    }

    #[test]
    fn one_cell_rectangle_by_hand() {
        let f = rectangle_closed_form(1, 1, Convention::Minus);
        assert!(libm::fabs(f.det_eigen - 4.0) < 1e-12);
        assert!(libm::fabs(f.p[0] - 0.25) < 1e-12);
        assert!(libm::fabs(f.count - 12.0) < 1e-9);
    }

    #[test]
    fn conventions_share_determinant() {
        for (c, r) in [(2, 3), (4, 4), (5, 2)] {
            let a = rectangle_closed_form(c, r, Convention::Plus).det_eigen;
            let b = rectangle_closed_form(c, r, Convention::Minus).det_eigen;
            assert!(libm::fabs(a - b) <= 1e-9 * a);
        }
    }

    #[test]
    fn free_energy_rejects_coarse_grid() {
        assert!(free_energy(4).is_err());
        assert!(free_energy(8).unwrap() > 0.0);
    }
}
