//! Wire formats: lattice specs, lattice dumps, coverings, decompositions
//! and the distribution CSV.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use anyhow::{anyhow, bail, Context};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use dimer_core::chain::HeatMap;
use dimer_core::covering::{Covering, ImpurityDistribution};
use dimer_core::forest::{ForestDecomposition, RootedDecomposition};
use dimer_core::{
    build_bowtie, build_cell_rectangle, build_cell_region, build_rectangle, build_triangular, class_graph, Coord,
    EdgeId, Lattice, OuterEdge, VertexClass, VertexId,
};

pub type Point = [i32; 2];
pub type Segment = [Point; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Rect,
    Cells,
    Bowtie,
    Triangular,
}

/// A lattice description as read from a spec file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminals: Option<Vec<Point>>,
}

fn coord(p: Point) -> Coord {
    Coord::new(p[0], p[1])
}

pub fn point(c: Coord) -> Point {
    [c.x, c.y]
}

pub fn segment(lat: &Lattice, e: EdgeId) -> Segment {
    let (a, b) = lat.edge_coords(e);
    [point(a), point(b)]
}

impl LatticeSpec {
    pub fn sized(family: FamilyName, m: usize, n: usize) -> Self {
        LatticeSpec {
            family,
            m: Some(m),
            n: Some(n),
            cells: None,
            terminals: None,
        }
    }

    pub fn build(&self) -> anyhow::Result<Lattice> {
        if let Some(cells) = &self.cells {
            if self.family != FamilyName::Cells {
                bail!("an explicit cell list needs family \"cells\"");
            }
            let cells: Vec<Coord> = cells.iter().copied().map(coord).collect();
            let terms: Vec<Coord> = self.terminals.iter().flatten().copied().map(coord).collect();
            return Ok(build_cell_region(&cells, &terms)?);
        }
        let (Some(m), Some(n)) = (self.m, self.n) else {
            bail!("lattice spec needs \"m\" and \"n\" or a cell list");
        };
        Ok(match self.family {
            FamilyName::Rect => build_rectangle(m, n)?,
            FamilyName::Bowtie => build_bowtie(m, n)?,
            FamilyName::Triangular => build_triangular(m, n)?,
            FamilyName::Cells => build_cell_rectangle(m, n)?,
        })
    }
}

pub fn read_spec(path: &str) -> anyhow::Result<LatticeSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {path}"))
}

#[derive(Serialize)]
pub struct VertexDump {
    pub at: Point,
    pub class: &'static str,
}

#[derive(Serialize)]
pub struct EdgeDump {
    pub ends: Segment,
    pub class: &'static str,
}

#[derive(Serialize)]
pub struct LatticeDump {
    pub family: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub terminals: Vec<Point>,
    pub vertices: Vec<VertexDump>,
    pub edges: Vec<EdgeDump>,
}

pub fn dump_lattice(lat: &Lattice) -> LatticeDump {
    LatticeDump {
        family: lat.family().name(),
        k: lat.impurity_budget().ok(),
        terminals: lat.terminals().iter().map(|&t| point(lat.coord(t))).collect(),
        vertices: (0..lat.vertex_count())
            .map(|v| VertexDump {
                at: point(lat.coord(v)),
                class: lat.class(v).label(),
            })
            .collect(),
        edges: (0..lat.edge_count())
            .map(|e| EdgeDump {
                ends: segment(lat, e),
                class: lat.edge(e).class.label(),
            })
            .collect(),
    }
}

pub fn covering_json(lat: &Lattice, c: &Covering) -> Vec<Segment> {
    c.edges(lat).into_iter().map(|e| segment(lat, e)).collect()
}

pub fn parse_covering(lat: &Lattice, line: &str) -> anyhow::Result<Covering> {
    let segs: Vec<Segment> = serde_json::from_str(line).context("covering must be a list of [[x1,y1],[x2,y2]]")?;
    let pairs: Vec<(Coord, Coord)> = segs.iter().map(|s| (coord(s[0]), coord(s[1]))).collect();
    Ok(Covering::from_coords(lat, &pairs)?)
}

/// Coverings one per line; blank lines are skipped.
pub fn read_coverings(lat: &Lattice, input: &mut dyn BufRead) -> anyhow::Result<Vec<Covering>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_covering(lat, &line).with_context(|| format!("line {}", i + 1))?);
    }
    Ok(out)
}

pub fn write_covering(out: &mut dyn Write, lat: &Lattice, c: &Covering) -> anyhow::Result<()> {
    serde_json::to_writer(&mut *out, &covering_json(lat, c))?;
    writeln!(out)?;
    Ok(())
}

/// Parses `"x1,y1,x2,y2;..."` into impurity edges of `lat`.
pub fn parse_fixed(lat: &Lattice, text: &str) -> anyhow::Result<Vec<EdgeId>> {
    let mut out = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let nums: Vec<i32> = part
            .split(',')
            .map(|s| s.trim().parse::<i32>())
            .collect::<Result<_, _>>()
            .map_err(|e| anyhow!("--fixed: {part:?}: {e}"))?;
        let [x1, y1, x2, y2] = nums[..] else {
            bail!("--fixed: {part:?} needs four integers");
        };
        let (a, b) = (Coord::new(x1, y1), Coord::new(x2, y2));
        let e = lat
            .edge_at(a, b)
            .ok_or_else(|| anyhow!("--fixed: {a} - {b} is not an edge of the lattice"))?;
        out.push(e);
    }
    Ok(out)
}

/// One row of the distribution and heat-map CSV.
#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeRow {
    pub edge_x1: i32,
    pub edge_y1: i32,
    pub edge_x2: i32,
    pub edge_y2: i32,
    pub class: String,
    pub count: String,
    pub probability: String,
}

fn row(lat: &Lattice, e: EdgeId, count: String, probability: &BigRational) -> EdgeRow {
    let [[x1, y1], [x2, y2]] = segment(lat, e);
    EdgeRow {
        edge_x1: x1,
        edge_y1: y1,
        edge_x2: x2,
        edge_y2: y2,
        class: lat.edge(e).class.label().to_string(),
        count,
        probability: probability.to_string(),
    }
}

fn write_rows(out: &mut dyn Write, rows: impl IntoIterator<Item = EdgeRow>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_distribution(out: &mut dyn Write, lat: &Lattice, d: &ImpurityDistribution) -> anyhow::Result<()> {
    write_rows(
        out,
        d.entries
            .iter()
            .map(|x| row(lat, x.edge, x.count.to_string(), &x.probability)),
    )
}

/// Every impurity-class edge, including those never hit.
pub fn write_heatmap(out: &mut dyn Write, lat: &Lattice, map: &HeatMap) -> anyhow::Result<()> {
    let rows = (0..lat.edge_count())
        .filter(|&e| lat.edge(e).class.is_impurity())
        .map(|e| {
            let h = map.hits.get(&e).copied().unwrap_or(0);
            row(lat, e, h.to_string(), &map.frequency(e))
        });
    write_rows(out, rows)
}

pub fn read_rows(input: &[u8]) -> anyhow::Result<Vec<EdgeRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

fn middle_segment(lat: &Lattice, class: VertexClass, z: VertexId) -> Segment {
    let g = class_graph(lat, class);
    let e = g.edge_through(z).expect("forest edge");
    [point(lat.coord(e.a)), point(lat.coord(e.b))]
}

fn label(lat: &Lattice, v: VertexId) -> String {
    let c = lat.coord(v);
    format!("{},{}", c.x, c.y)
}

#[derive(Serialize)]
pub struct ForestJson {
    pub f1: Vec<Segment>,
    pub f2: Vec<Segment>,
    pub impurities: Vec<Segment>,
    pub pairing: BTreeMap<String, Point>,
}

pub fn forest_json(lat: &Lattice, dec: &ForestDecomposition) -> ForestJson {
    ForestJson {
        f1: dec.f1.iter().map(|&z| middle_segment(lat, VertexClass::V1, z)).collect(),
        f2: dec.f2.iter().map(|&z| middle_segment(lat, VertexClass::V2, z)).collect(),
        impurities: dec.impurities.iter().map(|&e| segment(lat, e)).collect(),
        pairing: dec
            .pairing
            .iter()
            .map(|(&a, &b)| (label(lat, a), point(lat.coord(b))))
            .collect(),
    }
}

#[derive(Serialize)]
pub struct OuterJson {
    pub kind: &'static str,
    pub at: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub through: Option<Point>,
}

#[derive(Serialize)]
pub struct RootedJson {
    pub f1: Vec<Segment>,
    pub f2: Vec<Segment>,
    pub impurities: Vec<Segment>,
    pub pairing: BTreeMap<String, Point>,
    pub outer: Vec<OuterJson>,
    pub classes: BTreeMap<String, &'static str>,
}

pub fn rooted_json(lat: &Lattice, dec: &RootedDecomposition) -> RootedJson {
    RootedJson {
        f1: dec.base.iter().map(|&z| middle_segment(lat, VertexClass::V1, z)).collect(),
        f2: dec.s.iter().map(|&z| middle_segment(lat, VertexClass::V2, z)).collect(),
        impurities: dec.impurities.iter().map(|&e| segment(lat, e)).collect(),
        pairing: dec
            .pairing
            .iter()
            .map(|(&a, &b)| (label(lat, a), point(lat.coord(b))))
            .collect(),
        outer: dec
            .outer
            .iter()
            .map(|o| match *o {
                OuterEdge::Terminal(t) => OuterJson {
                    kind: "terminal",
                    at: point(lat.coord(t)),
                    through: None,
                },
                OuterEdge::Boundary { middle, vertex } => OuterJson {
                    kind: "boundary",
                    at: point(lat.coord(vertex)),
                    through: Some(point(lat.coord(middle))),
                },
            })
            .collect(),
        classes: dec
            .trees
            .iter()
            .map(|t| (label(lat, t.id), t.class.label()))
            .collect(),
    }
}

/// Decimal string for JSON counts.
pub fn count_string(c: &BigUint) -> String {
    c.to_string()
}
