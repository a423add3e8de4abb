//! Argument parsing and command dispatch.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use dimer_core::chain::{default_start, tv_to_uniform, HeatMap};
use dimer_core::covering::{
    central_edges, check_fixed, count_exact, enumerate, exact_impurity_distribution, validate,
    Constraint, Covering,
};
use dimer_core::forest::{
    check_condition_q, domain_partition, forced_complement, from_forests, from_rooted, to_forests, to_rooted,
};
use dimer_core::moves::{apply, check_lmc, list_sites, MoveKind};
use dimer_core::spectral::{bounds, calibrate_convention, free_energy, rectangle_closed_form, strip_count};
use dimer_core::{Family, Lattice};

use crate::io::{
    count_string, dump_lattice, forest_json, parse_fixed, read_coverings, read_spec, rooted_json,
    segment, write_covering, write_distribution, write_heatmap, FamilyName, LatticeSpec,
};
use crate::parallel::{count_parallel, run_chains, ChainPlan};

#[derive(Parser, Debug)]
#[command(name = "dimer", version, about = "Dimer coverings of the radial graph with diagonal impurities")]
pub struct Cli {
    /// Worker threads for parallel commands.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct LatticeArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// JSON lattice spec; overrides --m, --n and --family.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<String>,
    #[arg(long, value_enum, default_value = "rect")]
    pub family: FamilyName,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Write the main output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Vertex and edge lists with classes.
    Lattice {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Every covering, one JSON edge list per line.
    Enumerate {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact number of coverings.
    Count {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Impurities to hold fixed, as "x1,y1,x2,y2;...".
        #[arg(long)]
        fixed: Option<String>,
        /// Fix the unit edges nearest the barycenter.
        #[arg(long, conflicts_with = "fixed")]
        central: bool,
    },
    /// Exact impurity probability of every unit edge, as CSV.
    Distribution {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Checks every applicable move on every covering.
    MovesVerify {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Round-trips coverings through their forest decomposition.
    BijectionVerify {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Coverings to check, one per line; "-" reads stdin. Defaults to
        /// all coverings.
        #[arg(long, value_name = "FILE")]
        input: Option<String>,
        /// Write each decomposition as a JSON line here.
        #[command(flatten)]
        out: OutArgs,
    },
    /// Connectivity and diameter of the flip graph.
    Lmc {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Runs the local-move chain and reports an impurity heat map.
    Sample {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Steps per chain after burn-in; sets the sample count from --thin
        /// when --count is absent.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        burnin: u64,
        #[arg(long, default_value_t = 10)]
        thin: u64,
        /// Samples per chain.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 1)]
        chains: usize,
        /// Heat map CSV path; without it the CSV goes to stdout.
        #[arg(long, value_name = "FILE")]
        heatmap: Option<String>,
        /// Also report the total variation distance to the uniform law.
        #[arg(long)]
        tv: bool,
        /// Write the samples as JSON lines here.
        #[command(flatten)]
        out: OutArgs,
    },
    /// Matrix-tree sandwich and per-vertex impurity bounds of a cell region.
    Bounds {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Also enumerate to get the exact count.
        #[arg(long)]
        exact: bool,
    },
    /// Coverings of the 2k x 1 strip.
    Strip {
        #[arg(long)]
        k: usize,
        /// Compare with enumeration.
        #[arg(long)]
        verify: bool,
    },
    /// Closed form of the one-impurity cell rectangle.
    Rectangle {
        /// Columns.
        #[arg(long)]
        m: usize,
        /// Rows.
        #[arg(long)]
        n: usize,
        /// Compare with enumeration.
        #[arg(long)]
        exact: bool,
    },
    /// Midpoint quadrature of the free energy integral.
    Freeenergy {
        #[arg(long, default_value_t = 1024)]
        grid: usize,
    },
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
    Error(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Check(_) | Failure::Error(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Error(e.into())
    }
}

type Outcome = Result<(), Failure>;

impl LatticeArgs {
    pub fn spec(&self) -> Result<LatticeSpec, Failure> {
        if let Some(path) = &self.spec {
            return read_spec(path).map_err(|e| Failure::Usage(format!("--spec: {e:#}")));
        }
        match (self.m, self.n) {
            (Some(m), Some(n)) => Ok(LatticeSpec::sized(self.family, m, n)),
            _ => Err(Failure::Usage("--m and --n, or --spec, are required".into())),
        }
    }

    pub fn build(&self) -> Result<Lattice, Failure> {
        Ok(self.spec()?.build()?)
    }
}

pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub pool: Option<rayon::ThreadPool>,
}

impl Io<'_> {
    fn parallel<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(p) => p.install(f),
            None => f(),
        }
    }
}

fn with_out(out: &OutArgs, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Outcome) -> Outcome {
    match &out.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Usage(format!("--out: {path}: {e}")))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn print_json(out: &mut dyn Write, v: &impl serde::Serialize) -> Outcome {
    serde_json::to_writer(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return 1;
        }
        Err(e) => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    let pool = match cli.workers {
        Some(0) => Err(Failure::Usage("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map(Some)
            .map_err(|e| Failure::Error(e.into())),
        None => Ok(None),
    };
    let mut io = Io { stdin, stdout, pool: None };
    let result = pool.and_then(|pool| {
        io.pool = pool;
        dispatch(&cli.command, &mut io)
    });
    let _ = io.stdout.flush();
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = match &f {
                Failure::Usage(m) => writeln!(stderr, "usage error: {m}"),
                Failure::Check(m) => writeln!(stderr, "verification failed: {m}"),
                Failure::Error(e) => writeln!(stderr, "error: {e:#}"),
            };
            f.code()
        }
    }
}

pub fn dispatch(cmd: &Command, io: &mut Io) -> Outcome {
    match cmd {
        Command::Lattice { lattice, out } => {
            let lat = lattice.build()?;
            with_out(out, io.stdout, |w| print_json(w, &dump_lattice(&lat)))
        }
        Command::Enumerate { lattice, out } => {
            let lat = lattice.build()?;
            with_out(out, io.stdout, |w| {
                for c in enumerate(&lat) {
                    write_covering(w, &lat, &c)?;
                }
                Ok(())
            })
        }
        Command::Count { lattice, fixed, central } => count(lattice, fixed.as_deref(), *central, io),
        Command::Distribution { lattice, out } => {
            let lat = lattice.build()?;
            let d = exact_impurity_distribution(&lat).map_err(anyhow::Error::from)?;
            with_out(out, io.stdout, |w| Ok(write_distribution(w, &lat, &d)?))
        }
        Command::MovesVerify { lattice } => moves_verify(&lattice.build()?, io.stdout),
        Command::BijectionVerify { lattice, input, out } => {
            let lat = lattice.build()?;
            let coverings = match input.as_deref() {
                None => enumerate(&lat).collect(),
                Some("-") => read_coverings(&lat, io.stdin)?,
                Some(path) => {
                    let f = File::open(path).map_err(|e| Failure::Usage(format!("--input: {path}: {e}")))?;
                    read_coverings(&lat, &mut std::io::BufReader::new(f))?
                }
            };
            bijection_verify(&lat, &coverings, out, io.stdout)
        }
        Command::Lmc { lattice } => {
            let r = check_lmc(&lattice.build()?);
            let mut v = json!({
                "nodes": r.nodes,
                "edges": r.edges,
                "connected": r.connected,
                "components": r.components,
            });
            if let Some(d) = r.diameter {
                v["diameter"] = json!(d);
            }
            print_json(io.stdout, &v)?;
            if r.connected {
                Ok(())
            } else {
                Err(Failure::Check(format!("flip graph has {} components", r.components)))
            }
        }
        Command::Sample {
            lattice,
            seed,
            steps,
            burnin,
            thin,
            count,
            chains,
            heatmap,
            tv,
            out,
        } => {
            let count = match (count, steps) {
                (Some(c), _) => *c,
                (None, Some(s)) => (s / (*thin).max(1)).max(1) as usize,
                (None, None) => 10_000,
            };
            let plan = ChainPlan {
                seed: *seed,
                burnin: *burnin,
                thin: *thin,
                count,
                keep: *tv || out.out.is_some(),
            };
            sample(lattice, plan, *chains, heatmap.as_deref(), *tv, out, io)
        }
        Command::Bounds { lattice, exact } => bounds_cmd(&lattice.build()?, *exact, io.stdout),
        Command::Strip { k, verify } => {
            let c = strip_count(*k).map_err(|e| Failure::Usage(format!("--k: {e}")))?;
            let mut v = json!({ "count": count_string(&c) });
            if *verify {
                let lat = dimer_core::build_rectangle(2 * k, 1).map_err(anyhow::Error::from)?;
                let e = count_exact(&lat);
                v["enumerated"] = json!(count_string(&e));
                print_json(io.stdout, &v)?;
                if e != c {
                    return Err(Failure::Check("strip law disagrees with enumeration".into()));
                }
                return Ok(());
            }
            print_json(io.stdout, &v)
        }
        Command::Rectangle { m, n, exact } => rectangle(*m, *n, *exact, io.stdout),
        Command::Freeenergy { grid } => {
            let f = free_energy(*grid).map_err(|e| Failure::Usage(format!("--grid: {e}")))?;
            writeln!(io.stdout, "{f}")?;
            Ok(())
        }
    }
}

fn count(lattice: &LatticeArgs, fixed: Option<&str>, central: bool, io: &mut Io) -> Outcome {
    let lat = lattice.build()?;
    let mut v = Map::new();
    let edges = if central {
        let c = central_edges(&lat);
        v.insert("central".into(), json!(c.iter().map(|&e| segment(&lat, e)).collect::<Vec<_>>()));
        c
    } else if let Some(text) = fixed {
        let f = parse_fixed(&lat, text).map_err(|e| Failure::Usage(format!("{e:#}")))?;
        v.insert("fixed".into(), json!(f.iter().map(|&e| segment(&lat, e)).collect::<Vec<_>>()));
        f
    } else {
        Vec::new()
    };
    check_fixed(&lat, &edges).map_err(anyhow::Error::from)?;
    let total: BigUint = io.parallel(|| count_parallel(&lat, Constraint::forcing(&edges)));
    v.insert("count".into(), json!(count_string(&total)));
    print_json(io.stdout, &Value::Object(v))
}

#[derive(Default)]
struct MoveTally {
    square: u64,
    triangular: u64,
    bowtie: u64,
    violations: Vec<String>,
}

impl MoveTally {
    fn fail(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        }
    }
}

fn moves_verify(lat: &Lattice, out: &mut dyn Write) -> Outcome {
    let sites = list_sites(lat);
    let k = lat.impurity_budget().ok();
    let mut t = MoveTally::default();
    let mut coverings = 0u64;
    for c in enumerate(lat) {
        coverings += 1;
        let before: BTreeSet<_> = c.impurities(lat).into_iter().collect();
        let edges_before: BTreeSet<_> = c.edges(lat).into_iter().collect();
        let parts_before = domain_partition(lat, &c).ok();
        for (i, s) in sites.iter().enumerate() {
            let Ok(next) = apply(lat, &c, s) else { continue };
            let tag = || format!("covering {coverings}, site {i} ({:?})", s.kind);
            if validate(lat, &next.edges(lat)).is_err() {
                t.fail(format!("{}: result is not a covering", tag()));
                continue;
            }
            if apply(lat, &next, s).ok().as_ref() != Some(&c) {
                t.fail(format!("{}: move is not an involution", tag()));
            }
            let after: BTreeSet<_> = next.impurities(lat).into_iter().collect();
            if k.is_some_and(|k| after.len() != k) {
                t.fail(format!("{}: impurity count changed", tag()));
            }
            match s.kind {
                MoveKind::Square => {
                    t.square += 1;
                    if before != after {
                        t.fail(format!("{}: square move changed the impurities", tag()));
                    }
                }
                MoveKind::Triangular => {
                    t.triangular += 1;
                    let edges_after: BTreeSet<_> = next.edges(lat).into_iter().collect();
                    let swapped = edges_before.difference(&edges_after).count();
                    if before.difference(&after).count() != 1 || swapped != 2 {
                        t.fail(format!("{}: triangular move must swap one impurity and one unit-diagonal", tag()));
                    }
                    if parts_before.is_some() && parts_before != domain_partition(lat, &next).ok() {
                        t.fail(format!("{}: domain partition changed", tag()));
                    }
                }
                MoveKind::BowTie => t.bowtie += 1,
            }
        }
    }
    let ok = t.violations.is_empty();
    print_json(
        out,
        &json!({
            "coverings": coverings,
            "sites": sites.len(),
            "square": t.square,
            "triangular": t.triangular,
            "bowtie": t.bowtie,
            "violations": t.violations,
            "ok": ok,
        }),
    )?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Check("move invariants violated".into()))
    }
}

fn bijection_verify(lat: &Lattice, coverings: &[Covering], out: &OutArgs, stdout: &mut dyn Write) -> Outcome {
    let mut failures = Vec::new();
    let mut complement = 0u64;
    let mut lines: Vec<Value> = Vec::new();
    let keep = out.out.is_some();
    for (i, c) in coverings.iter().enumerate() {
        let result: anyhow::Result<()> = match lat.family() {
            Family::Rect { .. } | Family::BowTie { .. } => to_forests(lat, c).map_err(Into::into).and_then(|dec| {
                if from_forests(lat, &dec)? != *c {
                    return Err(anyhow!("reconstruction differs"));
                }
                if matches!(lat.family(), Family::Rect { .. }) {
                    if forced_complement(lat, &dec.f1) != dec.f2 {
                        return Err(anyhow!("V2 forest is not the forced complement"));
                    }
                    complement += 1;
                }
                if keep {
                    lines.push(serde_json::to_value(forest_json(lat, &dec))?);
                }
                Ok(())
            }),
            Family::CellRegion { .. } => to_rooted(lat, c).map_err(Into::into).and_then(|dec| {
                check_condition_q(lat, &dec)?;
                if from_rooted(lat, &dec)? != *c {
                    return Err(anyhow!("reconstruction differs"));
                }
                if keep {
                    lines.push(serde_json::to_value(rooted_json(lat, &dec))?);
                }
                Ok(())
            }),
            other => {
                return Err(Failure::Usage(format!(
                    "--family: no forest decomposition for {} lattices",
                    other.name()
                )))
            }
        };
        if let Err(e) = result {
            failures.push(format!("covering {}: {e:#}", i + 1));
        }
    }
    if keep {
        with_out(out, stdout, |w| {
            for l in &lines {
                print_json(w, l)?;
            }
            Ok(())
        })?;
    }
    let mut v = json!({
        "family": lat.family().name(),
        "coverings": coverings.len(),
        "roundTrip": coverings.len() - failures.len(),
        "failures": failures.iter().take(20).collect::<Vec<_>>(),
        "ok": failures.is_empty(),
    });
    if matches!(lat.family(), Family::Rect { .. }) {
        v["forcedComplement"] = json!(complement);
    }
    print_json(stdout, &v)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} coverings failed the round trip", failures.len())))
    }
}

fn sample(
    lattice: &LatticeArgs,
    plan: ChainPlan,
    chains: usize,
    heatmap: Option<&str>,
    tv: bool,
    out: &OutArgs,
    io: &mut Io,
) -> Outcome {
    if chains == 0 {
        return Err(Failure::Usage("--chains must be at least 1".into()));
    }
    let lat = lattice.build()?;
    let start = default_start(&lat).map_err(anyhow::Error::from)?;
    let runs = io
        .parallel(|| run_chains(&lat, &start, chains, plan))
        .map_err(anyhow::Error::from)?;
    let stdout = &mut *io.stdout;
    let mut merged = HeatMap::default();
    for r in &runs {
        merged.merge(&r.heatmap);
    }
    if out.out.is_some() {
        with_out(out, stdout, |w| {
            for r in &runs {
                for c in &r.samples {
                    write_covering(w, &lat, c)?;
                }
            }
            Ok(())
        })?;
    }
    let mut summary = Map::new();
    summary.insert("seed".into(), json!(plan.seed));
    summary.insert("chains".into(), json!(chains));
    summary.insert("samples".into(), json!(merged.samples));
    if tv {
        let all: Vec<Covering> = runs.into_iter().flat_map(|r| r.samples).collect();
        let states = count_exact(&lat);
        let states: usize = states
            .try_into()
            .map_err(|_| Failure::Usage("--tv: state space too large".into()))?;
        summary.insert("states".into(), json!(states));
        summary.insert("tv".into(), json!(tv_to_uniform(&all, states)));
    }
    match heatmap {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Usage(format!("--heatmap: {path}: {e}")))?;
            let mut w = BufWriter::new(file);
            write_heatmap(&mut w, &lat, &merged)?;
            w.flush()?;
            print_json(stdout, &Value::Object(summary))
        }
        None if out.out.is_none() && !tv => Ok(write_heatmap(stdout, &lat, &merged)?),
        None => {
            write_heatmap(stdout, &lat, &merged)?;
            print_json(&mut std::io::stderr(), &Value::Object(summary))
        }
    }
}

fn bounds_cmd(lat: &Lattice, exact: bool, out: &mut dyn Write) -> Outcome {
    let (convention, rows) = match calibrate_convention() {
        Ok(c) => c,
        Err(e) => return Err(Failure::Check(format!("{e}: {e:?}"))),
    };
    let _ = rows;
    let d = exact.then(|| count_exact(lat));
    let r = bounds(lat, d).map_err(anyhow::Error::from)?;
    let per_vertex: BTreeMap<String, Value> = r
        .per_vertex
        .iter()
        .map(|vb| {
            let c = lat.coord(vb.vertex);
            (
                format!("{},{}", c.x, c.y),
                json!({ "p": vb.p.to_string(), "bound": vb.bound.to_string() }),
            )
        })
        .collect();
    let mut v = json!({
        "n": r.n,
        "k": r.k,
        "detA": r.det_a.to_string(),
        "treeCountAll": r.tree_count_all.to_string(),
        "upper": r.upper.to_string(),
        "perVertexBound": per_vertex,
        "convention": convention.label(),
    });
    if let Some(q) = r.tree_count_q {
        v["treeCountQ"] = json!(q.to_string());
    }
    if let Some(l) = &r.lower {
        v["lower"] = json!(count_string(l));
    }
    if let Some(d) = &r.exact_d {
        v["exactD"] = json!(count_string(d));
    }
    let sandwich = r.sandwich_holds();
    if let Some(s) = sandwich {
        v["sandwich"] = json!(s);
    }
    print_json(out, &v)?;
    match sandwich {
        Some(false) => Err(Failure::Check("count lies outside the bounds".into())),
        _ => Ok(()),
    }
}

fn rectangle(cols: usize, rows: usize, exact: bool, out: &mut dyn Write) -> Outcome {
    if cols == 0 || rows == 0 {
        return Err(Failure::Usage("--m and --n must be positive".into()));
    }
    let (convention, calibration) = match calibrate_convention() {
        Ok(c) => c,
        Err(e) => return Err(Failure::Check(format!("{e}: {e:?}"))),
    };
    let f = rectangle_closed_form(cols, rows, convention);
    let mut v = json!({
        "cols": cols,
        "rows": rows,
        "convention": convention.label(),
        "calibration": calibration.iter().map(|c| json!({
            "cols": c.cols,
            "rows": c.rows,
            "exact": count_string(&c.exact),
            "plus": c.plus,
            "minus": c.minus,
        })).collect::<Vec<_>>(),
        "detEigen": f.det_eigen,
        "detDirect": f.det_direct,
        "count": f.count,
        "p": f.p,
        "probabilities": f.probabilities,
    });
    let mut mismatch = false;
    if exact {
        let lat = dimer_core::build_cell_rectangle(cols, rows).map_err(anyhow::Error::from)?;
        let e = count_exact(&lat);
        let ef: f64 = e.to_string().parse().unwrap_or(f64::INFINITY);
        mismatch = (f.count - ef).abs() > 1e-9 * ef.max(1.0);
        v["exact"] = json!(count_string(&e));
    }
    mismatch |= (f.det_eigen - f.det_direct).abs() > 1e-9 * f.det_direct.abs().max(1.0);
    print_json(out, &v)?;
    if mismatch {
        Err(Failure::Check("closed form disagrees".into()))
    } else {
        Ok(())
    }
}
