//! Instance files and result tables.
//!
//! An instance is a JSON object `{kind, p, params, data_paths, seed}` whose
//! data paths are resolved relative to the JSON file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::datagen::{TwoMoonsDataset, DEFAULT_ALPHA};
use crate::functions::families::Family;
use crate::functions::{
    gaussian_kernel, ConcaveCardinality, ConcaveShape, CutFunction, Iwata, LabelPrior, Modular, MutualInformation,
    WeightedGraph,
};
use crate::screening::{IaesReport, TriggerRow};
use crate::solver::TraceRow;
use crate::{Error, Oracle, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// `params.weights`.
    Modular,
    /// `params.shape`, `params.scale`, `params.weights`.
    ConcaveCardinality,
    Iwata,
    /// `data_paths.edges` (`i,j,weight`) and `data_paths.unary` (`index,value`).
    Cut,
    /// `data_paths.points` (`x,y,moon`), `data_paths.labels` (`index,label`), `params.alpha`.
    TwoMoons,
    /// A seeded random test family: `params.family`, with `seed`.
    Family,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub p: usize,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub data_paths: BTreeMap<String, String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, p: usize) -> Self {
        Self {
            kind,
            p,
            params: BTreeMap::new(),
            data_paths: BTreeMap::new(),
            seed: None,
        }
    }

    fn param<T: for<'de> Deserialize<'de>>(&self, key: &str) -> Result<T> {
        let v = self
            .params
            .get(key)
            .ok_or_else(|| Error::Parse(format!("{:?} instance needs params.{key}", self.kind)))?;
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("params.{key}: {e}")))
    }

    fn path(&self, base: &Path, key: &str) -> Result<PathBuf> {
        let rel = self
            .data_paths
            .get(key)
            .ok_or_else(|| Error::Parse(format!("{:?} instance needs data_paths.{key}", self.kind)))?;
        Ok(base.join(rel))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got });
        }
        Ok(())
    }

    /// Builds the oracle; data paths are relative to `base`.
    pub fn build(&self, base: &Path) -> Result<Oracle> {
        match self.kind {
            InstanceKind::Modular => {
                let w: Vec<f64> = self.param("weights")?;
                self.check_len(w.len())?;
                Ok(Oracle::new(Modular::new(w)))
            }
            InstanceKind::ConcaveCardinality => {
                let shape: ConcaveShape = self.param("shape")?;
                let scale: f64 = self.param("scale")?;
                let w: Vec<f64> = self.param("weights")?;
                self.check_len(w.len())?;
                if !(scale >= 0.0) {
                    return Err(Error::PreconditionViolated(format!(
                        "scale {scale} must be nonnegative"
                    )));
                }
                Ok(Oracle::new(ConcaveCardinality::new(self.p, shape, scale, w)))
            }
            InstanceKind::Iwata => Ok(Oracle::new(Iwata::new(self.p))),
            InstanceKind::Cut => {
                let edges = read_edges_csv(&self.path(base, "edges")?)?;
                let unary = read_indexed_csv(&self.path(base, "unary")?, self.p)?;
                let graph = WeightedGraph::new(self.p, edges)?;
                Ok(Oracle::new(CutFunction::new(graph, unary)?))
            }
            InstanceKind::TwoMoons => {
                let points = read_points_csv(&self.path(base, "points")?)?;
                self.check_len(points.len())?;
                let labels = read_labels_csv(&self.path(base, "labels")?)?;
                let alpha: f64 = self.param("alpha").unwrap_or(DEFAULT_ALPHA);
                let kernel = gaussian_kernel(&points, alpha)?;
                let prior = LabelPrior::from_labels(self.p, &labels, LabelPrior::DEFAULT_CLAMP)?;
                Ok(Oracle::new(MutualInformation::new(kernel, prior)?))
            }
            InstanceKind::Family => {
                let name: String = self.param("family")?;
                let family: Family = name.parse().map_err(Error::Parse)?;
                Ok(family.instance(self.p, self.seed.unwrap_or(0)))
            }
        }
    }
}

pub fn load_instance(path: &Path) -> Result<(InstanceSpec, Oracle)> {
    let spec: InstanceSpec = serde_json::from_reader(File::open(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let oracle = spec.build(base)?;
    Ok((spec, oracle))
}

pub fn save_instance(spec: &InstanceSpec, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, spec)?;
    writeln!(f)?;
    Ok(())
}

pub fn write_edges_csv(path: &Path, graph: &WeightedGraph) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "weight"])?;
    for &(i, j, weight) in graph.edges() {
        w.serialize((i, j, weight))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edges_csv(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// `index,value` rows covering `0..p` exactly once.
pub fn write_indexed_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "value"])?;
    for (j, v) in values.iter().enumerate() {
        w.serialize((j, v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_indexed_csv(path: &Path, p: usize) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = vec![None; p];
    for row in r.deserialize() {
        let (j, v): (usize, f64) = row?;
        if j >= p {
            return Err(Error::Parse(format!("{}: index {j} >= {p}", path.display())));
        }
        if out[j].replace(v).is_some() {
            return Err(Error::Parse(format!("{}: index {j} repeated", path.display())));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(j, v)| v.ok_or_else(|| Error::Parse(format!("{}: index {j} missing", path.display()))))
        .collect()
}

fn read_points_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        if row.len() < 2 {
            return Err(Error::Parse(format!("{}: point rows need x,y", path.display())));
        }
        let x: f64 = row[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad x '{}'", &row[0])))?;
        let y: f64 = row[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad y '{}'", &row[1])))?;
        out.push(vec![x, y]);
    }
    Ok(out)
}

fn read_labels_csv(path: &Path) -> Result<Vec<(usize, bool)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let (j, label): (usize, u8) = row?;
        if label > 1 {
            return Err(Error::Parse(format!("{}: label {label} is not 0 or 1", path.display())));
        }
        out.push((j, label == 1));
    }
    Ok(out)
}

/// Writes `points.csv`, `labels.csv` and `instance.json` into `dir`.
pub fn write_two_moons(dir: &Path, data: &TwoMoonsDataset, alpha: f64) -> Result<InstanceSpec> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("points.csv"))?;
    w.write_record(["x", "y", "moon"])?;
    for (pt, m) in data.points.iter().zip(&data.moon_id) {
        w.serialize((pt[0], pt[1], m))?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("labels.csv"))?;
    w.write_record(["index", "label"])?;
    for &(j, positive) in &data.labels {
        w.serialize((j, u8::from(positive)))?;
    }
    w.flush()?;
    let mut spec = InstanceSpec::new(InstanceKind::TwoMoons, data.p());
    spec.params.insert("alpha".into(), json!(alpha));
    spec.params.insert("p0".into(), json!(data.labels.len()));
    spec.data_paths.insert("points".into(), "points.csv".into());
    spec.data_paths.insert("labels".into(), "labels.csv".into());
    spec.seed = Some(data.seed);
    save_instance(&spec, &dir.join("instance.json"))?;
    Ok(spec)
}

/// Writes `edges.csv`, `unary.csv` and `instance.json` into `dir`.
/// `params` is stored verbatim as metadata.
pub fn write_cut_instance(
    dir: &Path,
    graph: &WeightedGraph,
    unary: &[f64],
    params: BTreeMap<String, Value>,
    seed: Option<u64>,
) -> Result<InstanceSpec> {
    std::fs::create_dir_all(dir)?;
    write_edges_csv(&dir.join("edges.csv"), graph)?;
    write_indexed_csv(&dir.join("unary.csv"), unary)?;
    let mut spec = InstanceSpec::new(InstanceKind::Cut, graph.vertex_count());
    spec.params = params;
    spec.data_paths.insert("edges".into(), "edges.csv".into());
    spec.data_paths.insert("unary".into(), "unary.csv".into());
    spec.seed = seed;
    save_instance(&spec, &dir.join("instance.json"))?;
    Ok(spec)
}

pub const TRACE_HEADER: [&str; 5] = ["iteration", "gap", "dual_norm", "oracle_calls", "elapsed_ns"];
pub const REJECTION_HEADER: [&str; 8] = [
    "trigger_index",
    "solver_iteration",
    "gap",
    "n_active",
    "n_inactive",
    "rejection_ratio",
    "p_hat",
    "elapsed_ns",
];
pub const BENCH_HEADER: [&str; 7] = [
    "instance_name",
    "variant",
    "screen_time_s",
    "solver_time_s",
    "total_time_s",
    "speedup",
    "value",
];

pub fn write_trace_csv<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.serialize((r.iteration, r.gap, r.dual_norm, r.oracle_calls, r.elapsed_ns))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rejection_csv<W: Write>(out: W, rows: &[TriggerRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(REJECTION_HEADER)?;
    for r in rows {
        w.serialize((
            r.trigger_index,
            r.solver_iteration,
            r.gap,
            r.n_active,
            r.n_inactive,
            r.rejection_ratio,
            r.p_hat,
            r.elapsed_ns,
        ))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_name: String,
    pub variant: String,
    pub screen_time_s: f64,
    pub solver_time_s: f64,
    pub total_time_s: f64,
    pub speedup: f64,
    pub value: f64,
}

pub fn write_bench_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.serialize((
            &r.instance_name,
            &r.variant,
            r.screen_time_s,
            r.solver_time_s,
            r.total_time_s,
            r.speedup,
            r.value,
        ))?;
    }
    w.flush()?;
    Ok(())
}

/// JSON summary of one run.
pub fn summary_json(set: &crate::ElementSet, value: f64, report: &IaesReport, extra: BTreeMap<String, Value>) -> Value {
    let mut v = json!({
        "minimizer": set.to_vec(),
        "minimizer_size": set.len(),
        "value": value,
        "iterations": report.iterations,
        "final_gap": report.final_gap,
        "oracle_calls": report.oracle_calls,
        "screen_time_s": report.screen_time.as_secs_f64(),
        "solver_time_s": report.solver_time.as_secs_f64(),
        "total_time_s": (report.screen_time + report.solver_time).as_secs_f64(),
        "triggers": report.triggers.len(),
        "rejection_ratio": report.rejection_ratio(),
        "n_active": report.state.active.len(),
        "n_inactive": report.state.inactive.len(),
    });
    if let Value::Object(map) = &mut v {
        map.extend(extra);
    }
    v
}
