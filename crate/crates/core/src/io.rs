//! CSV and JSON serialization of clouds, graphs, spectra, and study tables.
//!
//! CSV files start with one `#` comment line carrying provenance (tool
//! version, config hash, master seed); readers should skip `#` lines.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::aug_graph::AugGraph;
use crate::distributions::{DiscreteDistribution, LabeledPointCloud};
use crate::grid::Grid;
use crate::spectral::Embedding;
use crate::Result;

/// Provenance line written at the top of every CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub master_seed: u64,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, master_seed: u64) -> Self {
        Provenance { tool_version: env!("CARGO_PKG_VERSION").to_string(), config_hash: config_hash.into(), master_seed }
    }

    fn comment(&self) -> String {
        format!("# aglab {} config_hash={} seed={}\n", self.tool_version, self.config_hash, self.master_seed)
    }
}

/// Header plus preformatted rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write<W: Write>(&self, mut out: W, provenance: Option<&Provenance>) -> Result<()> {
        if let Some(p) = provenance {
            out.write_all(p.comment().as_bytes())?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path, provenance: Option<&Provenance>) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf, provenance)?;
        fs::write(path, buf)?;
        Ok(())
    }
}

/// Pretty JSON with a trailing newline; field order follows declaration order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn cloud_table(cloud: &LabeledPointCloud) -> Table {
    let mut t = Table::new(["x", "y", "label", "weight"]);
    for (p, l, w) in cloud.iter() {
        t.push(vec![p[0].to_string(), p[1].to_string(), l.to_string(), w.to_string()]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudSummary {
    pub count: usize,
    pub class_counts: Vec<usize>,
    pub total_weight: f64,
    pub beta: Option<f64>,
    pub grid: Option<Grid>,
}

impl CloudSummary {
    pub fn new(cloud: &LabeledPointCloud, beta: Option<f64>, grid: Option<Grid>) -> Self {
        let classes = cloud.labels().iter().max().map_or(0, |m| m + 1);
        let mut class_counts = vec![0; classes];
        for &l in cloud.labels() {
            class_counts[l] += 1;
        }
        CloudSummary {
            count: cloud.len(),
            class_counts,
            total_weight: crate::distributions::fsum(cloud.weights().iter().copied()),
            beta,
            grid,
        }
    }
}

pub fn distribution_table(d: &DiscreteDistribution) -> Table {
    let mut t = Table::new(["atom", "mass"]);
    for (a, m) in d.atoms().iter().zip(d.mass()) {
        t.push(vec![a.to_string(), m.to_string()]);
    }
    t
}

/// Upper-triangular edge list `(i, j, weight)` keyed by node id.
pub fn edge_table(g: &AugGraph) -> Table {
    let mut t = Table::new(["i", "j", "weight"]);
    let ids = g.node_ids();
    let a = g.adjacency();
    for i in 0..g.node_count() {
        for j in i..g.node_count() {
            if a[[i, j]] > 0.0 {
                t.push(vec![ids[i].to_string(), ids[j].to_string(), a[[i, j]].to_string()]);
            }
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphHeader {
    pub n: usize,
    pub d_min: f64,
    pub dropped: usize,
    pub components: usize,
    pub grid: Option<Grid>,
}

impl GraphHeader {
    pub fn of(g: &AugGraph) -> Self {
        GraphHeader {
            n: g.node_count(),
            d_min: g.d_min(),
            dropped: g.dropped(),
            components: g.component_count(),
            grid: g.grid().copied(),
        }
    }
}

/// `(index, eigenvalue)` with 1-based indices.
pub fn spectrum_table(values: &[f64]) -> Table {
    let mut t = Table::new(["index", "eigenvalue"]);
    for (i, v) in values.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), v.to_string()]);
    }
    t
}

/// `(node, f1, ..., fk)`.
pub fn embedding_table(emb: &Embedding, node_ids: &[usize]) -> Table {
    let mut header = vec!["node".to_string()];
    header.extend((1..=emb.k).map(|j| format!("f{j}")));
    let mut t = Table { header, rows: Vec::new() };
    for (row, id) in emb.features.rows().into_iter().zip(node_ids) {
        let mut r = vec![id.to_string()];
        r.extend(row.iter().map(|v| v.to_string()));
        t.push(r);
    }
    t
}
