//! Study configuration: TOML with sections `[data]`, `[augmentation]`,
//! `[graph]`, `[study]`, `[output]`. Every field has a default, unknown keys
//! are rejected, and `key=value` overrides may name a field as
//! `section.key` or, when unambiguous, as the bare `key`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::aug_graph::{DEFAULT_NODE_CAP, DEFAULT_SUPERSAMPLE};
use crate::distributions::GaussianMixtureSpec;
use crate::grid::Grid;
use crate::metrics::Labeler;
use crate::{Error, Point2, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub data: DataConfig,
    pub augmentation: AugmentationConfig,
    pub graph: GraphConfig,
    pub study: StudySection,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    GaussianMixture,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelRule {
    /// `y = 0` iff `x₁ < 0`.
    HalfPlane,
    /// Bayes rule of the configured mixture.
    Bayes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub means: Vec<Point2>,
    pub variance: f64,
    pub classes: Vec<usize>,
    pub labeler: LabelRule,
    /// Data sizes swept by `figure5`.
    pub n_grid: Vec<usize>,
    /// Single-shot cloud for `graph-spectrum`.
    pub source: DataSource,
    pub n: usize,
    /// `bound-validity`: real and generated sample sizes.
    pub n_real: usize,
    pub n_generated: usize,
    /// Replication factors `N` of the real data.
    pub replication: Vec<usize>,
    /// Mean shifts `δ` (along x₁) of the generated mixture.
    pub shift: Vec<f64>,
    /// Point count of the uniform-square cloud (`subsample-spectrum`).
    pub uniform_n: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        let toy = GaussianMixtureSpec::toy();
        DataConfig {
            means: toy.means,
            variance: toy.variance,
            classes: toy.class_of_component,
            labeler: LabelRule::HalfPlane,
            n_grid: vec![50, 100, 200, 400],
            source: DataSource::GaussianMixture,
            n: 50,
            n_real: 100,
            n_generated: 400,
            replication: vec![1, 5, 10],
            shift: vec![0.0, 0.1, 0.2, 0.4],
            uniform_n: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSource {
    /// `x̄ ~ P_d`: the real cloud.
    Real,
    /// `x̄ ~ P_t`: the mixed training cloud.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMethod {
    /// Closed form (half-plane labeler only).
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentationConfig {
    /// Disk radii swept by `figure5`.
    pub r_grid: Vec<f64>,
    /// Radii used by `bound-validity`.
    pub bound_r_grid: Vec<f64>,
    /// Single-shot radius for `graph-spectrum`.
    pub radius: f64,
    pub supersample: usize,
    /// Monte-Carlo samples per raw point for `α`.
    pub mc_samples: usize,
    /// Raw points of the dedicated `α` cross-check cloud.
    pub alpha_check_n: usize,
    pub alpha_method: AlphaMethod,
    pub alpha_source: AlphaSource,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig {
            r_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            bound_r_grid: vec![0.5, 0.75, 1.0],
            radius: 0.5,
            supersample: DEFAULT_SUPERSAMPLE,
            mc_samples: 100,
            alpha_check_n: 1000,
            alpha_method: AlphaMethod::Analytic,
            alpha_source: AlphaSource::Real,
        }
    }
}

/// `"auto"` or explicit `[x_min, y_min, x_max, y_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Domain {
    Bounds([f64; 4]),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub cell_size: f64,
    /// `"auto"` covers every raw point plus the largest radius.
    pub domain: Domain,
    /// Node cap for dense cell-level graphs.
    pub max_nodes: usize,
    /// Distance threshold of the uniform-square graph.
    pub threshold: f64,
    /// Vertex sampling ratios (`subsample-spectrum`).
    pub ratios: Vec<f64>,
    /// Leading eigenvalues recorded per subgraph.
    pub eigen_count: usize,
    /// Edge-selection probabilities (`chung-trend`).
    pub edge_probs: Vec<f64>,
    /// Random geometric base graph of `chung-trend`.
    pub rgg_n: usize,
    pub rgg_radius: f64,
    pub min_degree: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            cell_size: 0.05,
            domain: Domain::Keyword("auto".into()),
            max_nodes: DEFAULT_NODE_CAP,
            threshold: 0.05,
            ratios: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            eigen_count: 50,
            edge_probs: vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            rgg_n: 300,
            rgg_radius: 0.35,
            min_degree: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    pub seed: u64,
    pub k: usize,
    pub tv_trials: usize,
    pub tv_atoms: usize,
    pub subsample_trials: usize,
    pub chung_trials: usize,
    /// Slack on `empirical ≤ min(1, bound)` for MC noise and discretization.
    pub bound_slack: f64,
    /// Minimum Spearman ρ of the `λ_{k+1}` trend curves.
    pub lambda_rho: f64,
    pub alpha_rho: f64,
    pub spectrum_rho: f64,
    pub chung_rho: f64,
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection {
            seed: 20240,
            k: 2,
            tv_trials: 100,
            tv_atoms: 100,
            subsample_trials: 5,
            chung_trials: 10,
            bound_slack: 0.02,
            lambda_rho: 0.8,
            alpha_rho: 0.95,
            spectrum_rho: 0.9,
            chung_rho: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub svg: bool,
    /// Worker threads; 0 uses `AGLAB_WORKERS` or the logical CPU count.
    pub workers: usize,
    pub log_level: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "aglab-out".into(), svg: false, workers: 0, log_level: "warn".into() }
    }
}

/// Borrowed view of every section except `[output]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScientificConfig<'a> {
    pub data: &'a DataConfig,
    pub augmentation: &'a AugmentationConfig,
    pub graph: &'a GraphConfig,
    pub study: &'a StudySection,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn merge(base: &mut Table, overlay: Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

impl Config {
    /// Defaults, then the file (if any), then overrides, then validation.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
        let defaults = Table::try_from(Config::default()).map_err(|e| config_err(e.to_string()))?;
        let mut table = defaults.clone();
        if let Some(path) = path {
            let text =
                fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            let file: Table =
                text.parse().map_err(|e: toml::de::Error| config_err(format!("{}: {e}", path.display())))?;
            merge(&mut table, file);
        }
        for ov in overrides {
            Self::apply_override(&defaults, &mut table, ov)?;
        }
        let config: Config = Value::Table(table).try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn apply_override(defaults: &Table, table: &mut Table, ov: &str) -> Result<()> {
        let (key, raw) = ov.split_once('=').ok_or_else(|| config_err(format!("override `{ov}` is not key=value")))?;
        let key = key.trim();
        let (section, field) = match key.split_once('.') {
            Some((s, f)) => (s.to_string(), f.to_string()),
            None => {
                let owners: Vec<&String> = defaults
                    .iter()
                    .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key)))
                    .map(|(s, _)| s)
                    .collect();
                match owners.as_slice() {
                    [one] => ((*one).clone(), key.to_string()),
                    [] => return Err(config_err(format!("unknown config key `{key}`"))),
                    _ => return Err(config_err(format!("ambiguous config key `{key}`; qualify it with a section"))),
                }
            }
        };
        let default = defaults
            .get(&section)
            .and_then(Value::as_table)
            .and_then(|t| t.get(&field))
            .ok_or_else(|| config_err(format!("unknown config key `{section}.{field}`")))?;
        let mut value = parse_value(raw.trim());
        if default.is_array() && !value.is_array() {
            value = Value::Array(vec![value]);
        }
        if default.is_float() {
            if let Value::Integer(i) = value {
                value = Value::Float(i as f64);
            }
        }
        if let Value::Array(items) = &mut value {
            let float_items = default.as_array().and_then(|a| a.first()).is_some_and(Value::is_float);
            if float_items {
                for it in items.iter_mut() {
                    if let Value::Integer(i) = it {
                        *it = Value::Float(*i as f64);
                    }
                }
            }
        }
        table
            .entry(section)
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| config_err("config section is not a table"))?
            .insert(field, value);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.data;
        let a = &self.augmentation;
        let g = &self.graph;
        let s = &self.study;
        let nonempty =
            |ok: bool, what: &str| if ok { Ok(()) } else { Err(config_err(format!("{what} must be nonempty"))) };
        nonempty(!d.n_grid.is_empty(), "data.n_grid")?;
        nonempty(!d.replication.is_empty(), "data.replication")?;
        nonempty(!d.shift.is_empty(), "data.shift")?;
        nonempty(!a.r_grid.is_empty(), "augmentation.r_grid")?;
        nonempty(!a.bound_r_grid.is_empty(), "augmentation.bound_r_grid")?;
        nonempty(!g.ratios.is_empty(), "graph.ratios")?;
        nonempty(!g.edge_probs.is_empty(), "graph.edge_probs")?;
        self.mixture().map_err(|e| config_err(format!("data: {e}")))?;
        if d.n_grid.contains(&0) || d.n_real == 0 || d.n == 0 || d.uniform_n == 0 {
            return Err(config_err("data sizes must be positive"));
        }
        if d.replication.contains(&0) {
            return Err(config_err("data.replication entries must be ≥ 1"));
        }
        if d.shift.iter().any(|v| !v.is_finite()) {
            return Err(config_err("data.shift entries must be finite"));
        }
        if a.r_grid.iter().chain(&a.bound_r_grid).any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(config_err("augmentation radii in sweeps must be positive"));
        }
        if !(a.radius >= 0.0) || !a.radius.is_finite() {
            return Err(config_err("augmentation.radius must be ≥ 0"));
        }
        if a.supersample == 0 || a.mc_samples == 0 || a.alpha_check_n == 0 {
            return Err(config_err("augmentation.supersample, mc_samples, alpha_check_n must be ≥ 1"));
        }
        if a.alpha_method == AlphaMethod::Analytic && d.labeler != LabelRule::HalfPlane {
            return Err(config_err("analytic α requires the half-plane labeler"));
        }
        if !(g.cell_size > 0.0) || !g.cell_size.is_finite() {
            return Err(config_err("graph.cell_size must be positive"));
        }
        match &g.domain {
            Domain::Keyword(k) if k == "auto" => {}
            Domain::Keyword(k) => {
                return Err(config_err(format!("graph.domain must be \"auto\" or [x0, y0, x1, y1], got {k:?}")))
            }
            Domain::Bounds(b) => {
                Grid::new(*b, g.cell_size).map_err(|e| config_err(format!("graph.domain: {e}")))?;
            }
        }
        if g.ratios.iter().chain(&g.edge_probs).any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(config_err("sampling ratios and edge probabilities must lie in (0, 1]"));
        }
        if !(g.threshold > 0.0) || !(g.rgg_radius > 0.0) || g.rgg_n < 2 || g.eigen_count == 0 {
            return Err(config_err("graph.threshold, rgg_radius must be positive; rgg_n ≥ 2; eigen_count ≥ 1"));
        }
        if s.k == 0 || s.tv_trials == 0 || s.tv_atoms < 2 || s.subsample_trials == 0 || s.chung_trials == 0 {
            return Err(config_err("study.k and trial counts must be ≥ 1; tv_atoms ≥ 2"));
        }
        if !(s.bound_slack >= 0.0) {
            return Err(config_err("study.bound_slack must be ≥ 0"));
        }
        Ok(())
    }

    pub fn mixture(&self) -> Result<GaussianMixtureSpec> {
        GaussianMixtureSpec::new(self.data.means.clone(), self.data.variance, self.data.classes.clone())
    }

    pub fn labeler(&self) -> Result<Labeler> {
        Ok(match self.data.labeler {
            LabelRule::HalfPlane => Labeler::toy(),
            LabelRule::Bayes => Labeler::Bayes(self.mixture()?),
        })
    }

    /// Grid over the configured domain, or covering `points` plus `margin`.
    pub fn grid_for<'a, I: IntoIterator<Item = &'a Point2>>(&self, points: I, margin: f64) -> Result<Grid> {
        match &self.graph.domain {
            Domain::Bounds(b) => Grid::new(*b, self.graph.cell_size),
            Domain::Keyword(_) => Grid::covering(points, margin, self.graph.cell_size),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The sections that determine results; `[output]` is excluded.
    pub fn scientific(&self) -> ScientificConfig<'_> {
        ScientificConfig { data: &self.data, augmentation: &self.augmentation, graph: &self.graph, study: &self.study }
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form of the
    /// scientific sections.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(&self.scientific()).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
