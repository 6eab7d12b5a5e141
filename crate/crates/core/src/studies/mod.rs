//! The reproducible experiments. Each study returns every row it computed
//! plus pass/fail checks; a failed check never aborts a study.
//!
//! Cells run in parallel on the ambient rayon pool and are collected in
//! cell-coordinate order, so outputs are byte-identical for a given config.

mod bound_validity;
mod chung;
mod figure5;
mod subsample;
mod trend;
mod tv_identity;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Config;
use crate::io::{write_json, Provenance, Table};
use crate::svg::LineChart;
use crate::{Error, Result};

pub use bound_validity::run_bound_validity;
pub use chung::run_chung_trend;
pub use figure5::{alpha_cross_check, run_figure5};
pub use subsample::run_subsample_spectrum;
pub use trend::{inversions, ranks, spearman, trend_check, TIE_TOL};
pub use tv_identity::{run_tv_identity, tv_identity_trial};

pub const STUDY_NAMES: [&str; 5] = ["tv-identity", "figure5", "subsample-spectrum", "chung-trend", "bound-validity"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    /// Reported but never fails the study.
    pub informational: bool,
    pub detail: String,
    pub statistic: Option<f64>,
    pub threshold: Option<f64>,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            informational: false,
            detail: detail.into(),
            statistic: None,
            threshold: None,
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check { status: CheckStatus::Skipped, ..Check::new(name, true, reason) }
    }

    pub fn with_values(mut self, statistic: f64, threshold: f64) -> Self {
        self.statistic = Some(statistic);
        self.threshold = Some(threshold);
        self
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail && !self.informational
    }
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub name: String,
    /// Trend checks reproduce shapes, not published values.
    pub qualitative: bool,
    pub table: Table,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Tolerances and slack budgets the checks used.
    pub slack: BTreeMap<String, f64>,
    /// Scalar summaries (e.g. the largest residual).
    pub metrics: BTreeMap<String, f64>,
    pub charts: Vec<LineChart>,
}

impl StudyResult {
    fn new(name: &str, qualitative: bool, table: Table) -> Self {
        StudyResult {
            name: name.to_string(),
            qualitative,
            table,
            checks: Vec::new(),
            notes: Vec::new(),
            slack: BTreeMap::new(),
            metrics: BTreeMap::new(),
            charts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn checks_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.name.starts_with(prefix))
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    study: &'a str,
    passed: bool,
    qualitative: bool,
    tool_version: &'a str,
    config_hash: String,
    master_seed: u64,
    rows: usize,
    checks: &'a [Check],
    slack: &'a BTreeMap<String, f64>,
    metrics: &'a BTreeMap<String, f64>,
    notes: &'a [String],
    config: crate::config::ScientificConfig<'a>,
}

/// Runs a study by CLI name.
pub fn run_study(name: &str, config: &Config) -> Result<StudyResult> {
    match name {
        "tv-identity" => run_tv_identity(config),
        "figure5" => run_figure5(config),
        "subsample-spectrum" => run_subsample_spectrum(config),
        "chung-trend" => run_chung_trend(config),
        "bound-validity" => run_bound_validity(config),
        other => {
            Err(Error::InvalidArgument(format!("unknown study `{other}`; expected one of {}", STUDY_NAMES.join(", "))))
        }
    }
}

/// Writes `<name>.csv`, `<name>.summary.json` and, with `svg`, one SVG per
/// chart. Returns the paths written.
pub fn write_outputs(result: &StudyResult, config: &Config, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let provenance = Provenance::new(config.hash(), config.study.seed);
    let mut written = Vec::new();
    let csv = dir.join(format!("{}.csv", result.name));
    result.table.write_file(&csv, Some(&provenance))?;
    written.push(csv);
    let summary = Summary {
        study: &result.name,
        passed: result.passed(),
        qualitative: result.qualitative,
        tool_version: &provenance.tool_version,
        config_hash: provenance.config_hash.clone(),
        master_seed: provenance.master_seed,
        rows: result.table.len(),
        checks: &result.checks,
        slack: &result.slack,
        metrics: &result.metrics,
        notes: &result.notes,
        config: config.scientific(),
    };
    let json = dir.join(format!("{}.summary.json", result.name));
    write_json(&json, &summary)?;
    written.push(json);
    if svg {
        for chart in &result.charts {
            let path = dir.join(format!("{}.svg", chart.name));
            fs::write(&path, chart.render())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Wall-clock runtime lives beside the summary so the summary stays
/// reproducible byte for byte.
pub fn write_timing(name: &str, dir: &Path, seconds: f64) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Timing<'a> {
        study: &'a str,
        runtime_seconds: f64,
    }
    let path = dir.join(format!("{name}.timing.json"));
    write_json(&path, &Timing { study: name, runtime_seconds: seconds })?;
    Ok(path)
}

/// Shortest round-trip decimal form; `inf` for infinities.
pub(crate) fn fmt(v: f64) -> String {
    v.to_string()
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        crate::distributions::fsum(values.iter().copied()) / values.len() as f64
    }
}

/// Spectral, probe and vote quantities of one augmentation graph.
pub(crate) struct Cell {
    pub report: crate::metrics::BoundReport,
    pub lambda_k: f64,
    pub nodes: usize,
    pub dropped: usize,
    pub components: usize,
}

pub(crate) struct CellSpec<'a> {
    pub builder: &'a crate::aug_graph::GraphBuilder,
    pub train: &'a crate::distributions::LabeledPointCloud,
    pub eval: &'a crate::distributions::LabeledPointCloud,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub alpha: crate::metrics::AlphaEstimate,
    pub beta: f64,
    pub tv: f64,
}

pub(crate) fn bound_cell(spec: &CellSpec<'_>) -> Result<Cell> {
    use crate::metrics::{alpha_grid, fit_probe, majority_vote_error, make_bound_report, phi_y_kernel, BoundInputs};
    let kernel = spec.builder.kernel(spec.train)?;
    let values = kernel.laplacian_spectrum()?;
    let lambda_k1 = crate::spectral::lambda_k_plus_1(&values, spec.k)?;
    let lambda_k = values[spec.k - 1];
    let emb = kernel.optimal_embedding(spec.k)?;
    let probe = fit_probe(&emb, kernel.labels(), spec.builder.labeler.class_count())?;
    let votes = majority_vote_error(&probe, &emb, kernel.cells(), spec.eval, spec.builder)?;
    let report = make_bound_report(&BoundInputs {
        n: spec.n,
        r: kernel.radius(),
        k: spec.k,
        seed: spec.seed,
        beta: spec.beta,
        tv: spec.tv,
        alpha: spec.alpha.estimate,
        alpha_se: spec.alpha.std_error,
        alpha_grid: alpha_grid(&kernel),
        lambda_k,
        lambda_k1,
        phi_y: phi_y_kernel(&kernel),
        votes,
        probe_norm: probe.frobenius_norm(),
    })?;
    Ok(Cell {
        report,
        lambda_k,
        nodes: kernel.node_count(),
        dropped: kernel.dropped(),
        components: kernel.component_count(),
    })
}

/// Columns shared by the bound-style tables, after the report's own.
pub(crate) const CELL_EXTRA_COLUMNS: [&str; 8] =
    ["lambda_k", "alpha_grid", "augmented_error", "nodes", "dropped", "components", "probe_norm", "probe_norm_limit"];

impl Cell {
    pub(crate) fn fields(&self) -> Vec<String> {
        let r = &self.report;
        let mut row = r.csv_fields();
        row.extend([
            fmt(self.lambda_k),
            fmt(r.alpha_grid),
            fmt(r.augmented_error),
            self.nodes.to_string(),
            self.dropped.to_string(),
            self.components.to_string(),
            fmt(r.probe_norm),
            fmt(r.probe_norm_limit),
        ]);
        row
    }
}

/// Label-disagreement and majority-vote inequalities every bound cell must satisfy.
pub(crate) const PHI_SLACK: f64 = 1e-6;
pub(crate) const VOTE_SLACK: f64 = 0.01;

pub(crate) fn inequality_checks(cells: &[&Cell], label: impl Fn(&Cell) -> String) -> Vec<Check> {
    let phi_bad: Vec<String> =
        cells.iter().filter(|c| c.report.phi_y > 2.0 * c.report.alpha_grid + PHI_SLACK).map(|c| label(c)).collect();
    let vote_bad: Vec<String> = cells
        .iter()
        .filter(|c| c.report.empirical_error > 2.0 * c.report.augmented_error + VOTE_SLACK)
        .map(|c| label(c))
        .collect();
    let worst_phi = cells.iter().map(|c| c.report.phi_y - 2.0 * c.report.alpha_grid).fold(f64::NEG_INFINITY, f64::max);
    let worst_vote = cells
        .iter()
        .map(|c| c.report.empirical_error - 2.0 * c.report.augmented_error)
        .fold(f64::NEG_INFINITY, f64::max);
    vec![
        Check::new(
            "phi-le-2alpha",
            phi_bad.is_empty(),
            format!(
                "{} of {} cells violate phi_y <= 2 alpha_grid + {PHI_SLACK:e} {:?}",
                phi_bad.len(),
                cells.len(),
                phi_bad
            ),
        )
        .with_values(worst_phi, PHI_SLACK),
        Check::new(
            "vote-le-2aug",
            vote_bad.is_empty(),
            format!(
                "{} of {} cells violate majority error <= 2 augmented error + {VOTE_SLACK} {:?}",
                vote_bad.len(),
                cells.len(),
                vote_bad
            ),
        )
        .with_values(worst_vote, VOTE_SLACK),
    ]
}
