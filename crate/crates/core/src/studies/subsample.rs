use rayon::prelude::*;

use super::{fmt, mean, trend_check, Check, StudyResult};
use crate::aug_graph::{normalized_laplacian, subsample_vertices, threshold_graph, AugGraph};
use crate::config::Config;
use crate::distributions::sample_uniform_square;
use crate::io::Table;
use crate::spectral::{eigenvalues, ZERO_EIGENVALUE_TOL};
use crate::svg::{LineChart, Series};
use crate::{seed, Error, Result};

/// Resampling attempts before an empty subgraph becomes an error.
const MAX_ATTEMPTS: u64 = 100;

struct Trial {
    seed: u64,
    attempts: u64,
    nodes: usize,
    removed: usize,
    components: usize,
    values: Vec<f64>,
}

fn mean_tail(values: &[f64], count: usize) -> f64 {
    let hi = values.len().min(count);
    if hi < 2 {
        f64::NAN
    } else {
        mean(&values[1..hi])
    }
}

fn subgraph(g: &AugGraph, ratio: f64, base: u64) -> Result<(AugGraph, u64, u64)> {
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed::derive(base, &[attempt]);
        match subsample_vertices(g, ratio, s) {
            Ok(h) if !h.is_empty() => return Ok((h, s, attempt + 1)),
            Ok(_) | Err(Error::EmptySubgraph) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::EmptySubgraph)
}

pub fn run_subsample_spectrum(config: &Config) -> Result<StudyResult> {
    let g_cfg = &config.graph;
    let master = config.study.seed;
    let count = g_cfg.eigen_count;
    let trials = config.study.subsample_trials;
    let cloud = sample_uniform_square(config.data.uniform_n, seed::derive(master, &[seed::tag("subsample-data")]));
    let full = threshold_graph(&cloud, g_cfg.threshold)?;
    let full_values = eigenvalues(&normalized_laplacian(&full)?)?;

    let ratios = &g_cfg.ratios;
    let coords: Vec<(usize, usize)> = (0..ratios.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let results: Vec<Trial> = coords
        .par_iter()
        .map(|&(i, t)| -> Result<Trial> {
            let base = seed::derive(master, &[seed::tag("subsample"), i as u64, t as u64]);
            let (h, s, attempts) = subgraph(&full, ratios[i], base)?;
            let values = eigenvalues(&normalized_laplacian(&h)?)?;
            Ok(Trial {
                seed: s,
                attempts,
                nodes: h.node_count(),
                removed: full.node_count() - h.node_count(),
                components: h.component_count(),
                values,
            })
        })
        .collect::<Result<_>>()?;

    let mut header: Vec<String> =
        ["ratio", "trial", "seed", "attempts", "nodes", "removed", "components", "mean_lambda_2_k"]
            .map(String::from)
            .to_vec();
    header.extend((1..=count).map(|i| format!("lambda_{i}")));
    let mut table = Table::new(header);
    for (&(i, t), trial) in coords.iter().zip(&results) {
        let mut row = vec![
            fmt(ratios[i]),
            t.to_string(),
            trial.seed.to_string(),
            trial.attempts.to_string(),
            trial.nodes.to_string(),
            trial.removed.to_string(),
            trial.components.to_string(),
            fmt(mean_tail(&trial.values, count)),
        ];
        row.extend((0..count).map(|j| trial.values.get(j).map_or(String::new(), |v| fmt(*v))));
        table.push(row);
    }

    let mut result = StudyResult::new("subsample-spectrum", true, table);
    let per_ratio: Vec<f64> = (0..ratios.len())
        .map(|i| {
            mean(&results[i * trials..(i + 1) * trials].iter().map(|t| mean_tail(&t.values, count)).collect::<Vec<_>>())
        })
        .collect();
    for (r, m) in ratios.iter().zip(&per_ratio) {
        result.metrics.insert(format!("mean_lambda_2_{count}/ratio={r}"), *m);
    }
    if ratios.len() < 2 {
        result.checks.push(Check::skipped("mean-eigenvalue-vs-ratio", "requires >= 2 sampling ratios"));
    } else {
        result.checks.push(trend_check("mean-eigenvalue-vs-ratio", ratios, &per_ratio, config.study.spectrum_rho));
    }
    let worst_first = results.iter().map(|t| t.values[0]).fold(f64::NEG_INFINITY, f64::max);
    result.checks.push(
        Check::new(
            "lambda1-zero",
            worst_first <= ZERO_EIGENVALUE_TOL,
            format!("largest lambda_1 over {} subgraphs: {worst_first:e}", results.len()),
        )
        .with_values(worst_first, ZERO_EIGENVALUE_TOL),
    );
    let full_rows: Vec<&Trial> =
        coords.iter().zip(&results).filter(|((i, _), _)| ratios[*i] == 1.0).map(|(_, t)| t).collect();
    if full_rows.is_empty() {
        result.checks.push(Check::skipped("ratio-one-is-full-graph", "ratio 1 not in the sweep"));
    } else {
        let same = full_rows.iter().all(|t| t.values == full_values);
        result.checks.push(Check::new(
            "ratio-one-is-full-graph",
            same,
            "ratio 1 spectra equal the full graph's bit for bit",
        ));
    }
    let resampled: u64 = results.iter().map(|t| t.attempts - 1).sum();
    if resampled > 0 {
        result.notes.push(format!("{resampled} empty subgraph draw(s) resampled with the next seed"));
    }
    result.notes.push(format!(
        "base graph: {} of {} points non-isolated, {} component(s)",
        full.node_count(),
        cloud.len(),
        full.component_count()
    ));
    result.slack.insert("spectrum_rho".into(), config.study.spectrum_rho);
    result.slack.insert("zero_eigenvalue_tolerance".into(), ZERO_EIGENVALUE_TOL);

    let mut chart =
        LineChart::new("subsample-spectrum", "normalized Laplacian spectrum vs sampling ratio", "index", "eigenvalue");
    for (i, r) in ratios.iter().enumerate() {
        let rows = &results[i * trials..(i + 1) * trials];
        let pts = (0..count)
            .filter_map(|j| {
                let vals: Vec<f64> = rows.iter().filter_map(|t| t.values.get(j).copied()).collect();
                (vals.len() == rows.len()).then(|| ((j + 1) as f64, mean(&vals)))
            })
            .collect();
        chart.series.push(Series::new(format!("ratio={r}"), pts));
    }
    result.charts.push(chart);
    Ok(result)
}
