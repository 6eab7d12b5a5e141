use rayon::prelude::*;

use super::{fmt, mean, trend_check, Check, StudyResult};
use crate::aug_graph::{normalized_laplacian, subsample_edges, threshold_graph, AugGraph};
use crate::config::Config;
use crate::distributions::sample_uniform_square;
use crate::io::Table;
use crate::spectral::{eigenvalues, spectral_gap};
use crate::svg::{LineChart, Series};
use crate::{seed, Error, Result};

/// Subgraph gaps above the parent's by more than this are flagged.
pub const GAP_NOISE: f64 = 1e-8;

struct Trial {
    seed: u64,
    nodes: usize,
    components: usize,
    connected: bool,
    gap: f64,
}

fn gap_of(g: &AugGraph) -> Result<f64> {
    spectral_gap(&eigenvalues(&normalized_laplacian(g)?)?)
}

pub fn run_chung_trend(config: &Config) -> Result<StudyResult> {
    let gc = &config.graph;
    let master = config.study.seed;
    let trials = config.study.chung_trials;
    let cloud = sample_uniform_square(gc.rgg_n, seed::derive(master, &[seed::tag("chung-data")]));
    let base = threshold_graph(&cloud, gc.rgg_radius)?;
    let base_gap = gap_of(&base)?;
    let base_connected = base.node_count() == cloud.len() && base.component_count() == 1;

    let mut probs = gc.edge_probs.clone();
    if !probs.contains(&1.0) {
        probs.push(1.0);
    }
    let coords: Vec<(usize, usize)> = (0..probs.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let results: Vec<Trial> = coords
        .par_iter()
        .map(|&(i, t)| -> Result<Trial> {
            let s = seed::derive(master, &[seed::tag("chung"), i as u64, t as u64]);
            match subsample_edges(&base, probs[i], s) {
                Ok(h) => {
                    let connected = h.node_count() == base.node_count() && h.component_count() == 1;
                    Ok(Trial {
                        seed: s,
                        nodes: h.node_count(),
                        components: h.component_count(),
                        connected,
                        gap: gap_of(&h)?,
                    })
                }
                Err(Error::EmptySubgraph) => {
                    Ok(Trial { seed: s, nodes: 0, components: 0, connected: false, gap: f64::NAN })
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(["p", "trial", "seed", "nodes", "components", "connected", "gap", "deficit"]);
    for (&(i, t), tr) in coords.iter().zip(&results) {
        table.push(vec![
            fmt(probs[i]),
            t.to_string(),
            tr.seed.to_string(),
            tr.nodes.to_string(),
            tr.components.to_string(),
            tr.connected.to_string(),
            fmt(tr.gap),
            fmt(base_gap - tr.gap),
        ]);
    }

    let mut result = StudyResult::new("chung-trend", true, table);
    let deficits: Vec<Vec<f64>> = (0..probs.len())
        .map(|i| {
            results[i * trials..(i + 1) * trials].iter().filter(|t| t.connected).map(|t| base_gap - t.gap).collect()
        })
        .collect();
    let means: Vec<f64> = deficits.iter().map(|d| mean(d)).collect();
    let excluded: usize = deficits.iter().map(|d| trials - d.len()).sum();
    for (p, m) in probs.iter().zip(&means) {
        result.metrics.insert(format!("mean_deficit/p={p}"), *m);
    }
    result.metrics.insert("base_gap".into(), base_gap);
    result.metrics.insert("base_d_min".into(), base.d_min());
    result.metrics.insert("excluded_trials".into(), excluded as f64);
    if excluded > 0 {
        result.notes.push(format!("{excluded} disconnected subgraph trial(s) excluded from gap statistics"));
    }

    result.checks.push(
        Check::new(
            "base-min-degree",
            base.d_min() >= gc.min_degree && base_connected,
            format!("base graph d_min {} (need >= {}), connected: {base_connected}", base.d_min(), gc.min_degree),
        )
        .with_values(base.d_min(), gc.min_degree),
    );
    let one = probs.iter().position(|&p| p == 1.0).expect("pushed above");
    let exact = results[one * trials..(one + 1) * trials].iter().all(|t| t.gap == base_gap);
    result.checks.push(Check::new("deficit-zero-at-p1", exact, "p = 1 keeps every edge, so the deficit is exactly 0"));

    let grid: Vec<usize> = (0..gc.edge_probs.len()).collect();
    let lo = *grid.iter().min_by(|&&a, &&b| probs[a].total_cmp(&probs[b])).expect("nonempty");
    let hi = *grid.iter().max_by(|&&a, &&b| probs[a].total_cmp(&probs[b])).expect("nonempty");
    if lo == hi {
        result.checks.push(Check::skipped("deficit-high-p-below-low-p", "requires >= 2 edge probabilities"));
        result.checks.push(Check::skipped("deficit-vs-p", "requires >= 2 edge probabilities"));
    } else {
        let (m_lo, m_hi) = (means[lo], means[hi]);
        result.checks.push(
            Check::new(
                "deficit-high-p-below-low-p",
                m_hi < m_lo,
                format!("mean deficit {m_hi:.6} at p={} vs {m_lo:.6} at p={}", probs[hi], probs[lo]),
            )
            .with_values(m_hi, m_lo),
        );
        let xs: Vec<f64> = grid.iter().map(|&i| probs[i]).collect();
        let neg: Vec<f64> = grid.iter().map(|&i| -means[i]).collect();
        result.checks.push(trend_check("deficit-vs-p", &xs, &neg, config.study.chung_rho));
    }
    let worst = results.iter().filter(|t| t.connected).map(|t| base_gap - t.gap).fold(f64::INFINITY, f64::min);
    let flagged = results.iter().filter(|t| t.connected && base_gap - t.gap < -GAP_NOISE).count();
    result.checks.push(
        Check::new(
            "deficit-nonnegative",
            flagged == 0,
            format!("{flagged} connected trial(s) with a subgraph gap above the parent's; smallest deficit {worst:e}"),
        )
        .with_values(worst, -GAP_NOISE)
        .informational(),
    );
    result.slack.insert("chung_rho".into(), config.study.chung_rho);
    result.slack.insert("gap_noise".into(), GAP_NOISE);

    let mut chart = LineChart::new("chung-trend", "spectral-gap deficit vs edge probability", "p", "mean deficit");
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    chart.series.push(Series::new("mean deficit", order.iter().map(|&i| (probs[i], means[i])).collect()));
    result.charts.push(chart);
    Ok(result)
}
