use rayon::prelude::*;

use super::{bound_cell, fmt, inequality_checks, Cell, CellSpec, Check, StudyResult, CELL_EXTRA_COLUMNS};
use crate::aug_graph::{DiskAugmentation, GraphBuilder};
use crate::config::{AlphaMethod, AlphaSource, Config};
use crate::distributions::{discretize_density, mix_clouds, sample_gaussian_mixture, LabeledPointCloud, Mixture};
use crate::io::Table;
use crate::metrics::{alpha_analytic, alpha_mc, tv_distance, AlphaEstimate, BoundReport};
use crate::svg::{LineChart, Series};
use crate::{seed, Result};

/// TV of two identical discretized densities is zero up to this.
const TV_ZERO_TOL: f64 = 1e-12;

fn third_term(r: &BoundReport) -> f64 {
    2.0 * (1.0 - r.beta) * r.tv
}

pub fn run_bound_validity(config: &Config) -> Result<StudyResult> {
    let spec_d = config.mixture()?;
    let labeler = config.labeler()?;
    let d = &config.data;
    let aug = &config.augmentation;
    let master = config.study.seed;
    let k = config.study.k;
    let slack = config.study.bound_slack;
    let (shifts, reps, radii) = (&d.shift, &d.replication, &aug.bound_r_grid);

    let real = sample_gaussian_mixture(&spec_d, d.n_real, seed::derive(master, &[seed::tag("bound-real")]))?;
    let gen_seed = seed::derive(master, &[seed::tag("bound-generated")]);
    let generated: Vec<LabeledPointCloud> = shifts
        .iter()
        .map(|&delta| sample_gaussian_mixture(&spec_d.shifted([delta, 0.0]), d.n_generated, gen_seed))
        .collect::<Result<_>>()?;
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let grid = config.grid_for(real.points().iter().chain(generated.iter().flat_map(|g| g.points())), r_max)?;
    let p_d = discretize_density(&spec_d, &grid)?;
    let tvs: Vec<f64> = shifts
        .iter()
        .map(|&delta| tv_distance(&p_d, &discretize_density(&spec_d.shifted([delta, 0.0]), &grid)?))
        .collect::<Result<_>>()?;
    let mixtures: Vec<Vec<Mixture>> = generated
        .iter()
        .map(|g| reps.iter().map(|&n| mix_clouds(&real, g, n)).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let coords: Vec<(usize, usize, usize)> = (0..shifts.len())
        .flat_map(|i| (0..reps.len()).flat_map(move |j| (0..radii.len()).map(move |l| (i, j, l))))
        .collect();
    let cells: Vec<Cell> = coords
        .par_iter()
        .map(|&(i, j, l)| -> Result<Cell> {
            let r = radii[l];
            let mix = &mixtures[i][j];
            let cell_seed = seed::derive(master, &[seed::tag("bound-validity"), i as u64, j as u64, l as u64]);
            let alpha_cloud = match aug.alpha_source {
                AlphaSource::Real => &real,
                AlphaSource::Mixture => &mix.cloud,
            };
            let alpha = match aug.alpha_method {
                AlphaMethod::Analytic => AlphaEstimate { estimate: alpha_analytic(alpha_cloud, r)?, std_error: 0.0 },
                AlphaMethod::MonteCarlo => alpha_mc(alpha_cloud, r, &labeler, aug.mc_samples, cell_seed)?,
            };
            let builder = GraphBuilder::new(grid, DiskAugmentation::new(r)?)
                .with_labeler(labeler.clone())
                .with_supersample(aug.supersample)
                .with_node_cap(config.graph.max_nodes);
            bound_cell(&CellSpec {
                builder: &builder,
                train: &mix.cloud,
                eval: &real,
                n: mix.cloud.len(),
                k,
                seed: cell_seed,
                alpha,
                beta: mix.beta,
                tv: tvs[i],
            })
        })
        .collect::<Result<_>>()?;

    let mut header: Vec<&str> = vec!["delta", "replication"];
    header.extend(BoundReport::CSV_COLUMNS);
    header.extend(["third_term", "vacuous"]);
    header.extend(CELL_EXTRA_COLUMNS);
    let mut table = Table::new(header);
    for (&(i, j, _), c) in coords.iter().zip(&cells) {
        let mut row = vec![fmt(shifts[i]), reps[j].to_string()];
        let fields = c.fields();
        let split = BoundReport::CSV_COLUMNS.len();
        row.extend_from_slice(&fields[..split]);
        row.extend([fmt(third_term(&c.report)), c.report.is_vacuous().to_string()]);
        row.extend_from_slice(&fields[split..]);
        table.push(row);
    }

    let mut result = StudyResult::new("bound-validity", false, table);
    let label = |c: &Cell| format!("beta={} tv={} r={}", c.report.beta, c.report.tv, c.report.r);
    let violations: Vec<String> = coords
        .iter()
        .zip(&cells)
        .filter(|(_, c)| c.report.empirical_error > c.report.capped_bound() + slack)
        .map(|(&(i, j, l), c)| {
            format!(
                "delta={} N={} r={}: error {} > {}",
                shifts[i],
                reps[j],
                radii[l],
                c.report.empirical_error,
                c.report.capped_bound()
            )
        })
        .collect();
    let worst =
        cells.iter().map(|c| c.report.empirical_error - c.report.capped_bound()).fold(f64::NEG_INFINITY, f64::max);
    result.checks.push(
        Check::new(
            "bound-holds",
            violations.is_empty(),
            format!(
                "{} of {} cells violate error <= min(1, bound) + {slack} {:?}",
                violations.len(),
                cells.len(),
                violations
            ),
        )
        .with_values(worst, slack),
    );

    let at = |i: usize, j: usize, l: usize| &cells[(i * reps.len() + j) * radii.len() + l].report;
    let mut rep_order: Vec<usize> = (0..reps.len()).collect();
    rep_order.sort_by_key(|&j| reps[j]);
    let term_ok = (0..shifts.len()).all(|i| {
        (0..radii.len()).all(|l| rep_order.windows(2).all(|w| third_term(at(i, w[1], l)) <= third_term(at(i, w[0], l))))
    });
    result.checks.push(Check::new(
        "third-term-vs-replication",
        term_ok,
        "2(1-beta)TV is nonincreasing in N at every (delta, r)",
    ));

    let mut shift_order: Vec<usize> = (0..shifts.len()).collect();
    shift_order.sort_by(|&a, &b| shifts[a].abs().total_cmp(&shifts[b].abs()));
    let tv_ok = shift_order.windows(2).all(|w| tvs[w[1]] >= tvs[w[0]]);
    let tv_path: Vec<String> = shift_order.iter().map(|&i| format!("delta={}: {:.6}", shifts[i], tvs[i])).collect();
    result.checks.push(
        Check::new("tv-vs-shift", tv_ok, format!("TV(P_d, P_g) by shift: {}", tv_path.join(", "))).informational(),
    );
    if let Some(i0) = shifts.iter().position(|&s| s == 0.0) {
        result.checks.push(
            Check::new("tv-zero-at-no-shift", tvs[i0] <= TV_ZERO_TOL, format!("TV at delta=0: {:e}", tvs[i0]))
                .with_values(tvs[i0], TV_ZERO_TOL),
        );
    }
    let refs: Vec<&Cell> = cells.iter().collect();
    result.checks.extend(inequality_checks(&refs, label));

    let vacuous = cells.iter().filter(|c| c.report.is_vacuous()).count();
    result.metrics.insert("vacuous_cells".into(), vacuous as f64);
    result.metrics.insert("cells".into(), cells.len() as f64);
    result.metrics.insert("max_error_minus_capped_bound".into(), worst);
    for (s, tv) in shifts.iter().zip(&tvs) {
        result.metrics.insert(format!("tv/delta={s}"), *tv);
    }
    result
        .notes
        .push(format!("{vacuous} of {} cells have a vacuous bound (>= 1) and are checked against 1", cells.len()));
    result.notes.push(format!(
        "generated data: the real mixture shifted along x1; {} real and {} generated points",
        d.n_real, d.n_generated
    ));
    result.slack.insert("bound_slack".into(), slack);
    result.slack.insert("phi_slack".into(), super::PHI_SLACK);
    result.slack.insert("vote_slack".into(), super::VOTE_SLACK);

    let mut chart = LineChart::new("bound-validity", "third term 2(1-beta)TV vs replication", "N", "third term");
    for &i in &shift_order {
        chart.series.push(Series::new(
            format!("delta={}", shifts[i]),
            rep_order.iter().map(|&j| (reps[j] as f64, third_term(at(i, j, 0)))).collect(),
        ));
    }
    result.charts.push(chart);
    Ok(result)
}
