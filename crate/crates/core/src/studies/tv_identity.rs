use rand::Rng;

use super::{fmt, Check, StudyResult};
use crate::config::Config;
use crate::distributions::{mixture_distribution, DiscreteDistribution};
use crate::io::Table;
use crate::metrics::tv_distance;
use crate::seed;
use crate::Result;

pub const TV_TOL: f64 = 1e-12;

/// One random `(P_d, P_g, β)` triple: returns `(β, TV(P_g,P_d), TV(P_t,P_d), (1-β)TV(P_g,P_d))`.
pub fn tv_identity_trial(atoms: usize, seed: u64, beta: Option<f64>) -> Result<(f64, f64, f64, f64)> {
    let mut rng = seed::rng(seed);
    let pd = DiscreteDistribution::normalized((0..atoms).map(|_| rng.random::<f64>()).collect())?;
    let pg = DiscreteDistribution::normalized((0..atoms).map(|_| rng.random::<f64>()).collect())?;
    let beta = beta.unwrap_or_else(|| rng.random::<f64>());
    let pt = mixture_distribution(&pd, &pg, beta)?;
    let tv_gd = tv_distance(&pg, &pd)?;
    Ok((beta, tv_gd, tv_distance(&pt, &pd)?, (1.0 - beta) * tv_gd))
}

pub fn run_tv_identity(config: &Config) -> Result<StudyResult> {
    let s = &config.study;
    if s.tv_atoms < 2 {
        return Err(crate::Error::InvalidArgument("tv identity needs at least 2 atoms".into()));
    }
    let base = seed::derive(s.seed, &[seed::tag("tv-identity")]);
    let mut table = Table::new(["trial", "seed", "beta", "tv_gd", "lhs", "rhs", "residual"]);
    let mut max_residual: f64 = 0.0;
    for trial in 0..s.tv_trials {
        let cell_seed = seed::derive(base, &[trial as u64]);
        let (beta, tv_gd, lhs, rhs) = tv_identity_trial(s.tv_atoms, cell_seed, None)?;
        let residual = (lhs - rhs).abs();
        max_residual = max_residual.max(residual);
        table.push(vec![
            trial.to_string(),
            cell_seed.to_string(),
            fmt(beta),
            fmt(tv_gd),
            fmt(lhs),
            fmt(rhs),
            fmt(residual),
        ]);
    }
    let mut result = StudyResult::new("tv-identity", false, table);
    result.checks.push(
        Check::new(
            "identity",
            max_residual <= TV_TOL,
            format!("max |TV(P_t,P_d) - (1-beta) TV(P_g,P_d)| = {max_residual:e} over {} trials", s.tv_trials),
        )
        .with_values(max_residual, TV_TOL),
    );
    for (name, beta) in [("beta-one", 1.0), ("beta-zero", 0.0)] {
        let (_, tv_gd, lhs, rhs) = tv_identity_trial(s.tv_atoms, seed::derive(base, &[seed::tag(name)]), Some(beta))?;
        let expected = if beta == 1.0 { 0.0 } else { tv_gd };
        let ok = (lhs - expected).abs() <= TV_TOL && (rhs - expected).abs() <= TV_TOL;
        result.checks.push(Check::new(name, ok, format!("lhs {lhs:e}, rhs {rhs:e}, expected {expected:e}")));
    }
    result.metrics.insert("max_residual".into(), max_residual);
    result.slack.insert("residual_tolerance".into(), TV_TOL);
    Ok(result)
}
