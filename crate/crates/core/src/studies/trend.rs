//! Rank statistics for the monotone-trend checks.

use super::Check;

/// Values closer than this count as tied when ranking.
pub const TIE_TOL: f64 = 1e-9;

/// Average ranks (1-based); sorted neighbours within `tie_tol` share a rank.
pub fn ranks(values: &[f64], tie_tol: f64) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] - values[idx[end - 1]] <= tie_tol {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Spearman rank correlation; `None` when either side is constant.
pub fn spearman(x: &[f64], y: &[f64], tie_tol: f64) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    if x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x, tie_tol), ranks(y, tie_tol));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Adjacent decreases larger than `tie_tol`.
pub fn inversions(y: &[f64], tie_tol: f64) -> usize {
    y.windows(2).filter(|w| w[1] < w[0] - tie_tol).count()
}

/// Passes iff `y` rises with `x` at Spearman `ρ ≥ min_rho`; a constant
/// curve is trivially monotone.
pub fn trend_check(name: impl Into<String>, x: &[f64], y: &[f64], min_rho: f64) -> Check {
    let inv = inversions(y, TIE_TOL);
    if y.iter().any(|v| v.is_nan()) {
        return Check::new(name, false, "curve contains undefined values");
    }
    match spearman(x, y, TIE_TOL) {
        None => Check::new(name, true, format!("constant curve over {} points", y.len())),
        Some(rho) => Check::new(
            name,
            rho >= min_rho,
            format!("spearman rho {rho:.4} over {} points, {inv} inversion(s)", y.len()),
        )
        .with_values(rho, min_rho),
    }
}
