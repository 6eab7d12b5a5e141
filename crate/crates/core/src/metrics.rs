//! Quantities entering the linear-probe error bound
//!
//! ```text
//! E(f, B) <= 8 α / λ_{k+1} + 16 α + 2 (1 - β) TV(P_d, P_g)
//! ```
//!
//! and the empirical error it bounds.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aug_graph::{kernel_row, AugGraph, AugKernel, GraphBuilder};
use crate::distributions::{fsum, DiscreteDistribution, GaussianMixtureSpec, LabeledPointCloud};
use crate::spectral::Embedding;
use crate::{linalg, seed, Error, Point2, Result};

/// Ridge added to the probe's normal equations.
pub const PROBE_RIDGE: f64 = 1e-8;

/// Ground-truth labeling of points in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Labeler {
    /// Class 0 where `p[axis] < threshold`, class 1 otherwise.
    HalfPlane {
        axis: usize,
        threshold: f64,
    },
    Constant(usize),
    /// Bayes rule of an equal-prior isotropic mixture; ties go to the lowest class.
    Bayes(GaussianMixtureSpec),
}

impl Labeler {
    /// Bayes rule of the symmetric two-Gaussian toy: `y = 0` iff `x₁ < 0`.
    pub fn toy() -> Self {
        Labeler::HalfPlane { axis: 0, threshold: 0.0 }
    }

    pub fn label(&self, p: Point2) -> usize {
        match self {
            Labeler::HalfPlane { axis, threshold } => usize::from(p[*axis] >= *threshold),
            Labeler::Constant(c) => *c,
            Labeler::Bayes(spec) => {
                let mut scores = vec![0.0; spec.class_count()];
                let two_var = 2.0 * spec.variance;
                for (mu, &c) in spec.means.iter().zip(&spec.class_of_component) {
                    let d2 = (p[0] - mu[0]).powi(2) + (p[1] - mu[1]).powi(2);
                    scores[c] += (-d2 / two_var).exp();
                }
                argmax(&scores)
            }
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            Labeler::HalfPlane { .. } => 2,
            Labeler::Constant(c) => c + 1,
            Labeler::Bayes(spec) => spec.class_count(),
        }
    }
}

/// First index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte-Carlo estimate of `Pr[y(x) ≠ y(x̄)]` with `x̄` drawn by cloud weight
/// and `m` uniform disk samples per point. The standard error is the binomial
/// one conditional on the cloud.
pub fn alpha_mc(
    cloud: &LabeledPointCloud,
    radius: f64,
    labeler: &Labeler,
    samples_per_point: usize,
    seed: u64,
) -> Result<AlphaEstimate> {
    if samples_per_point == 0 {
        return Err(Error::InvalidArgument("need at least one sample per point".into()));
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be finite and ≥ 0, got {radius}")));
    }
    let m = samples_per_point as f64;
    let per_point: Vec<(f64, f64)> = cloud
        .points()
        .par_iter()
        .zip(cloud.weights().par_iter())
        .enumerate()
        .map(|(i, (p, w))| {
            let y = labeler.label(*p);
            let mut rng = seed::rng(seed::derive(seed, &[i as u64]));
            let mut flips = 0usize;
            for _ in 0..samples_per_point {
                let rho = radius * rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                let x = [p[0] + rho * theta.cos(), p[1] + rho * theta.sin()];
                if labeler.label(x) != y {
                    flips += 1;
                }
            }
            let frac = flips as f64 / m;
            (w * frac, w * w * frac * (1.0 - frac) / m)
        })
        .collect();
    Ok(AlphaEstimate {
        estimate: fsum(per_point.iter().map(|v| v.0)),
        std_error: fsum(per_point.iter().map(|v| v.1)).sqrt(),
    })
}

/// Fraction of a radius-`r` disk lying beyond a line at distance `u·r` from
/// its center.
pub fn circular_segment_fraction(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let u = u.max(0.0);
        (u.acos() - u * (1.0 - u * u).sqrt()) / PI
    }
}

/// Exact `α` of the disk kernel under the half-plane labeler `x₁ ≥ 0`.
pub fn alpha_analytic(cloud: &LabeledPointCloud, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(fsum(cloud.iter().map(|(p, _, w)| w * circular_segment_fraction(p[0].abs() / radius))))
}

/// `α` on the discretized augmentation space: cell labels at cell centers
/// against the raw point's label.
pub fn alpha_grid(kernel: &AugKernel) -> f64 {
    let labels = kernel.labels();
    fsum(
        kernel
            .rows()
            .iter()
            .zip(kernel.weights())
            .zip(kernel.point_labels())
            .map(|((row, w), y)| w * fsum(row.iter().filter(|(c, _)| labels[*c] != *y).map(|(_, k)| *k))),
    )
}

/// `Σ A_{c,c'} 1[y(c) ≠ y(c')]`.
pub fn phi_y(g: &AugGraph) -> Result<f64> {
    let labels = g.labels().ok_or_else(|| Error::InvalidArgument("graph carries no node labels".into()))?;
    let a = g.adjacency();
    Ok(fsum(
        (0..g.node_count())
            .flat_map(|i| (0..g.node_count()).map(move |j| (i, j)))
            .filter(|&(i, j)| labels[i] != labels[j])
            .map(|(i, j)| a[[i, j]]),
    ))
}

/// [`phi_y`] evaluated from the kernel rows without forming `A`.
pub fn phi_y_kernel(kernel: &AugKernel) -> f64 {
    let labels = kernel.labels();
    let classes = labels.iter().max().map_or(1, |m| m + 1);
    fsum(kernel.rows().iter().zip(kernel.weights()).map(|(row, w)| {
        let mut by_class = vec![0.0; classes];
        for &(c, k) in row {
            by_class[labels[c]] += k;
        }
        let total: f64 = by_class.iter().sum();
        w * (total * total - by_class.iter().map(|m| m * m).sum::<f64>())
    }))
}

/// `½ Σ |P - Q|`.
pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    p.check_same_atoms(q)?;
    Ok(0.5 * fsum(p.mass().iter().zip(q.mass()).map(|(a, b)| (a - b).abs())))
}

/// `8 α / λ_{k+1} + 16 α + 2 (1 - β) TV`.
pub fn error_bound(alpha: f64, lambda_k1: f64, beta: f64, tv: f64) -> Result<f64> {
    if !(lambda_k1 > 0.0) || !lambda_k1.is_finite() {
        return Err(Error::VacuousBound(lambda_k1));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta), ("tv", tv)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok(8.0 * alpha / lambda_k1 + 16.0 * alpha + 2.0 * (1.0 - beta) * tv)
}

/// Linear head on frozen features: scores `Bᵀ f(x) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    /// `k × r`.
    pub weights: Array2<f64>,
    /// Degree-weighted mean residual of the least-squares fit, per class.
    pub bias: Vec<f64>,
    pub classes: usize,
}

impl LinearProbe {
    pub fn scores(&self, feature: ndarray::ArrayView1<f64>) -> Vec<f64> {
        (0..self.classes).map(|c| feature.dot(&self.weights.column(c)) + self.bias[c]).collect()
    }

    /// Highest score, ties to the lowest class.
    pub fn predict(&self, feature: ndarray::ArrayView1<f64>) -> usize {
        argmax(&self.scores(feature))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.weights.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Degree-weighted ridge regression of one-hot node labels onto features.
///
/// The bias absorbs whatever weighted mean the linear part leaves behind, so
/// it vanishes when the features span constants (true for spectral
/// embeddings) and reduces to class priors when the features are all zero.
pub fn fit_probe(emb: &Embedding, labels: &[usize], classes: usize) -> Result<LinearProbe> {
    let (n, k) = emb.features.dim();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!("{} labels for {n} nodes", labels.len())));
    }
    if classes == 0 || labels.iter().any(|&l| l >= classes) {
        return Err(Error::InvalidArgument(format!("labels must lie in 0..{classes}")));
    }
    let d = &emb.degrees;
    let f = &emb.features;
    // normal equations, column-major k × k and k × r
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k * classes];
    for x in 0..n {
        for a in 0..k {
            let da = d[x] * f[[x, a]];
            for b in 0..k {
                gram[b * k + a] += da * f[[x, b]];
            }
            rhs[labels[x] * k + a] += da;
        }
    }
    for a in 0..k {
        gram[a * k + a] += PROBE_RIDGE;
    }
    linalg::solve_spd(k, &gram, &mut rhs, classes)?;
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("probe weights are not finite".into()));
    }
    let weights = Array2::from_shape_fn((k, classes), |(a, c)| rhs[c * k + a]);
    let total_degree = fsum(d.iter().copied());
    let bias = (0..classes)
        .map(|c| {
            let fitted = f.dot(&weights.column(c));
            fsum((0..n).map(|x| d[x] * (f64::from(u8::from(labels[x] == c)) - fitted[x]))) / total_degree
        })
        .collect();
    Ok(LinearProbe { weights, bias, classes })
}

/// Probe prediction at every node.
pub fn node_predictions(probe: &LinearProbe, emb: &Embedding) -> Vec<usize> {
    emb.features.rows().into_iter().map(|row| probe.predict(row)).collect()
}

/// Downstream errors of one probe on an evaluation cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoteErrors {
    /// `Pr_{x̄}(ḡ(x̄) ≠ y(x̄))`, the majority-vote error.
    pub majority: f64,
    /// `Pr_{x̄, x}(g(x) ≠ y(x̄))`; augmentations landing outside the graph count as wrong.
    pub augmented: f64,
}

/// Majority-vote error of the probe over each evaluation point's
/// augmentation distribution. `node_cells` are the grid cells of the
/// embedding's rows, ascending.
pub fn majority_vote_error(
    probe: &LinearProbe,
    emb: &Embedding,
    node_cells: &[usize],
    eval: &LabeledPointCloud,
    builder: &GraphBuilder,
) -> Result<VoteErrors> {
    if node_cells.len() != emb.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} node cells for {} embedded nodes",
            node_cells.len(),
            emb.node_count()
        )));
    }
    let predicted = node_predictions(probe, emb);
    let per_point: Vec<(f64, f64)> = eval
        .points()
        .par_iter()
        .zip(eval.weights().par_iter())
        .map(|(p, w)| -> Result<(f64, f64)> {
            let y = builder.labeler.label(*p);
            let row = kernel_row(*p, &builder.aug, &builder.grid, builder.supersample)?;
            let mut by_class = vec![0.0; probe.classes];
            let mut unknown = 0.0;
            for (cell, k) in row {
                match node_cells.binary_search(&cell) {
                    Ok(node) => by_class[predicted[node]] += k,
                    Err(_) => unknown += k,
                }
            }
            let known: f64 = by_class.iter().sum();
            let wrong_aug = known - by_class.get(y).copied().unwrap_or(0.0) + unknown;
            let vote_wrong = known == 0.0 || argmax(&by_class) != y;
            Ok((if vote_wrong { *w } else { 0.0 }, w * wrong_aug))
        })
        .collect::<Result<_>>()?;
    Ok(VoteErrors { majority: fsum(per_point.iter().map(|v| v.0)), augmented: fsum(per_point.iter().map(|v| v.1)) })
}

/// Everything the bound report aggregates for one experiment cell.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub n: usize,
    pub r: f64,
    pub k: usize,
    pub seed: u64,
    pub beta: f64,
    pub tv: f64,
    pub alpha: f64,
    pub alpha_se: f64,
    pub alpha_grid: f64,
    pub lambda_k: f64,
    pub lambda_k1: f64,
    pub phi_y: f64,
    pub votes: VoteErrors,
    pub probe_norm: f64,
}

/// Bound quantities of one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub r: f64,
    pub k: usize,
    pub beta: f64,
    pub tv: f64,
    pub alpha: f64,
    pub alpha_se: f64,
    pub lambda_k1: f64,
    pub phi_y: f64,
    /// `+∞` when `λ_{k+1}` is numerically zero.
    pub bound: f64,
    pub empirical_error: f64,
    pub seed: u64,
    pub alpha_grid: f64,
    pub augmented_error: f64,
    pub probe_norm: f64,
    /// `1 / (1 - λ_k)`, the norm the existence argument allows; recorded, not enforced.
    pub probe_norm_limit: f64,
}

impl BoundReport {
    pub const CSV_COLUMNS: [&'static str; 12] =
        ["n", "r", "k", "beta", "tv", "alpha", "alpha_se", "lambda_k1", "phi_y", "bound", "empirical_error", "seed"];

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.r.to_string(),
            self.k.to_string(),
            self.beta.to_string(),
            self.tv.to_string(),
            self.alpha.to_string(),
            self.alpha_se.to_string(),
            self.lambda_k1.to_string(),
            self.phi_y.to_string(),
            self.bound.to_string(),
            self.empirical_error.to_string(),
            self.seed.to_string(),
        ]
    }

    /// `min(1, bound)`, the largest error the bound can certify.
    pub fn capped_bound(&self) -> f64 {
        self.bound.min(1.0)
    }

    pub fn is_vacuous(&self) -> bool {
        self.bound >= 1.0
    }
}

pub fn make_bound_report(inputs: &BoundInputs) -> Result<BoundReport> {
    let bound = if inputs.lambda_k1 > crate::spectral::ZERO_EIGENVALUE_TOL {
        error_bound(inputs.alpha.clamp(0.0, 1.0), inputs.lambda_k1, inputs.beta, inputs.tv)?
    } else {
        f64::INFINITY
    };
    Ok(BoundReport {
        n: inputs.n,
        r: inputs.r,
        k: inputs.k,
        beta: inputs.beta,
        tv: inputs.tv,
        alpha: inputs.alpha,
        alpha_se: inputs.alpha_se,
        lambda_k1: inputs.lambda_k1,
        phi_y: inputs.phi_y,
        bound,
        empirical_error: inputs.votes.majority,
        seed: inputs.seed,
        alpha_grid: inputs.alpha_grid,
        augmented_error: inputs.votes.augmented,
        probe_norm: inputs.probe_norm,
        probe_norm_limit: 1.0 / (1.0 - inputs.lambda_k),
    })
}
