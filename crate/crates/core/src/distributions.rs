//! Synthetic data, discrete distributions, and real/generated mixing.
//!
//! Replication of the real data `N` times is realized as a per-point weight,
//! so a mixed cloud keeps one entry per raw sample:
//!
//! ```text
//! β = N |real| / (N |real| + |generated|)
//! P_t = β P_d + (1 - β) P_g
//! ```

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::grid::Grid;
use crate::{seed, Error, Point2, Result};

/// Tolerance on the total mass of weights and distributions.
pub const MASS_TOL: f64 = 1e-12;

/// Neumaier-compensated sum.
pub fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Isotropic Gaussian mixture with equal component priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub means: Vec<Point2>,
    pub variance: f64,
    pub class_of_component: Vec<usize>,
}

impl GaussianMixtureSpec {
    pub fn new(means: Vec<Point2>, variance: f64, class_of_component: Vec<usize>) -> Result<Self> {
        let spec = GaussianMixtureSpec { means, variance, class_of_component };
        spec.validate()?;
        Ok(spec)
    }

    /// The two-class toy: means `(-1, 0)` and `(1, 0)`, variance 0.7.
    pub fn toy() -> Self {
        GaussianMixtureSpec { means: vec![[-1.0, 0.0], [1.0, 0.0]], variance: 0.7, class_of_component: vec![0, 1] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.means.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        if !(self.variance > 0.0) || !self.variance.is_finite() {
            return Err(Error::InvalidArgument(format!("variance must be positive, got {}", self.variance)));
        }
        if self.class_of_component.len() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} means but {} class indices",
                self.means.len(),
                self.class_of_component.len()
            )));
        }
        if self.means.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite mixture mean".into()));
        }
        let classes = self.class_count();
        for c in 0..classes {
            if !self.class_of_component.contains(&c) {
                return Err(Error::InvalidArgument(format!("class indices must be contiguous from 0; {c} missing")));
            }
        }
        Ok(())
    }

    pub fn class_count(&self) -> usize {
        self.class_of_component.iter().max().map_or(0, |m| m + 1)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Same mixture with every mean translated by `shift`.
    pub fn shifted(&self, shift: Point2) -> Self {
        let mut out = self.clone();
        for m in &mut out.means {
            m[0] += shift[0];
            m[1] += shift[1];
        }
        out
    }

    /// Probability mass of the mixture inside an axis-aligned box.
    pub fn box_mass(&self, bx: [f64; 4]) -> f64 {
        let s = self.std_dev() * std::f64::consts::SQRT_2;
        // Φ(b) - Φ(a) written with erfc on the side that keeps precision
        let interval = |lo: f64, hi: f64, mu: f64| -> f64 {
            let (a, b) = ((lo - mu) / s, (hi - mu) / s);
            if a >= 0.0 {
                0.5 * (erfc(a) - erfc(b))
            } else if b <= 0.0 {
                0.5 * (erfc(-b) - erfc(-a))
            } else {
                1.0 - 0.5 * (erfc(-a) + erfc(b))
            }
        };
        let m = self.means.len() as f64;
        self.means.iter().map(|mu| interval(bx[0], bx[2], mu[0]) * interval(bx[1], bx[3], mu[1])).sum::<f64>() / m
    }
}

/// Weighted, labeled raw samples.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabeledPointCloud {
    points: Vec<Point2>,
    labels: Vec<usize>,
    weights: Vec<f64>,
}

impl LabeledPointCloud {
    pub fn new(points: Vec<Point2>, labels: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != labels.len() || points.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points, {} labels, {} weights",
                points.len(),
                labels.len(),
                weights.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite point coordinate".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        if !points.is_empty() {
            let total = fsum(weights.iter().copied());
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
            }
        }
        Ok(LabeledPointCloud { points, labels, weights })
    }

    /// Cloud with weights `1/n`.
    pub fn uniform(points: Vec<Point2>, labels: Vec<usize>) -> Result<Self> {
        let n = points.len();
        let weights = vec![if n == 0 { 0.0 } else { 1.0 / n as f64 }; n];
        Self::new(points, labels, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point2, usize, f64)> + '_ {
        self.points.iter().zip(&self.labels).zip(&self.weights).map(|((p, l), w)| (*p, *l, *w))
    }

    /// First `n` points, reweighted uniformly.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self::uniform(self.points[..n].to_vec(), self.labels[..n].to_vec()).expect("prefix of a valid cloud")
    }
}

/// Draw `n` points: uniform component choice, isotropic Gaussian noise.
/// Each label is the class of the drawn component.
pub fn sample_gaussian_mixture(spec: &GaussianMixtureSpec, n: usize, seed: u64) -> Result<LabeledPointCloud> {
    spec.validate()?;
    let mut rng = seed::rng(seed);
    let sigma = spec.std_dev();
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..spec.means.len());
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        points.push([spec.means[c][0] + sigma * zx, spec.means[c][1] + sigma * zy]);
        labels.push(spec.class_of_component[c]);
    }
    LabeledPointCloud::uniform(points, labels)
}

/// `n` i.i.d. points uniform on the unit square, all labeled 0.
pub fn sample_uniform_square(n: usize, seed: u64) -> LabeledPointCloud {
    let mut rng = seed::rng(seed);
    let points: Vec<Point2> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    LabeledPointCloud::uniform(points, vec![0; n]).expect("uniform cloud is valid")
}

/// A mixed training cloud: real points first, then generated points.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub cloud: LabeledPointCloud,
    pub beta: f64,
    pub n_real: usize,
}

/// Real-data weight `β` induced by replicating the real set `replication` times.
pub fn replication_beta(n_real: usize, n_generated: usize, replication: usize) -> f64 {
    let real = replication as f64 * n_real as f64;
    real / (real + n_generated as f64)
}

/// Union of the two clouds with each real point weighted `replication`
/// times as heavily as each generated point.
pub fn mix_clouds(real: &LabeledPointCloud, generated: &LabeledPointCloud, replication: usize) -> Result<Mixture> {
    if replication == 0 {
        return Err(Error::InvalidArgument("replication must be at least 1".into()));
    }
    if real.is_empty() && generated.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let beta = replication_beta(real.len(), generated.len(), replication);
    let mut points = Vec::with_capacity(real.len() + generated.len());
    let mut labels = Vec::with_capacity(points.capacity());
    let mut weights = Vec::with_capacity(points.capacity());
    for (share, cloud) in [(beta, real), (1.0 - beta, generated)] {
        for (p, l, w) in cloud.iter() {
            points.push(p);
            labels.push(l);
            weights.push(share * w);
        }
    }
    let total = fsum(weights.iter().copied());
    if (total - 1.0).abs() > MASS_TOL {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok(Mixture { cloud: LabeledPointCloud::new(points, labels, weights)?, beta, n_real: real.len() })
}

/// Probability mass over an ordered set of atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    atoms: Vec<usize>,
    mass: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        if atoms.len() != mass.len() {
            return Err(Error::DimensionMismatch(format!("{} atoms, {} masses", atoms.len(), mass.len())));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("atoms must be strictly increasing".into()));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidArgument("masses must be finite and nonnegative".into()));
        }
        let total = fsum(mass.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidArgument(format!("masses sum to {total}, expected 1")));
        }
        Ok(DiscreteDistribution { atoms, mass })
    }

    /// Distribution over atoms `0..mass.len()`.
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        Self::new((0..mass.len()).collect(), mass)
    }

    /// Normalizes nonnegative raw weights over atoms `0..raw.len()`.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let total = fsum(raw.iter().copied());
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize zero mass".into()));
        }
        Self::from_mass(raw.into_iter().map(|m| m / total).collect())
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub(crate) fn check_same_atoms(&self, other: &Self) -> Result<()> {
        if self.atoms != other.atoms {
            return Err(Error::AtomMismatch);
        }
        Ok(())
    }
}

/// Histogram of the cloud's weights over every grid cell.
pub fn discretize_cloud(cloud: &LabeledPointCloud, grid: &Grid) -> Result<DiscreteDistribution> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("cannot discretize an empty cloud".into()));
    }
    let mut mass = vec![0.0; grid.cell_count()];
    for (p, _, w) in cloud.iter() {
        mass[grid.cell_of_checked(p)?] += w;
    }
    DiscreteDistribution::from_mass(mass)
}

/// Mixture density integrated over each grid cell, renormalized to the
/// domain (the mass outside the rectangle is discarded).
pub fn discretize_density(spec: &GaussianMixtureSpec, grid: &Grid) -> Result<DiscreteDistribution> {
    spec.validate()?;
    let raw: Vec<f64> = (0..grid.cell_count()).map(|c| spec.box_mass(grid.cell_bounds(c))).collect();
    DiscreteDistribution::normalized(raw)
}

/// `β P_d + (1 - β) P_g` atom by atom.
pub fn mixture_distribution(
    real: &DiscreteDistribution,
    generated: &DiscreteDistribution,
    beta: f64,
) -> Result<DiscreteDistribution> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("beta must lie in [0, 1], got {beta}")));
    }
    real.check_same_atoms(generated)?;
    let mass = real.mass.iter().zip(&generated.mass).map(|(p, q)| beta * p + (1.0 - beta) * q).collect();
    Ok(DiscreteDistribution { atoms: real.atoms.clone(), mass })
}
