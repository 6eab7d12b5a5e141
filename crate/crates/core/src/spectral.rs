//! Dense symmetric eigendecomposition, spectral gap, and the closed-form
//! minimizer of the spectral contrastive loss.
//!
//! For a graph with normalized adjacency `S = D^{-1/2} A D^{-1/2}` and
//! eigenpairs `(γ_i, v_i)` sorted by decreasing `γ`, the optimal
//! `k`-dimensional embedding is
//!
//! ```text
//! f*(x) = D_xx^{-1/2} (sqrt(max(γ_1, 0)) v_1(x), ..., sqrt(max(γ_k, 0)) v_k(x))
//! ```
//!
//! which minimizes `‖S - F Fᵀ‖_F²` with `F_x = sqrt(D_xx) f(x)`.

use ndarray::{Array1, Array2, Axis};

use crate::aug_graph::AugGraph;
use crate::{linalg, Error, Result};

/// Eigenvalues closer than this to zero count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: Array2<f64>,
    residual: f64,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column `i` is the eigenvector of `values()[i]`.
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    /// `max_i ‖M v_i - λ_i v_i‖₂` measured against the decomposed matrix.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖M - V Λ Vᵀ‖_F`.
    pub fn reconstruction_error(&self, m: &Array2<f64>) -> f64 {
        let scaled = &self.vectors * &Array1::from(self.values.clone());
        let rebuilt = scaled.dot(&self.vectors.t());
        (m - &rebuilt).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn validate_symmetric(m: &Array2<f64>) -> Result<usize> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::DimensionMismatch(format!("matrix is {rows} × {cols}, expected square")));
    }
    let mut scale = 0.0f64;
    for ((i, j), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i, j));
        }
        scale = scale.max(v.abs());
    }
    let tol = 1e-10 * scale.max(1.0);
    for i in 0..rows {
        for j in (i + 1)..rows {
            if (m[[i, j]] - m[[j, i]]).abs() > tol {
                return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(rows)
}

/// Full dense eigendecomposition of a symmetric matrix.
///
/// Eigenvalues ascend (stable order); each eigenvector's largest-magnitude
/// entry is made positive.
pub fn eigendecompose(m: &Array2<f64>) -> Result<Spectrum> {
    let n = validate_symmetric(m)?;
    let mut buf: Vec<f64> = m.iter().copied().collect();
    let raw = linalg::symmetric_eigen(n, &mut buf, true)?;
    // row j of `rows` is eigenvector j
    let rows = Array2::from_shape_vec((n, n), buf).expect("n × n buffer");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let values: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let v = rows.row(src);
        let sign = sign_of_dominant(v.iter().copied());
        vectors.column_mut(col).iter_mut().zip(v.iter()).for_each(|(dst, x)| *dst = sign * x);
    }

    let applied = m.dot(&vectors);
    let residual = (0..n)
        .map(|i| {
            let lam = values[i];
            applied.column(i).iter().zip(vectors.column(i)).map(|(mv, v)| (mv - lam * v).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    Ok(Spectrum { values, vectors, residual })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    let n = validate_symmetric(m)?;
    let mut buf: Vec<f64> = m.iter().copied().collect();
    let mut values = linalg::symmetric_eigen(n, &mut buf, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `+1` if the first largest-magnitude entry is nonnegative, else `-1`.
pub(crate) fn sign_of_dominant<I: Iterator<Item = f64>>(v: I) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for x in v {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

/// `λ_{k+1}` (1-indexed) of an ascending spectrum.
pub fn lambda_k_plus_1(values: &[f64], k: usize) -> Result<f64> {
    values.get(k).copied().ok_or(Error::KTooLarge { k_plus_1: k + 1, nodes: values.len() })
}

/// `min{λ_2, 2 - λ_N}` of an ascending spectrum.
pub fn spectral_gap(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!("spectral gap needs at least 2 eigenvalues, got {}", values.len())));
    }
    Ok(values[1].min(2.0 - values[values.len() - 1]))
}

/// Number of eigenvalues within `tol` of zero.
pub fn zero_multiplicity(values: &[f64], tol: f64) -> usize {
    values.iter().filter(|v| v.abs() <= tol).count()
}

/// Per-node features of a spectral embedding.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// `n × k`, row `x` is `f(x)`.
    pub features: Array2<f64>,
    pub k: usize,
    /// Degrees `D_xx` used to build the embedding.
    pub degrees: Vec<f64>,
}

impl Embedding {
    pub fn new(features: Array2<f64>, degrees: Vec<f64>) -> Result<Self> {
        let (n, k) = features.dim();
        if n != degrees.len() {
            return Err(Error::DimensionMismatch(format!("{n} feature rows for {} degrees", degrees.len())));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be at least 1".into()));
        }
        Ok(Embedding { features, k, degrees })
    }

    pub fn node_count(&self) -> usize {
        self.features.nrows()
    }
}

/// Top-`k` spectral embedding of the graph (Eckart–Young minimizer of
/// [`loss_mf`]).
pub fn optimal_embedding(g: &AugGraph, k: usize) -> Result<Embedding> {
    let n = g.node_count();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::KTooLarge { k_plus_1: k, nodes: n });
    }
    let s = g.normalized_adjacency()?;
    let spec = eigendecompose(&s)?;
    let mut features = Array2::zeros((n, k));
    for j in 0..k {
        let src = n - 1 - j;
        let scale = spec.values[src].max(0.0).sqrt();
        for x in 0..n {
            features[[x, j]] = scale * spec.vectors[[x, src]] / g.degrees()[x].sqrt();
        }
    }
    Embedding::new(features, g.degrees().to_vec())
}

/// `‖D^{-1/2} A D^{-1/2} - F Fᵀ‖_F²` with `F_x = sqrt(D_xx) f(x)`.
pub fn loss_mf(emb: &Embedding, g: &AugGraph) -> Result<f64> {
    if emb.node_count() != g.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "embedding has {} rows, graph has {} nodes",
            emb.node_count(),
            g.node_count()
        )));
    }
    let s = g.normalized_adjacency()?;
    let mut f = emb.features.clone();
    for (mut row, d) in f.axis_iter_mut(Axis(0)).zip(g.degrees()) {
        row *= d.sqrt();
    }
    let diff = s - f.dot(&f.t());
    Ok(diff.iter().map(|v| v * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_by_two_laplacian() {
        let l = array![[1.0, -1.0], [-1.0, 1.0]];
        let s = eigendecompose(&l).unwrap();
        assert!(s.values()[0].abs() < 1e-12);
        assert!((s.values()[1] - 2.0).abs() < 1e-12);
        assert!(s.residual() < 1e-12);
        assert!(s.reconstruction_error(&l) < 1e-12);
        // dominant entry positive
        for c in 0..2 {
            let col = s.vectors().column(c);
            let dom = col.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(dom > 0.0);
        }
    }

    #[test]
    fn zero_matrix_and_errors() {
        let z = Array2::<f64>::zeros((3, 3));
        assert!(eigendecompose(&z).unwrap().values().iter().all(|v| *v == 0.0));
        let bad = array![[1.0, f64::NAN], [f64::NAN, 1.0]];
        assert!(matches!(eigendecompose(&bad), Err(Error::NonFinite(..))));
        let asym = array![[1.0, 2.0], [0.0, 1.0]];
        assert!(eigendecompose(&asym).is_err());
        assert!(eigendecompose(&Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn indexing_helpers() {
        let spec = [0.0, 0.1, 0.4, 0.9];
        assert_eq!(lambda_k_plus_1(&spec, 2).unwrap(), 0.4);
        assert_eq!(lambda_k_plus_1(&spec, 3).unwrap(), 0.9);
        assert!(matches!(lambda_k_plus_1(&spec, 4), Err(Error::KTooLarge { .. })));
        assert_eq!(spectral_gap(&[0.0, 2.0]).unwrap(), 0.0);
        assert_eq!(spectral_gap(&[0.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(spectral_gap(&[0.0]).is_err());
        assert_eq!(zero_multiplicity(&[0.0, 1e-12, 0.3], 1e-8), 2);
    }

    #[test]
    fn eigenvalues_only_matches_full() {
        let m = array![[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let full = eigendecompose(&m).unwrap();
        let vals = eigenvalues(&m).unwrap();
        for (a, b) in full.values().iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
        let r2 = 2.0f64.sqrt();
        assert!((vals[0] - (2.0 - r2)).abs() < 1e-12 && (vals[2] - (2.0 + r2)).abs() < 1e-12);
    }
}
