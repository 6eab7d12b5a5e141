//! Dense symmetric eigensolver and SPD solve, backed by `faer`.
//!
//! `faer` is built without its thread pool, so every decomposition is
//! sequential and bit-reproducible; parallelism lives at the experiment-cell
//! level instead.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::{Error, Result};

fn to_mat(n: usize, a: &[f64]) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| a[i * n + j])
}

/// Eigenvalues (ascending) of the symmetric `n × n` row-major matrix `a`.
///
/// With `vectors`, `a` is overwritten so that row `j` holds the unit
/// eigenvector of eigenvalue `j`.
pub(crate) fn symmetric_eigen(n: usize, a: &mut [f64], vectors: bool) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = to_mat(n, a);
    let fail = |e: faer::linalg::evd::EvdError| Error::Eigensolver(format!("{e:?}"));
    if !vectors {
        return m.self_adjoint_eigenvalues(Side::Lower).map_err(fail);
    }
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(fail)?;
    let (u, s) = (evd.U(), evd.S());
    for j in 0..n {
        for i in 0..n {
            a[j * n + i] = u[(i, j)];
        }
    }
    Ok((0..n).map(|j| s[j]).collect())
}

/// Solves `a x = b` for symmetric positive definite `a` (`n × n`, row-major)
/// and `nrhs` right-hand sides stored column-major in `b`. `b` receives `x`.
pub(crate) fn solve_spd(n: usize, a: &[f64], b: &mut [f64], nrhs: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * nrhs);
    if n == 0 || nrhs == 0 {
        return Ok(());
    }
    let llt = to_mat(n, a)
        .llt(Side::Lower)
        .map_err(|e| Error::Singular(format!("matrix is not positive definite: {e:?}")))?;
    let rhs = Mat::from_fn(n, nrhs, |i, j| b[j * n + i]);
    let x = llt.solve(&rhs);
    for j in 0..nrhs {
        for i in 0..n {
            b[j * n + i] = x[(i, j)];
        }
    }
    Ok(())
}
