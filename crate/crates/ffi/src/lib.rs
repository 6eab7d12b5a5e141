//! C ABI for the aglab library.
//!
//! Every function returns an [`AglabStatus`]; results go through out
//! pointers. On failure, [`aglab_last_error`] returns a message for the
//! calling thread. Graphs are opaque handles created by
//! `aglab_graph_from_points` / `aglab_graph_threshold` and released with
//! [`aglab_graph_free`]. No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use aglab::aug_graph::{normalized_laplacian, threshold_graph, AugGraph, AugKernel, DiskAugmentation, GraphBuilder};
use aglab::distributions::{replication_beta, DiscreteDistribution, LabeledPointCloud};
use aglab::grid::Grid;
use aglab::metrics::{error_bound, tv_distance};
use aglab::spectral::{eigenvalues, spectral_gap};
use aglab::{Error, Point2};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AglabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// `λ ≤ 0`: the bound is vacuous.
    VacuousBound = 3,
    /// Requested more eigenvalues or a larger index than the graph has.
    OutOfRange = 4,
    /// Graph or input too large for the dense path.
    TooLarge = 5,
    /// Eigensolver or linear-solve failure.
    Numerical = 6,
    /// A Rust panic was caught; the handle, if any, should be freed.
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AglabStatus {
    match e {
        Error::VacuousBound(_) => AglabStatus::VacuousBound,
        Error::KTooLarge { .. } => AglabStatus::OutOfRange,
        Error::TooLarge { .. } => AglabStatus::TooLarge,
        Error::Eigensolver(_) | Error::Singular(_) | Error::NonFinite(..) => AglabStatus::Numerical,
        _ => AglabStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (AglabStatus, String)>) -> AglabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AglabStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AglabStatus::Internal
        }
    }
}

fn lib<T>(r: aglab::Result<T>) -> Result<T, (AglabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AglabStatus, String) {
    (AglabStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (AglabStatus, String) {
    (AglabStatus::InvalidArgument, msg.into())
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (AglabStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), (AglabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

enum Inner {
    Kernel(AugKernel),
    Dense(AugGraph),
}

/// Opaque graph handle.
pub struct AglabGraph {
    inner: Inner,
    spectrum: OnceLock<Result<Vec<f64>, (AglabStatus, String)>>,
}

impl AglabGraph {
    fn new(inner: Inner) -> Self {
        AglabGraph { inner, spectrum: OnceLock::new() }
    }

    fn node_count(&self) -> usize {
        match &self.inner {
            Inner::Kernel(k) => k.node_count(),
            Inner::Dense(g) => g.node_count(),
        }
    }

    fn component_count(&self) -> usize {
        match &self.inner {
            Inner::Kernel(k) => k.component_count(),
            Inner::Dense(g) => g.component_count(),
        }
    }

    fn spectrum(&self) -> Result<&[f64], (AglabStatus, String)> {
        let cached = self.spectrum.get_or_init(|| {
            lib(match &self.inner {
                Inner::Kernel(k) => k.laplacian_spectrum(),
                Inner::Dense(g) => normalized_laplacian(g).and_then(|l| eigenvalues(&l)),
            })
        });
        cached.as_deref().map_err(Clone::clone)
    }
}

/// # Safety
/// `xy` must hold `2 * n` readable doubles.
unsafe fn points(xy: *const f64, n: usize) -> Result<Vec<Point2>, (AglabStatus, String)> {
    let flat = slice(xy, n.checked_mul(2).ok_or_else(|| invalid("point count overflows"))?, "xy")?;
    Ok(flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
}

fn into_handle(g: AglabGraph, out: *mut *mut AglabGraph) -> Result<(), (AglabStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; the caller owns the slot.
    unsafe { out.write(Box::into_raw(Box::new(g))) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aglab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the calling thread's most recent failure ("" after success).
/// Valid until the next aglab call on the same thread.
#[no_mangle]
pub extern "C" fn aglab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `8 alpha / lambda + 16 alpha + 2 (1 - beta) tv`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_error_bound(alpha: f64, lambda: f64, beta: f64, tv: f64, out: *mut f64) -> AglabStatus {
    guard(|| write(out, lib(error_bound(alpha, lambda, beta, tv))?, "out"))
}

/// Total-variation distance of two probability vectors of length `len`.
///
/// # Safety
/// `p` and `q` must hold `len` doubles; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_tv_distance(p: *const f64, q: *const f64, len: usize, out: *mut f64) -> AglabStatus {
    guard(|| {
        let p = lib(DiscreteDistribution::from_mass(slice(p, len, "p")?.to_vec()))?;
        let q = lib(DiscreteDistribution::from_mass(slice(q, len, "q")?.to_vec()))?;
        write(out, lib(tv_distance(&p, &q))?, "out")
    })
}

/// Real-data weight `beta` after replicating `n_real` points `replication` times
/// alongside `n_generated` generated points.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_replication_beta(
    n_real: usize,
    n_generated: usize,
    replication: usize,
    out: *mut f64,
) -> AglabStatus {
    guard(|| {
        if replication == 0 || n_real + n_generated == 0 {
            return Err(invalid("need replication >= 1 and at least one point"));
        }
        write(out, replication_beta(n_real, n_generated, replication), "out")
    })
}

/// Disk-augmentation graph over grid cells of size `cell_size` for `n`
/// equally weighted points (`xy` interleaved `x0, y0, x1, y1, ...`). The grid
/// covers every point plus `radius`; labels use the half-plane `x >= 0`.
///
/// # Safety
/// `xy` must hold `2 * n` doubles; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_from_points(
    xy: *const f64,
    n: usize,
    radius: f64,
    cell_size: f64,
    out: *mut *mut AglabGraph,
) -> AglabStatus {
    guard(|| {
        let pts = points(xy, n)?;
        let cloud = lib(LabeledPointCloud::uniform(pts, vec![0; n]))?;
        let grid = lib(Grid::covering(cloud.points(), radius, cell_size))?;
        let kernel = lib(GraphBuilder::new(grid, lib(DiskAugmentation::new(radius))?).kernel(&cloud))?;
        into_handle(AglabGraph::new(Inner::Kernel(kernel)), out)
    })
}

/// Unweighted graph joining points at distance at most `eps`; isolated
/// points are dropped.
///
/// # Safety
/// `xy` must hold `2 * n` doubles; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_threshold(
    xy: *const f64,
    n: usize,
    eps: f64,
    out: *mut *mut AglabGraph,
) -> AglabStatus {
    guard(|| {
        let pts = points(xy, n)?;
        let cloud = lib(LabeledPointCloud::uniform(pts, vec![0; n]))?;
        let g = lib(threshold_graph(&cloud, eps))?;
        if g.is_empty() {
            return Err(invalid("every point is isolated at this threshold"));
        }
        into_handle(AglabGraph::new(Inner::Dense(g)), out)
    })
}

fn handle<'a>(g: *const AglabGraph) -> Result<&'a AglabGraph, (AglabStatus, String)> {
    // SAFETY: non-null handles come from `into_handle` and stay valid until freed.
    unsafe { g.as_ref() }.ok_or_else(|| null("graph"))
}

/// Node count (nonzero-degree nodes).
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_node_count(g: *const AglabGraph, out: *mut usize) -> AglabStatus {
    guard(|| write(out, handle(g)?.node_count(), "out"))
}

/// Connected components.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_component_count(g: *const AglabGraph, out: *mut usize) -> AglabStatus {
    guard(|| write(out, handle(g)?.component_count(), "out"))
}

/// Writes the `min(capacity, node count)` smallest normalized-Laplacian
/// eigenvalues (ascending) to `values` and that count to `written`.
///
/// # Safety
/// `g` must be a live handle; `values` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_eigenvalues(
    g: *const AglabGraph,
    values: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> AglabStatus {
    guard(|| {
        let spectrum = handle(g)?.spectrum()?;
        let count = capacity.min(spectrum.len());
        if count > 0 {
            if values.is_null() {
                return Err(null("values"));
            }
            ptr::copy_nonoverlapping(spectrum.as_ptr(), values, count);
        }
        write(written, count, "written")
    })
}

/// The `index`-th smallest eigenvalue, 1-based (`index = k + 1` gives `λ_{k+1}`).
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_lambda(g: *const AglabGraph, index: usize, out: *mut f64) -> AglabStatus {
    guard(|| {
        let spectrum = handle(g)?.spectrum()?;
        let v = index
            .checked_sub(1)
            .and_then(|i| spectrum.get(i))
            .ok_or((AglabStatus::OutOfRange, format!("index {index} outside 1..={}", spectrum.len())))?;
        write(out, *v, "out")
    })
}

/// `min(λ₂, 2 − λ_N)`.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_spectral_gap(g: *const AglabGraph, out: *mut f64) -> AglabStatus {
    guard(|| write(out, lib(spectral_gap(handle(g)?.spectrum()?))?, "out"))
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aglab_graph_free(g: *mut AglabGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}
