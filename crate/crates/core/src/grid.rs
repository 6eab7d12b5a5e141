//! Regular square grid over a rectangle of the augmented space.
//!
//! Cells are indexed row-major: `index = iy * nx + ix`. The right and top
//! domain edges belong to the last column and row.

use serde::{Deserialize, Serialize};

use crate::{Error, Point2, Result};

/// Slack used when testing whether a disk or point sits inside the domain.
const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub y_min: f64,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Grid over `[x_min, x_max] × [y_min, y_max]`. The width and height must
    /// be whole multiples of `cell_size`.
    pub fn new(bounds: [f64; 4], cell_size: f64) -> Result<Self> {
        let [x_min, y_min, x_max, y_max] = bounds;
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidArgument(format!("cell size must be positive, got {cell_size}")));
        }
        if !bounds.iter().all(|b| b.is_finite()) || !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::InvalidArgument(format!("degenerate grid bounds {bounds:?}")));
        }
        let count = |lo: f64, hi: f64| -> Result<usize> {
            let width = hi - lo;
            let n = (width / cell_size).round();
            if n < 1.0 || (n * cell_size - width).abs() > 1e-9 * width.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "extent {width} is not a whole multiple of cell size {cell_size}"
                )));
            }
            Ok(n as usize)
        };
        Ok(Grid { x_min, y_min, cell_size, nx: count(x_min, x_max)?, ny: count(y_min, y_max)? })
    }

    /// Smallest grid aligned to multiples of `cell_size` that contains every
    /// point expanded by `margin` on all sides.
    pub fn covering<'a, I>(points: I, margin: f64, cell_size: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Point2>,
    {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidArgument(format!("cell size must be positive, got {cell_size}")));
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if !lo[0].is_finite() {
            return Err(Error::InvalidArgument("cannot cover an empty point set".into()));
        }
        let margin = margin.max(0.0);
        let index_lo = |v: f64| ((v - margin) / cell_size).floor() - 1.0;
        let index_hi = |v: f64| ((v + margin) / cell_size).ceil() + 1.0;
        let (ix0, ix1) = (index_lo(lo[0]), index_hi(hi[0]));
        let (iy0, iy1) = (index_lo(lo[1]), index_hi(hi[1]));
        Ok(Grid {
            x_min: ix0 * cell_size,
            y_min: iy0 * cell_size,
            cell_size,
            nx: (ix1 - ix0) as usize,
            ny: (iy1 - iy0) as usize,
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.nx as f64 * self.cell_size
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.ny as f64 * self.cell_size
    }

    pub fn bounds(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max(), self.y_max()]
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }

    fn axis_index(&self, v: f64, origin: f64, n: usize) -> Option<usize> {
        let t = (v - origin) / self.cell_size;
        if !(t >= -EDGE_TOL) || t > n as f64 + EDGE_TOL {
            return None;
        }
        Some((t.floor().max(0.0) as usize).min(n - 1))
    }

    /// Column and row of the cell holding `p`.
    pub fn cell_coords(&self, p: Point2) -> Option<(usize, usize)> {
        Some((self.axis_index(p[0], self.x_min, self.nx)?, self.axis_index(p[1], self.y_min, self.ny)?))
    }

    pub fn cell_of(&self, p: Point2) -> Option<usize> {
        self.cell_coords(p).map(|(ix, iy)| iy * self.nx + ix)
    }

    pub fn cell_of_checked(&self, p: Point2) -> Result<usize> {
        self.cell_of(p).ok_or(Error::OutOfDomain { x: p[0], y: p[1] })
    }

    /// `[x0, y0, x1, y1]` of a cell.
    pub fn cell_bounds(&self, cell: usize) -> [f64; 4] {
        let (ix, iy) = (cell % self.nx, cell / self.nx);
        let h = self.cell_size;
        let x0 = self.x_min + ix as f64 * h;
        let y0 = self.y_min + iy as f64 * h;
        [x0, y0, x0 + h, y0 + h]
    }

    pub fn cell_center(&self, cell: usize) -> Point2 {
        let [x0, y0, x1, y1] = self.cell_bounds(cell);
        [0.5 * (x0 + x1), 0.5 * (y0 + y1)]
    }

    pub fn contains_disk(&self, center: Point2, radius: f64) -> bool {
        let tol = EDGE_TOL * (1.0 + radius);
        center[0] - radius >= self.x_min - tol
            && center[0] + radius <= self.x_max() + tol
            && center[1] - radius >= self.y_min - tol
            && center[1] + radius <= self.y_max() + tol
    }

    /// Indices of all cells meeting the axis-aligned box, ascending.
    pub fn cells_in_box(&self, bx: [f64; 4]) -> impl Iterator<Item = usize> + '_ {
        let h = self.cell_size;
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n.saturating_sub(1));
        let ix0 = clamp(((bx[0] - self.x_min) / h).floor(), self.nx);
        let ix1 = clamp(((bx[2] - self.x_min) / h).floor(), self.nx);
        let iy0 = clamp(((bx[1] - self.y_min) / h).floor(), self.ny);
        let iy1 = clamp(((bx[3] - self.y_min) / h).floor(), self.ny);
        let nx = self.nx;
        (iy0..=iy1).flat_map(move |iy| (ix0..=ix1).map(move |ix| iy * nx + ix))
    }
}
