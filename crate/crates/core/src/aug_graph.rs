//! Augmentation graphs over grid-cell nodes.
//!
//! A raw point `x̄` with weight `w` spreads its augmentation distribution
//! `A(·|x̄)` (uniform on a disk of radius `r`) over grid cells; the graph has
//!
//! ```text
//! A_{c,c'} = Σ_i w_i A(c|x̄_i) A(c'|x̄_i)
//! ```
//!
//! Writing `K` for the point-by-cell kernel matrix, `A = Kᵀ W K`, so the
//! normalized adjacency `D^{-1/2} A D^{-1/2} = Mᵀ M` with
//! `M = W^{1/2} K D^{-1/2}`. [`AugKernel`] keeps this factored form: its
//! spectrum comes from the small point-side Gram matrix `M Mᵀ`, which makes
//! fine grids with tens of thousands of cells tractable. [`AugGraph`] is the
//! dense cell-level graph.

use std::collections::VecDeque;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{fsum, LabeledPointCloud};
use crate::grid::Grid;
use crate::metrics::Labeler;
use crate::spectral::{self, sign_of_dominant, Embedding};
use crate::{seed, Error, Point2, Result};

pub const DEFAULT_SUPERSAMPLE: usize = 8;
pub const DEFAULT_NODE_CAP: usize = 6000;

/// Uniform noise on a disk of radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskAugmentation {
    radius: f64,
}

impl DiskAugmentation {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("augmentation radius must be finite and ≥ 0, got {radius}")));
        }
        Ok(DiskAugmentation { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Number of the `s × s` sub-cell midpoints of `bx` inside the closed disk.
fn covered_samples(center: Point2, radius: f64, bx: [f64; 4], s: usize) -> usize {
    let r2 = radius * radius;
    let near_x = (bx[0] - center[0]).max(0.0).max(center[0] - bx[2]);
    let near_y = (bx[1] - center[1]).max(0.0).max(center[1] - bx[3]);
    if near_x * near_x + near_y * near_y > r2 {
        return 0;
    }
    let far_x = (center[0] - bx[0]).abs().max((bx[2] - center[0]).abs());
    let far_y = (center[1] - bx[1]).abs().max((bx[3] - center[1]).abs());
    if far_x * far_x + far_y * far_y <= r2 {
        return s * s;
    }
    let (w, h) = (bx[2] - bx[0], bx[3] - bx[1]);
    let mut count = 0;
    for iy in 0..s {
        let dy = bx[1] + (iy as f64 + 0.5) / s as f64 * h - center[1];
        for ix in 0..s {
            let dx = bx[0] + (ix as f64 + 0.5) / s as f64 * w - center[0];
            if dx * dx + dy * dy <= r2 {
                count += 1;
            }
        }
    }
    count
}

/// Supersampled fraction of `cell` covered by the disk, in `[0, 1]`.
pub fn covered_fraction(center: Point2, radius: f64, grid: &Grid, cell: usize, supersample: usize) -> f64 {
    let s = supersample.max(1);
    covered_samples(center, radius, grid.cell_bounds(cell), s) as f64 / (s * s) as f64
}

/// `area(disk ∩ cell) / (π r²)` by `s × s` supersampling, clamped to `[0, 1]`.
pub fn kernel_mass(
    center: Point2,
    aug: &DiskAugmentation,
    grid: &Grid,
    cell: usize,
    supersample: usize,
) -> Result<f64> {
    let r = aug.radius();
    if r == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    if supersample == 0 {
        return Err(Error::InvalidArgument("supersample order must be at least 1".into()));
    }
    let area = covered_fraction(center, r, grid, cell, supersample) * grid.cell_area();
    Ok((area / (std::f64::consts::PI * r * r)).clamp(0.0, 1.0))
}

/// Augmentation distribution of one raw point over grid cells, as ascending
/// `(cell, probability)` pairs summing to 1.
///
/// Supersampled masses are renormalized so the row is an exact probability
/// vector. A disk too small to hit any sub-cell sample (and `r = 0`) puts all
/// mass on the cell holding the point.
pub fn kernel_row(
    center: Point2,
    aug: &DiskAugmentation,
    grid: &Grid,
    supersample: usize,
) -> Result<Vec<(usize, f64)>> {
    let r = aug.radius();
    if r == 0.0 {
        return Ok(vec![(grid.cell_of_checked(center)?, 1.0)]);
    }
    if supersample == 0 {
        return Err(Error::InvalidArgument("supersample order must be at least 1".into()));
    }
    if !grid.contains_disk(center, r) {
        return Err(Error::AugmentationLeavesDomain { x: center[0], y: center[1], radius: r });
    }
    let bx = [center[0] - r, center[1] - r, center[0] + r, center[1] + r];
    let mut counts = Vec::new();
    let mut total = 0usize;
    for cell in grid.cells_in_box(bx) {
        let c = covered_samples(center, r, grid.cell_bounds(cell), supersample);
        if c > 0 {
            counts.push((cell, c));
            total += c;
        }
    }
    if total == 0 {
        return Ok(vec![(grid.cell_of_checked(center)?, 1.0)]);
    }
    let total = total as f64;
    Ok(counts.into_iter().map(|(cell, c)| (cell, c as f64 / total)).collect())
}

/// Builds augmentation graphs for a fixed grid, kernel, and labeler.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    pub grid: Grid,
    pub aug: DiskAugmentation,
    pub supersample: usize,
    pub labeler: Labeler,
    pub node_cap: usize,
}

impl GraphBuilder {
    pub fn new(grid: Grid, aug: DiskAugmentation) -> Self {
        GraphBuilder {
            grid,
            aug,
            supersample: DEFAULT_SUPERSAMPLE,
            labeler: Labeler::toy(),
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn with_labeler(mut self, labeler: Labeler) -> Self {
        self.labeler = labeler;
        self
    }

    pub fn with_supersample(mut self, s: usize) -> Self {
        self.supersample = s;
        self
    }

    pub fn with_node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    /// Kernel row of every point (empty rows for zero-weight points).
    pub fn rows(&self, cloud: &LabeledPointCloud) -> Result<Vec<Vec<(usize, f64)>>> {
        cloud
            .points()
            .par_iter()
            .zip(cloud.weights().par_iter())
            .map(
                |(p, w)| {
                    if *w > 0.0 {
                        kernel_row(*p, &self.aug, &self.grid, self.supersample)
                    } else {
                        Ok(Vec::new())
                    }
                },
            )
            .collect()
    }

    /// Factored form of the graph.
    pub fn kernel(&self, cloud: &LabeledPointCloud) -> Result<AugKernel> {
        if cloud.is_empty() {
            return Err(Error::InvalidArgument("cannot build a graph from an empty cloud".into()));
        }
        let global = self.rows(cloud)?;
        let mut cells: Vec<usize> = global.iter().flatten().map(|(c, _)| *c).collect();
        cells.sort_unstable();
        cells.dedup();

        let rows: Vec<Vec<(usize, f64)>> = global
            .into_iter()
            .map(|row| {
                row.into_iter().map(|(c, k)| (cells.binary_search(&c).expect("cell collected above"), k)).collect()
            })
            .collect();
        let row_sums: Vec<f64> = rows.iter().map(|r| fsum(r.iter().map(|(_, k)| *k))).collect();
        let mut degrees = vec![0.0; cells.len()];
        for ((row, w), s) in rows.iter().zip(cloud.weights()).zip(&row_sums) {
            for &(node, k) in row {
                degrees[node] += w * k * s;
            }
        }
        let labels = cells.iter().map(|&c| self.labeler.label(self.grid.cell_center(c))).collect();
        let point_labels = cloud.points().iter().map(|p| self.labeler.label(*p)).collect();
        Ok(AugKernel {
            grid: self.grid,
            radius: self.aug.radius(),
            dropped: self.grid.cell_count() - cells.len(),
            cells,
            rows,
            weights: cloud.weights().to_vec(),
            degrees,
            labels,
            point_labels,
        })
    }

    /// Dense cell-level graph.
    pub fn build(&self, cloud: &LabeledPointCloud) -> Result<AugGraph> {
        self.kernel(cloud)?.to_graph(self.node_cap)
    }
}

/// Dense augmentation graph over grid cells with the toy labeler and default
/// supersampling.
pub fn build_graph(cloud: &LabeledPointCloud, aug: &DiskAugmentation, grid: &Grid) -> Result<AugGraph> {
    GraphBuilder::new(*grid, *aug).build(cloud)
}

/// Augmentation graph kept as point-by-cell kernel rows.
#[derive(Debug, Clone)]
pub struct AugKernel {
    grid: Grid,
    radius: f64,
    /// Global grid cell of each node, ascending.
    cells: Vec<usize>,
    /// Per point: ascending `(node, A(node|x̄))`.
    rows: Vec<Vec<(usize, f64)>>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    labels: Vec<usize>,
    point_labels: Vec<usize>,
    dropped: usize,
}

impl AugKernel {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn node_count(&self) -> usize {
        self.cells.len()
    }

    pub fn point_count(&self) -> usize {
        self.rows.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Labeler output at each node's cell center.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Labeler output at each raw point.
    pub fn point_labels(&self) -> &[usize] {
        &self.point_labels
    }

    /// Grid cells with zero mass.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn d_min(&self) -> f64 {
        self.degrees.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn node_of_cell(&self, cell: usize) -> Option<usize> {
        self.cells.binary_search(&cell).ok()
    }

    /// Dense adjacency. Fails when the node count exceeds `cap`.
    pub fn to_graph(&self, cap: usize) -> Result<AugGraph> {
        let n = self.node_count();
        if n > cap {
            return Err(Error::TooLarge { nodes: n, cap });
        }
        let mut a = Array2::zeros((n, n));
        for (row, w) in self.rows.iter().zip(&self.weights) {
            for &(i, ki) in row {
                for &(j, kj) in row {
                    a[[i, j]] += w * (ki * kj);
                }
            }
        }
        AugGraph::assemble(self.cells.clone(), a, Some(self.labels.clone()), Some(self.grid), self.dropped)
    }

    /// Rows of `M = W^{1/2} K D^{-1/2}`.
    fn scaled_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let inv_sqrt_deg: Vec<f64> = self.degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
        self.rows
            .iter()
            .zip(&self.weights)
            .map(|(row, w)| {
                let sw = w.sqrt();
                row.iter().map(|&(c, k)| (c, sw * k * inv_sqrt_deg[c])).collect()
            })
            .collect()
    }

    /// Point-side Gram matrix `M Mᵀ`; shares its nonzero spectrum with the
    /// normalized adjacency.
    pub fn gram(&self) -> Array2<f64> {
        let m = self.scaled_rows();
        let p = m.len();
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.node_count()];
        for (i, row) in m.iter().enumerate() {
            for &(c, v) in row {
                columns[c].push((i, v));
            }
        }
        let mut g = Array2::zeros((p, p));
        for col in &columns {
            for (a, &(i, vi)) in col.iter().enumerate() {
                for &(j, vj) in &col[a..] {
                    g[[i, j]] += vi * vj;
                }
            }
        }
        for i in 0..p {
            for j in (i + 1)..p {
                g[[j, i]] = g[[i, j]];
            }
        }
        g
    }

    /// Ascending eigenvalues of the normalized Laplacian, one per node.
    pub fn laplacian_spectrum(&self) -> Result<Vec<f64>> {
        let n = self.node_count();
        let gamma = spectral::eigenvalues(&self.gram())?;
        let mut values: Vec<f64> = gamma.iter().rev().take(n).map(|g| 1.0 - g).collect();
        values.resize(n, 1.0);
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// Top-`k` spectral embedding computed through the Gram matrix.
    pub fn optimal_embedding(&self, k: usize) -> Result<Embedding> {
        let n = self.node_count();
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if k > n {
            return Err(Error::KTooLarge { k_plus_1: k, nodes: n });
        }
        let m = self.scaled_rows();
        let p = m.len();
        let spec = spectral::eigendecompose(&self.gram())?;
        let mut features = Array2::zeros((n, k));
        for j in 0..k.min(p) {
            let src = p - 1 - j;
            if spec.values()[src] <= 0.0 {
                continue;
            }
            // √γ v = Mᵀ u for the unit Gram eigenvector u
            let u = spec.vectors().column(src);
            let mut col = vec![0.0; n];
            for (row, ui) in m.iter().zip(u.iter()) {
                for &(c, v) in row {
                    col[c] += v * ui;
                }
            }
            let sign = sign_of_dominant(col.iter().copied());
            for (x, v) in col.into_iter().enumerate() {
                features[[x, j]] = sign * v / self.degrees[x].sqrt();
            }
        }
        Embedding::new(features, self.degrees.clone())
    }

    /// Connected components among nodes (cells sharing a raw point are linked).
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.node_count()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for row in &self.rows {
            if let Some(&(first, _)) = row.first() {
                for &(c, _) in &row[1..] {
                    let (a, b) = (find(&mut parent, first), find(&mut parent, c));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        (0..parent.len()).filter(|&x| find(&mut parent, x) == x).count()
    }
}

/// Dense, symmetric, nonnegative weighted graph with no zero-degree nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AugGraph {
    node_ids: Vec<usize>,
    adjacency: Array2<f64>,
    degrees: Vec<f64>,
    labels: Option<Vec<usize>>,
    grid: Option<Grid>,
    dropped: usize,
}

impl AugGraph {
    /// Graph from an explicit adjacency; zero-degree nodes are removed and
    /// counted. Node ids are the original row indices.
    pub fn from_adjacency(adjacency: Array2<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        let (r, c) = adjacency.dim();
        if r != c {
            return Err(Error::DimensionMismatch(format!("adjacency is {r} × {c}")));
        }
        if let Some(l) = &labels {
            if l.len() != r {
                return Err(Error::DimensionMismatch(format!("{} labels for {r} nodes", l.len())));
            }
        }
        for ((i, j), v) in adjacency.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i, j));
            }
            if *v < 0.0 {
                return Err(Error::InvalidArgument(format!("negative adjacency entry at ({i}, {j})")));
            }
            if *v != adjacency[[j, i]] {
                return Err(Error::InvalidArgument(format!("adjacency not symmetric at ({i}, {j})")));
            }
        }
        Self::assemble((0..r).collect(), adjacency, labels, None, 0)
    }

    fn assemble(
        node_ids: Vec<usize>,
        adjacency: Array2<f64>,
        labels: Option<Vec<usize>>,
        grid: Option<Grid>,
        already_dropped: usize,
    ) -> Result<Self> {
        let degrees: Vec<f64> = adjacency.rows().into_iter().map(|row| fsum(row.iter().copied())).collect();
        let keep: Vec<usize> = (0..degrees.len()).filter(|&i| degrees[i] > 0.0).collect();
        let dropped = already_dropped + degrees.len() - keep.len();
        if keep.len() == degrees.len() {
            return Ok(AugGraph { node_ids, adjacency, degrees, labels, grid, dropped });
        }
        let adjacency = adjacency.select(ndarray::Axis(0), &keep).select(ndarray::Axis(1), &keep);
        Ok(AugGraph {
            node_ids: keep.iter().map(|&i| node_ids[i]).collect(),
            adjacency,
            degrees: keep.iter().map(|&i| degrees[i]).collect(),
            labels: labels.map(|l| keep.iter().map(|&i| l[i]).collect()),
            grid,
            dropped,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// Grid cell (grid graphs) or source index (other graphs) of each node.
    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    /// Nodes removed for having zero degree.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn d_min(&self) -> f64 {
        self.degrees.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total_mass(&self) -> f64 {
        fsum(self.adjacency.iter().copied())
    }

    /// `D^{-1/2} A D^{-1/2}`.
    pub fn normalized_adjacency(&self) -> Result<Array2<f64>> {
        if let Some(i) = self.degrees.iter().position(|d| !(*d > 0.0)) {
            return Err(Error::ZeroDegree(i));
        }
        let d = &self.degrees;
        Ok(Array2::from_shape_fn(self.adjacency.dim(), |(i, j)| self.adjacency[[i, j]] / (d[i] * d[j]).sqrt()))
    }

    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for (v, w) in self.adjacency.row(u).iter().enumerate() {
                    if *w > 0.0 && !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    /// Induced subgraph on the marked nodes; isolated survivors are dropped.
    pub fn induced(&self, keep: &[bool]) -> Result<AugGraph> {
        if keep.len() != self.node_count() {
            return Err(Error::DimensionMismatch(format!("{} flags for {} nodes", keep.len(), self.node_count())));
        }
        let idx: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
        if idx.is_empty() {
            return Err(Error::EmptySubgraph);
        }
        let adjacency = self.adjacency.select(ndarray::Axis(0), &idx).select(ndarray::Axis(1), &idx);
        let g = AugGraph::assemble(
            idx.iter().map(|&i| self.node_ids[i]).collect(),
            adjacency,
            self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            self.grid,
            0,
        )?;
        if g.is_empty() {
            return Err(Error::EmptySubgraph);
        }
        Ok(g)
    }
}

/// `I - D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian(g: &AugGraph) -> Result<Array2<f64>> {
    let mut l = g.normalized_adjacency()?.mapv(|v| -v);
    for i in 0..g.node_count() {
        l[[i, i]] += 1.0;
    }
    Ok(l)
}

/// Unweighted graph joining every pair of distinct points at distance at
/// most `eps`. Isolated points are dropped; labels come from the cloud.
pub fn threshold_graph(cloud: &LabeledPointCloud, eps: f64) -> Result<AugGraph> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {eps}")));
    }
    let pts = cloud.points();
    let n = pts.len();
    let eps2 = eps * eps;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            pts.iter()
                .map(|q| {
                    let (dx, dy) = (pts[i][0] - q[0], pts[i][1] - q[1]);
                    let d2 = dx * dx + dy * dy;
                    if d2 > 0.0 && d2 <= eps2 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let adjacency = Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect()).expect("n × n");
    AugGraph::assemble((0..n).collect(), adjacency, Some(cloud.labels().to_vec()), None, 0)
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!("{what} must lie in (0, 1], got {p}")));
    }
    Ok(())
}

/// Keep each node independently with probability `ratio`.
pub fn subsample_vertices(g: &AugGraph, ratio: f64, seed: u64) -> Result<AugGraph> {
    check_probability(ratio, "sampling ratio")?;
    if ratio == 1.0 {
        return Ok(g.clone());
    }
    let mut rng = seed::rng(seed);
    let keep: Vec<bool> = (0..g.node_count()).map(|_| rng.random::<f64>() < ratio).collect();
    g.induced(&keep)
}

/// Keep each edge (self-loops included) independently with probability `p`,
/// weights unchanged.
pub fn subsample_edges(g: &AugGraph, p: f64, seed: u64) -> Result<AugGraph> {
    check_probability(p, "edge probability")?;
    if p == 1.0 {
        return Ok(g.clone());
    }
    let mut rng = seed::rng(seed);
    let n = g.node_count();
    let mut a = g.adjacency.clone();
    for i in 0..n {
        for j in i..n {
            if a[[i, j]] > 0.0 && rng.random::<f64>() >= p {
                a[[i, j]] = 0.0;
                a[[j, i]] = 0.0;
            }
        }
    }
    let h = AugGraph::assemble(g.node_ids.clone(), a, g.labels.clone(), g.grid, 0)?;
    if h.is_empty() {
        return Err(Error::EmptySubgraph);
    }
    Ok(h)
}
