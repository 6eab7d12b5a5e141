//! The factored kernel route and the dense graph route must agree, and both
//! must match an independent eigensolver.

mod common;

use aglab::aug_graph::{normalized_laplacian, AugGraph, DiskAugmentation, GraphBuilder};
use aglab::metrics::{alpha_grid, phi_y, phi_y_kernel};
use aglab::spectral::{eigenvalues, loss_mf, optimal_embedding};
use nalgebra::DMatrix;

fn oracle_eigenvalues(m: &ndarray::Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let mut v: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn builder(cloud: &aglab::distributions::LabeledPointCloud, r: f64, h: f64) -> GraphBuilder {
    let grid = aglab::grid::Grid::covering(cloud.points(), r, h).unwrap();
    GraphBuilder::new(grid, DiskAugmentation::new(r).unwrap())
}

#[test]
fn spectra_agree_across_routes_and_oracle() {
    for (n, r, seed) in [(20, 0.3, 1u64), (40, 0.6, 2), (60, 0.2, 3), (15, 0.9, 4)] {
        let cloud = common::toy_cloud(n, seed);
        let b = builder(&cloud, r, 0.2);
        let kernel = b.kernel(&cloud).unwrap();
        let dense = kernel.to_graph(6000).unwrap();
        let l = normalized_laplacian(&dense).unwrap();
        let ours = eigenvalues(&l).unwrap();
        let factored = kernel.laplacian_spectrum().unwrap();
        let oracle = oracle_eigenvalues(&l);
        assert_eq!(ours.len(), factored.len());
        for ((a, b), c) in ours.iter().zip(&factored).zip(&oracle) {
            assert!((a - b).abs() <= 1e-9, "dense {a} vs factored {b} (n={n}, r={r})");
            assert!((a - c).abs() <= 1e-9, "dense {a} vs oracle {c}");
        }
        assert_eq!(kernel.component_count(), dense.component_count());
    }
}

#[test]
fn embeddings_agree_across_routes() {
    for (n, r, seed) in [(30, 0.4, 5u64), (50, 0.8, 6)] {
        let cloud = common::toy_cloud(n, seed);
        let kernel = builder(&cloud, r, 0.2).kernel(&cloud).unwrap();
        let dense = kernel.to_graph(6000).unwrap();
        let mut gamma = eigenvalues(&dense.normalized_adjacency().unwrap()).unwrap();
        gamma.reverse();
        let separated = |j: usize| gamma[j] - gamma[j + 1] > 1e-6;
        for k in 1..=3 {
            let ef = kernel.optimal_embedding(k).unwrap();
            let ed = optimal_embedding(&dense, k).unwrap();
            let lf = loss_mf(&ef, &dense).unwrap();
            let ld = loss_mf(&ed, &dense).unwrap();
            assert!((lf - ld).abs() <= 1e-10, "{lf} vs {ld}");
            if separated(k - 1) {
                // the top-k subspace is unique, so F Fᵀ is too
                let pf = ef.features.dot(&ef.features.t());
                let pd = ed.features.dot(&ed.features.t());
                let diff = (&pf - &pd).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(diff <= 1e-8, "k={k}: gram diff {diff}");
            }
            if (0..k).all(separated) {
                // simple eigenvalues: both routes fix signs by the dominant entry
                let diff = (&ef.features - &ed.features).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(diff <= 1e-8, "k={k}: feature diff {diff}");
            }
        }
    }
}

#[test]
fn phi_agrees_across_routes_and_respects_twice_alpha() {
    let cloud = common::toy_cloud(40, 9);
    let kernel = builder(&cloud, 0.5, 0.1).kernel(&cloud).unwrap();
    let dense = kernel.to_graph(6000).unwrap();
    let (a, b) = (phi_y(&dense).unwrap(), phi_y_kernel(&kernel));
    assert!((a - b).abs() <= 1e-12);
    assert!(b <= 2.0 * alpha_grid(&kernel) + 1e-6);
}

#[test]
fn random_graph_spectra_match_oracle() {
    let mut rng = common::rng(1234);
    for n in [2, 7, 33, 101] {
        let g: AugGraph = common::random_graph(n, &mut rng);
        let l = normalized_laplacian(&g).unwrap();
        let ours = eigenvalues(&l).unwrap();
        for (a, b) in ours.iter().zip(oracle_eigenvalues(&l)) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}
