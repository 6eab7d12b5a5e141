//! Worked values for the public operations.

mod common;

use aglab::aug_graph::{
    build_graph, kernel_mass, normalized_laplacian, subsample_edges, subsample_vertices, threshold_graph, AugGraph,
    DiskAugmentation, GraphBuilder,
};
use aglab::distributions::{
    discretize_cloud, mix_clouds, mixture_distribution, replication_beta, sample_gaussian_mixture,
    sample_uniform_square, DiscreteDistribution, GaussianMixtureSpec, LabeledPointCloud,
};
use aglab::grid::Grid;
use aglab::metrics::{
    alpha_analytic, alpha_mc, error_bound, fit_probe, majority_vote_error, make_bound_report, node_predictions, phi_y,
    tv_distance, BoundInputs, Labeler, VoteErrors,
};
use aglab::spectral::{
    eigendecompose, eigenvalues, lambda_k_plus_1, loss_mf, optimal_embedding, spectral_gap, zero_multiplicity,
    Embedding,
};
use aglab::Error;
use approx::assert_abs_diff_eq;
use ndarray::{array, Array2};

fn unit_square(cell: f64) -> Grid {
    Grid::new([0.0, 0.0, 1.0, 1.0], cell).unwrap()
}

// ---- distributions ----

#[test]
fn uniform_square_single_point_has_unit_weight() {
    let c = sample_uniform_square(1, 3);
    assert_eq!(c.len(), 1);
    assert_eq!(c.weights(), &[1.0]);
}

#[test]
fn uniform_square_large_sample_stays_in_square() {
    let c = sample_uniform_square(10_000, 9);
    assert!(c.points().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn mixing_with_empty_generated_returns_real_cloud() {
    let real = common::toy_cloud(30, 1);
    let empty = LabeledPointCloud::uniform(vec![], vec![]).unwrap();
    let m = mix_clouds(&real, &empty, 4).unwrap();
    assert_eq!(m.beta, 1.0);
    assert_eq!(m.cloud.points(), real.points());
    for w in m.cloud.weights() {
        assert_abs_diff_eq!(*w, 1.0 / 30.0, epsilon = 1e-15);
    }
    assert!(matches!(mix_clouds(&empty, &empty, 1), Err(Error::EmptyMixture)));
}

#[test]
fn replication_weighting_sets_beta() {
    assert_abs_diff_eq!(replication_beta(50_000, 1_000_000, 10), 1.0 / 3.0, epsilon = 1e-15);
    let real = common::toy_cloud(20, 2);
    let generated = common::toy_cloud(20, 3);
    let m = mix_clouds(&real, &generated, 1).unwrap();
    assert_eq!(m.beta, 0.5);
    let m = mix_clouds(&real, &generated, 3).unwrap();
    let (wr, wg) = (m.cloud.weights()[0], m.cloud.weights()[20]);
    assert_abs_diff_eq!(wr / wg, 3.0, epsilon = 1e-12);
}

#[test]
fn uniform_histogram_cells_concentrate() {
    let c = sample_uniform_square(100_000, 17);
    let d = discretize_cloud(&c, &unit_square(0.1)).unwrap();
    assert_eq!(d.len(), 100);
    for m in d.mass() {
        assert!((m - 0.01).abs() <= 0.005, "cell mass {m}");
    }
}

#[test]
fn histogram_edge_cases() {
    let grid = unit_square(0.25);
    let one = LabeledPointCloud::uniform(vec![[0.3, 0.6]], vec![0]).unwrap();
    let d = discretize_cloud(&one, &grid).unwrap();
    assert_eq!(d.mass()[grid.cell_of([0.3, 0.6]).unwrap()], 1.0);

    let two = LabeledPointCloud::uniform(vec![[0.1, 0.1], [0.2, 0.2]], vec![0, 0]).unwrap();
    let d = discretize_cloud(&two, &grid).unwrap();
    assert_eq!(d.mass()[0], 1.0);

    let outside = LabeledPointCloud::uniform(vec![[1.5, 0.5]], vec![0]).unwrap();
    assert!(matches!(discretize_cloud(&outside, &grid), Err(Error::OutOfDomain { .. })));
}

#[test]
fn mixture_distribution_endpoints_and_convexity() {
    let p = DiscreteDistribution::from_mass(vec![1.0, 0.0]).unwrap();
    let q = DiscreteDistribution::from_mass(vec![0.0, 1.0]).unwrap();
    assert_eq!(mixture_distribution(&p, &q, 1.0).unwrap(), p);
    assert_eq!(mixture_distribution(&p, &q, 0.0).unwrap(), q);
    assert_eq!(mixture_distribution(&p, &q, 0.25).unwrap().mass(), &[0.25, 0.75]);
    let other = DiscreteDistribution::new(vec![3, 4], vec![0.5, 0.5]).unwrap();
    assert!(mixture_distribution(&p, &other, 0.5).is_err());
}

#[test]
fn toy_sampling_is_reproducible() {
    let spec = GaussianMixtureSpec::toy();
    let a = sample_gaussian_mixture(&spec, 500, 77).unwrap();
    let b = sample_gaussian_mixture(&spec, 500, 77).unwrap();
    assert_eq!(a, b);
    assert!(sample_gaussian_mixture(&spec, 0, 77).unwrap().is_empty());
}

// ---- aug_graph ----

#[test]
fn kernel_mass_full_and_empty_cells() {
    let grid = Grid::new([-2.0, -2.0, 2.0, 2.0], 0.1).unwrap();
    let aug = DiskAugmentation::new(1.0).unwrap();
    let inside = grid.cell_of([0.05, 0.05]).unwrap();
    let far = grid.cell_of([1.95, 1.95]).unwrap();
    assert_abs_diff_eq!(
        kernel_mass([0.0, 0.0], &aug, &grid, inside, 8).unwrap(),
        0.01 / std::f64::consts::PI,
        epsilon = 1e-15
    );
    assert_eq!(kernel_mass([0.0, 0.0], &aug, &grid, far, 8).unwrap(), 0.0);
    assert!(kernel_mass([0.0, 0.0], &DiskAugmentation::new(0.0).unwrap(), &grid, inside, 8).is_err());
}

#[test]
fn two_node_laplacian_by_hand() {
    let g = AugGraph::from_adjacency(array![[0.0, 0.5], [0.5, 0.0]], None).unwrap();
    let l = normalized_laplacian(&g).unwrap();
    assert_eq!(l, array![[1.0, -1.0], [-1.0, 1.0]]);
    let v = eigenvalues(&l).unwrap();
    assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-14);
    assert_abs_diff_eq!(v[1], 2.0, epsilon = 1e-14);
}

#[test]
fn self_loop_graph_has_zero_laplacian() {
    let g = AugGraph::from_adjacency(Array2::from_diag(&array![0.2, 0.3, 0.5]), None).unwrap();
    let l = normalized_laplacian(&g).unwrap();
    assert!(l.iter().all(|v| *v == 0.0));
    assert!(eigenvalues(&l).unwrap().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn threshold_graph_distances() {
    let pair = |d: f64| LabeledPointCloud::uniform(vec![[0.0, 0.0], [d, 0.0]], vec![0, 0]).unwrap();
    let g = threshold_graph(&pair(0.04), 0.05).unwrap();
    assert_eq!(g.node_count(), 2);
    assert_eq!(g.adjacency()[[0, 1]], 1.0);
    let g = threshold_graph(&pair(0.06), 0.05).unwrap();
    assert!(g.is_empty());
    assert_eq!(g.dropped(), 2);

    let line = LabeledPointCloud::uniform(vec![[0.0, 0.0], [0.03, 0.0], [0.06, 0.0]], vec![0; 3]).unwrap();
    let g = threshold_graph(&line, 0.05).unwrap();
    let edges = g.adjacency().iter().filter(|v| **v > 0.0).count() / 2;
    assert_eq!(edges, 2);
    assert_eq!(g.adjacency()[[0, 2]], 0.0);
}

#[test]
fn vertex_subsampling_of_complete_graph() {
    let n = 2000;
    let mut a = Array2::from_elem((n, n), 1.0);
    a.diag_mut().fill(0.0);
    let g = AugGraph::from_adjacency(a, None).unwrap();
    assert_eq!(subsample_vertices(&g, 1.0, 5).unwrap(), g);
    let h = subsample_vertices(&g, 0.5, 5).unwrap();
    // binomial(2000, 0.5): sd ≈ 22.4
    assert!((h.node_count() as f64 - 1000.0).abs() <= 3.0 * 22.37, "{}", h.node_count());
    let m = h.node_count();
    assert!(h.degrees().iter().all(|d| *d == (m - 1) as f64), "subgraph of a complete graph is complete");
    assert!(subsample_vertices(&g, 0.0, 5).is_err());
}

#[test]
fn single_edge_survival_rate() {
    let g = AugGraph::from_adjacency(array![[0.0, 0.7], [0.7, 0.0]], None).unwrap();
    assert_eq!(subsample_edges(&g, 1.0, 0).unwrap(), g);
    let mut kept = 0;
    for seed in 0..10_000u64 {
        match subsample_edges(&g, 0.5, seed) {
            Ok(h) => {
                assert_eq!(h.adjacency()[[0, 1]], 0.7);
                kept += 1;
            }
            Err(Error::EmptySubgraph) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!((kept as i64 - 5000).abs() <= 150, "{kept}");
}

#[test]
fn one_point_graph_mass_and_symmetry() {
    let grid = Grid::new([-1.0, -1.0, 1.0, 1.0], 0.05).unwrap();
    let cloud = LabeledPointCloud::uniform(vec![[0.013, -0.021]], vec![0]).unwrap();
    let g = build_graph(&cloud, &DiskAugmentation::new(0.4).unwrap(), &grid).unwrap();
    assert_abs_diff_eq!(g.total_mass(), 1.0, epsilon = 1e-10);
    assert_eq!(g.adjacency(), &g.adjacency().t());
    assert_eq!(g.component_count(), 1);
}

// ---- spectral ----

#[test]
fn connected_graph_has_simple_zero_eigenvalue() {
    let mut rng = common::rng(8);
    let g = common::random_graph(60, &mut rng);
    let v = eigenvalues(&normalized_laplacian(&g).unwrap()).unwrap();
    assert!(v[0].abs() <= 1e-8);
    assert!(v[1] > 1e-8);
}

#[test]
fn lambda_indexing() {
    let spec = [0.0, 0.1, 0.4, 0.9];
    assert_eq!(lambda_k_plus_1(&spec, 2).unwrap(), 0.4);
    assert_eq!(lambda_k_plus_1(&spec, 3).unwrap(), 0.9);
    assert!(matches!(lambda_k_plus_1(&spec, 4), Err(Error::KTooLarge { .. })));
}

#[test]
fn two_component_lambda3_is_positive() {
    let grid = Grid::new([-2.0, -1.0, 2.0, 1.0], 0.05).unwrap();
    let cloud = LabeledPointCloud::uniform(vec![[-1.0, 0.0], [1.0, 0.0]], vec![0, 1]).unwrap();
    let g = build_graph(&cloud, &DiskAugmentation::new(0.3).unwrap(), &grid).unwrap();
    let v = eigenvalues(&normalized_laplacian(&g).unwrap()).unwrap();
    assert_eq!(zero_multiplicity(&v, 1e-8), 2);
    assert!(lambda_k_plus_1(&v, 2).unwrap() > 1e-8);
}

#[test]
fn spectral_gap_values() {
    assert_eq!(spectral_gap(&[0.0, 2.0]).unwrap(), 0.0);
    assert_eq!(spectral_gap(&[0.0, 1.0, 1.0]).unwrap(), 1.0);
    assert!(spectral_gap(&[0.0]).is_err());

    // complete graph on 5 nodes with self-loops of weight s: λ = 0, then (1)·(5/(4+s)) four times
    let (n, s) = (5usize, 2.0);
    let mut a = Array2::from_elem((n, n), 1.0);
    a.diag_mut().fill(s);
    let g = AugGraph::from_adjacency(a, None).unwrap();
    let v = eigenvalues(&normalized_laplacian(&g).unwrap()).unwrap();
    let expected = n as f64 / (n as f64 - 1.0 + s);
    assert_abs_diff_eq!(v[1], expected, epsilon = 1e-12);
    assert!(v[n - 1] < 2.0);
    assert_abs_diff_eq!(spectral_gap(&v).unwrap(), v[1], epsilon = 0.0);
}

#[test]
fn decomposition_residuals() {
    let mut rng = common::rng(21);
    let g = common::random_graph(120, &mut rng);
    let l = normalized_laplacian(&g).unwrap();
    let spec = eigendecompose(&l).unwrap();
    assert!(spec.residual() <= 1e-8, "{}", spec.residual());
    assert!(spec.reconstruction_error(&l) <= 1e-7 * 120.0);
    let v = spec.vectors();
    let gram = v.t().dot(v);
    for ((i, j), x) in gram.indexed_iter() {
        let want = if i == j { 1.0 } else { 0.0 };
        assert!((x - want).abs() <= 1e-8);
    }
}

#[test]
fn equal_components_give_constant_features() {
    let block = array![[0.1, 0.2, 0.0], [0.2, 0.1, 0.3], [0.0, 0.3, 0.2]];
    let mut a = Array2::zeros((6, 6));
    a.slice_mut(ndarray::s![0..3, 0..3]).assign(&block);
    a.slice_mut(ndarray::s![3..6, 3..6]).assign(&block);
    let g = AugGraph::from_adjacency(a, None).unwrap();
    let emb = optimal_embedding(&g, 2).unwrap();
    for base in [0, 3] {
        for x in base + 1..base + 3 {
            for j in 0..2 {
                assert_abs_diff_eq!(emb.features[[x, j]], emb.features[[base, j]], epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn single_node_embedding() {
    let d = 0.8;
    let g = AugGraph::from_adjacency(array![[d]], None).unwrap();
    let emb = optimal_embedding(&g, 1).unwrap();
    // γ = 1 for a lone self-loop
    assert_abs_diff_eq!(emb.features[[0, 0]].abs(), 1.0 / d.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(loss_mf(&emb, &g).unwrap(), 0.0, epsilon = 1e-20);
}

#[test]
fn loss_of_zero_and_full_embeddings() {
    let mut rng = common::rng(4);
    let g = common::random_graph(30, &mut rng);
    let s = g.normalized_adjacency().unwrap();
    let zero = Embedding::new(Array2::zeros((30, 3)), g.degrees().to_vec()).unwrap();
    assert_abs_diff_eq!(loss_mf(&zero, &g).unwrap(), s.iter().map(|v| v * v).sum::<f64>(), epsilon = 1e-12);

    let full = optimal_embedding(&g, 30).unwrap();
    let gamma = eigenvalues(&s).unwrap();
    let clipped: f64 = gamma.iter().filter(|v| **v < 0.0).map(|v| v * v).sum();
    assert_abs_diff_eq!(loss_mf(&full, &g).unwrap(), clipped, epsilon = 1e-10);
    assert!(matches!(optimal_embedding(&g, 31), Err(Error::KTooLarge { .. })));
}

#[test]
fn optimal_embedding_beats_random_embeddings() {
    let mut rng = common::rng(99);
    let g = common::random_graph(40, &mut rng);
    let best = loss_mf(&optimal_embedding(&g, 3).unwrap(), &g).unwrap();
    for _ in 0..100 {
        let emb = Embedding::new(common::dense_normal(40, 3, &mut rng), g.degrees().to_vec()).unwrap();
        assert!(best < loss_mf(&emb, &g).unwrap());
    }
}

// ---- metrics ----

#[test]
fn alpha_tiny_radius_is_zero() {
    let cloud = LabeledPointCloud::uniform(vec![[-0.5, 0.0], [0.7, 1.0]], vec![0, 1]).unwrap();
    let est = alpha_mc(&cloud, 1e-6, &Labeler::toy(), 1000, 3).unwrap();
    assert_eq!(est.estimate, 0.0);
    assert_eq!(alpha_analytic(&cloud, 1e-6).unwrap(), 0.0);
}

#[test]
fn alpha_on_and_near_the_boundary() {
    let r = 0.4;
    for (x, want) in [(0.0, 0.5), (r / 2.0, 0.19550)] {
        let cloud = LabeledPointCloud::uniform(vec![[x, 0.3]], vec![0]).unwrap();
        let exact = alpha_analytic(&cloud, r).unwrap();
        assert_abs_diff_eq!(exact, want, epsilon = 1e-5);
        let est = alpha_mc(&cloud, r, &Labeler::toy(), 100_000, 41).unwrap();
        assert!((est.estimate - exact).abs() <= 3.0 * est.std_error, "{est:?} vs {exact}");
    }
    let cloud = LabeledPointCloud::uniform(vec![[0.5, 0.0]], vec![0]).unwrap();
    assert_eq!(alpha_analytic(&cloud, 0.5).unwrap(), 0.0);
    assert!(alpha_analytic(&cloud, 0.0).is_err());
}

#[test]
fn phi_examples() {
    let g = AugGraph::from_adjacency(array![[0.0, 0.5], [0.5, 0.0]], Some(vec![0, 1])).unwrap();
    assert_eq!(phi_y(&g).unwrap(), 1.0);
    let g = AugGraph::from_adjacency(array![[0.0, 0.5], [0.5, 0.0]], Some(vec![1, 1])).unwrap();
    assert_eq!(phi_y(&g).unwrap(), 0.0);
}

#[test]
fn tv_examples() {
    let p = DiscreteDistribution::from_mass(vec![0.7, 0.3]).unwrap();
    let q = DiscreteDistribution::from_mass(vec![0.5, 0.5]).unwrap();
    assert_abs_diff_eq!(tv_distance(&p, &q).unwrap(), 0.2, epsilon = 1e-15);
    assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
    let a = DiscreteDistribution::from_mass(vec![1.0, 0.0, 0.0]).unwrap();
    let b = DiscreteDistribution::from_mass(vec![0.0, 0.4, 0.6]).unwrap();
    assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
    assert!(matches!(tv_distance(&p, &a), Err(Error::AtomMismatch)));
}

#[test]
fn bound_examples() {
    assert_eq!(error_bound(0.0, 0.7, 1.0, 0.9).unwrap(), 0.0);
    assert_abs_diff_eq!(error_bound(0.05, 0.5, 1.0, 0.42).unwrap(), 1.6, epsilon = 1e-12);
    assert_abs_diff_eq!(error_bound(0.0, 0.5, 0.0, 0.3).unwrap(), 0.6, epsilon = 1e-15);
    let err = error_bound(0.1, 0.0, 1.0, 0.0).unwrap_err();
    assert!(matches!(err, Error::VacuousBound(_)));
    assert!(err.to_string().contains("vacuous bound"));
}

#[test]
fn probe_separates_component_constant_features() {
    let features = array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]];
    let emb = Embedding::new(features, vec![0.25; 4]).unwrap();
    let labels = [0, 0, 1, 1];
    let probe = fit_probe(&emb, &labels, 2).unwrap();
    assert_eq!(node_predictions(&probe, &emb), labels);
    for ((i, j), w) in probe.weights.indexed_iter() {
        assert_abs_diff_eq!(*w, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-6);
    }
}

#[test]
fn probe_on_zero_features_predicts_majority() {
    let emb = Embedding::new(Array2::zeros((5, 2)), vec![0.2; 5]).unwrap();
    let probe = fit_probe(&emb, &[1, 1, 1, 0, 0], 2).unwrap();
    assert_eq!(node_predictions(&probe, &emb), vec![1; 5]);
    // tie goes to the lowest class
    let emb = Embedding::new(Array2::zeros((4, 1)), vec![0.25; 4]).unwrap();
    let probe = fit_probe(&emb, &[1, 0, 1, 0], 2).unwrap();
    assert_eq!(node_predictions(&probe, &emb), vec![0; 4]);
}

#[test]
fn majority_vote_on_constant_prediction() {
    let grid = Grid::new([-1.0, -1.0, 1.0, 1.0], 0.1).unwrap();
    let builder = GraphBuilder::new(grid, DiskAugmentation::new(0.3).unwrap()).with_labeler(Labeler::Constant(0));
    let cloud = LabeledPointCloud::uniform(vec![[0.0, 0.0], [0.2, -0.3]], vec![0, 0]).unwrap();
    let kernel = builder.kernel(&cloud).unwrap();
    let emb = Embedding::new(Array2::zeros((kernel.node_count(), 1)), kernel.degrees().to_vec()).unwrap();
    let probe = fit_probe(&emb, kernel.labels(), 1).unwrap();
    let votes = majority_vote_error(&probe, &emb, kernel.cells(), &cloud, &builder).unwrap();
    assert_eq!(votes, VoteErrors { majority: 0.0, augmented: 0.0 });
}

#[test]
fn bound_report_for_perfect_generation() {
    let inputs = BoundInputs {
        n: 100,
        r: 0.5,
        k: 2,
        seed: 1,
        beta: 0.3,
        tv: 0.0,
        alpha: 0.02,
        alpha_se: 0.001,
        alpha_grid: 0.021,
        lambda_k: 0.01,
        lambda_k1: 0.4,
        phi_y: 0.03,
        votes: VoteErrors { majority: 0.01, augmented: 0.02 },
        probe_norm: 1.0,
    };
    let report = make_bound_report(&inputs).unwrap();
    assert_abs_diff_eq!(report.bound, 8.0 * 0.02 / 0.4 + 16.0 * 0.02, epsilon = 1e-15);
    let with_beta_one = make_bound_report(&BoundInputs { beta: 1.0, ..inputs.clone() }).unwrap();
    assert_eq!(with_beta_one.bound, report.bound);
    assert!(report.empirical_error <= report.capped_bound() + 0.02);
    let vacuous = make_bound_report(&BoundInputs { lambda_k1: 0.0, ..inputs }).unwrap();
    assert!(vacuous.bound.is_infinite() && vacuous.is_vacuous());
}
