#![allow(dead_code)]

use aglab::aug_graph::AugGraph;
use aglab::distributions::{sample_gaussian_mixture, GaussianMixtureSpec, LabeledPointCloud};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric nonnegative weights, each pair present with probability
/// `density`, plus a random spanning path so the graph is connected.
pub fn random_connected_adjacency(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            if rng.random::<f64>() < density {
                let w = rng.random::<f64>();
                a[[i, j]] = w;
                a[[j, i]] = w;
            }
        }
    }
    for i in 1..n {
        let w = 0.1 + rng.random::<f64>();
        a[[i - 1, i]] += w;
        a[[i, i - 1]] = a[[i - 1, i]];
    }
    a
}

pub fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> AugGraph {
    let density = rng.random_range(0.02..0.5);
    AugGraph::from_adjacency(random_connected_adjacency(n, density, rng), None).unwrap()
}

/// Block-diagonal graph of `blocks` connected random blocks.
pub fn multi_component_graph(blocks: usize, rng: &mut ChaCha8Rng) -> AugGraph {
    let sizes: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..25)).collect();
    let n: usize = sizes.iter().sum();
    let mut a = Array2::zeros((n, n));
    let mut off = 0;
    for &s in &sizes {
        let block = if s == 1 {
            Array2::from_elem((1, 1), 0.5)
        } else {
            random_connected_adjacency(s, rng.random_range(0.05..0.6), rng)
        };
        a.slice_mut(ndarray::s![off..off + s, off..off + s]).assign(&block);
        off += s;
    }
    AugGraph::from_adjacency(a, None).unwrap()
}

pub fn toy_cloud(n: usize, seed: u64) -> LabeledPointCloud {
    sample_gaussian_mixture(&GaussianMixtureSpec::toy(), n, seed).unwrap()
}

pub fn dense_normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    use rand_distr::{Distribution, StandardNormal};
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}
