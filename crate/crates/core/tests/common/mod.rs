//! Shared helpers for the integration suites: seeded samplers and a
//! silhouette score computed straight from a distance matrix.

use groundmetric::{CostMatrix, Dataset, Histogram};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_histogram(n: usize, rng: &mut ChaCha8Rng) -> Histogram {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    Histogram::normalized(&raw).unwrap()
}

pub fn random_dataset(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Dataset {
    Dataset::new((0..m).map(|_| random_histogram(n, rng)).collect(), None).unwrap()
}

pub fn random_cost(n: usize, rng: &mut ChaCha8Rng) -> CostMatrix {
    CostMatrix::from_fn(n, |_, _| rng.gen_range(0.1..2.0)).unwrap()
}

/// Mean silhouette over all points, computed from a full distance matrix
/// and integer cluster labels.
#[allow(dead_code)]
pub fn silhouette_score(distances: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    assert_eq!(distances.nrows(), n);
    let clusters: Vec<usize> = {
        let mut c = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        let mean_to = |cluster: usize, exclude_self: bool| -> f64 {
            let mut sum = 0.0;
            let mut count = 0usize;
            for j in 0..n {
                if labels[j] != cluster || (exclude_self && j == i) {
                    continue;
                }
                if j == i {
                    continue;
                }
                sum += distances[(i, j)];
                count += 1;
            }
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        };
        let a = mean_to(own, true);
        let b = clusters
            .iter()
            .filter(|&&c| c != own)
            .map(|&c| mean_to(c, false))
            .fold(f64::INFINITY, f64::min);
        let s = if a.max(b) > 0.0 { (b - a) / a.max(b) } else { 0.0 };
        total += s;
    }
    total / n as f64
}
