//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use kmtrade_core::Dataset;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Optimal k-means cost (mean squared distance) by enumerating every
/// partition of the points into at most `k` blocks via restricted growth
/// strings. Only usable for n <= 12.
pub fn brute_force_risk(rows: &[Vec<f64>], k: usize) -> f64 {
    let n = rows.len();
    assert!(n <= 12 && k >= 1);
    let d = rows[0].len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (x, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut cost = 0.0;
        for (x, &l) in rows.iter().zip(&labels) {
            for (j, v) in x.iter().enumerate() {
                let c = sums[l][j] / counts[l] as f64;
                cost += (v - c) * (v - c);
            }
        }
        best = best.min(cost / n as f64);
        if !next_rgs(&mut labels, k) {
            return best;
        }
    }
}

/// Advance a restricted growth string with at most `k` distinct values.
fn next_rgs(a: &mut [usize], k: usize) -> bool {
    for i in (1..a.len()).rev() {
        let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
        if a[i] <= max_prefix && a[i] + 1 < k {
            a[i] += 1;
            for v in &mut a[i + 1..] {
                *v = 0;
            }
            return true;
        }
    }
    false
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() * scale).collect()).collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest distance from the centroid; a support radius that ignores where
/// the data happens to sit.
pub fn centered_radius(data: &Dataset) -> f64 {
    let d = data.dim();
    let mut mean = vec![0.0; d];
    for p in data.points().iter() {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v / data.n() as f64;
        }
    }
    data.points()
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
