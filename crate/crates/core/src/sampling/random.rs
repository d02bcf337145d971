//! Seeded uniform sampling.
//!
//! All randomness in the crate comes from ChaCha8 (`rand_chacha`), seeded
//! with `seed_from_u64` and split into independent streams with
//! `set_stream`. The same seed and stream always give the same numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for `stream` of the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Fills `out` with i.i.d. draws from (0, 1).
pub fn fill_open_unit<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out {
        *v = open_unit(rng);
    }
}

/// `n` i.i.d. uniform points in `(0,1)^d`, row-major.
pub fn uniform_random_flat(n: usize, d: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; n * d];
    fill_open_unit(&mut stream_rng(seed, 0), &mut out);
    out
}

/// `n` i.i.d. uniform points in `(0,1)^d`.
pub fn uniform_random(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    if d == 0 {
        return vec![Vec::new(); n];
    }
    uniform_random_flat(n, d, seed).chunks_exact(d).map(|c| c.to_vec()).collect()
}

/// `n` i.i.d. uniform points in the box `[lower, upper]`, row-major.
pub fn uniform_in_box<R: Rng + ?Sized>(rng: &mut R, n: usize, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let d = lower.len();
    let mut out = vec![0.0; n * d];
    for row in out.chunks_exact_mut(d) {
        for ((v, lo), hi) in row.iter_mut().zip(lower).zip(upper) {
            *v = lo + open_unit(rng) * (hi - lo);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        assert_eq!(uniform_random(50, 3, 7), uniform_random(50, 3, 7));
    }

    #[test]
    fn different_seeds_differ() {
        assert_ne!(uniform_random(50, 3, 7), uniform_random(50, 3, 8));
    }

    #[test]
    fn streams_are_independent() {
        let a: Vec<u64> = (0..8).map(|_| stream_rng(1, 0).gen()).collect();
        let mut r = stream_rng(1, 1);
        let b: Vec<u64> = (0..8).map(|_| r.gen()).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn sample_mean_within_clt_tolerance() {
        let n = 100_000;
        let xs = uniform_random_flat(n, 1, 2024);
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn box_samples_stay_inside() {
        let mut rng = stream_rng(3, 0);
        let pts = uniform_in_box(&mut rng, 1000, &[-8.0, 0.0], &[8.0, 0.5]);
        for p in pts.chunks_exact(2) {
            assert!(p[0] > -8.0 && p[0] < 8.0 && p[1] > 0.0 && p[1] < 0.5);
        }
    }
}
