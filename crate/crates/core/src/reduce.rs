//! Reductions whose result does not depend on the rayon thread count.
//!
//! Inputs are cut into fixed-size chunks, each chunk is summed sequentially,
//! and the chunk partials are combined left to right. The chunking depends
//! only on the input length, so the floating point result is reproducible.

use rayon::prelude::*;

const CHUNK: usize = 4096;

pub fn sum(xs: &[f64]) -> f64 {
    let partials: Vec<f64> = xs
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    partials.iter().sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partials.iter().sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y ← y + s·x`
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut()
        .zip(x.par_iter())
        .for_each(|(yi, xi)| *yi += s * xi);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_of_thread_count() {
        let xs: Vec<f64> = (0..100_000)
            .map(|i| ((i as f64) * 0.37).sin() * 1e3_f64.powi((i % 7) as i32 - 3))
            .collect();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sum(&xs));
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(7)
            .build()
            .unwrap()
            .install(|| sum(&xs));
        assert_eq!(one.to_bits(), many.to_bits());
    }
}
