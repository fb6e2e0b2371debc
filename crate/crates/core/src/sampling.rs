//! Deterministic random streams and index-ordered parallel maps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub type StreamRng = ChaCha12Rng;

/// Independent generator for sample `index` under `seed`; the result does
/// not depend on which thread asks for it or in what order.
pub fn stream_rng(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A vector of i.i.d. standard complex normals (each real part N(0, 1)).
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

/// `f(i, rng_i)` for `i` in `0..count`, evaluated in parallel, returned in
/// index order.
pub fn par_indexed<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}
