//! Seeded random streams.
//!
//! Every run owns one ChaCha8 stream. Replicate `r` of an experiment with
//! master seed `s` uses stream `r` of the generator keyed by `s`, so results
//! never depend on which thread ran which replicate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for replicate `replicate` under `master_seed`.
pub fn replicate_rng(master_seed: u64, replicate: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// Derives a 64-bit seed for replicate `replicate`, for APIs that take a seed.
pub fn replicate_seed(master_seed: u64, replicate: u64) -> u64 {
    replicate_rng(master_seed, replicate).random()
}

/// Uniform on `(0, 1]`.
#[inline]
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Exponential waiting time with the given total rate.
#[inline]
pub(crate) fn exp_wait<T: Real, R: Rng + ?Sized>(rng: &mut R, rate: T) -> T {
    T::of(-open_unit(rng).ln()) / rate
}

/// Index `k` drawn with probability `weights[k] / total`.
#[inline]
pub(crate) fn pick_weighted<T: Real, R: Rng + ?Sized>(rng: &mut R, weights: &[T], total: T) -> usize {
    let mut target = T::of(rng.random::<f64>()) * total;
    let mut last_positive = 0;
    for (k, w) in weights.iter().enumerate() {
        if *w > T::zero() {
            if target < *w {
                return k;
            }
            target = target - *w;
            last_positive = k;
        }
    }
    // Rounding left `target` just above the sum.
    last_positive
}
