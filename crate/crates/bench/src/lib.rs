//! Shared inputs for the criterion benches.

use jtwist_core::lemmas::{random_ratxi, random_words};
use jtwist_core::sphere::MultiIndex;
use jtwist_core::ratxi::RatXi;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn words(count: usize) -> Vec<Vec<u8>> {
    random_words(count, 1)
}

pub fn ratxis(count: usize) -> Vec<RatXi> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..count).map(|_| random_ratxi(&mut rng)).collect()
}

/// Every multi-index on S⁴ of total degree at most `max`.
pub fn moments(max: u32) -> Vec<MultiIndex> {
    jtwist_core::lemmas::multi_indices(5, max)
}
