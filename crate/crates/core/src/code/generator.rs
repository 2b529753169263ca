//! Deterministic sources of nonzero field coefficients.
//!
//! A generator is identified by a versioned name stored in code descriptors,
//! so a `(generator, seed, attempt)` triple pins every diagonal entry of a
//! code. Output streams must never change for a published name; a changed
//! algorithm gets a new name.

use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::field::{FieldElement, PrimeField};
use crate::registry::{Named, Registry};

pub const DEFAULT_GENERATOR: &str = "chacha20-v1";

pub trait CoefficientGenerator: Named + Send + Sync {
    /// Draws `count` values i.i.d. uniform on `{1, ..., q-1}`.
    fn draw_nonzero(&self, field: PrimeField, seed: u64, attempt: u32, count: usize) -> Vec<FieldElement>;
}

/// Maps raw 64-bit words to `{1, ..., q-1}` by rejection, so the result is
/// exactly uniform.
fn nonzero_from_words(field: PrimeField, count: usize, mut next: impl FnMut() -> u64) -> Vec<FieldElement> {
    let span = field.modulus() - 1;
    if span == 1 {
        return vec![1; count];
    }
    let zone = u64::MAX - (u64::MAX % span);
    (0..count)
        .map(|_| loop {
            let x = next();
            if x < zone {
                break x % span + 1;
            }
        })
        .collect()
}

/// ChaCha20 keyed by the seed, one stream per attempt.
#[derive(Debug, Default, Clone, Copy)]
pub struct ChaCha20V1;

impl Named for ChaCha20V1 {
    fn name(&self) -> &'static str {
        "chacha20-v1"
    }
}

impl CoefficientGenerator for ChaCha20V1 {
    fn draw_nonzero(&self, field: PrimeField, seed: u64, attempt: u32, count: usize) -> Vec<u64> {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(u64::from(attempt));
        nonzero_from_words(field, count, || rng.next_u64())
    }
}

/// Counter-mode SplitMix64 finalizer; cheap and dependency-free.
#[derive(Debug, Default, Clone, Copy)]
pub struct SplitMix64V1;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Named for SplitMix64V1 {
    fn name(&self) -> &'static str {
        "splitmix64-v1"
    }
}

impl CoefficientGenerator for SplitMix64V1 {
    fn draw_nonzero(&self, field: PrimeField, seed: u64, attempt: u32, count: usize) -> Vec<u64> {
        let key = splitmix(seed ^ splitmix(u64::from(attempt).wrapping_add(1)));
        let mut counter = 0u64;
        nonzero_from_words(field, count, || {
            counter += 1;
            splitmix(key.wrapping_add(counter.wrapping_mul(0xD1B5_4A32_D192_ED03)))
        })
    }
}

pub fn default_registry() -> Registry<dyn CoefficientGenerator> {
    let mut reg: Registry<dyn CoefficientGenerator> = Registry::new("coefficient generator");
    reg.register(Arc::new(ChaCha20V1));
    reg.register(Arc::new(SplitMix64V1));
    reg
}
