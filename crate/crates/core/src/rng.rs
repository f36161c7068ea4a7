//! Counter-based noise streams.
//!
//! Every Gaussian draw is addressed by `(seed, tag, slot, particle, step)`.
//! The seed keys a ChaCha8 generator, `(tag, slot, particle)` selects the
//! stream and the step selects the block offset, so the value of a draw does
//! not depend on which worker produces it or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Words reserved per (stream, step): 2^20 32-bit words, i.e. far more than
/// the `2d` normals a particle needs per step.
const STEP_SHIFT: u32 = 20;
const PARTICLE_BITS: u32 = 48;

#[derive(Clone)]
pub struct NoiseSource {
    base: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator positioned at the start of the block for the given address.
    pub fn stream(&self, tag: u8, slot: u8, particle: usize, step: u64) -> ChaCha8Rng {
        debug_assert!((particle as u64) < (1 << PARTICLE_BITS));
        let mut rng = self.base.clone();
        rng.set_stream(((tag as u64) << 56) | ((slot as u64) << PARTICLE_BITS) | particle as u64);
        rng.set_word_pos((step as u128) << STEP_SHIFT);
        rng
    }

    /// Fills `out` with standard normal draws scaled by `scale`.
    pub fn fill_normals(
        &self,
        tag: u8,
        slot: u8,
        particle: usize,
        step: u64,
        scale: f64,
        out: &mut [f64],
    ) {
        let mut rng = self.stream(tag, slot, particle, step);
        for o in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *o = scale * z;
        }
    }
}

/// SplitMix64 finalizer; derives independent seeds for replicates and tasks.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one-off sampling tasks (initial laws, probes, subsamples).
pub fn task_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, salt))
}
